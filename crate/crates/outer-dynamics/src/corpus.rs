//! The bundled example maps, as document builders.
//!
//! All examples are roses (one vertex), so edge ids double as free-group
//! generators:
//!
//! * `fib`: `a ↦ ab`, `b ↦ a` — one exponential stratum, λ the golden
//!   ratio;
//! * `fibc`: `fib` extended by a fixed edge `c ↦ c`;
//! * `fibs`: `fib` extended by `c ↦ ca` (superlinear suffix);
//! * `id`: the identity on a rank-2 rose;
//! * `pg1`: `a ↦ a`, `b ↦ ba` — polynomial growth only, rejected by
//!   subcommands that require exponential growth;
//! * `fib_inv`: `a ↦ b`, `b ↦ b⁻¹a` — an inverse representative for `fib`.

use crate::error::Result;
use crate::formats::{EdgeDecl, MapDocument};
use crate::graph_map::GraphMap;
use std::collections::BTreeMap;
use std::path::Path;

fn rose_doc(ids: &[&str], images: &[&str]) -> MapDocument {
    MapDocument {
        vertices: vec!["v0".to_string()],
        edges: ids
            .iter()
            .map(|&id| EdgeDecl {
                id: id.to_string(),
                from: "v0".to_string(),
                to: "v0".to_string(),
            })
            .collect(),
        images: ids
            .iter()
            .zip(images)
            .map(|(&id, &w)| (id.to_string(), w.to_string()))
            .collect::<BTreeMap<_, _>>(),
        marking: ids.iter().map(|&id| id.to_string()).collect(),
        strata: None,
        f_subgraph: None,
        annotations: None,
    }
}

pub fn fib_doc() -> MapDocument {
    rose_doc(&["a", "b"], &["ab", "a"])
}

pub fn fibc_doc() -> MapDocument {
    rose_doc(&["a", "b", "c"], &["ab", "a", "c"])
}

pub fn fibs_doc() -> MapDocument {
    rose_doc(&["a", "b", "c"], &["ab", "a", "ca"])
}

pub fn id_doc() -> MapDocument {
    rose_doc(&["a", "b"], &["a", "b"])
}

pub fn pg1_doc() -> MapDocument {
    rose_doc(&["a", "b"], &["a", "ba"])
}

pub fn fib_inv_doc() -> MapDocument {
    rose_doc(&["a", "b"], &["b", "b-a"])
}

/// All bundled documents with their file stems.
pub fn all_docs() -> Vec<(&'static str, MapDocument)> {
    vec![
        ("fib", fib_doc()),
        ("fibc", fibc_doc()),
        ("fibs", fibs_doc()),
        ("id", id_doc()),
        ("pg1", pg1_doc()),
        ("fib_inv", fib_inv_doc()),
    ]
}

pub fn fib() -> GraphMap {
    fib_doc().to_graph_map().expect("bundled map is valid")
}

pub fn fibc() -> GraphMap {
    fibc_doc().to_graph_map().expect("bundled map is valid")
}

pub fn fibs() -> GraphMap {
    fibs_doc().to_graph_map().expect("bundled map is valid")
}

pub fn identity2() -> GraphMap {
    id_doc().to_graph_map().expect("bundled map is valid")
}

pub fn pg1() -> GraphMap {
    pg1_doc().to_graph_map().expect("bundled map is valid")
}

pub fn fib_inv() -> GraphMap {
    fib_inv_doc().to_graph_map().expect("bundled map is valid")
}

/// All bundled maps with their names.
pub fn all_maps() -> Vec<(&'static str, GraphMap)> {
    all_docs()
        .into_iter()
        .map(|(n, d)| (n, d.to_graph_map().expect("bundled map is valid")))
        .collect()
}

/// Writes every bundled document to `dir` as `<stem>.json`.
pub fn write_corpus(dir: &Path) -> Result<()> {
    for (stem, doc) in all_docs() {
        doc.save(&dir.join(format!("{stem}.json")))?;
    }
    Ok(())
}
