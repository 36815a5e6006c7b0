//! On-disk map documents and the word codec.
//!
//! A map document is a JSON object with canonical key order and no floats,
//! so serialization round-trips bit-exactly.  Words are encoded over edge
//! ids with a trailing `-` marking inversion (`"ab-a"`); when any id has
//! more than one character, letters are comma-separated (`"e1,e2-"`).

use crate::error::{Error, Result};
use crate::graph::{MarkedGraph, OrientedEdge};
use crate::graph_map::GraphMap;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// One unoriented edge declaration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDecl {
    pub id: String,
    pub from: String,
    pub to: String,
}

/// The JSON document describing a marked graph with a self-map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapDocument {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeDecl>,
    /// Image word of each positive edge, encoded.
    pub images: BTreeMap<String, String>,
    /// Marking loops (words over edge ids), one per free-group generator.
    pub marking: Vec<String>,
    /// Optional stratum order (lists of edge ids, lowest first).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strata: Option<Vec<Vec<String>>>,
    /// Optional subgraph edge list for relative lengths.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_subgraph: Option<Vec<String>>,
    /// Optional free-form annotations (per-edge image splittings etc.).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub annotations: Option<serde_json::Value>,
}

/// Encodes a word of signed edge indices using the given edge ids.
pub fn encode_word(word: &[OrientedEdge], ids: &[String]) -> String {
    let multi = ids.iter().any(|s| s.len() > 1);
    let mut parts = Vec::with_capacity(word.len());
    for &e in word {
        let mut t = ids[(e.unsigned_abs() as usize) - 1].clone();
        if e < 0 {
            t.push('-');
        }
        parts.push(t);
    }
    if multi {
        parts.join(",")
    } else {
        parts.concat()
    }
}

/// Decodes a word string over the given edge ids; empty string is the empty
/// word.
pub fn parse_word(s: &str, ids: &[String]) -> Result<Vec<OrientedEdge>> {
    let index: BTreeMap<&str, i32> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), (i + 1) as i32))
        .collect();
    let mut out = Vec::new();
    if s.is_empty() {
        return Ok(out);
    }
    if s.contains(',') || ids.iter().any(|x| x.len() > 1) {
        for tok in s.split(',') {
            let (name, inv) = match tok.strip_suffix('-') {
                Some(n) => (n, true),
                None => (tok, false),
            };
            let &i = index
                .get(name)
                .ok_or_else(|| Error::structural(format!("unknown edge id '{name}'")))?;
            out.push(if inv { -i } else { i });
        }
    } else {
        let chars: Vec<char> = s.chars().collect();
        let mut k = 0;
        while k < chars.len() {
            let name = chars[k].to_string();
            let &i = index
                .get(name.as_str())
                .ok_or_else(|| Error::structural(format!("unknown edge id '{name}'")))?;
            if k + 1 < chars.len() && chars[k + 1] == '-' {
                out.push(-i);
                k += 2;
            } else {
                out.push(i);
                k += 1;
            }
        }
    }
    Ok(out)
}

impl MapDocument {
    /// Edge ids in declaration order (edge index `i+1` has id `ids[i]`).
    pub fn edge_ids(&self) -> Vec<String> {
        self.edges.iter().map(|e| e.id.clone()).collect()
    }

    /// Builds the graph map (with derived strata) from the document.
    pub fn to_graph_map(&self) -> Result<GraphMap> {
        let vid: BTreeMap<&str, usize> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect();
        let mut endpoints = Vec::new();
        for e in &self.edges {
            let o = *vid
                .get(e.from.as_str())
                .ok_or_else(|| Error::structural(format!("unknown vertex '{}'", e.from)))?;
            let t = *vid
                .get(e.to.as_str())
                .ok_or_else(|| Error::structural(format!("unknown vertex '{}'", e.to)))?;
            endpoints.push((o, t));
        }
        let ids = self.edge_ids();
        {
            let mut sorted = ids.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != ids.len() {
                return Err(Error::structural("duplicate edge id"));
            }
        }
        let marking = self
            .marking
            .iter()
            .map(|w| parse_word(w, &ids))
            .collect::<Result<Vec<_>>>()?;
        let graph = MarkedGraph::new(self.vertices.len(), endpoints, marking, 0)?;
        let mut images = Vec::new();
        for id in &ids {
            let w = self
                .images
                .get(id)
                .ok_or_else(|| Error::structural(format!("missing image for edge '{id}'")))?;
            images.push(parse_word(w, &ids)?);
        }
        // The self-map must fix the graph's vertex-image assignment; derive
        // it from edge images (origin of the image of each direction).
        let mut vertex_map = vec![usize::MAX; self.vertices.len()];
        for (i, img) in images.iter().enumerate() {
            let e = (i + 1) as i32;
            if img.is_empty() {
                return Err(Error::structural(format!(
                    "image of edge '{}' is empty",
                    ids[i]
                )));
            }
            for (v, w) in [
                (graph.origin(e), graph.origin(img[0])),
                (graph.terminus(e), graph.terminus(*img.last().unwrap())),
            ] {
                if vertex_map[v] != usize::MAX && vertex_map[v] != w {
                    return Err(Error::structural(format!(
                        "edge images disagree on the image of vertex '{}'",
                        self.vertices[v]
                    )));
                }
                vertex_map[v] = w;
            }
        }
        if vertex_map.iter().any(|&v| v == usize::MAX) {
            return Err(Error::structural("some vertex has no incident edge image"));
        }
        let strata = match &self.strata {
            None => None,
            Some(user) => {
                let mut out = Vec::new();
                for s in user {
                    let mut edges = Vec::new();
                    for id in s {
                        let i = ids
                            .iter()
                            .position(|x| x == id)
                            .ok_or_else(|| Error::structural(format!("unknown edge id '{id}'")))?;
                        edges.push((i + 1) as u32);
                    }
                    out.push(edges);
                }
                Some(out)
            }
        };
        GraphMap::new(graph, vertex_map, images, strata)
    }

    /// Unoriented edge indices of the optional subgraph list.
    pub fn f_subgraph_edges(&self) -> Result<Vec<u32>> {
        let ids = self.edge_ids();
        let mut out = Vec::new();
        if let Some(list) = &self.f_subgraph {
            for id in list {
                let i = ids
                    .iter()
                    .position(|x| x == id)
                    .ok_or_else(|| Error::structural(format!("unknown edge id '{id}'")))?;
                out.push((i + 1) as u32);
            }
        }
        Ok(out)
    }

    /// Canonical serialization: pretty JSON with struct field order and a
    /// trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Loads a map document and constructs the graph map in one step.
pub fn load_graph_map(path: &Path) -> Result<GraphMap> {
    MapDocument::load(path)?.to_graph_map()
}
