//! Python bindings: a thin object wrapper around the analysis toolkit.
//!
//! The extension module exposes the `OuterMap` class (loaded from a JSON
//! map document or from the bundled corpus) with the main analyses:
//! strata, growth classification, iteration, lengths, currents, Nielsen
//! paths and stretch factors.

use std::collections::BTreeSet;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use outer_dynamics::currents::{current_functionals, rational_current};
use outer_dynamics::dynamics::stretch_factor;
use outer_dynamics::formats::{encode_word, parse_word, MapDocument};
use outer_dynamics::lengths::{constants, goodness_lower, lengths, SplittingUnit};
use outer_dynamics::nielsen::{Analysis, Growth, InpKind};
use outer_dynamics::{Circuit, StratumKind};

fn err(e: outer_dynamics::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A marked-graph self-map with its derived analysis.
#[pyclass]
struct OuterMap {
    ids: Vec<String>,
    analysis: Analysis,
}

impl OuterMap {
    fn from_doc(doc: MapDocument) -> PyResult<Self> {
        let ids = doc.edge_ids();
        let analysis = Analysis::new(doc.to_graph_map().map_err(err)?).map_err(err)?;
        Ok(OuterMap { ids, analysis })
    }

    fn circuit(&self, word: &str) -> PyResult<Circuit> {
        let w = parse_word(word, &self.ids).map_err(err)?;
        self.analysis.map().graph().circuit_of_word(&w).map_err(err)
    }
}

#[pymethods]
impl OuterMap {
    /// Loads a JSON map document from a file path.
    #[new]
    fn new(path: &str) -> PyResult<Self> {
        Self::from_doc(MapDocument::load(std::path::Path::new(path)).map_err(err)?)
    }

    /// One of the bundled corpus maps by name (`fib`, `fibc`, `fibs`,
    /// `id`, `pg1`, `fib_inv`).
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        let doc = outer_dynamics::corpus::all_docs()
            .into_iter()
            .find(|(stem, _)| *stem == name)
            .map(|(_, d)| d)
            .ok_or_else(|| PyValueError::new_err(format!("unknown corpus map {name:?}")))?;
        Self::from_doc(doc)
    }

    fn edge_ids(&self) -> Vec<String> {
        self.ids.clone()
    }

    fn rank(&self) -> usize {
        self.analysis.map().graph().rank()
    }

    /// The derived strata: list of dicts with edges, kind, growth rate and
    /// transition matrix.
    fn strata<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let mut out = Vec::new();
        for s in self.analysis.map().strata() {
            let d = PyDict::new(py);
            let names: Vec<&str> = s.edges.iter().map(|&e| self.ids[(e - 1) as usize].as_str()).collect();
            d.set_item("edges", names)?;
            d.set_item(
                "kind",
                match s.kind {
                    StratumKind::Eg => "EG",
                    StratumKind::Neg => "NEG",
                    StratumKind::Zero => "ZERO",
                },
            )?;
            d.set_item("lambda", s.pf.as_ref().map(|pf| pf.lambda))?;
            d.set_item("matrix", s.matrix.clone())?;
            out.push(d);
        }
        Ok(out)
    }

    /// Runs the structural validator; returns `(all_passed, advisories)`.
    fn validate(&self) -> (bool, Vec<String>) {
        let report = self.analysis.validate_structure();
        (report.all_passed(), report.advisories.clone())
    }

    /// Growth class of a conjugacy class: `"exponential"` or `"polynomial"`.
    fn classify(&self, word: &str) -> PyResult<String> {
        Ok(match self.analysis.classify_growth(&self.circuit(word)?) {
            Growth::Exponential => "exponential".to_owned(),
            Growth::Polynomial { .. } => "polynomial".to_owned(),
        })
    }

    /// The reduced `n`-th iterate of a word, re-encoded over the edge ids.
    fn iterate(&self, word: &str, n: usize) -> PyResult<String> {
        let w = parse_word(word, &self.ids).map_err(err)?;
        let img = self.analysis.map().iterate_word(&w, n, None).map_err(err)?;
        Ok(encode_word(&img, &self.ids))
    }

    /// Exponential length of the cyclic word of a class.
    fn exp_length(&self, word: &str) -> PyResult<usize> {
        let c = self.circuit(word)?;
        Ok(lengths(&self.analysis, c.edges(), true, &BTreeSet::new())
            .map_err(err)?
            .ell_exp)
    }

    /// Lower goodness bound of a class, as a float in `[0, 1]`.
    fn goodness(&self, word: &str) -> PyResult<f64> {
        let g = goodness_lower(&self.analysis, &self.circuit(word)?).map_err(err)?;
        Ok(*g.numer() as f64 / (*g.denom() as f64).max(1.0))
    }

    /// The counting current of a class evaluated through its linear
    /// functionals (exact values rendered as strings).
    fn current<'py>(&self, py: Python<'py>, word: &str, window: usize) -> PyResult<Bound<'py, PyDict>> {
        let c = self.circuit(word)?;
        let mu = rational_current(&self.analysis, &c, window).map_err(err)?;
        let f = current_functionals(&self.analysis, &mu, &BTreeSet::new()).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("circuit", encode_word(c.edges(), &self.ids))?;
        d.set_item("norm", f.norm.to_string())?;
        d.set_item("exp_length", f.psi0.to_string())?;
        d.set_item("relative_norm", f.norm_f.to_string())?;
        Ok(d)
    }

    /// The derived constants table.
    fn constants<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let t = constants(&self.analysis).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("K", t.k)?;
        d.set_item("C", t.c)?;
        d.set_item("C_f", t.c_f)?;
        d.set_item("N3K", t.n3k)?;
        Ok(d)
    }

    /// Edge ids of the polynomially growing subgraph.
    fn polynomial_edges(&self) -> Vec<String> {
        self.analysis
            .pg()
            .gpg_edges
            .iter()
            .map(|&e| self.ids[(e - 1) as usize].clone())
            .collect()
    }

    /// The finite fixed-path family, encoded over the edge ids.
    fn path_family(&self) -> Vec<String> {
        self.analysis
            .pg()
            .npg
            .iter()
            .map(|p| encode_word(&p.edges, &self.ids))
            .collect()
    }

    /// The irreducible Nielsen paths found by the search.
    fn inps<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let search = self.analysis.inps();
        let mut out = Vec::new();
        for r in search.eg_inps.iter().chain(&search.neg_inps) {
            let d = PyDict::new(py);
            d.set_item("path", encode_word(&r.path.edges, &self.ids))?;
            d.set_item("height", r.height)?;
            d.set_item(
                "kind",
                match r.kind {
                    InpKind::Eg => "exponential",
                    InpKind::Neg { .. } => "non-exponential",
                },
            )?;
            d.set_item("closed", r.closed)?;
            out.push(d);
        }
        Ok(out)
    }

    /// Growth rate of an expanding edge, estimated from length ratios.
    fn stretch_factor(&self, edge_id: &str) -> PyResult<f64> {
        let idx = self
            .ids
            .iter()
            .position(|x| x == edge_id)
            .ok_or_else(|| PyValueError::new_err(format!("unknown edge id {edge_id:?}")))?;
        let est = stretch_factor(
            &self.analysis,
            &SplittingUnit::Edge((idx + 1) as i32),
            &BTreeSet::new(),
        )
        .map_err(err)?;
        Ok(est.lambda)
    }

    fn __repr__(&self) -> String {
        format!(
            "OuterMap(edges={:?}, strata={})",
            self.ids,
            self.analysis.map().strata().len()
        )
    }
}

/// Names of the bundled corpus maps.
#[pyfunction]
fn corpus_names() -> Vec<String> {
    outer_dynamics::corpus::all_docs()
        .into_iter()
        .map(|(stem, _)| stem.to_owned())
        .collect()
}

#[pymodule]
fn outer_dynamics_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<OuterMap>()?;
    m.add_function(wrap_pyfunction!(corpus_names, m)?)?;
    Ok(())
}
