//! Marked graphs, oriented edges, reduced edge paths and circuits.
//!
//! Oriented edges are encoded as nonzero signed integers `±id` with
//! `id ∈ 1..=n_edges`, so that edge inversion is integer negation.  An edge
//! path is a sequence of composable oriented edges; a circuit is a
//! cyclically reduced cyclic edge path stored in a canonical rotation.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// An oriented edge: nonzero signed integer, inversion is negation.
pub type OrientedEdge = i32;

/// A vertex id.
pub type Vertex = usize;

/// Inverts a word of oriented edges.
pub fn invert_word(w: &[OrientedEdge]) -> Vec<OrientedEdge> {
    w.iter().rev().map(|&e| -e).collect()
}

/// Free reduction of a word of oriented edges (cancellation of adjacent
/// inverse pairs).  Graph-independent; composability is checked separately.
pub fn reduce_word(w: &[OrientedEdge]) -> Vec<OrientedEdge> {
    let mut out: Vec<OrientedEdge> = Vec::with_capacity(w.len());
    for &e in w {
        if let Some(&last) = out.last() {
            if last == -e {
                out.pop();
                continue;
            }
        }
        out.push(e);
    }
    out
}

/// True if the word has no adjacent inverse pair.
pub fn is_reduced_word(w: &[OrientedEdge]) -> bool {
    w.windows(2).all(|p| p[0] != -p[1])
}

/// True if the word is cyclically reduced (reduced, and the last edge is not
/// the inverse of the first).
pub fn is_cyclically_reduced(w: &[OrientedEdge]) -> bool {
    is_reduced_word(w) && (w.len() < 2 || *w.last().unwrap() != -w[0])
}

/// A finite connected marked graph with edge involution.
///
/// The marking is a list of reduced edge loops, one per free-basis
/// generator, all based at `base`; it identifies the fundamental group of
/// the graph with the free group on the marking letters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedGraph {
    n_vertices: usize,
    /// `endpoints[i]` is `(origin, terminus)` of positive edge `i + 1`.
    endpoints: Vec<(Vertex, Vertex)>,
    marking: Vec<Vec<OrientedEdge>>,
    base: Vertex,
}

impl MarkedGraph {
    /// Builds a marked graph, checking all structural invariants.
    pub fn new(
        n_vertices: usize,
        endpoints: Vec<(Vertex, Vertex)>,
        marking: Vec<Vec<OrientedEdge>>,
        base: Vertex,
    ) -> Result<Self> {
        if n_vertices == 0 {
            return Err(Error::structural("graph needs at least one vertex"));
        }
        for &(o, t) in &endpoints {
            if o >= n_vertices || t >= n_vertices {
                return Err(Error::structural("edge endpoint out of range"));
            }
        }
        if base >= n_vertices {
            return Err(Error::structural("basepoint out of range"));
        }
        let g = MarkedGraph {
            n_vertices,
            endpoints,
            marking,
            base,
        };
        if !g.is_connected() {
            return Err(Error::structural("graph is not connected"));
        }
        let rank = g.rank();
        if g.marking.len() != rank {
            return Err(Error::structural(format!(
                "marking has {} loops but the graph has rank {rank}",
                g.marking.len()
            )));
        }
        for loop_word in &g.marking {
            g.check_path(loop_word)?;
            if loop_word.is_empty() || !is_reduced_word(loop_word) {
                return Err(Error::structural("marking loop must be nonempty and reduced"));
            }
            if g.origin(loop_word[0]) != g.base || g.terminus(*loop_word.last().unwrap()) != g.base
            {
                return Err(Error::structural("marking loop must be based at the basepoint"));
            }
        }
        Ok(g)
    }

    /// The rose with `rank` petals and the identity marking.
    pub fn rose(rank: usize) -> Self {
        let endpoints = vec![(0, 0); rank];
        let marking = (1..=rank as i32).map(|i| vec![i]).collect();
        MarkedGraph::new(1, endpoints, marking, 0).expect("rose is always valid")
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    /// Number of unoriented edges.
    pub fn n_edges(&self) -> usize {
        self.endpoints.len()
    }

    /// Rank of the fundamental group: `|edges| - |vertices| + 1`.
    pub fn rank(&self) -> usize {
        self.n_edges() + 1 - self.n_vertices
    }

    pub fn base(&self) -> Vertex {
        self.base
    }

    pub fn marking(&self) -> &[Vec<OrientedEdge>] {
        &self.marking
    }

    /// Origin vertex of an oriented edge.
    pub fn origin(&self, e: OrientedEdge) -> Vertex {
        let (o, t) = self.endpoints[(e.unsigned_abs() as usize) - 1];
        if e > 0 {
            o
        } else {
            t
        }
    }

    /// Terminus vertex of an oriented edge; `t(e) = o(e⁻¹)`.
    pub fn terminus(&self, e: OrientedEdge) -> Vertex {
        self.origin(-e)
    }

    /// All oriented edges: `1..=n`, then `-1..=-n`.
    pub fn oriented_edges(&self) -> impl Iterator<Item = OrientedEdge> + '_ {
        let n = self.n_edges() as i32;
        (1..=n).chain((1..=n).map(|e| -e))
    }

    /// Directions (oriented edges) with origin `v`.
    pub fn directions_at(&self, v: Vertex) -> Vec<OrientedEdge> {
        self.oriented_edges().filter(|&e| self.origin(e) == v).collect()
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n_vertices];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(o, t) in &self.endpoints {
                for (x, y) in [(o, t), (t, o)] {
                    if x == v && !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Checks that a word of oriented edges is a composable path in this graph.
    pub fn check_path(&self, w: &[OrientedEdge]) -> Result<()> {
        let n = self.n_edges() as i32;
        for &e in w {
            if e == 0 || e.abs() > n {
                return Err(Error::structural(format!("oriented edge {e} out of range")));
            }
        }
        for p in w.windows(2) {
            if self.terminus(p[0]) != self.origin(p[1]) {
                return Err(Error::structural(format!(
                    "edges {} and {} are not composable",
                    p[0], p[1]
                )));
            }
        }
        Ok(())
    }

    /// The unique reduced path homotopic (rel endpoints) to `path`.
    /// Idempotent and length-nonincreasing.
    pub fn tighten(&self, path: &EdgePath) -> Result<EdgePath> {
        self.check_path(&path.edges)?;
        Ok(EdgePath {
            edges: reduce_word(&path.edges),
        })
    }

    /// Cyclic reduction of a closed path: removes matched prefix/suffix
    /// inverse pairs from the tightened path and canonicalizes the rotation.
    pub fn cyclic_reduce(&self, path: &EdgePath) -> Result<Circuit> {
        let tight = self.tighten(path)?;
        let w = &tight.edges;
        if w.is_empty() {
            return Err(Error::domain("not a loop: empty path has no circuit"));
        }
        if self.origin(w[0]) != self.terminus(*w.last().unwrap()) {
            return Err(Error::domain("not a loop"));
        }
        let mut lo = 0usize;
        let mut hi = w.len();
        while hi - lo >= 2 && w[lo] == -w[hi - 1] {
            lo += 1;
            hi -= 1;
        }
        let core = &w[lo..hi];
        if core.is_empty() {
            return Err(Error::domain("trivial loop carries no circuit"));
        }
        Ok(Circuit::canonical(core.to_vec()))
    }

    /// The circuit representing the conjugacy class of a cyclically reduced
    /// word in the marking basis (letters are `±generator-index`).
    pub fn circuit_of_word(&self, word: &[i32]) -> Result<Circuit> {
        if word.is_empty() {
            return Err(Error::domain("trivial conjugacy class carries no circuit"));
        }
        let rank = self.rank() as i32;
        let mut edges: Vec<OrientedEdge> = Vec::new();
        for &letter in word {
            if letter == 0 || letter.abs() > rank {
                return Err(Error::structural(format!("basis letter {letter} out of range")));
            }
            let idx = (letter.unsigned_abs() as usize) - 1;
            if letter > 0 {
                edges.extend_from_slice(&self.marking[idx]);
            } else {
                edges.extend(invert_word(&self.marking[idx]));
            }
        }
        self.cyclic_reduce(&EdgePath { edges })
    }
}

/// A finite edge path.  The empty path is allowed (it carries its basepoint
/// implicitly through the context in which it is used).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub struct EdgePath {
    pub edges: Vec<OrientedEdge>,
}

impl EdgePath {
    pub fn new(edges: Vec<OrientedEdge>) -> Self {
        EdgePath { edges }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_reduced(&self) -> bool {
        is_reduced_word(&self.edges)
    }

    pub fn inverse(&self) -> EdgePath {
        EdgePath {
            edges: invert_word(&self.edges),
        }
    }
}

impl From<Vec<OrientedEdge>> for EdgePath {
    fn from(edges: Vec<OrientedEdge>) -> Self {
        EdgePath { edges }
    }
}

/// A cyclically reduced cyclic edge path in canonical rotation.
///
/// The canonical representative is the lexicographic minimum over all
/// rotations of the edge sequence and of its inverse, so equal circuits
/// compare equal bitwise and `Circuit` is usable as a map key.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Circuit {
    edges: Vec<OrientedEdge>,
}

impl Circuit {
    /// Canonicalizes a nonempty cyclically reduced word.
    ///
    /// Panics if the word is empty; cyclic reducedness is the caller's
    /// responsibility (use [`MarkedGraph::cyclic_reduce`] for raw input).
    pub fn canonical(word: Vec<OrientedEdge>) -> Self {
        assert!(!word.is_empty(), "empty circuit is forbidden");
        let fwd = rotated(&word, least_rotation(&word));
        let inv = invert_word(&word);
        let bwd = rotated(&inv, least_rotation(&inv));
        Circuit {
            edges: fwd.min(bwd),
        }
    }

    pub fn edges(&self) -> &[OrientedEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    #[allow(clippy::len_without_is_empty)]
    /// Circuits are never empty.
    pub fn as_path(&self) -> EdgePath {
        EdgePath {
            edges: self.edges.clone(),
        }
    }

    /// The root-free core and multiplicity: writes the cyclic word as
    /// `root^k` with `root` primitive and returns `(root, k)`.
    pub fn root_power(&self) -> (Circuit, usize) {
        let w = &self.edges;
        let n = w.len();
        for p in 1..=n {
            if n % p != 0 {
                continue;
            }
            if (p..n).all(|i| w[i] == w[i - p]) {
                return (Circuit::canonical(w[..p].to_vec()), n / p);
            }
        }
        unreachable!("period n always divides")
    }
}
