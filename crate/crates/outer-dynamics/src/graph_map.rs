//! Graph self-maps: derivative on directions, turn legality, derived
//! filtration and strata, transition matrices and Perron-Frobenius data.

use crate::error::{Error, Result};
use crate::graph::{invert_word, EdgePath, MarkedGraph, OrientedEdge, Vertex};
use crate::matrix::{self, IntMatrix, PfData};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Stratum kind: exponentially growing, non-exponentially growing, or zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StratumKind {
    Eg,
    Neg,
    Zero,
}

/// A stratum of the derived filtration: an unoriented edge set with its
/// transition matrix and (for irreducible strata) Perron-Frobenius data.
#[derive(Debug, Clone)]
pub struct Stratum {
    /// Unoriented edge ids (1-based), sorted.
    pub edges: Vec<u32>,
    pub kind: StratumKind,
    pub matrix: IntMatrix,
    pub pf: Option<PfData>,
}

/// An unordered pair of directions at a common vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Turn {
    pub d1: OrientedEdge,
    pub d2: OrientedEdge,
}

impl Turn {
    /// Normalized so `d1 <= d2`.
    pub fn new(a: OrientedEdge, b: OrientedEdge) -> Self {
        Turn {
            d1: a.min(b),
            d2: a.max(b),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.d1 == self.d2
    }
}

/// Result of the turn-legality decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TurnLegality {
    Legal,
    /// The first iterate `k >= 1` at which the derivative map degenerates
    /// the turn.
    Illegal { k: usize },
}

/// A homotopy self-equivalence of a marked graph, with the derived maximal
/// filtration cached at construction.
#[derive(Debug, Clone)]
pub struct GraphMap {
    graph: MarkedGraph,
    vertex_map: Vec<Vertex>,
    /// Reduced images of positive edges.
    images: Vec<Vec<OrientedEdge>>,
    strata: Vec<Stratum>,
    /// Stratum index per unoriented edge (0-based edge index).
    stratum_of: Vec<usize>,
}

impl GraphMap {
    /// Builds the map, verifies structural invariants and derives the
    /// maximal filtration.  When `supplied_strata` is given (as ordered
    /// unoriented-edge sets), it is verified against the derived partition
    /// and its order is preferred.
    pub fn new(
        graph: MarkedGraph,
        vertex_map: Vec<Vertex>,
        images: Vec<Vec<OrientedEdge>>,
        supplied_strata: Option<Vec<Vec<u32>>>,
    ) -> Result<Self> {
        if vertex_map.len() != graph.n_vertices() {
            return Err(Error::structural("vertex map has wrong length"));
        }
        if vertex_map.iter().any(|&v| v >= graph.n_vertices()) {
            return Err(Error::structural("vertex map target out of range"));
        }
        if images.len() != graph.n_edges() {
            return Err(Error::structural("one image per unoriented edge required"));
        }
        for (i, img) in images.iter().enumerate() {
            let e = (i + 1) as OrientedEdge;
            graph.check_path(img)?;
            if img.is_empty() {
                return Err(Error::structural(format!("image of edge {e} is empty")));
            }
            if !crate::graph::is_reduced_word(img) {
                return Err(Error::structural(format!("image of edge {e} is not reduced")));
            }
            if graph.origin(img[0]) != vertex_map[graph.origin(e)]
                || graph.terminus(*img.last().unwrap()) != vertex_map[graph.terminus(e)]
            {
                return Err(Error::structural(format!(
                    "image of edge {e} is not compatible with the vertex map"
                )));
            }
        }
        let mut m = GraphMap {
            graph,
            vertex_map,
            images,
            strata: Vec::new(),
            stratum_of: Vec::new(),
        };
        m.derive_filtration(supplied_strata)?;
        Ok(m)
    }

    pub fn graph(&self) -> &MarkedGraph {
        &self.graph
    }

    pub fn vertex_map(&self) -> &[Vertex] {
        &self.vertex_map
    }

    pub fn strata(&self) -> &[Stratum] {
        &self.strata
    }

    /// Stratum index (position in `strata`, lowest first) of an unoriented
    /// edge id.
    pub fn stratum_of_edge(&self, edge: u32) -> usize {
        self.stratum_of[(edge - 1) as usize]
    }

    /// Reduced image of an oriented edge.
    pub fn image_of(&self, e: OrientedEdge) -> Vec<OrientedEdge> {
        let img = &self.images[(e.unsigned_abs() as usize) - 1];
        if e > 0 {
            img.clone()
        } else {
            invert_word(img)
        }
    }

    /// Tightened image of a word of oriented edges.
    pub fn apply_to_word(&self, w: &[OrientedEdge]) -> Vec<OrientedEdge> {
        let mut out: Vec<OrientedEdge> = Vec::with_capacity(w.len() * 2);
        for &e in w {
            let img = &self.images[(e.unsigned_abs() as usize) - 1];
            if e > 0 {
                for &x in img {
                    if out.last() == Some(&-x) {
                        out.pop();
                    } else {
                        out.push(x);
                    }
                }
            } else {
                for &y in img.iter().rev() {
                    let x = -y;
                    if out.last() == Some(&-x) {
                        out.pop();
                    } else {
                        out.push(x);
                    }
                }
            }
        }
        out
    }

    /// `[f^n(w)]`, with an optional length cap; exceeding the cap yields a
    /// `Cap` error reporting the last completed step.
    pub fn iterate_word(&self, w: &[OrientedEdge], n: usize, cap: Option<usize>) -> Result<Vec<OrientedEdge>> {
        let mut cur = w.to_vec();
        for step in 0..n {
            cur = self.apply_to_word(&cur);
            if let Some(c) = cap {
                if cur.len() > c {
                    return Err(Error::cap(format!(
                        "iterate length {} exceeds cap {c} at step {}",
                        cur.len(),
                        step + 1
                    )));
                }
            }
        }
        Ok(cur)
    }

    /// Image of a circuit as a circuit (tighten, then cyclically reduce).
    pub fn apply_to_circuit(&self, c: &crate::graph::Circuit) -> Result<crate::graph::Circuit> {
        let w = self.apply_to_word(c.edges());
        self.graph.cyclic_reduce(&EdgePath::new(w))
    }

    /// First edge of the image of a direction.
    pub fn derivative(&self, d: OrientedEdge) -> OrientedEdge {
        self.image_of(d)[0]
    }

    /// Decides turn legality by iterating the derivative map on the pair;
    /// the orbit is eventually periodic, so this terminates within
    /// `|directions|^2` steps.
    pub fn turn_legality(&self, turn: Turn) -> Result<TurnLegality> {
        if turn.is_degenerate() {
            return Err(Error::domain("degenerate turn has no legality"));
        }
        let bound = (2 * self.graph.n_edges()).pow(2) + 1;
        let mut seen: HashMap<Turn, ()> = HashMap::new();
        let mut cur = turn;
        for k in 1..=bound {
            cur = Turn::new(self.derivative(cur.d1), self.derivative(cur.d2));
            if cur.is_degenerate() {
                return Ok(TurnLegality::Illegal { k });
            }
            if seen.insert(cur, ()).is_some() {
                return Ok(TurnLegality::Legal);
            }
        }
        Ok(TurnLegality::Legal)
    }

    /// All illegal turns, with their degeneration step.
    pub fn illegal_turns(&self) -> Vec<(Turn, usize)> {
        let mut out = Vec::new();
        let dirs: Vec<OrientedEdge> = self.graph.oriented_edges().collect();
        for (i, &a) in dirs.iter().enumerate() {
            for &b in &dirs[i + 1..] {
                if self.graph.origin(a) != self.graph.origin(b) {
                    continue;
                }
                if let Ok(TurnLegality::Illegal { k }) = self.turn_legality(Turn::new(a, b)) {
                    out.push((Turn::new(a, b), k));
                }
            }
        }
        out.sort_by_key(|(t, _)| (t.d1, t.d2));
        out
    }

    /// The turn taken at the juncture between consecutive edges `prev` and
    /// `next` of a reduced path.
    pub fn taken_turn(prev: OrientedEdge, next: OrientedEdge) -> Turn {
        Turn::new(-prev, next)
    }

    /// Transition matrix of a stratum: entry `(a, b)` is the number of
    /// occurrences of `a` and `a⁻¹` in `[f(b)]`, for unoriented stratum
    /// edges `a` (row) and `b` (column).
    pub fn transition_matrix(&self, stratum_idx: usize) -> IntMatrix {
        let edges = &self.strata[stratum_idx].edges;
        self.occurrence_matrix(edges, edges)
    }

    /// Occurrence-count matrix for arbitrary row/column unoriented edge
    /// lists (used for functoriality tests on unions of strata).
    pub fn occurrence_matrix(&self, rows: &[u32], cols: &[u32]) -> IntMatrix {
        rows.iter()
            .map(|&a| {
                cols.iter()
                    .map(|&b| {
                        self.images[(b - 1) as usize]
                            .iter()
                            .filter(|&&e| e.unsigned_abs() == a)
                            .count() as u64
                    })
                    .collect()
            })
            .collect()
    }

    /// Classification of a transition matrix: zero, or (for irreducible
    /// matrices) EG iff the exact-integer entry-sum growth test fires.
    pub fn classify_stratum(matrix: &IntMatrix) -> Result<StratumKind> {
        if matrix::is_zero_matrix(matrix) {
            return Ok(StratumKind::Zero);
        }
        if !matrix::is_irreducible(matrix) {
            return Err(Error::validation(
                "filtration not maximal: nonzero reducible stratum matrix".to_string(),
            ));
        }
        if matrix::grows_exponentially(matrix) {
            Ok(StratumKind::Eg)
        } else {
            Ok(StratumKind::Neg)
        }
    }

    /// Builds the maximal (finest) filtration: arcs `e -> e'` iff `e'` or
    /// its inverse occurs in `[f(e)]`; strata are the strongly connected
    /// components ordered by a topological sort of the condensation with
    /// sinks lowest; ties are broken by minimal edge id.  Singleton
    /// components without a self-arc become zero strata.
    fn derive_filtration(&mut self, supplied: Option<Vec<Vec<u32>>>) -> Result<()> {
        let n = self.graph.n_edges();
        // occurs[b] = set of unoriented edges occurring in [f(b+1)].
        let occurs: Vec<Vec<usize>> = (0..n)
            .map(|b| {
                let mut s: Vec<usize> = self.images[b]
                    .iter()
                    .map(|&e| (e.unsigned_abs() as usize) - 1)
                    .collect();
                s.sort_unstable();
                s.dedup();
                s
            })
            .collect();
        // Tarjan-free SCC via Kosaraju on the small digraph e -> e'.
        let sccs = strongly_connected(n, &occurs);
        // Condensation arcs: scc(e) -> scc(e') for e' in occurs[e], distinct.
        let comp_of: Vec<usize> = {
            let mut c = vec![0usize; n];
            for (ci, comp) in sccs.iter().enumerate() {
                for &e in comp {
                    c[e] = ci;
                }
            }
            c
        };
        // Topological order with sinks (components whose images use no other
        // component) lowest; deterministic tie-break by minimal edge id.
        let ncomp = sccs.len();
        let mut deps: Vec<std::collections::BTreeSet<usize>> = vec![Default::default(); ncomp];
        for e in 0..n {
            for &t in &occurs[e] {
                if comp_of[e] != comp_of[t] {
                    deps[comp_of[e]].insert(comp_of[t]);
                }
            }
        }
        let mut placed = vec![false; ncomp];
        let mut order: Vec<usize> = Vec::new();
        while order.len() < ncomp {
            let mut candidates: Vec<usize> = (0..ncomp)
                .filter(|&c| !placed[c] && deps[c].iter().all(|&d| placed[d]))
                .collect();
            candidates.sort_by_key(|&c| sccs[c].iter().min().copied().unwrap());
            let c = *candidates
                .first()
                .ok_or_else(|| Error::structural("cyclic condensation (impossible)"))?;
            placed[c] = true;
            order.push(c);
        }
        let derived: Vec<Vec<u32>> = order
            .iter()
            .map(|&c| {
                let mut edges: Vec<u32> = sccs[c].iter().map(|&e| (e + 1) as u32).collect();
                edges.sort_unstable();
                edges
            })
            .collect();
        let chosen = match supplied {
            None => derived,
            Some(user) => {
                let mut a: Vec<Vec<u32>> = user.clone();
                let mut b = derived.clone();
                a.sort();
                b.sort();
                if a != b {
                    return Err(Error::validation(
                        "supplied strata do not match the maximal filtration partition",
                    ));
                }
                user
            }
        };
        // Assign and verify f-invariance of the (possibly user-ordered)
        // filtration: the image of every edge of stratum <= r stays in G_r.
        let mut stratum_of = vec![usize::MAX; n];
        for (si, s) in chosen.iter().enumerate() {
            for &e in s {
                stratum_of[(e - 1) as usize] = si;
            }
        }
        for e in 0..n {
            for &t in &occurs[e] {
                if stratum_of[t] > stratum_of[e] {
                    return Err(Error::validation(format!(
                        "filtration is not f-invariant: image of edge {} uses higher edge {}",
                        e + 1,
                        t + 1
                    )));
                }
            }
        }
        self.stratum_of = stratum_of;
        self.strata = chosen
            .iter()
            .enumerate()
            .map(|(si, edges)| {
                let m: IntMatrix = edges
                    .iter()
                    .map(|&a| {
                        edges
                            .iter()
                            .map(|&b| {
                                self.images[(b - 1) as usize]
                                    .iter()
                                    .filter(|&&x| x.unsigned_abs() == a)
                                    .count() as u64
                            })
                            .collect()
                    })
                    .collect();
                let kind = if matrix::is_zero_matrix(&m) {
                    StratumKind::Zero
                } else if matrix::grows_exponentially(&m) {
                    StratumKind::Eg
                } else {
                    StratumKind::Neg
                };
                let pf = if kind == StratumKind::Zero {
                    None
                } else {
                    matrix::pf_data(&m).ok()
                };
                let _ = si;
                Stratum {
                    edges: edges.clone(),
                    kind,
                    matrix: m,
                    pf,
                }
            })
            .collect();
        Ok(())
    }

    /// Unoriented edges belonging to EG strata.
    pub fn eg_edges(&self) -> Vec<u32> {
        self.strata
            .iter()
            .filter(|s| s.kind == StratumKind::Eg)
            .flat_map(|s| s.edges.iter().copied())
            .collect()
    }

    /// Unoriented edges belonging to zero strata.
    pub fn zero_edges(&self) -> Vec<u32> {
        self.strata
            .iter()
            .filter(|s| s.kind == StratumKind::Zero)
            .flat_map(|s| s.edges.iter().copied())
            .collect()
    }
}

/// Kosaraju strongly connected components on a small digraph given by
/// adjacency lists; components returned as sorted vertex lists.
fn strongly_connected(n: usize, adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    #[allow(clippy::needless_range_loop)]
    for s in 0..n {
        if seen[s] {
            continue;
        }
        // Iterative post-order DFS.
        let mut stack: Vec<(usize, usize)> = vec![(s, 0)];
        seen[s] = true;
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            if *i < adj[v].len() {
                let w = adj[v][*i];
                *i += 1;
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
                stack.pop();
            }
        }
    }
    let mut radj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (v, outs) in adj.iter().enumerate() {
        for &w in outs {
            radj[w].push(v);
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut ncomp = 0usize;
    for &s in order.iter().rev() {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut stack = vec![s];
        comp[s] = ncomp;
        while let Some(v) = stack.pop() {
            for &w in &radj[v] {
                if comp[w] == usize::MAX {
                    comp[w] = ncomp;
                    stack.push(w);
                }
            }
        }
        ncomp += 1;
    }
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); ncomp];
    for v in 0..n {
        out[comp[v]].push(v);
    }
    for c in out.iter_mut() {
        c.sort_unstable();
    }
    out
}
