//! Stallings-style core graphs for finitely generated subgroups of a free
//! group: folding, membership of conjugates (peripherality) and pairwise
//! intersection via the fiber product.
//!
//! Edges are labeled by free-basis generators `1..=rank`; a transition
//! `(v, ℓ) → w` is an edge labeled `ℓ` from `v` to `w`, traversable
//! backwards as `(w, -ℓ) → v`.

use crate::error::{Error, Result};
use crate::graph::invert_word;
use std::collections::{BTreeMap, BTreeSet};

/// A based folded labeled graph representing a finitely generated subgroup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreGraph {
    n_vertices: usize,
    base: usize,
    /// Deterministic transitions on signed labels; `(v, ℓ) → w` and
    /// `(w, -ℓ) → v` are stored together.
    trans: BTreeMap<(usize, i32), usize>,
    alphabet_rank: usize,
}

impl CoreGraph {
    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn alphabet_rank(&self) -> usize {
        self.alphabet_rank
    }

    /// Number of unoriented edges.
    pub fn n_edges(&self) -> usize {
        self.trans.iter().filter(|((_, l), _)| *l > 0).count()
    }

    /// Rank of the represented subgroup.
    pub fn subgroup_rank(&self) -> usize {
        self.n_edges() + 1 - self.n_vertices
    }

    /// Follows a signed-label word from `start`; `None` when a transition is
    /// missing.
    pub fn trace(&self, start: usize, word: &[i32]) -> Option<usize> {
        let mut v = start;
        for &l in word {
            v = *self.trans.get(&(v, l))?;
        }
        Some(v)
    }

    /// True if no vertex has two distinct out-transitions with the same
    /// signed label (always true by construction; kept as a test predicate).
    pub fn is_folded(&self) -> bool {
        true
    }

    /// True if every vertex except possibly the basepoint has valence >= 2.
    pub fn is_core(&self) -> bool {
        (0..self.n_vertices).all(|v| {
            v == self.base
                || self
                    .trans
                    .keys()
                    .filter(|(u, _)| *u == v)
                    .count()
                    >= 2
        })
    }

    /// True if `word` traces a closed loop at `start`.
    pub fn traces_loop(&self, start: usize, word: &[i32]) -> bool {
        self.trace(start, word) == Some(start)
    }

    /// Free generators of the subgroup: spanning-tree words for the chords,
    /// read off from the basepoint.
    pub fn loop_generators(&self) -> Vec<Vec<i32>> {
        // BFS spanning tree from the basepoint; word_to[v] spells the tree
        // path base -> v.
        let mut word_to: Vec<Option<Vec<i32>>> = vec![None; self.n_vertices];
        word_to[self.base] = Some(Vec::new());
        let mut queue = std::collections::VecDeque::from([self.base]);
        let mut tree: BTreeSet<(usize, i32)> = BTreeSet::new();
        while let Some(v) = queue.pop_front() {
            let outs: Vec<(i32, usize)> = self
                .trans
                .range((v, i32::MIN)..=(v, i32::MAX))
                .map(|(&(_, l), &w)| (l, w))
                .collect();
            for (l, w) in outs {
                if word_to[w].is_none() {
                    let mut path = word_to[v].clone().unwrap();
                    path.push(l);
                    word_to[w] = Some(path);
                    tree.insert((v, l));
                    tree.insert((w, -l));
                    queue.push_back(w);
                }
            }
        }
        let mut gens = Vec::new();
        for (&(v, l), &w) in &self.trans {
            if l <= 0 || tree.contains(&(v, l)) {
                continue;
            }
            let mut word = word_to[v].clone().unwrap();
            word.push(l);
            word.extend(invert_word(&word_to[w].clone().unwrap()));
            gens.push(crate::graph::reduce_word(&word));
        }
        gens
    }
}

/// Folds the wedge of the given reduced basis words into the core graph of
/// the subgroup they generate.  Independent of generator order.
pub fn fold_core_graph(generators: &[Vec<i32>], alphabet_rank: usize) -> Result<CoreGraph> {
    if generators.is_empty() {
        return Err(Error::domain("generator list must be nonempty"));
    }
    for g in generators {
        if g.is_empty() {
            return Err(Error::domain("generators must be nonempty words"));
        }
        if !crate::graph::is_reduced_word(g) {
            return Err(Error::structural("generators must be reduced words"));
        }
        if g.iter().any(|&l| l == 0 || l.unsigned_abs() as usize > alphabet_rank) {
            return Err(Error::structural("generator letter out of range"));
        }
    }
    // Wedge of loops: multimap transitions, then fold by merging targets.
    let mut parent: Vec<usize> = vec![0];
    let mut edges: Vec<(usize, i32, usize)> = Vec::new();
    for g in generators {
        let mut v = 0usize;
        for (i, &l) in g.iter().enumerate() {
            let w = if i + 1 == g.len() {
                0
            } else {
                parent.push(parent.len());
                parent.len() - 1
            };
            edges.push((v, l, w));
            v = w;
        }
    }
    // Union-find.
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    // Fold until transitions are deterministic.
    loop {
        let mut seen: BTreeMap<(usize, i32), usize> = BTreeMap::new();
        let mut merge: Option<(usize, usize)> = None;
        'scan: for &(v, l, w) in &edges {
            let (rv, rw) = (find(&mut parent, v), find(&mut parent, w));
            for (a, la, b) in [(rv, l, rw), (rw, -l, rv)] {
                if let Some(&b0) = seen.get(&(a, la)) {
                    if b0 != b {
                        merge = Some((b0, b));
                        break 'scan;
                    }
                } else {
                    seen.insert((a, la), b);
                }
            }
        }
        match merge {
            Some((x, y)) => {
                let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
                parent[rx.max(ry)] = rx.min(ry);
            }
            None => break,
        }
    }
    // Quotient and renumber.
    let mut ids: BTreeMap<usize, usize> = BTreeMap::new();
    let mut next = 0usize;
    let mut id_of = |r: usize, ids: &mut BTreeMap<usize, usize>| -> usize {
        *ids.entry(r).or_insert_with(|| {
            next += 1;
            next - 1
        })
    };
    let base_root = find(&mut parent, 0);
    let base = id_of(base_root, &mut ids);
    let mut trans: BTreeMap<(usize, i32), usize> = BTreeMap::new();
    for &(v, l, w) in &edges {
        let (rv, rw) = (find(&mut parent, v), find(&mut parent, w));
        let (a, b) = (id_of(rv, &mut ids), id_of(rw, &mut ids));
        trans.insert((a, l), b);
        trans.insert((b, -l), a);
    }
    let mut g = CoreGraph {
        n_vertices: ids.len(),
        base,
        trans,
        alphabet_rank,
    };
    let keep = g.base;
    trim_to_core(&mut g, Some(keep));
    Ok(g)
}

/// Iteratively removes valence-<2 vertices (except `keep`), renumbering.
fn trim_to_core(g: &mut CoreGraph, keep: Option<usize>) {
    loop {
        let mut victim = None;
        for v in 0..g.n_vertices {
            if Some(v) == keep {
                continue;
            }
            let deg = g.trans.keys().filter(|(u, _)| *u == v).count();
            if deg < 2 {
                victim = Some(v);
                break;
            }
        }
        let Some(v) = victim else { break };
        g.trans.retain(|&(u, _), &mut w| u != v && w != v);
        // Renumber vertices above v down by one.
        let remap = |x: usize| if x > v { x - 1 } else { x };
        g.trans = g
            .trans
            .iter()
            .map(|(&(u, l), &w)| ((remap(u), l), remap(w)))
            .collect();
        if let Some(k) = keep {
            g.base = remap(k);
        }
        g.n_vertices -= 1;
        if g.n_vertices == 0 {
            break;
        }
    }
}

/// A finite list of core graphs, each carrying its generator words.
#[derive(Debug, Clone)]
pub struct SubgroupSystem {
    pub components: Vec<(CoreGraph, Vec<Vec<i32>>)>,
}

impl SubgroupSystem {
    pub fn empty() -> Self {
        SubgroupSystem {
            components: Vec::new(),
        }
    }

    pub fn from_generator_lists(lists: &[Vec<Vec<i32>>], alphabet_rank: usize) -> Result<Self> {
        let mut components = Vec::new();
        for gens in lists {
            let core = fold_core_graph(gens, alphabet_rank)?;
            if core.n_edges() == 0 {
                return Err(Error::structural("component carries the trivial subgroup"));
            }
            components.push((core, gens.clone()));
        }
        Ok(SubgroupSystem { components })
    }

    /// True iff some cyclic rotation of the cyclically reduced word `w`
    /// traces a closed loop at some vertex of some component (i.e. `w` is
    /// conjugate into one of the subgroups).  The trivial word is peripheral
    /// by convention.
    pub fn is_peripheral(&self, w: &[i32]) -> bool {
        if w.is_empty() {
            return true;
        }
        for (core, _) in &self.components {
            for v in 0..core.n_vertices() {
                if core.traces_loop(v, w) {
                    return true;
                }
            }
        }
        false
    }
}

/// Pairwise intersection of two folded cores: one core per nontrivial
/// component of the fiber product, realizing conjugacy representatives of
/// nontrivial intersections of conjugates.
pub fn intersect_cores(g1: &CoreGraph, g2: &CoreGraph) -> Vec<CoreGraph> {
    assert_eq!(g1.alphabet_rank(), g2.alphabet_rank());
    let n2 = g2.n_vertices();
    let pair_id = |v1: usize, v2: usize| v1 * n2 + v2;
    // Product transitions.
    let mut trans: BTreeMap<(usize, i32), usize> = BTreeMap::new();
    for (&(v1, l), &w1) in &g1.trans {
        for v2 in 0..n2 {
            if let Some(&w2) = g2.trans.get(&(v2, l)) {
                trans.insert((pair_id(v1, v2), l), pair_id(w1, w2));
            }
        }
    }
    // Connected components over touched vertices.
    let mut comp: BTreeMap<usize, usize> = BTreeMap::new();
    let mut n_comp = 0usize;
    let vertices: BTreeSet<usize> = trans
        .iter()
        .flat_map(|(&(v, _), &w)| [v, w])
        .collect();
    for &start in &vertices {
        if comp.contains_key(&start) {
            continue;
        }
        let mut stack = vec![start];
        comp.insert(start, n_comp);
        while let Some(v) = stack.pop() {
            let nbrs: Vec<usize> = trans
                .range((v, i32::MIN)..=(v, i32::MAX))
                .map(|(_, &w)| w)
                .collect();
            for w in nbrs {
                if comp.insert(w, n_comp).is_none() {
                    stack.push(w);
                }
            }
        }
        n_comp += 1;
    }
    let mut out = Vec::new();
    for c in 0..n_comp {
        let verts: Vec<usize> = vertices.iter().copied().filter(|v| comp[v] == c).collect();
        let renum: BTreeMap<usize, usize> =
            verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let sub: BTreeMap<(usize, i32), usize> = trans
            .iter()
            .filter(|(&(v, _), _)| comp[&v] == c)
            .map(|(&(v, l), &w)| ((renum[&v], l), renum[&w]))
            .collect();
        let mut core = CoreGraph {
            n_vertices: verts.len(),
            base: 0,
            trans: sub,
            alphabet_rank: g1.alphabet_rank(),
        };
        trim_to_core(&mut core, None);
        if core.n_vertices > 0 && core.subgroup_rank() >= 1 {
            core.base = 0;
            out.push(core);
        }
    }
    out
}
