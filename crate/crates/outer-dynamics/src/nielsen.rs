//! Nielsen path search, classification of non-exponential edges, the
//! polynomially growing subgraph and its finite path family, the quotient
//! graph with its projection, and growth classification of circuits.

use crate::cores::SubgroupSystem;
use crate::error::Result;
use crate::graph::{invert_word, EdgePath, OrientedEdge};
use crate::graph_map::{GraphMap, StratumKind, Turn, TurnLegality};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

/// Longest common prefix of two words.
fn lcp(a: &[i32], b: &[i32]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// Canonical orientation of an unoriented path: lexicographic minimum of the
/// word and its inverse.
fn path_canonical(w: &[i32]) -> Vec<i32> {
    let inv = invert_word(w);
    if inv < w.to_vec() {
        inv
    } else {
        w.to_vec()
    }
}

/// Primitive root of a nonempty word under linear (not cyclic) repetition:
/// the shortest prefix `r` with `w = r^k`.
pub(crate) fn primitive_root(w: &[i32]) -> (Vec<i32>, usize) {
    let n = w.len();
    for p in 1..=n {
        if n % p == 0 && (p..n).all(|i| w[i] == w[i - p]) {
            return (w[..p].to_vec(), n / p);
        }
    }
    unreachable!("period n always divides")
}

/// Kind of an irreducible Nielsen path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InpKind {
    /// Top edges grow exponentially; the path crosses exactly one illegal
    /// turn of its height.
    Eg,
    /// Shape `e · w^s · e⁻¹` for a linear edge `e` with Nielsen suffix
    /// word `w`.
    Neg {
        edge: u32,
        word: Vec<OrientedEdge>,
        exponent: i64,
    },
}

/// An irreducible Nielsen path, stored in canonical orientation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InpRecord {
    pub path: EdgePath,
    /// Stratum index (lowest first) of the highest edge crossed.
    pub height: usize,
    pub kind: InpKind,
    pub closed: bool,
    /// True when the image reverses the orientation of the path
    /// (`[f(ρ)] = ρ⁻¹`); the path is fixed as an unoriented path either way.
    pub reversed: bool,
}

impl InpRecord {
    /// True if the path decomposes as `c·d·c` with `c` and `d` nontrivial.
    pub fn has_cdc_decomposition(&self) -> bool {
        let w = &self.path.edges;
        let n = w.len();
        (1..n)
            .filter(|&c| 2 * c < n)
            .any(|c| w[..c] == w[n - c..])
    }

    /// Number of illegal turns taken in the interior of the path.
    pub fn illegal_turn_count(&self, map: &GraphMap) -> usize {
        self.path
            .edges
            .windows(2)
            .filter(|p| {
                matches!(
                    map.turn_legality(GraphMap::taken_turn(p[0], p[1])),
                    Ok(TurnLegality::Illegal { .. })
                )
            })
            .count()
    }
}

/// Outcome of the Nielsen path search.
#[derive(Debug, Clone)]
pub struct InpSearch {
    pub eg_inps: Vec<InpRecord>,
    pub neg_inps: Vec<InpRecord>,
    /// Unoriented edges fixed pointwise by the map.
    pub nielsen_edges: Vec<u32>,
    /// Candidates left undecided when a cap or budget ran out.
    pub undecided: Vec<String>,
    /// The search is exhaustive for paths up to this length.
    pub exhaustive_up_to: usize,
}

/// Maximum half length of the exhaustive anchored enumeration.
const BRUTE_HALF_CAP: usize = 4;
/// Node budget of the refinement search per illegal turn and mode.
const REFINE_BUDGET: usize = 20_000;

/// Searches for irreducible Nielsen paths.
///
/// Every such path of exponential height crosses an illegal turn, so the
/// search is anchored at illegal turns and runs two engines per turn: an
/// exhaustive enumeration of anchored paths with half length up to
/// [`BRUTE_HALF_CAP`], and a fixed-point refinement that grows the two
/// halves `α, β` so that `[f(α)]` and `[f(β)]` cancel along a common prefix
/// and reproduce the halves (in either order, allowing orientation-reversed
/// fixed paths) up to half length `cap`.  Non-exponential Nielsen paths
/// `e·w^s·e⁻¹` are assembled from linear edges separately; pointwise fixed
/// edges are reported on their own.
pub fn find_inps(map: &GraphMap, cap: usize) -> InpSearch {
    let mut found: BTreeMap<Vec<i32>, InpRecord> = BTreeMap::new();
    let mut undecided = Vec::new();
    for (turn, _) in map.illegal_turns() {
        for rho in brute_anchored(map, turn.d1, turn.d2) {
            record_eg(map, &rho, &mut found);
        }
        for mode in [Mode::Id, Mode::Swap] {
            let (paths, ran_out) = refine_anchored(map, turn.d1, turn.d2, mode, cap);
            for rho in paths {
                record_eg(map, &rho, &mut found);
            }
            if ran_out {
                undecided.push(format!(
                    "refinement at turn ({}, {}) exhausted its budget",
                    turn.d1, turn.d2
                ));
            }
        }
    }
    // Irreducibility filter: a fixed path that concatenates shorter fixed
    // paths (e.g. the square of a closed one) is not irreducible.
    let mut kept: Vec<(Vec<i32>, InpRecord)> = Vec::new();
    let mut by_len: Vec<(Vec<i32>, InpRecord)> = found.into_iter().collect();
    by_len.sort_by_key(|(w, _)| w.len());
    for (w, rec) in by_len {
        let mut words = Vec::new();
        for (k, _) in &kept {
            if k.len() < w.len() {
                words.push(k.clone());
                words.push(invert_word(k));
            }
        }
        let empty = BTreeSet::new();
        let grammar = TokenGrammar {
            single_edges: &empty,
            words,
            families: &[],
        };
        if grammar.parse(&w).is_none() {
            kept.push((w, rec));
        }
    }
    kept.sort_by(|(a, _), (b, _)| a.cmp(b));
    let found: BTreeMap<Vec<i32>, InpRecord> = kept.into_iter().collect();
    let mut nielsen_edges = Vec::new();
    let mut neg_inps = Vec::new();
    for (e, class) in classify_neg_edges(map) {
        match class {
            NegClass::Fixed => nielsen_edges.push(e),
            NegClass::Linear { suffix } => {
                let mut path = vec![e as i32];
                path.extend_from_slice(&suffix);
                path.push(-(e as i32));
                neg_inps.push(InpRecord {
                    path: EdgePath::new(path_canonical(&path)),
                    height: map.stratum_of_edge(e),
                    kind: InpKind::Neg {
                        edge: e,
                        word: suffix,
                        exponent: 1,
                    },
                    closed: true,
                    reversed: false,
                });
            }
            NegClass::Superlinear => {}
        }
    }
    InpSearch {
        eg_inps: found.into_values().collect(),
        neg_inps,
        nielsen_edges,
        undecided,
        exhaustive_up_to: 2 * BRUTE_HALF_CAP,
    }
}

/// Verifies a candidate and inserts it as an EG record keyed by canonical
/// word.  Candidates whose highest stratum is not exponential are dropped
/// (they are covered by the non-exponential machinery).
fn record_eg(map: &GraphMap, rho: &[i32], found: &mut BTreeMap<Vec<i32>, InpRecord>) {
    let image = map.apply_to_word(rho);
    let reversed = if image == rho {
        false
    } else if image == invert_word(rho) {
        true
    } else {
        return;
    };
    let height = rho
        .iter()
        .map(|&e| map.stratum_of_edge(e.unsigned_abs()))
        .max()
        .unwrap();
    if map.strata()[height].kind != StratumKind::Eg {
        return;
    }
    let canon = path_canonical(rho);
    let closed = map.graph().origin(canon[0]) == map.graph().terminus(*canon.last().unwrap());
    found.entry(canon.clone()).or_insert(InpRecord {
        path: EdgePath::new(canon),
        height,
        kind: InpKind::Eg,
        closed,
        reversed,
    });
}

/// Exhaustive enumeration of fixed paths `α⁻¹β` with `α, β` reduced halves
/// starting with the two turn directions, half length ≤ [`BRUTE_HALF_CAP`].
fn brute_anchored(map: &GraphMap, d1: OrientedEdge, d2: OrientedEdge) -> Vec<Vec<i32>> {
    let halves = |d: OrientedEdge| -> Vec<Vec<i32>> {
        let mut out = vec![vec![d]];
        let mut frontier = vec![vec![d]];
        for _ in 1..BRUTE_HALF_CAP {
            let mut next = Vec::new();
            for w in &frontier {
                let last = *w.last().unwrap();
                for e in map.graph().directions_at(map.graph().terminus(last)) {
                    if e == -last {
                        continue;
                    }
                    let mut ext = w.clone();
                    ext.push(e);
                    next.push(ext);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    };
    let alphas = halves(d1);
    let betas = halves(d2);
    let mut out = Vec::new();
    for a in &alphas {
        let ia = invert_word(a);
        for b in &betas {
            let mut rho = ia.clone();
            rho.extend_from_slice(b);
            let image = map.apply_to_word(&rho);
            if image == rho || image == invert_word(&rho) {
                out.push(rho);
            }
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Id,
    Swap,
}

/// Is one word a prefix of the other?
fn prefix_comparable(a: &[i32], b: &[i32]) -> bool {
    let k = a.len().min(b.len());
    a[..k] == b[..k]
}

/// Fixed-point refinement anchored at one illegal turn.  Grows halves
/// `(α, β)` toward the system `[f(α)] = τ·X`, `[f(β)] = τ·Y` with
/// `(X, Y) = (α, β)` (orientation-preserving) or `(β, α)` (reversing) and
/// `τ` the nonempty common prefix cancelled at the turn.  Extensions that
/// are forced by the target are taken deterministically; when the image is
/// too short the half is extended by every edge that keeps it reduced and
/// legal.  Returns verified paths and whether the budget or cap was hit
/// while candidates were still consistent.
fn refine_anchored(
    map: &GraphMap,
    d1: OrientedEdge,
    d2: OrientedEdge,
    mode: Mode,
    cap: usize,
) -> (Vec<Vec<i32>>, bool) {
    let mut out = Vec::new();
    let mut ran_out = false;
    let mut stack: Vec<(Vec<i32>, Vec<i32>)> = vec![(vec![d1], vec![d2])];
    let mut budget = REFINE_BUDGET;
    while let Some((alpha, beta)) = stack.pop() {
        if budget == 0 {
            ran_out = true;
            break;
        }
        budget -= 1;
        let a_img = map.apply_to_word(&alpha);
        let b_img = map.apply_to_word(&beta);
        let t = lcp(&a_img, &b_img);
        if t == 0 {
            continue;
        }
        let a_rest = &a_img[t..];
        let b_rest = &b_img[t..];
        let (x, y) = match mode {
            Mode::Id => (&alpha, &beta),
            Mode::Swap => (&beta, &alpha),
        };
        if !prefix_comparable(a_rest, x) || !prefix_comparable(b_rest, y) {
            continue;
        }
        if a_rest == x.as_slice() && b_rest == y.as_slice() {
            let mut rho = invert_word(&alpha);
            rho.extend_from_slice(&beta);
            let image = map.apply_to_word(&rho);
            if image == rho || image == invert_word(&rho) {
                out.push(rho);
            }
            continue;
        }
        if alpha.len() + beta.len() >= cap {
            ran_out = true;
            continue;
        }
        // Deterministic extensions: a half shorter than the matching image
        // remainder is forced letter by letter.
        let forced = if x.len() < a_rest.len() {
            Some((mode == Mode::Swap, a_rest[x.len()]))
        } else if y.len() < b_rest.len() {
            Some((mode == Mode::Id, b_rest[y.len()]))
        } else {
            None
        };
        if let Some((extend_beta, letter)) = forced {
            let half = if extend_beta { &beta } else { &alpha };
            if let Some(ext) = try_extend(map, half, Some(letter)) {
                if extend_beta {
                    stack.push((alpha.clone(), ext));
                } else {
                    stack.push((ext, beta.clone()));
                }
            }
            continue;
        }
        // Otherwise some image is too short; branch over legal extensions of
        // the corresponding half.
        let extend_beta = match mode {
            // `a_img` comes from α; in swap mode its target is β.
            Mode::Id => a_rest.len() >= x.len() && b_rest.len() < y.len(),
            Mode::Swap => a_rest.len() < x.len(),
        };
        let half = if extend_beta { &beta } else { &alpha };
        let last = *half.last().unwrap();
        for e in map.graph().directions_at(map.graph().terminus(last)) {
            if e == -last {
                continue;
            }
            if matches!(
                map.turn_legality(Turn::new(-last, e)),
                Ok(TurnLegality::Illegal { .. })
            ) {
                continue;
            }
            let mut ext = half.clone();
            ext.push(e);
            if extend_beta {
                stack.push((alpha.clone(), ext));
            } else {
                stack.push((ext, beta.clone()));
            }
        }
    }
    (out, ran_out)
}

/// Extends a half by one specific letter, checking reducedness and legality.
fn try_extend(map: &GraphMap, half: &[i32], letter: Option<i32>) -> Option<Vec<i32>> {
    let last = *half.last().unwrap();
    let e = letter?;
    if e == -last || map.graph().origin(e) != map.graph().terminus(last) {
        return None;
    }
    if matches!(
        map.turn_legality(Turn::new(-last, e)),
        Ok(TurnLegality::Illegal { .. })
    ) {
        return None;
    }
    let mut ext = half.to_vec();
    ext.push(e);
    Some(ext)
}

/// Growth class of a non-exponential edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NegClass {
    /// `f(e) = e`.
    Fixed,
    /// `f(e) = e·w` with `w` a closed path fixed by the map.
    Linear { suffix: Vec<OrientedEdge> },
    /// Everything else.
    Superlinear,
}

/// Classifies every edge of a non-exponential stratum.
pub fn classify_neg_edges(map: &GraphMap) -> BTreeMap<u32, NegClass> {
    let mut out = BTreeMap::new();
    for s in map.strata() {
        if s.kind != StratumKind::Neg {
            continue;
        }
        for &e in &s.edges {
            let img = map.image_of(e as i32);
            let class = if img == [e as i32] {
                NegClass::Fixed
            } else if img.first() == Some(&(e as i32)) {
                let u = img[1..].to_vec();
                let closed = map.graph().origin(u[0]) == map.graph().terminus(*u.last().unwrap());
                if closed && map.apply_to_word(&u) == u {
                    NegClass::Linear { suffix: u }
                } else {
                    NegClass::Superlinear
                }
            } else {
                NegClass::Superlinear
            };
            out.insert(e, class);
        }
    }
    out
}

/// Variable-exponent path family `a · r^p · b⁻¹` (`p ≥ 0`), generated by
/// pairs of linear edges whose suffixes are powers of a common closed word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerFamily {
    pub front: OrientedEdge,
    pub root: Vec<OrientedEdge>,
    pub back: OrientedEdge,
}

/// All power families of the map, in both orientations.
pub(crate) fn power_families(neg: &BTreeMap<u32, NegClass>) -> Vec<PowerFamily> {
    let linear: Vec<(u32, Vec<i32>)> = neg
        .iter()
        .filter_map(|(&e, c)| match c {
            NegClass::Linear { suffix } => Some((e, primitive_root(suffix).0)),
            _ => None,
        })
        .collect();
    let mut out = Vec::new();
    for (e1, r1) in &linear {
        for (e2, r2) in &linear {
            if r1 == r2 {
                out.push(PowerFamily {
                    front: *e1 as i32,
                    root: r1.clone(),
                    back: *e2 as i32,
                });
                out.push(PowerFamily {
                    front: *e2 as i32,
                    root: invert_word(r1),
                    back: *e1 as i32,
                });
            }
        }
    }
    out.dedup();
    out
}

/// Token grammar used both by the polynomial-subgraph closure and by the
/// growth classifier: single edges from a set, fixed words, and
/// variable-exponent power families.
pub(crate) struct TokenGrammar<'a> {
    pub(crate) single_edges: &'a BTreeSet<u32>,
    pub(crate) words: Vec<Vec<i32>>,
    pub(crate) families: &'a [PowerFamily],
}

impl TokenGrammar<'_> {
    /// All end positions (with the consumed chunk) of a token starting at
    /// `i` in `w`.
    pub(crate) fn matches_at(&self, w: &[i32], i: usize) -> Vec<(usize, Vec<i32>)> {
        let mut out = Vec::new();
        if self.single_edges.contains(&w[i].unsigned_abs()) {
            out.push((i + 1, vec![w[i]]));
        }
        for tok in &self.words {
            if w.len() - i >= tok.len() && w[i..i + tok.len()] == *tok {
                out.push((i + tok.len(), tok.clone()));
            }
        }
        for fam in self.families {
            if w[i] != fam.front {
                continue;
            }
            let rl = fam.root.len();
            let mut q = 0usize;
            loop {
                let pos = i + 1 + q * rl;
                if pos < w.len() && w[pos] == -fam.back {
                    out.push((pos + 1, w[i..=pos].to_vec()));
                }
                if pos + rl <= w.len() && w[pos..pos + rl] == fam.root {
                    q += 1;
                } else {
                    break;
                }
            }
        }
        out
    }

    /// Backtracking tokenization of a linear word; `None` when no complete
    /// decomposition exists.
    pub(crate) fn parse(&self, w: &[i32]) -> Option<Vec<Vec<i32>>> {
        let mut failed = vec![false; w.len() + 1];
        let mut chunks = Vec::new();
        if self.parse_from(w, 0, &mut failed, &mut chunks) {
            Some(chunks)
        } else {
            None
        }
    }

    fn parse_from(
        &self,
        w: &[i32],
        i: usize,
        failed: &mut [bool],
        chunks: &mut Vec<Vec<i32>>,
    ) -> bool {
        if i == w.len() {
            return true;
        }
        if failed[i] {
            return false;
        }
        for (j, chunk) in self.matches_at(w, i) {
            chunks.push(chunk);
            if self.parse_from(w, j, failed, chunks) {
                return true;
            }
            chunks.pop();
        }
        failed[i] = true;
        false
    }
}

/// Computes the polynomially growing edge set as a fixed point: an edge
/// belongs when it is pointwise fixed, or when `f(e) = e·u` and `u`
/// decomposes into edges already in the set, Nielsen paths, and
/// variable-exponent families of linear edges.
pub fn compute_gpg(map: &GraphMap, inps: &InpSearch) -> BTreeSet<u32> {
    let neg = classify_neg_edges(map);
    let families = power_families(&neg);
    let mut words: Vec<Vec<i32>> = Vec::new();
    for r in &inps.eg_inps {
        words.push(r.path.edges.clone());
        words.push(invert_word(&r.path.edges));
    }
    let mut s: BTreeSet<u32> = BTreeSet::new();
    loop {
        let mut changed = false;
        for (&e, class) in &neg {
            if s.contains(&e) {
                continue;
            }
            let ok = match class {
                NegClass::Fixed => true,
                _ => {
                    let img = map.image_of(e as i32);
                    if img.first() == Some(&(e as i32)) {
                        let grammar = TokenGrammar {
                            single_edges: &s,
                            words: words.clone(),
                            families: &families,
                        };
                        grammar.parse(&img[1..]).is_some()
                    } else {
                        false
                    }
                }
            };
            if ok {
                s.insert(e);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    s
}

/// Enumerates the finite family: every exponential-height Nielsen path plus
/// every composable concatenation of nonclosed ones with strictly
/// increasing heights.  Paths are stored in canonical orientation, deduped;
/// the companion constant is the maximal length over the family.
pub fn enumerate_npg(map: &GraphMap, inps: &InpSearch) -> (Vec<EdgePath>, usize) {
    let mut family: BTreeSet<Vec<i32>> = BTreeSet::new();
    for r in &inps.eg_inps {
        family.insert(r.path.edges.clone());
    }
    // Oriented copies of nonclosed paths for concatenation.
    let nonclosed: Vec<(Vec<i32>, usize)> = inps
        .eg_inps
        .iter()
        .filter(|r| !r.closed)
        .flat_map(|r| {
            [
                (r.path.edges.clone(), r.height),
                (invert_word(&r.path.edges), r.height),
            ]
        })
        .collect();
    // Grow concatenations with strictly increasing heights.
    let mut frontier: Vec<(Vec<i32>, usize)> = nonclosed.clone();
    loop {
        let mut next = Vec::new();
        for (w, h) in &frontier {
            for (p, hp) in &nonclosed {
                if hp <= h {
                    continue;
                }
                let end = map.graph().terminus(*w.last().unwrap());
                if map.graph().origin(p[0]) != end || p[0] == -*w.last().unwrap() {
                    continue;
                }
                let mut cat = w.clone();
                cat.extend_from_slice(p);
                if family.insert(path_canonical(&cat)) {
                    next.push((cat, *hp));
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    let k = family.iter().map(|w| w.len()).max().unwrap_or(0);
    (family.into_iter().map(EdgePath::new).collect(), k)
}

/// One edge of the quotient graph, carrying its projection to the base
/// graph.
#[derive(Debug, Clone)]
pub struct GStarEdge {
    /// Endpoints as indices into [`GStar::vertices`].
    pub ends: (usize, usize),
    pub projection: EdgePath,
}

/// The quotient graph: one edge per polynomially growing edge and one per
/// exponential-height Nielsen path, with the projection to base-graph
/// paths.
#[derive(Debug, Clone)]
pub struct GStar {
    /// Base-graph vertex carried by each quotient vertex.
    pub vertices: Vec<usize>,
    pub edges: Vec<GStarEdge>,
}

impl GStar {
    /// True if the projection sends reduced quotient paths to reduced
    /// base-graph paths: at every shared vertex, distinct incident edge
    /// projections do not cancel.
    pub fn projection_is_reduced(&self) -> bool {
        let mut incoming: Vec<Vec<Vec<i32>>> = vec![Vec::new(); self.vertices.len()];
        for e in &self.edges {
            // Direction words arriving at each endpoint, inverted so they
            // read outward from the vertex.
            incoming[e.ends.0].push(e.projection.edges.clone());
            incoming[e.ends.1].push(invert_word(&e.projection.edges));
        }
        for dirs in &incoming {
            for (i, a) in dirs.iter().enumerate() {
                for b in dirs.iter().skip(i + 1) {
                    if a[0] == b[0] {
                        // Two distinct quotient directions with the same
                        // initial base edge would let a reduced quotient
                        // path project to a cancelling pair.
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Builds the quotient graph and the subgroup system spanned by its
/// noncontractible components.  The subgroup system is expressed over the
/// oriented-edge alphabet of the base graph, so peripherality queries take
/// circuits directly.
pub fn build_gstar(
    map: &GraphMap,
    gpg: &BTreeSet<u32>,
    inps: &InpSearch,
) -> Result<(GStar, SubgroupSystem)> {
    let g = map.graph();
    let mut vertices: Vec<usize> = Vec::new();
    let vid = |v: usize, vertices: &mut Vec<usize>| -> usize {
        if let Some(i) = vertices.iter().position(|&x| x == v) {
            i
        } else {
            vertices.push(v);
            vertices.len() - 1
        }
    };
    let mut edges = Vec::new();
    for &e in gpg {
        let o = vid(g.origin(e as i32), &mut vertices);
        let t = vid(g.terminus(e as i32), &mut vertices);
        edges.push(GStarEdge {
            ends: (o, t),
            projection: EdgePath::new(vec![e as i32]),
        });
    }
    for r in &inps.eg_inps {
        let w = &r.path.edges;
        let o = vid(g.origin(w[0]), &mut vertices);
        let t = vid(g.terminus(*w.last().unwrap()), &mut vertices);
        edges.push(GStarEdge {
            ends: (o, t),
            projection: r.path.clone(),
        });
    }
    let gstar = GStar { vertices, edges };
    // Connected components.
    let nv = gstar.vertices.len();
    let mut comp = vec![usize::MAX; nv];
    let mut ncomp = 0usize;
    for s in 0..nv {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut stack = vec![s];
        comp[s] = ncomp;
        while let Some(v) = stack.pop() {
            for e in &gstar.edges {
                for (a, b) in [(e.ends.0, e.ends.1), (e.ends.1, e.ends.0)] {
                    if a == v && comp[b] == usize::MAX {
                        comp[b] = ncomp;
                        stack.push(b);
                    }
                }
            }
        }
        ncomp += 1;
    }
    // Per component: spanning tree, then chord loops projected to the base
    // graph give free generators of the component's fundamental group.
    let mut lists: Vec<Vec<Vec<i32>>> = Vec::new();
    for c in 0..ncomp {
        let root = (0..nv).find(|&v| comp[v] == c).unwrap();
        let mut word_to: Vec<Option<Vec<i32>>> = vec![None; nv];
        word_to[root] = Some(Vec::new());
        let mut in_tree = vec![false; gstar.edges.len()];
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for (ei, e) in gstar.edges.iter().enumerate() {
                for (a, b, w) in [
                    (e.ends.0, e.ends.1, e.projection.edges.clone()),
                    (e.ends.1, e.ends.0, invert_word(&e.projection.edges)),
                ] {
                    if a == v && word_to[b].is_none() {
                        let mut path = word_to[v].clone().unwrap();
                        path.extend_from_slice(&w);
                        word_to[b] = Some(crate::graph::reduce_word(&path));
                        in_tree[ei] = true;
                        queue.push_back(b);
                    }
                }
            }
        }
        let mut gens = Vec::new();
        for (ei, e) in gstar.edges.iter().enumerate() {
            if in_tree[ei] || comp[e.ends.0] != c {
                continue;
            }
            let mut w = word_to[e.ends.0].clone().unwrap();
            w.extend_from_slice(&e.projection.edges);
            w.extend(invert_word(&word_to[e.ends.1].clone().unwrap()));
            let w = crate::graph::reduce_word(&w);
            if !w.is_empty() {
                gens.push(w);
            }
        }
        if !gens.is_empty() {
            lists.push(gens);
        }
    }
    let poly_system = SubgroupSystem::from_generator_lists(&lists, g.n_edges())?;
    Ok((gstar, poly_system))
}

/// The full polynomial structure of a map, computed once and then queried.
#[derive(Debug, Clone)]
pub struct PgStructure {
    /// Polynomially growing unoriented edges.
    pub gpg_edges: BTreeSet<u32>,
    /// Edges of zero strata.
    pub zero_edges: BTreeSet<u32>,
    /// The finite path family, canonical orientations.
    pub npg: Vec<EdgePath>,
    /// Maximal length over the family.
    pub k_const: usize,
    pub gstar: GStar,
    /// Conjugacy representatives of the polynomial subgroup system, over the
    /// oriented-edge alphabet of the base graph.
    pub poly_system: SubgroupSystem,
}

impl PgStructure {
    /// Union of the polynomial edges and the zero-stratum edges.
    pub fn gpg_prime(&self) -> BTreeSet<u32> {
        self.gpg_edges.union(&self.zero_edges).copied().collect()
    }
}

/// Growth class of a circuit under iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Growth {
    /// Certified by a decomposition into polynomial edges and family paths.
    Polynomial { decomposition: Vec<EdgePath> },
    Exponential,
}

/// Classifies a circuit by a complete backtracking parse of its rotations
/// into polynomial edges and family paths (in both orientations); failure
/// of the complete search certifies exponential growth.
pub fn classify_growth(pg: &PgStructure, circuit: &crate::graph::Circuit) -> Growth {
    let mut words = Vec::new();
    for p in &pg.npg {
        words.push(p.edges.clone());
        words.push(invert_word(&p.edges));
    }
    let single: BTreeSet<u32> = pg.gpg_edges.clone();
    let grammar = TokenGrammar {
        single_edges: &single,
        words,
        families: &[],
    };
    let w = circuit.edges();
    for rot in 0..w.len() {
        let mut rotated = w[rot..].to_vec();
        rotated.extend_from_slice(&w[..rot]);
        if let Some(chunks) = grammar.parse(&rotated) {
            return Growth::Polynomial {
                decomposition: chunks.into_iter().map(EdgePath::new).collect(),
            };
        }
    }
    Growth::Exponential
}

/// Outcome of one structural check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub witness: Option<String>,
}

/// Report of the structural validator.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<CheckOutcome>,
    /// Non-fatal observations (e.g. a Nielsen path crossing more than one
    /// illegal turn, which rules out complete splitting of images).
    pub advisories: Vec<String>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Eagerly computed analysis bundle of one map: Nielsen search, edge
/// classification and polynomial structure; immutable afterwards, so
/// concurrent reads are safe.
#[derive(Debug, Clone)]
pub struct Analysis {
    map: GraphMap,
    inps: InpSearch,
    neg_classes: BTreeMap<u32, NegClass>,
    pg: PgStructure,
}

impl Analysis {
    pub fn new(map: GraphMap) -> Result<Self> {
        let inps = find_inps(&map, 256);
        let neg_classes = classify_neg_edges(&map);
        let gpg_edges = compute_gpg(&map, &inps);
        let zero_edges: BTreeSet<u32> = map.zero_edges().into_iter().collect();
        let (npg, k_const) = enumerate_npg(&map, &inps);
        let (gstar, poly_system) = build_gstar(&map, &gpg_edges, &inps)?;
        Ok(Analysis {
            map,
            inps,
            neg_classes,
            pg: PgStructure {
                gpg_edges,
                zero_edges,
                npg,
                k_const,
                gstar,
                poly_system,
            },
        })
    }

    pub fn map(&self) -> &GraphMap {
        &self.map
    }

    pub fn inps(&self) -> &InpSearch {
        &self.inps
    }

    pub fn neg_classes(&self) -> &BTreeMap<u32, NegClass> {
        &self.neg_classes
    }

    pub fn pg(&self) -> &PgStructure {
        &self.pg
    }

    pub fn classify_growth(&self, circuit: &crate::graph::Circuit) -> Growth {
        classify_growth(&self.pg, circuit)
    }

    /// Runs the structural checks, each pass/fail with witness, plus
    /// advisory notes.  Sampled checks use a fixed seed for
    /// reproducibility.
    pub fn validate_structure(&self) -> ValidationReport {
        let map = &self.map;
        let mut checks = Vec::new();
        let mut advisories = Vec::new();

        // (i) The derivative preserves top-stratum directions of
        // exponential strata.
        {
            let mut witness = None;
            'outer: for (si, s) in map.strata().iter().enumerate() {
                if s.kind != StratumKind::Eg {
                    continue;
                }
                for &e in &s.edges {
                    for d in [e as i32, -(e as i32)] {
                        let dd = map.derivative(d);
                        if map.stratum_of_edge(dd.unsigned_abs()) != si {
                            witness = Some(format!("direction {d} maps below its stratum"));
                            break 'outer;
                        }
                    }
                }
            }
            checks.push(CheckOutcome {
                name: "derivative preserves exponential strata".into(),
                passed: witness.is_none(),
                witness,
            });
        }

        // (ii) Sampled: random legal top-stratum paths have legal images at
        // their height.
        {
            let mut rng = ChaCha8Rng::seed_from_u64(0xD1CE);
            let mut witness = None;
            'sample: for (si, s) in map.strata().iter().enumerate() {
                if s.kind != StratumKind::Eg {
                    continue;
                }
                for _ in 0..20 {
                    if let Some(p) = random_legal_path(map, si, 8, &mut rng) {
                        let img = map.apply_to_word(&p);
                        for pair in img.windows(2) {
                            let t = GraphMap::taken_turn(pair[0], pair[1]);
                            let h = t
                                .d1
                                .unsigned_abs()
                                .max(t.d2.unsigned_abs());
                            if map.stratum_of_edge(h) == si
                                && matches!(
                                    map.turn_legality(t),
                                    Ok(TurnLegality::Illegal { .. })
                                )
                            {
                                witness =
                                    Some(format!("legal path {p:?} has illegal image turn"));
                                break 'sample;
                            }
                        }
                    }
                }
            }
            checks.push(CheckOutcome {
                name: "legal top-stratum paths stay legal (sampled)".into(),
                passed: witness.is_none(),
                witness,
            });
        }

        // (iii) Non-exponential strata are single edges of shape f(e)=e·u.
        {
            let mut witness = None;
            for s in map.strata() {
                if s.kind != StratumKind::Neg {
                    continue;
                }
                if s.edges.len() != 1 {
                    witness = Some(format!("stratum {:?} has several edges", s.edges));
                    break;
                }
                let e = s.edges[0] as i32;
                if map.image_of(e).first() != Some(&e) {
                    witness = Some(format!("edge {e} image does not start with the edge"));
                    break;
                }
            }
            checks.push(CheckOutcome {
                name: "non-exponential strata are single edges e with f(e)=e·u".into(),
                passed: witness.is_none(),
                witness,
            });
        }

        // (iv) Zero strata carry no cycle.
        {
            let mut witness = None;
            for s in map.strata() {
                if s.kind != StratumKind::Zero {
                    continue;
                }
                if has_cycle(map, &s.edges) {
                    witness = Some(format!("zero stratum {:?} contains a cycle", s.edges));
                    break;
                }
            }
            checks.push(CheckOutcome {
                name: "zero strata are forests".into(),
                passed: witness.is_none(),
                witness,
            });
        }

        // (v) At most one exponential-height Nielsen path per stratum.
        {
            let mut per: BTreeMap<usize, usize> = BTreeMap::new();
            for r in &self.inps.eg_inps {
                *per.entry(r.height).or_insert(0) += 1;
            }
            let witness = per
                .iter()
                .find(|(_, &n)| n > 1)
                .map(|(h, n)| format!("stratum {h} has {n} Nielsen paths"));
            checks.push(CheckOutcome {
                name: "at most one Nielsen path per exponential stratum".into(),
                passed: witness.is_none(),
                witness,
            });
        }

        for r in &self.inps.eg_inps {
            let n = r.illegal_turn_count(map);
            if n != 1 {
                advisories.push(format!(
                    "Nielsen path {:?} crosses {n} illegal turns; edge images cannot all be completely split",
                    r.path.edges
                ));
            }
            if r.reversed {
                advisories.push(format!(
                    "Nielsen path {:?} is fixed with reversed orientation",
                    r.path.edges
                ));
            }
        }
        if !self.inps.undecided.is_empty() {
            advisories.extend(self.inps.undecided.iter().cloned());
        }

        // Fixed short circuits that the polynomial family misses (they can
        // arise through superlinear edges) break the growth dichotomy; flag
        // them rather than absorb them.
        if self
            .neg_classes
            .values()
            .any(|c| *c == NegClass::Superlinear)
        {
            let mut seen: BTreeSet<crate::graph::Circuit> = BTreeSet::new();
            for w in short_circuits(map, 4) {
                let c = crate::graph::Circuit::canonical(w);
                if !seen.insert(c.clone()) {
                    continue;
                }
                if let Ok(img) = map.apply_to_circuit(&c) {
                    if img == c && self.classify_growth(&c) == Growth::Exponential {
                        advisories.push(format!(
                            "fixed circuit {:?} is not captured by the polynomial family",
                            c.edges()
                        ));
                    }
                }
            }
        }

        ValidationReport { checks, advisories }
    }
}

/// All cyclically reduced closed edge words of length 1..=`max_len`.
fn short_circuits(map: &GraphMap, max_len: usize) -> Vec<Vec<i32>> {
    let mut out = Vec::new();
    let mut stack: Vec<Vec<i32>> = map.graph().oriented_edges().map(|e| vec![e]).collect();
    while let Some(w) = stack.pop() {
        let first = w[0];
        let last = *w.last().unwrap();
        if map.graph().terminus(last) == map.graph().origin(first) && last != -first {
            out.push(w.clone());
        }
        if w.len() < max_len {
            for e in map.graph().directions_at(map.graph().terminus(last)) {
                if e != -last {
                    let mut ext = w.clone();
                    ext.push(e);
                    stack.push(ext);
                }
            }
        }
    }
    out
}

/// A random reduced legal path through `len` edges, all within stratum
/// `si`'s filtration level and touching stratum `si`; `None` when the walk
/// gets stuck.
fn random_legal_path(
    map: &GraphMap,
    si: usize,
    len: usize,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<i32>> {
    let starts: Vec<i32> = map
        .graph()
        .oriented_edges()
        .filter(|&e| map.stratum_of_edge(e.unsigned_abs()) == si)
        .collect();
    let mut w = vec![starts[rng.gen_range(0..starts.len())]];
    while w.len() < len {
        let last = *w.last().unwrap();
        let nexts: Vec<i32> = map
            .graph()
            .directions_at(map.graph().terminus(last))
            .into_iter()
            .filter(|&e| {
                e != -last
                    && map.stratum_of_edge(e.unsigned_abs()) <= si
                    && matches!(map.turn_legality(Turn::new(-last, e)), Ok(TurnLegality::Legal))
            })
            .collect();
        if nexts.is_empty() {
            break;
        }
        w.push(nexts[rng.gen_range(0..nexts.len())]);
    }
    if w.len() >= 2 {
        Some(w)
    } else {
        None
    }
}

/// Does the subgraph spanned by the given unoriented edges contain a cycle?
fn has_cycle(map: &GraphMap, edges: &[u32]) -> bool {
    // Union-find over vertices; an edge joining an already-joined pair
    // closes a cycle (loops always do).
    let n = map.graph().n_vertices();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &e in edges {
        let (a, b) = (
            map.graph().origin(e as i32),
            map.graph().terminus(e as i32),
        );
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            return true;
        }
        parent[ra] = rb;
    }
    false
}
