//! Exponential and subgraph-relative lengths, splitting units, splitting
//! verification, goodness lower bounds and the bounded-cancellation
//! constant.
//!
//! The exponential length of a reduced path counts the edges outside the
//! (closed-up) polynomially growing subgraph, discounting every edge that
//! lies on a maximal occurrence of a path from the finite Nielsen family.
//! The subgraph-relative length does the same with the family restricted
//! to a designated subgraph; with the empty subgraph it degenerates to the
//! plain edge count.

use crate::error::{Error, Result};
use crate::graph::{invert_word, is_reduced_word, reduce_word, Circuit, OrientedEdge};
use crate::graph_map::{GraphMap, Turn, TurnLegality};
use crate::nielsen::{power_families, Analysis, NegClass, PowerFamily, TokenGrammar};
use num::rational::Ratio;
use std::collections::BTreeSet;

/// One maximal family occurrence inside a path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxOccurrence {
    /// Start position in the path (for circuits, positions are mod length).
    pub start: usize,
    /// The matched family word, in the matched orientation.
    pub pattern: Vec<OrientedEdge>,
}

/// The alternating decomposition of a path into family occurrences and the
/// complementary stretches.
#[derive(Debug, Clone)]
pub struct ExpDecomposition {
    /// Maximal disjoint family occurrences.
    pub npg_max: Vec<MaxOccurrence>,
    /// Per position: covered by some occurrence in `npg_max`.
    pub covered: Vec<bool>,
    /// Per position: the edge lies outside the closed-up polynomial
    /// subgraph.
    pub outside: Vec<bool>,
    /// Alternating blocks `(start, len, is_family)` in linear scan order;
    /// a wrapping cyclic occurrence contributes its two linear pieces.
    pub blocks: Vec<(usize, usize, bool)>,
}

impl ExpDecomposition {
    /// Number of positions counted by the exponential length.
    pub fn counted(&self) -> usize {
        self.covered
            .iter()
            .zip(&self.outside)
            .filter(|(&c, &o)| o && !c)
            .count()
    }
}

/// All occurrence start positions of `pat` in `hay` (cyclically when
/// `cyclic`, scanning the doubled word).
pub(crate) fn occurrences(hay: &[i32], pat: &[i32], cyclic: bool) -> Vec<usize> {
    if pat.is_empty() || hay.is_empty() {
        return Vec::new();
    }
    if cyclic {
        // Repeat the word until every start position can see a full
        // pattern, so patterns longer than one period are counted too.
        let n = hay.len();
        let mut ext = hay.to_vec();
        while ext.len() < n + pat.len() {
            ext.extend_from_slice(hay);
        }
        (0..n)
            .filter(|&i| ext[i..i + pat.len()] == *pat)
            .collect()
    } else {
        if pat.len() > hay.len() {
            return Vec::new();
        }
        (0..=hay.len() - pat.len())
            .filter(|&i| hay[i..i + pat.len()] == *pat)
            .collect()
    }
}

/// Family words in both orientations, deduplicated.
fn family_patterns(analysis: &Analysis) -> Vec<Vec<i32>> {
    let mut out: Vec<Vec<i32>> = Vec::new();
    for p in &analysis.pg().npg {
        for w in [p.edges.clone(), invert_word(&p.edges)] {
            if !out.contains(&w) {
                out.push(w);
            }
        }
    }
    out
}

fn check_reduced(word: &[i32], cyclic: bool) -> Result<()> {
    if !is_reduced_word(word) {
        return Err(Error::domain("path is not reduced"));
    }
    if cyclic && word.len() >= 2 && word[0] == -word[word.len() - 1] {
        return Err(Error::domain("circuit word is not cyclically reduced"));
    }
    Ok(())
}

fn decomposition_with(
    word: &[i32],
    cyclic: bool,
    excluded: &BTreeSet<u32>,
    patterns: &[Vec<i32>],
) -> ExpDecomposition {
    let n = word.len();
    let outside: Vec<bool> = word
        .iter()
        .map(|e| !excluded.contains(&e.unsigned_abs()))
        .collect();
    // Candidate occurrences, maximal ones first (longer patterns first,
    // then leftmost); greedy selection keeps them pairwise disjoint, which
    // is also the unique choice when no two occurrences overlap.
    let mut cand: Vec<(usize, &Vec<i32>)> = Vec::new();
    for pat in patterns {
        for s in occurrences(word, pat, cyclic) {
            cand.push((s, pat));
        }
    }
    cand.sort_by_key(|(s, pat)| (usize::MAX - pat.len(), *s));
    let mut covered = vec![false; n];
    let mut npg_max = Vec::new();
    for (s, pat) in cand {
        let span: Vec<usize> = (0..pat.len()).map(|j| (s + j) % n.max(1)).collect();
        if span.iter().any(|&i| covered[i]) {
            continue;
        }
        for &i in &span {
            covered[i] = true;
        }
        npg_max.push(MaxOccurrence {
            start: s,
            pattern: pat.clone(),
        });
    }
    npg_max.sort_by_key(|o| o.start);
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < n {
        let flag = covered[i];
        let mut j = i;
        while j < n && covered[j] == flag {
            j += 1;
        }
        blocks.push((i, j - i, flag));
        i = j;
    }
    ExpDecomposition {
        npg_max,
        covered,
        outside,
        blocks,
    }
}

/// The alternating decomposition of a reduced path (or cyclically reduced
/// circuit word) into maximal family occurrences and complementary
/// stretches.
pub fn exponential_decomposition(
    analysis: &Analysis,
    word: &[i32],
    cyclic: bool,
) -> Result<ExpDecomposition> {
    check_reduced(word, cyclic)?;
    analysis.map().graph().check_path(word)?;
    Ok(decomposition_with(
        word,
        cyclic,
        &analysis.pg().gpg_prime(),
        &family_patterns(analysis),
    ))
}

/// Plain, exponential and subgraph-relative lengths of a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lengths {
    pub len: usize,
    pub ell_exp: usize,
    pub ell_f: usize,
}

fn f_restricted(
    analysis: &Analysis,
    f_subgraph: &BTreeSet<u32>,
) -> (BTreeSet<u32>, Vec<Vec<i32>>) {
    let excluded: BTreeSet<u32> = analysis
        .pg()
        .gpg_prime()
        .intersection(f_subgraph)
        .copied()
        .collect();
    let patterns: Vec<Vec<i32>> = family_patterns(analysis)
        .into_iter()
        .filter(|p| p.iter().all(|e| f_subgraph.contains(&e.unsigned_abs())))
        .collect();
    (excluded, patterns)
}

/// Computes all three lengths of a reduced path.  `f_subgraph` is the
/// designated subgraph for the relative length; with the empty set the
/// relative length equals the plain length.
pub fn lengths(
    analysis: &Analysis,
    word: &[i32],
    cyclic: bool,
    f_subgraph: &BTreeSet<u32>,
) -> Result<Lengths> {
    let dec = exponential_decomposition(analysis, word, cyclic)?;
    let (exf, patf) = f_restricted(analysis, f_subgraph);
    let decf = decomposition_with(word, cyclic, &exf, &patf);
    Ok(Lengths {
        len: word.len(),
        ell_exp: dec.counted(),
        ell_f: decf.counted(),
    })
}

/// Lengths of a contiguous subpath, measured relative to the decomposition
/// of the ambient path: only positions of `sub` that the ambient
/// decomposition counts contribute.
pub fn relative_lengths(
    analysis: &Analysis,
    word: &[i32],
    cyclic: bool,
    sub: (usize, usize),
    f_subgraph: &BTreeSet<u32>,
) -> Result<Lengths> {
    let (lo, hi) = sub;
    if lo > hi || hi > word.len() {
        return Err(Error::domain("subpath positions out of range"));
    }
    let dec = exponential_decomposition(analysis, word, cyclic)?;
    let (exf, patf) = f_restricted(analysis, f_subgraph);
    let decf = decomposition_with(word, cyclic, &exf, &patf);
    let count = |d: &ExpDecomposition| {
        (lo..hi).filter(|&i| d.outside[i] && !d.covered[i]).count()
    };
    Ok(Lengths {
        len: hi - lo,
        ell_exp: count(&dec),
        ell_f: count(&decf),
    })
}

/// The per-map constants used by the length estimates: `k` bounds the
/// family paths, `c_f` the one-step cancellation, `c = max{k, c_f}`, and
/// `n3k` is a power of the map expanding every non-polynomial edge to
/// exponential length at least `3k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstantsTable {
    pub k: usize,
    /// Largest one-step cancellation actually measured.
    pub cf_empirical: usize,
    /// Stored bound: twice the empirical maximum.
    pub c_f: usize,
    pub c: usize,
    /// `0` when no edge lies outside the polynomial part.
    pub n3k: usize,
}

/// Half-length bound of the exhaustive cancellation search.
pub const BCC_HALF_BOUND: usize = 4;

/// All reduced paths of length `1..=cap` in the graph.
pub(crate) fn reduced_paths_up_to(map: &GraphMap, cap: usize) -> Vec<Vec<i32>> {
    let g = map.graph();
    let mut out: Vec<Vec<i32>> = g.oriented_edges().map(|e| vec![e]).collect();
    let mut frontier = out.clone();
    for _ in 1..cap {
        let mut next = Vec::new();
        for w in &frontier {
            let last = *w.last().unwrap();
            for e in g.oriented_edges() {
                if e != -last && g.origin(e) == g.terminus(last) {
                    let mut ext = w.clone();
                    ext.push(e);
                    next.push(ext);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Exhaustive one-step juncture cancellation over all reduced
/// concatenations with halves of length at most `half_bound`; returns
/// `(empirical max, stored bound = 2 × empirical)`.
pub fn bcc_constant(map: &GraphMap, half_bound: usize) -> (usize, usize) {
    let g = map.graph();
    let halves = reduced_paths_up_to(map, half_bound);
    let mut best = 0usize;
    for r1 in &halves {
        let last = *r1.last().unwrap();
        let img1 = map.apply_to_word(r1);
        for r2 in &halves {
            let first = r2[0];
            if first == -last || g.origin(first) != g.terminus(last) {
                continue;
            }
            let img2 = map.apply_to_word(r2);
            let mut joined = img1.clone();
            joined.extend_from_slice(&img2);
            let reduced = reduce_word(&joined);
            let cancelled = (img1.len() + img2.len() - reduced.len()) / 2;
            best = best.max(cancelled);
        }
    }
    (best, 2 * best)
}

/// Computes the constants table for a map, deriving `n3k` by iterating
/// every edge outside the closed-up polynomial subgraph until its image
/// has exponential length at least `3k`.
pub fn constants(analysis: &Analysis) -> Result<ConstantsTable> {
    let map = analysis.map();
    let pg = analysis.pg();
    let mut k = 1usize;
    for p in &pg.npg {
        k = k.max(p.edges.len());
    }
    for s in map.strata() {
        if s.kind == crate::graph_map::StratumKind::Zero {
            k = k.max(s.edges.len());
        }
    }
    let (cf_empirical, c_f) = bcc_constant(map, BCC_HALF_BOUND);
    let c = k.max(c_f);
    let gpg_prime = pg.gpg_prime();
    let outside: Vec<i32> = (1..=map.graph().n_edges() as i32)
        .filter(|e| !gpg_prime.contains(&(*e as u32)))
        .collect();
    let n3k = if outside.is_empty() {
        0
    } else {
        let mut words: Vec<Vec<i32>> = outside.iter().map(|&e| vec![e]).collect();
        let mut found = None;
        for n in 1..=64usize {
            for w in words.iter_mut() {
                *w = map.apply_to_word(w);
                if w.len() > 2_000_000 {
                    return Err(Error::cap("edge iterate exceeded the length cap"));
                }
            }
            let expanded = words
                .iter()
                .map(|w| exponential_decomposition(analysis, w, false).map(|d| d.counted()))
                .collect::<Result<Vec<_>>>()?;
            if expanded.iter().all(|&l| l >= 3 * k) {
                found = Some(n);
                break;
            }
        }
        found.ok_or_else(|| Error::cap("no expanding power found within 64 iterations"))?
    };
    Ok(ConstantsTable {
        k,
        cf_empirical,
        c_f,
        c,
        n3k,
    })
}

/// One factor of a verified splitting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SplittingUnit {
    /// A single edge of an irreducible stratum (outside the polynomial
    /// part in the subgraph-relative mode).
    Edge(OrientedEdge),
    /// A fixed family path, by index, possibly reversed.
    EgInp { index: usize, reversed: bool },
    /// A closed fixed path `e·wˢ·e⁻¹` over a linear edge.
    NegInp {
        edge: OrientedEdge,
        word: Vec<OrientedEdge>,
        exponent: usize,
    },
    /// An exceptional path `e₁·wᵖ·e₂⁻¹` over two linear edges with a
    /// common root.
    Exceptional {
        front: OrientedEdge,
        back: OrientedEdge,
        word: Vec<OrientedEdge>,
        width: usize,
    },
    /// A connecting path inside a zero stratum.
    ZeroPath(Vec<OrientedEdge>),
    /// A maximal stretch inside the polynomial part (polynomial edges and
    /// family paths).
    PgBlock(Vec<OrientedEdge>),
}

impl SplittingUnit {
    /// The edge word the unit stands for.
    pub fn expand(&self, analysis: &Analysis) -> Vec<OrientedEdge> {
        match self {
            SplittingUnit::Edge(e) => vec![*e],
            SplittingUnit::EgInp { index, reversed } => {
                let p = &analysis.inps().eg_inps[*index].path.edges;
                if *reversed {
                    invert_word(p)
                } else {
                    p.clone()
                }
            }
            SplittingUnit::NegInp {
                edge,
                word,
                exponent,
            } => {
                let mut out = vec![*edge];
                for _ in 0..*exponent {
                    out.extend_from_slice(word);
                }
                out.push(-*edge);
                out
            }
            SplittingUnit::Exceptional {
                front,
                back,
                word,
                width,
            } => {
                let mut out = vec![*front];
                for _ in 0..*width {
                    out.extend_from_slice(word);
                }
                out.push(-*back);
                out
            }
            SplittingUnit::ZeroPath(p) | SplittingUnit::PgBlock(p) => p.clone(),
        }
    }
}

/// How much of the splitting contract a decomposition satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    Complete,
    PgRelative,
    Partial,
}

/// A reduced path together with an ordered unit decomposition.
#[derive(Debug, Clone)]
pub struct AnnotatedPath {
    pub path: Vec<OrientedEdge>,
    pub units: Vec<SplittingUnit>,
    pub mode: SplitMode,
}

impl AnnotatedPath {
    /// Builds the value after checking that the units concatenate to the
    /// path.
    pub fn new(
        analysis: &Analysis,
        path: Vec<OrientedEdge>,
        units: Vec<SplittingUnit>,
        mode: SplitMode,
    ) -> Result<Self> {
        let concat: Vec<i32> = units.iter().flat_map(|u| u.expand(analysis)).collect();
        if concat != path {
            return Err(Error::structural("units do not concatenate to the path"));
        }
        Ok(AnnotatedPath { path, units, mode })
    }

    /// Positions where one unit ends and the next starts.
    pub fn breakpoints(&self, analysis: &Analysis) -> Vec<usize> {
        let mut out = Vec::new();
        let mut pos = 0usize;
        for u in &self.units[..self.units.len().saturating_sub(1)] {
            pos += u.expand(analysis).len();
            out.push(pos);
        }
        out
    }
}

/// Outcome of the three-valued splitting check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitCheck {
    Verified,
    /// Cancellation occurs at this iterate.
    Refuted(usize),
    Unknown,
}

/// Default iteration depth of [`is_splitting`].
pub const SPLIT_DEPTH: usize = 64;

/// Decides whether the breakpoints split the path: every juncture turn
/// whose derivative orbit never degenerates certifies the splitting; a
/// degeneration at step `k ≤ depth` refutes it at that iterate.
pub fn is_splitting(
    analysis: &Analysis,
    word: &[i32],
    breakpoints: &[usize],
    depth: usize,
) -> Result<SplitCheck> {
    check_reduced(word, false)?;
    let map = analysis.map();
    let mut worst: Option<usize> = None;
    for &bp in breakpoints {
        if bp == 0 || bp >= word.len() {
            return Err(Error::domain("breakpoint out of range"));
        }
        let turn = Turn::new(-word[bp - 1], word[bp]);
        match map.turn_legality(turn)? {
            TurnLegality::Legal => {}
            TurnLegality::Illegal { k } => {
                worst = Some(worst.map_or(k, |w: usize| w.min(k)));
            }
        }
    }
    Ok(match worst {
        None => SplitCheck::Verified,
        Some(k) if k <= depth => SplitCheck::Refuted(k),
        Some(_) => SplitCheck::Unknown,
    })
}

/// Inventory-driven unit matcher.  Returns candidates starting at `i`,
/// longest first.
fn unit_matches_at(
    analysis: &Analysis,
    families: &[PowerFamily],
    w: &[i32],
    i: usize,
    pg_relative: bool,
) -> Vec<(usize, SplittingUnit)> {
    let pg = analysis.pg();
    let gpg_prime = pg.gpg_prime();
    let mut out: Vec<(usize, SplittingUnit)> = Vec::new();
    // Fixed family paths, both orientations.
    for (idx, rec) in analysis.inps().eg_inps.iter().enumerate() {
        for (rev, pat) in [
            (false, rec.path.edges.clone()),
            (true, invert_word(&rec.path.edges)),
        ] {
            if w.len() - i >= pat.len() && w[i..i + pat.len()] == *pat {
                out.push((
                    i + pat.len(),
                    SplittingUnit::EgInp {
                        index: idx,
                        reversed: rev,
                    },
                ));
            }
        }
    }
    if pg_relative {
        // Stretches inside the polynomial part, longest first.
        let single = pg.gpg_edges.clone();
        let grammar = TokenGrammar {
            single_edges: &single,
            words: family_patterns(analysis),
            families: &[],
        };
        let mut ends: Vec<usize> = Vec::new();
        let mut frontier = vec![i];
        let mut seen = vec![false; w.len() + 1];
        seen[i] = true;
        while let Some(j) = frontier.pop() {
            if j > i {
                ends.push(j);
            }
            if j == w.len() {
                continue;
            }
            for (j2, _) in grammar.matches_at(w, j) {
                if !seen[j2] {
                    seen[j2] = true;
                    frontier.push(j2);
                }
            }
        }
        ends.sort_unstable_by(|a, b| b.cmp(a));
        for j in ends {
            out.push((j, SplittingUnit::PgBlock(w[i..j].to_vec())));
        }
        // Zero-stratum stretches.
        if pg.zero_edges.contains(&w[i].unsigned_abs()) {
            let mut j = i;
            while j < w.len() && pg.zero_edges.contains(&w[j].unsigned_abs()) {
                j += 1;
            }
            for j2 in (i + 1..=j).rev() {
                out.push((j2, SplittingUnit::ZeroPath(w[i..j2].to_vec())));
            }
        }
        if !gpg_prime.contains(&w[i].unsigned_abs()) {
            out.push((i + 1, SplittingUnit::Edge(w[i])));
        }
    } else {
        // Closed fixed paths and exceptional paths over linear edges.
        for fam in families {
            if w[i] != fam.front {
                continue;
            }
            let r = &fam.root;
            let mut p = 0usize;
            let mut j = i + 1;
            loop {
                if j < w.len() && w[j] == -fam.back && (fam.front != fam.back || p >= 1) {
                    let unit = if fam.front == fam.back {
                        SplittingUnit::NegInp {
                            edge: fam.front,
                            word: r.clone(),
                            exponent: p,
                        }
                    } else {
                        SplittingUnit::Exceptional {
                            front: fam.front,
                            back: fam.back,
                            word: r.clone(),
                            width: p,
                        }
                    };
                    out.push((j + 1, unit));
                }
                if j + r.len() <= w.len() && w[j..j + r.len()] == *r {
                    j += r.len();
                    p += 1;
                } else {
                    break;
                }
            }
        }
        // Zero-stratum stretches.
        if pg.zero_edges.contains(&w[i].unsigned_abs()) {
            let mut j = i;
            while j < w.len() && pg.zero_edges.contains(&w[j].unsigned_abs()) {
                j += 1;
            }
            for j2 in (i + 1..=j).rev() {
                out.push((j2, SplittingUnit::ZeroPath(w[i..j2].to_vec())));
            }
        }
        if !pg.zero_edges.contains(&w[i].unsigned_abs()) {
            out.push((i + 1, SplittingUnit::Edge(w[i])));
        }
    }
    out.sort_by(|a, b| b.0.cmp(&a.0));
    out
}

/// Longest-match backtracking parse of `w` into splitting units; ties are
/// broken toward fewer units by preferring longer candidates.
pub fn parse_splitting(
    analysis: &Analysis,
    w: &[i32],
    pg_relative: bool,
) -> Option<Vec<SplittingUnit>> {
    let families = power_families(analysis.neg_classes());
    let mut failed = vec![false; w.len() + 1];
    let mut units: Vec<SplittingUnit> = Vec::new();
    // Explicit backtracking stack: (start position, candidates, cursor).
    let mut stack: Vec<(usize, Vec<(usize, SplittingUnit)>, usize)> = Vec::new();
    let mut pos = 0usize;
    loop {
        if pos == w.len() {
            return Some(units);
        }
        let cands: Vec<(usize, SplittingUnit)> = if failed[pos] {
            Vec::new()
        } else {
            unit_matches_at(analysis, &families, w, pos, pg_relative)
                .into_iter()
                .collect()
        };
        stack.push((pos, cands, 0));
        loop {
            let Some((p, cands, k)) = stack.last_mut() else {
                return None;
            };
            if let Some((j, unit)) = cands.get(*k) {
                *k += 1;
                pos = *j;
                units.push(unit.clone());
                break;
            }
            failed[*p] = true;
            stack.pop();
            units.pop();
        }
    }
}

/// Parses and verifies a path in one step; `None` when either stage fails.
pub fn split_annotated(
    analysis: &Analysis,
    w: &[i32],
    pg_relative: bool,
) -> Result<Option<AnnotatedPath>> {
    let Some(units) = parse_splitting(analysis, w, pg_relative) else {
        return Ok(None);
    };
    let mode = if pg_relative {
        SplitMode::PgRelative
    } else {
        SplitMode::Complete
    };
    let ap = AnnotatedPath::new(analysis, w.to_vec(), units, mode)?;
    match is_splitting(analysis, w, &ap.breakpoints(analysis), SPLIT_DEPTH)? {
        SplitCheck::Verified => Ok(Some(ap)),
        _ => Ok(None),
    }
}

/// Rewrites an annotated path unit-by-unit through the map, preserving the
/// mode.  Fails with a parse error when a unit image does not decompose
/// (which signals that the map violates the splitting contract).
pub fn image_splitting(analysis: &Analysis, ap: &AnnotatedPath) -> Result<AnnotatedPath> {
    if ap.mode == SplitMode::Partial {
        return Err(Error::domain("image of a partial decomposition is undefined"));
    }
    let map = analysis.map();
    let pg_relative = ap.mode == SplitMode::PgRelative;
    let mut units: Vec<SplittingUnit> = Vec::new();
    for u in &ap.units {
        match u {
            SplittingUnit::Edge(e) => {
                let img = map.image_of(*e);
                let parsed = parse_splitting(analysis, &img, pg_relative).ok_or_else(|| {
                    Error::validation(format!("image of edge {e} fails to parse into units"))
                })?;
                units.extend(parsed);
            }
            SplittingUnit::EgInp { index, reversed } => {
                let rec = &analysis.inps().eg_inps[*index];
                units.push(SplittingUnit::EgInp {
                    index: *index,
                    reversed: reversed ^ rec.reversed,
                });
            }
            SplittingUnit::NegInp { .. } => units.push(u.clone()),
            SplittingUnit::Exceptional {
                front,
                back,
                word,
                width,
            } => {
                // `f(eᵢ) = eᵢ·r^{dᵢ}`; the width changes by `d₁−d₂` when
                // the stored word is the root `r` and by `d₂−d₁` when it
                // is its inverse.
                let d = |e: OrientedEdge| -> i64 {
                    match analysis.neg_classes().get(&e.unsigned_abs()) {
                        Some(NegClass::Linear { suffix }) => {
                            let (root, pow) = crate::nielsen::primitive_root(suffix);
                            if root == *word {
                                pow as i64
                            } else if root == invert_word(word) {
                                -(pow as i64)
                            } else {
                                0
                            }
                        }
                        _ => 0,
                    }
                };
                let new_width = *width as i64 + d(*front) - d(*back);
                if new_width >= 0 {
                    units.push(SplittingUnit::Exceptional {
                        front: *front,
                        back: *back,
                        word: word.clone(),
                        width: new_width as usize,
                    });
                } else {
                    // Negative width: same endpoints, inverted root.
                    units.push(SplittingUnit::Exceptional {
                        front: *front,
                        back: *back,
                        word: invert_word(word),
                        width: (-new_width) as usize,
                    });
                }
            }
            SplittingUnit::ZeroPath(p) => {
                let img = map.apply_to_word(p);
                let parsed = parse_splitting(analysis, &img, pg_relative).ok_or_else(|| {
                    Error::validation("image of a zero-stratum path fails to parse")
                })?;
                units.extend(parsed);
            }
            SplittingUnit::PgBlock(p) => {
                let img = map.apply_to_word(p);
                units.push(SplittingUnit::PgBlock(img));
            }
        }
    }
    // Boundary mergers: adjacent polynomial stretches fuse.
    let mut merged: Vec<SplittingUnit> = Vec::new();
    for u in units {
        match (merged.last_mut(), &u) {
            (Some(SplittingUnit::PgBlock(a)), SplittingUnit::PgBlock(b)) => {
                a.extend_from_slice(b);
            }
            _ => merged.push(u),
        }
    }
    let image = map.apply_to_word(&ap.path);
    AnnotatedPath::new(analysis, image, merged, ap.mode)
}

/// Result of iterating a path until it splits.
#[derive(Debug, Clone)]
pub enum SplitSearch {
    Split { ap: AnnotatedPath, k: usize },
    /// The bound was reached; carries the last iterate.
    NotYetSplit { last: Vec<OrientedEdge> },
}

/// Tighten-iterates the path, attempting a full verified parse after each
/// step; returns the first success with its iterate count.
pub fn iterate_until_split(
    analysis: &Analysis,
    word: &[i32],
    kmax: usize,
) -> Result<SplitSearch> {
    check_reduced(word, false)?;
    let map = analysis.map();
    let mut w = word.to_vec();
    for k in 0..=kmax {
        if let Some(ap) = split_annotated(analysis, &w, false)? {
            return Ok(SplitSearch::Split { ap, k });
        }
        if k < kmax {
            w = map.apply_to_word(&w);
            if w.len() > 2_000_000 {
                return Err(Error::cap("iterate exceeded the length cap"));
            }
        }
    }
    Ok(SplitSearch::NotYetSplit { last: w })
}

/// A certified lower bound for the goodness of a circuit: the counted
/// length covered by disjoint verified polynomial-relative factors over the
/// full counted length.  `1` whenever some rotation admits a verified
/// polynomial-relative complete splitting.
pub fn goodness_lower(analysis: &Analysis, circuit: &Circuit) -> Result<Ratio<u64>> {
    let w = circuit.edges();
    let dec = exponential_decomposition(analysis, w, true)?;
    let le = dec.counted();
    if le == 0 {
        return Ok(Ratio::new(0, 1));
    }
    // Small circuits: look for a fully split rotation.
    if w.len() <= 4096 {
        for rot in 0..w.len() {
            let mut rotated = w[rot..].to_vec();
            rotated.extend_from_slice(&w[..rot]);
            if let Some(ap) = split_annotated(analysis, &rotated, true)? {
                // The wrap-around juncture must be nondegenerate too.
                let turn = Turn::new(-rotated[rotated.len() - 1], rotated[0]);
                if ap.units.len() == 1
                    || analysis.map().turn_legality(turn)? == TurnLegality::Legal
                {
                    return Ok(Ratio::new(1, 1));
                }
            }
        }
    }
    // Greedy disjoint factors.  A factor may only be counted when it is a
    // run of units with legal junctures between the units AND its two cut
    // points against the surrounding material are legal turns of the
    // circuit — a decomposition may only cut where no cancellation can
    // ever occur.  Illegal turns inside a single unit (fixed family paths)
    // are fine.
    let n = w.len();
    let map = analysis.map();
    // Juncture i sits between w[i-1] and w[i]; index 0 is the wrap.
    let mut legal = vec![false; n];
    for i in 0..n {
        let prev = w[(i + n - 1) % n];
        legal[i] = map.turn_legality(Turn::new(-prev, w[i]))? == TurnLegality::Legal;
    }
    let families = power_families(analysis.neg_classes());
    let mut runs: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut cur: Vec<(usize, usize)> = Vec::new();
    let mut i = 0usize;
    while i < n {
        match unit_matches_at(analysis, &families, w, i, true).first() {
            Some(&(j, _)) => {
                if !cur.is_empty() && !legal[i] {
                    runs.push(std::mem::take(&mut cur));
                }
                cur.push((i, j));
                i = j;
            }
            None => {
                if !cur.is_empty() {
                    runs.push(std::mem::take(&mut cur));
                }
                i += 1;
            }
        }
    }
    if !cur.is_empty() {
        runs.push(cur);
    }
    let mut total = 0usize;
    for spans in runs {
        let mut lo = 0usize;
        let mut hi = spans.len();
        // Trim units whose outer cut point is an illegal turn.
        if !legal[spans[0].0 % n] {
            lo += 1;
        }
        if hi > lo && !legal[spans[hi - 1].1 % n] {
            hi -= 1;
        }
        if lo < hi {
            total += (spans[lo].0..spans[hi - 1].1)
                .filter(|&p| dec.outside[p] && !dec.covered[p])
                .count();
        }
    }
    Ok(Ratio::new((total.min(le)) as u64, le as u64))
}
