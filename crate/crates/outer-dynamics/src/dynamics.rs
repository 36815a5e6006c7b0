//! Attracting currents and simplices, stretch factors, pushforwards of
//! currents, North-South iteration experiments, split goodness of currents,
//! norm-growth audits and electrified lengths.

use crate::currents::{
    count_occurrences, current_functionals, rational_current, window_paths, CurrentApprox,
    Provenance,
};
use crate::error::{Error, Result};
use crate::graph::{invert_word, Circuit};
use crate::lengths::{constants, lengths, parse_splitting, AnnotatedPath, SplitMode, SplittingUnit};
use crate::nielsen::Analysis;
use crate::{OrientedEdge, Turn, TurnLegality};
use num::rational::{BigRational, Ratio};
use num::{BigInt, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

/// Hard cap on materialized iterate lengths.
pub const ITERATE_CAP: usize = 10_000_000;

/// Units whose exponential length under iteration tends to infinity: every
/// edge outside the closed-up polynomial subgraph, plus zero-stratum paths
/// whose iterates acquire such edges within a few steps.
pub fn expanding_units(analysis: &Analysis) -> Vec<SplittingUnit> {
    let gpg_prime = analysis.pg().gpg_prime();
    let mut units: Vec<SplittingUnit> = Vec::new();
    for e in 1..=analysis.map().graph().n_edges() as u32 {
        if !gpg_prime.contains(&e) {
            units.push(SplittingUnit::Edge(e as i32));
        }
    }
    for &z in &analysis.pg().zero_edges {
        let mut w = vec![z as i32];
        for _ in 0..8 {
            w = analysis.map().apply_to_word(&w);
            let grown = w.iter().any(|x| !gpg_prime.contains(&(x.unsigned_abs())));
            if grown {
                units.push(SplittingUnit::ZeroPath(vec![z as i32]));
                break;
            }
        }
    }
    units
}

/// A finite-stage approximation of an attracting current together with its
/// stage and the Cauchy gap against the previous stage.
#[derive(Debug, Clone)]
pub struct ApproxCurrent {
    pub current: CurrentApprox,
    /// Stage actually reached (may be below the request when the iterate
    /// length cap intervenes).
    pub n_used: usize,
    /// Largest window-count change from the previous stage.
    pub cauchy_gap: f64,
}

fn counts_of_word(
    analysis: &Analysis,
    word: &[OrientedEdge],
    window: &[Vec<i32>],
    f_subgraph: &BTreeSet<u32>,
) -> Result<std::collections::BTreeMap<Vec<i32>, BigRational>> {
    let ell_f = lengths(analysis, word, false, f_subgraph)?.ell_f;
    if ell_f == 0 {
        return Err(Error::domain("iterate has zero relative length"));
    }
    let den = BigInt::from(ell_f as u64);
    Ok(window
        .iter()
        .map(|g| {
            let c = count_occurrences(g, word, false);
            (
                g.clone(),
                BigRational::new(BigInt::from(c as u64), den.clone()),
            )
        })
        .collect())
}

fn sup_gap(a: &CurrentApprox, b: &CurrentApprox) -> f64 {
    a.window
        .iter()
        .map(|g| {
            let d = a.counts[g].clone() - b.counts[g].clone();
            d.to_f64().map(f64::abs).unwrap_or(f64::INFINITY)
        })
        .fold(0.0, f64::max)
}

/// Occurrence counts of the `n`-th iterate of a unit, normalized by its
/// relative length; stops early (recording the largest feasible stage) when
/// the next iterate would exceed the length cap.
pub fn approx_attracting_current(
    analysis: &Analysis,
    unit: &SplittingUnit,
    n: usize,
    window: usize,
    f_subgraph: &BTreeSet<u32>,
) -> Result<ApproxCurrent> {
    let paths = window_paths(analysis, window);
    let seed = unit.expand(analysis);
    let mut prev = seed.clone();
    let mut used = 0usize;
    for _ in 0..n {
        let next = analysis.map().apply_to_word(&prev);
        if next.len() > ITERATE_CAP {
            break;
        }
        prev = next;
        used += 1;
    }
    let make = |w: &[OrientedEdge], stage: usize| -> Result<CurrentApprox> {
        Ok(CurrentApprox {
            window: paths.clone(),
            counts: counts_of_word(analysis, w, &paths, f_subgraph)?,
            provenance: Provenance::Iterate {
                seed: seed.clone(),
                n: stage,
            },
        })
    };
    let current = make(&prev, used)?;
    let cauchy_gap = if used == 0 {
        f64::INFINITY
    } else {
        let before = analysis.map().iterate_word(&seed, used - 1, None)?;
        sup_gap(&current, &make(&before, used - 1)?)
    };
    Ok(ApproxCurrent {
        current,
        n_used: used,
        cauchy_gap,
    })
}

/// A growth-rate estimate from length ratios.
#[derive(Debug, Clone, Copy)]
pub struct StretchEstimate {
    pub lambda: f64,
    /// Gap between the last two ratios.
    pub residual: f64,
    pub iterations: usize,
}

/// The limit of relative-length ratios of successive iterates of a unit;
/// stops at 1e-8 relative stability (three consecutive times) or at the
/// length cap, whichever comes first.
pub fn stretch_factor(
    analysis: &Analysis,
    unit: &SplittingUnit,
    f_subgraph: &BTreeSet<u32>,
) -> Result<StretchEstimate> {
    let mut w = unit.expand(analysis);
    let mut prev_len = lengths(analysis, &w, false, f_subgraph)?.ell_f;
    let mut last = f64::NAN;
    let mut residual = f64::INFINITY;
    let mut streak = 0usize;
    for it in 1..=200 {
        let next = analysis.map().apply_to_word(&w);
        if next.len() > ITERATE_CAP {
            break;
        }
        w = next;
        let len = lengths(analysis, &w, false, f_subgraph)?.ell_f;
        if prev_len > 0 {
            let ratio = len as f64 / prev_len as f64;
            residual = (ratio - last).abs();
            if residual < 1e-8 * ratio.max(1.0) {
                streak += 1;
                if streak >= 3 {
                    return Ok(StretchEstimate {
                        lambda: ratio,
                        residual,
                        iterations: it,
                    });
                }
            } else {
                streak = 0;
            }
            last = ratio;
        }
        prev_len = len;
    }
    Ok(StretchEstimate {
        lambda: last,
        residual,
        iterations: 0,
    })
}

/// Pushforward of a counting current: the counting current of the image
/// class, multiplicity preserved. Only rational currents are supported.
pub fn pushforward_current(analysis: &Analysis, mu: &CurrentApprox) -> Result<CurrentApprox> {
    let Provenance::Rational { word, .. } = &mu.provenance else {
        return Err(Error::domain(
            "pushforward is only defined for rational currents here",
        ));
    };
    let window_len = mu.window.iter().map(Vec::len).max().unwrap_or(2);
    let circuit = analysis.map().graph().circuit_of_word(word)?;
    let image = analysis.map().apply_to_circuit(&circuit)?;
    rational_current(analysis, &image, window_len)
}

/// One more iteration stage of an iterate-approximated current: the
/// finite-stage stand-in for its pushforward (projectively, the next
/// normalized stage).
pub fn advance_iterate_current(
    analysis: &Analysis,
    mu: &CurrentApprox,
    f_subgraph: &BTreeSet<u32>,
) -> Result<CurrentApprox> {
    let Provenance::Iterate { seed, n } = &mu.provenance else {
        return Err(Error::domain("expected an iterate-approximated current"));
    };
    let word = analysis.map().iterate_word(seed, n + 1, Some(ITERATE_CAP))?;
    Ok(CurrentApprox {
        window: mu.window.clone(),
        counts: counts_of_word(analysis, &word, &mu.window, f_subgraph)?,
        provenance: Provenance::Iterate {
            seed: seed.clone(),
            n: n + 1,
        },
    })
}

/// One extremal of the attracting simplex: an expanding unit, its
/// approximated current normalized to relative norm one, and its growth
/// rate.
#[derive(Debug, Clone)]
pub struct Extremal {
    pub unit: SplittingUnit,
    pub current: CurrentApprox,
    pub lambda: f64,
}

#[derive(Debug, Clone)]
pub struct AttractingSimplex {
    pub extremals: Vec<Extremal>,
    pub window: usize,
}

/// The simplex spanned by the attracting currents of all expanding units,
/// each normalized to relative norm one at the window resolution.
pub fn attracting_simplex(
    analysis: &Analysis,
    window: usize,
    f_subgraph: &BTreeSet<u32>,
) -> Result<AttractingSimplex> {
    // Extremal words a few hundred thousand edges long put the stage error
    // well below the distance tolerances at a fraction of the cap's cost.
    const SIMPLEX_LEN_CAP: usize = 300_000;
    let mut extremals = Vec::new();
    for unit in expanding_units(analysis) {
        let mut w = unit.expand(analysis);
        let mut stage = 0usize;
        while stage < 40 {
            let next = analysis.map().apply_to_word(&w);
            if next.len() > SIMPLEX_LEN_CAP {
                break;
            }
            w = next;
            stage += 1;
        }
        let approx = approx_attracting_current(analysis, &unit, stage, window, f_subgraph)?;
        let fs = current_functionals(analysis, &approx.current, f_subgraph)?;
        if fs.norm_f.is_zero() {
            return Err(Error::numeric("extremal with zero relative norm"));
        }
        let normalized = approx.current.scale(&fs.norm_f.recip());
        let lambda = stretch_factor(analysis, &unit, f_subgraph)?.lambda;
        extremals.push(Extremal {
            unit,
            current: CurrentApprox {
                provenance: approx.current.provenance.clone(),
                ..normalized
            },
            lambda,
        });
    }
    if extremals.is_empty() {
        return Err(Error::domain("no expanding units: nothing attracts"));
    }
    Ok(AttractingSimplex {
        extremals,
        window,
    })
}

fn normalized_vector(
    analysis: &Analysis,
    mu: &CurrentApprox,
    f_subgraph: &BTreeSet<u32>,
) -> Result<Vec<f64>> {
    let fs = current_functionals(analysis, mu, f_subgraph)?;
    if fs.norm_f.is_zero() {
        return Err(Error::domain("zero relative norm: no projective class"));
    }
    mu.window
        .iter()
        .map(|g| {
            (mu.counts[g].clone() / fs.norm_f.clone())
                .to_f64()
                .ok_or_else(|| Error::numeric("count does not fit in a float"))
        })
        .collect()
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Window sup-distance from a current to the best convex combination of
/// the simplex extremals (both sides normalized to relative norm one).
pub fn simplex_distance(
    analysis: &Analysis,
    mu: &CurrentApprox,
    simplex: &AttractingSimplex,
    f_subgraph: &BTreeSet<u32>,
) -> Result<f64> {
    let target = normalized_vector(analysis, mu, f_subgraph)?;
    let verts: Vec<Vec<f64>> = simplex
        .extremals
        .iter()
        .map(|e| normalized_vector(analysis, &e.current, f_subgraph))
        .collect::<Result<_>>()?;
    for v in &verts {
        if v.len() != target.len() {
            return Err(Error::domain("window mismatch between current and simplex"));
        }
    }
    let k = verts.len();
    if k == 1 {
        return Ok(sup_distance(&target, &verts[0]));
    }
    let eval = |c: &[f64]| -> f64 {
        let combo: Vec<f64> = (0..target.len())
            .map(|i| c.iter().zip(&verts).map(|(ci, v)| ci * v[i]).sum())
            .collect();
        sup_distance(&target, &combo)
    };
    // Convex objective over the simplex: coordinate-wise shrinking grid
    // search refined to tolerance 1e-9.
    let mut best = vec![1.0 / k as f64; k];
    let mut best_val = eval(&best);
    let mut step = 0.5f64;
    while step > 1e-9 {
        let mut improved = true;
        while improved {
            improved = false;
            for i in 0..k {
                for j in 0..k {
                    if i == j {
                        continue;
                    }
                    // Move mass from j to i.
                    let delta = step.min(best[j]);
                    if delta <= 0.0 {
                        continue;
                    }
                    let mut cand = best.clone();
                    cand[i] += delta;
                    cand[j] -= delta;
                    let v = eval(&cand);
                    if v < best_val {
                        best_val = v;
                        best = cand;
                        improved = true;
                    }
                }
            }
        }
        step /= 2.0;
    }
    Ok(best_val)
}

/// Constants of the split-goodness functional: the expanding power, the
/// cancellation bound of that power, and the context radius.
#[derive(Debug, Clone, Copy)]
pub struct CsConstants {
    /// Power making every expanding edge's exponential length at least
    /// `4C+1`.
    pub big_n: usize,
    /// Stored cancellation bound of the power (twice the empirical
    /// maximum over bounded concatenations).
    pub c_n: usize,
    /// Context radius: longest one-edge image under the power times
    /// `c_n + 1`.
    pub big_l: usize,
}

pub fn cs_constants(analysis: &Analysis) -> Result<CsConstants> {
    let table = constants(analysis)?;
    let target = 4 * table.c + 1;
    let gpg_prime = analysis.pg().gpg_prime();
    let outside: Vec<i32> = (1..=analysis.map().graph().n_edges() as i32)
        .filter(|e| !gpg_prime.contains(&(*e as u32)))
        .collect();
    if outside.is_empty() {
        return Err(Error::domain("no expanding edges: the functional is trivial"));
    }
    let map = analysis.map();
    let mut big_n = 0usize;
    let mut words: Vec<Vec<i32>> = outside.iter().map(|&e| vec![e]).collect();
    loop {
        let all_long = words
            .iter()
            .map(|w| lengths(analysis, w, false, &BTreeSet::new()).map(|l| l.ell_exp))
            .collect::<Result<Vec<_>>>()?
            .iter()
            .all(|&le| le >= target);
        if all_long {
            break;
        }
        big_n += 1;
        if big_n > 64 {
            return Err(Error::cap("expanding power search exceeded 64 iterations"));
        }
        for w in words.iter_mut() {
            *w = map.apply_to_word(w);
        }
    }
    // Cancellation of the power over bounded reduced concatenations.
    let halves = crate::lengths::reduced_paths_up_to(map, crate::lengths::BCC_HALF_BOUND);
    let mut emp = 0usize;
    for r1 in &halves {
        let last = *r1.last().unwrap();
        let a = map.iterate_word(r1, big_n, None)?;
        for r2 in &halves {
            if r2[0] == -last || map.graph().origin(r2[0]) != map.graph().terminus(last) {
                continue;
            }
            let b = map.iterate_word(r2, big_n, None)?;
            let mut joined = r1.clone();
            joined.extend_from_slice(r2);
            let ab = map.iterate_word(&joined, big_n, None)?;
            emp = emp.max((a.len() + b.len() - ab.len()) / 2);
        }
    }
    let c_n = 2 * emp;
    let lip = (1..=map.graph().n_edges() as i32)
        .map(|e| map.iterate_word(&[e], big_n, None).map(|w| w.len()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(1);
    Ok(CsConstants {
        big_n,
        c_n,
        big_l: lip * (c_n + 1),
    })
}

/// Per-juncture legality of a word, `legal[i]` for the turn taken between
/// positions `i-1` and `i`.
fn juncture_legality(analysis: &Analysis, w: &[i32]) -> Result<Vec<bool>> {
    let map = analysis.map();
    let mut out = vec![true; w.len()];
    for i in 1..w.len() {
        let t = Turn::new(-w[i - 1], w[i]);
        out[i] = matches!(map.turn_legality(t)?, TurnLegality::Legal);
    }
    Ok(out)
}

/// Window oracle over one fixed word: answers, in constant time per
/// query, whether position `i` has a completely split context of radius at
/// least `big_l` on both sides with the edge at `i` standing alone.
///
/// The word is parsed into splitting units once. A context window is a
/// stretch between two split boundaries (unit junctures whose turns are
/// legal, or word ends when permitted) containing no illegal juncture
/// between units; the slice between such boundaries is a concatenation of
/// units joined by legal turns, hence completely split.
struct CsWindowOracle {
    /// Breakpoint of the parse at this position whose turn is legal.
    legal_bp: Vec<bool>,
    /// Running count of illegal breakpoints at junctures `<= p`.
    ill_prefix: Vec<usize>,
    /// Can the left window edge at `p` reach a boundary (legal breakpoint
    /// at or before `p`, or the word start) without crossing an illegal
    /// breakpoint?
    left_ok: Vec<bool>,
    /// Symmetric condition for the right window edge at `p`.
    right_ok: Vec<bool>,
    len: usize,
    parsed: bool,
}

impl CsWindowOracle {
    fn new(analysis: &Analysis, word: &[i32], ends_are_boundaries: bool) -> Result<CsWindowOracle> {
        let n = word.len();
        let legal = juncture_legality(analysis, word)?;
        let mut legal_bp = vec![false; n + 1];
        let mut illegal_bp = vec![false; n + 1];
        let parsed = match parse_splitting(analysis, word, true) {
            Some(units) => {
                let ap = AnnotatedPath::new(analysis, word.to_vec(), units, SplitMode::PgRelative)?;
                for b in ap.breakpoints(analysis) {
                    if legal[b] {
                        legal_bp[b] = true;
                    } else {
                        illegal_bp[b] = true;
                    }
                }
                true
            }
            None => false,
        };
        let mut ill_prefix = vec![0usize; n + 1];
        for p in 1..=n {
            ill_prefix[p] = ill_prefix[p - 1] + usize::from(illegal_bp[p]);
        }
        let mut left_ok = vec![false; n + 1];
        for p in 0..=n {
            left_ok[p] = if legal_bp[p] {
                true
            } else if illegal_bp[p] {
                false
            } else if p == 0 {
                ends_are_boundaries
            } else {
                left_ok[p - 1]
            };
        }
        let mut right_ok = vec![false; n + 1];
        for p in (0..=n).rev() {
            right_ok[p] = if legal_bp[p] {
                true
            } else if illegal_bp[p] {
                false
            } else if p == n {
                ends_are_boundaries
            } else {
                right_ok[p + 1]
            };
        }
        Ok(CsWindowOracle {
            legal_bp,
            ill_prefix,
            left_ok,
            right_ok,
            len: n,
            parsed,
        })
    }

    /// The edge at `i` stands alone between legal breakpoints, both
    /// radius-`big_l` window edges reach a split boundary, and no illegal
    /// breakpoint lies strictly inside the window.
    fn position_ok(&self, i: usize, big_l: usize) -> bool {
        self.parsed
            && i >= big_l
            && i + 1 + big_l <= self.len
            && self.legal_bp[i]
            && self.legal_bp[i + 1]
            && self.left_ok[i - big_l]
            && self.right_ok[i + 1 + big_l]
            && self.ill_prefix[i + big_l] == self.ill_prefix[i - big_l]
    }
}

/// The split goodness of a current: the measure of radius-`L` completely
/// split contexts around expanding edges, over the exponential mass of the
/// `N`-th pushforward. Exact for rational currents; iterate-approximated
/// currents are evaluated on their finite word.
pub fn cs_goodness(analysis: &Analysis, mu: &CurrentApprox) -> Result<BigRational> {
    let cs = cs_constants(analysis)?;
    let gpg_prime = analysis.pg().gpg_prime();
    let map = analysis.map();
    match &mu.provenance {
        Provenance::Rational { word, .. } => {
            let circuit = map.graph().circuit_of_word(word)?;
            let w = circuit.edges().to_vec();
            let m = w.len();
            // Periodic extension with a spare period on each side of the
            // examined middle period.
            let copies = 2 * (cs.big_l / m + 2) + 1;
            let ext: Vec<i32> = w.iter().cycle().take(m * copies).copied().collect();
            let oracle = CsWindowOracle::new(analysis, &ext, false)?;
            let q = cs.big_l / m + 2;
            let mut num = 0usize;
            for i in 0..m {
                if gpg_prime.contains(&w[i].unsigned_abs()) {
                    continue;
                }
                if oracle.position_ok(i + m * q, cs.big_l) {
                    num += 1;
                }
            }
            let mut image = circuit;
            for _ in 0..cs.big_n {
                image = map.apply_to_circuit(&image)?;
            }
            let den = lengths(analysis, image.edges(), true, &BTreeSet::new())?.ell_exp;
            if den == 0 {
                return Err(Error::domain(
                    "polynomially growing current: the functional is undefined",
                ));
            }
            Ok(BigRational::new(
                BigInt::from(num as u64),
                BigInt::from(den as u64),
            ))
        }
        Provenance::Iterate { seed, n } => {
            let u = map.iterate_word(seed, *n, Some(ITERATE_CAP))?;
            if u.len() < 2 * cs.big_l + 2 {
                return Err(Error::domain(
                    "iterate shorter than the context window; raise the stage",
                ));
            }
            let oracle = CsWindowOracle::new(analysis, &u, true)?;
            let mut num = 0usize;
            for i in cs.big_l..u.len() - cs.big_l - 1 {
                if gpg_prime.contains(&u[i].unsigned_abs()) {
                    continue;
                }
                if oracle.position_ok(i, cs.big_l) {
                    num += 1;
                }
            }
            let img = map.iterate_word(&u, cs.big_n, Some(ITERATE_CAP))?;
            let den = lengths(analysis, &img, false, &BTreeSet::new())?.ell_exp;
            if den == 0 {
                return Err(Error::domain(
                    "polynomially growing current: the functional is undefined",
                ));
            }
            Ok(BigRational::new(
                BigInt::from(num as u64),
                BigInt::from(den as u64),
            ))
        }
        Provenance::Mix => Err(Error::domain(
            "split goodness needs a rational or iterate provenance",
        )),
    }
}

/// One row of the norm-growth audit.
#[derive(Debug, Clone)]
pub struct NormGrowthRow {
    pub seed: Vec<i32>,
    pub m: usize,
    pub norm_before: u64,
    pub norm_after: u64,
    /// Exact integer comparison `norm_after >= 3 * norm_before`.
    pub tripled: bool,
}

#[derive(Debug, Clone)]
pub struct NormGrowthTable {
    pub power: usize,
    pub rows: Vec<NormGrowthRow>,
    /// Geometric mean of post-burn-in ratios is at least three.
    pub audit_pass: bool,
}

/// Iterates each seed under the `3K`-expanding power of the map and
/// tabulates relative-norm ratios; seeds whose goodness stays below the
/// threshold after burn-in are dropped.
pub fn norm_growth_experiment(
    analysis: &Analysis,
    seeds: &[Vec<i32>],
    m_range: usize,
    delta: Ratio<u64>,
    burn_in: usize,
    f_subgraph: &BTreeSet<u32>,
) -> Result<NormGrowthTable> {
    let power = constants(analysis)?.n3k;
    if power == 0 {
        return Err(Error::domain("the map has no expanding power"));
    }
    let map = analysis.map();
    let mut rows = Vec::new();
    let mut log_sum = 0.0f64;
    let mut log_n = 0usize;
    for seed in seeds {
        let mut c = map.graph().circuit_of_word(seed)?;
        let mut burned = c.clone();
        let mut ok = true;
        for _ in 0..burn_in {
            for _ in 0..power {
                burned = map.apply_to_circuit(&burned)?;
                if burned.len() > 2_000_000 {
                    break;
                }
            }
        }
        if crate::lengths::goodness_lower(analysis, &burned)? < delta {
            ok = false;
        }
        if !ok {
            continue;
        }
        let mut before = lengths(analysis, c.edges(), true, f_subgraph)?.ell_f as u64;
        for m in 1..=m_range {
            for _ in 0..power {
                c = map.apply_to_circuit(&c)?;
            }
            if c.len() > 5_000_000 {
                break;
            }
            let after = lengths(analysis, c.edges(), true, f_subgraph)?.ell_f as u64;
            rows.push(NormGrowthRow {
                seed: seed.clone(),
                m,
                norm_before: before,
                norm_after: after,
                tripled: after >= 3 * before,
            });
            if m > burn_in && before > 0 {
                log_sum += (after as f64 / before as f64).ln();
                log_n += 1;
            }
            before = after;
        }
    }
    let audit_pass = log_n > 0 && (log_sum / log_n as f64) >= 3.0f64.ln();
    Ok(NormGrowthTable {
        power,
        rows,
        audit_pass,
    })
}

/// Length of a circuit after coning off the peripheral parts: maximal
/// subpaths carried by a peripheral core count two, everything else counts
/// its edges. Entirely peripheral circuits count two by convention.
pub fn electrified_length(analysis: &Analysis, circuit: &Circuit) -> Result<usize> {
    if circuit.len() == 0 {
        return Err(Error::domain("the trivial circuit has no electrified length"));
    }
    let sys = &analysis.pg().poly_system;
    if sys.is_peripheral(circuit.edges()) {
        return Ok(2);
    }
    let carried = |p: &[i32]| -> bool {
        sys.components.iter().any(|(core, _)| {
            (0..core.n_vertices()).any(|v| core.trace(v, p).is_some())
        })
    };
    let w = circuit.edges();
    let m = w.len();
    // Longest carried run from each start, cyclically, capped below a full
    // period.
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for i in 0..m {
        let mut best = 0usize;
        let mut p: Vec<i32> = Vec::new();
        for j in 0..m - 1 {
            p.push(w[(i + j) % m]);
            if carried(&p) {
                best = j + 1;
            } else if !carried(&p[..p.len() - 1]) && p.len() > 1 {
                break;
            }
        }
        if best >= 2 {
            runs.push((best, i));
        }
    }
    runs.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut covered = vec![false; m];
    let mut total = 0usize;
    for (len, start) in runs {
        if (0..len).any(|j| covered[(start + j) % m]) {
            continue;
        }
        for j in 0..len {
            covered[(start + j) % m] = true;
        }
        total += 2;
    }
    total += covered.iter().filter(|&&c| !c).count();
    Ok(total)
}

/// One recorded stage of a North-South trace.
#[derive(Debug, Clone)]
pub struct NsStep {
    pub n: usize,
    pub ell_exp: usize,
    pub ell_f: usize,
    pub goodness: Ratio<u64>,
    pub cs_goodness: Option<BigRational>,
    pub dist_plus: f64,
    pub dist_minus: f64,
    /// Relative-norm ratio of this forward stage against the previous one.
    pub ratio_f: f64,
}

#[derive(Debug, Clone)]
pub struct NsTrace {
    pub seed: Vec<i32>,
    /// Reason the seed was skipped, when it was.
    pub skipped: Option<String>,
    pub steps: Vec<NsStep>,
    /// First stage whose forward distance drops below the tolerance.
    pub success_plus: Option<usize>,
    pub success_minus: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct NsOptions {
    pub nmax: usize,
    pub window: usize,
    pub eps: f64,
    pub threads: usize,
    /// Stop recording once a circuit outgrows this length.
    pub len_cap: usize,
    /// Compute the split goodness only while the circuit is at most this
    /// long (the context windows make it costly on long circuits).
    pub cs_len_cap: usize,
}

impl Default for NsOptions {
    fn default() -> Self {
        NsOptions {
            nmax: 30,
            window: 2,
            eps: 1e-2,
            threads: 1,
            len_cap: 200_000,
            cs_len_cap: 0,
        }
    }
}

/// Checks that the supplied pair really are mutually inverse on conjugacy
/// classes, on a fixed sample of random circuits.
pub fn check_inverse_pair(analysis: &Analysis, inverse: &Analysis) -> Result<()> {
    let g = analysis.map().graph();
    if g.n_edges() != inverse.map().graph().n_edges() {
        return Err(Error::validation("inverse representative has a different graph"));
    }
    let rank = g.n_edges() as i32;
    let mut rng = ChaCha8Rng::seed_from_u64(0x1715);
    for _ in 0..20 {
        let len = rng.gen_range(2..8);
        let mut w: Vec<i32> = Vec::new();
        while w.len() < len {
            let mut e = rng.gen_range(1..=rank);
            if rng.gen_bool(0.5) {
                e = -e;
            }
            if w.last() == Some(&-e) {
                continue;
            }
            w.push(e);
        }
        let Ok(c) = g.circuit_of_word(&w) else { continue };
        if c.len() == 0 {
            continue;
        }
        let fwd = analysis.map().apply_to_circuit(&c)?;
        let back = inverse.map().apply_to_circuit(&fwd)?;
        if back.edges() != c.edges() {
            return Err(Error::validation(format!(
                "maps are not mutually inverse on the class of {w:?}"
            )));
        }
    }
    Ok(())
}

fn ns_single(
    analysis: &Analysis,
    inverse: &Analysis,
    plus: &AttractingSimplex,
    minus: &AttractingSimplex,
    seed: &[i32],
    opts: &NsOptions,
    f_subgraph: &BTreeSet<u32>,
) -> Result<NsTrace> {
    let g = analysis.map().graph();
    let c0 = g.circuit_of_word(seed)?;
    if c0.len() == 0 {
        return Ok(NsTrace {
            seed: seed.to_vec(),
            skipped: Some("trivial class".into()),
            steps: Vec::new(),
            success_plus: None,
            success_minus: None,
        });
    }
    if analysis.pg().poly_system.is_peripheral(c0.edges()) {
        return Ok(NsTrace {
            seed: seed.to_vec(),
            skipped: Some("peripheral class".into()),
            steps: Vec::new(),
            success_plus: None,
            success_minus: None,
        });
    }
    if lengths(analysis, c0.edges(), true, &BTreeSet::new())?.ell_exp == 0 {
        return Ok(NsTrace {
            seed: seed.to_vec(),
            skipped: Some("polynomially growing class".into()),
            steps: Vec::new(),
            success_plus: None,
            success_minus: None,
        });
    }
    let mut fwd = c0.clone();
    let mut bwd = c0.clone();
    let mut steps = Vec::new();
    let mut success_plus = None;
    let mut success_minus = None;
    let mut prev_norm: Option<u64> = None;
    for n in 0..=opts.nmax {
        if fwd.len() > opts.len_cap || bwd.len() > opts.len_cap {
            break;
        }
        let l = lengths(analysis, fwd.edges(), true, f_subgraph)?;
        let mu = rational_current(analysis, &fwd, opts.window)?;
        let nu = rational_current(inverse, &bwd, opts.window)?;
        let dist_plus = simplex_distance(analysis, &mu, plus, f_subgraph)?;
        let dist_minus = simplex_distance(inverse, &nu, minus, f_subgraph)?;
        let goodness = crate::lengths::goodness_lower(analysis, &fwd)?;
        let cs = if fwd.len() <= opts.cs_len_cap {
            cs_goodness(analysis, &mu).ok()
        } else {
            None
        };
        let ratio_f = match prev_norm {
            Some(p) if p > 0 => l.ell_f as f64 / p as f64,
            _ => f64::NAN,
        };
        prev_norm = Some(l.ell_f as u64);
        if success_plus.is_none() && dist_plus < opts.eps {
            success_plus = Some(n);
        }
        if success_minus.is_none() && dist_minus < opts.eps {
            success_minus = Some(n);
        }
        steps.push(NsStep {
            n,
            ell_exp: l.ell_exp,
            ell_f: l.ell_f,
            goodness,
            cs_goodness: cs,
            dist_plus,
            dist_minus,
            ratio_f,
        });
        if n < opts.nmax {
            fwd = analysis.map().apply_to_circuit(&fwd)?;
            bwd = inverse.map().apply_to_circuit(&bwd)?;
        }
    }
    Ok(NsTrace {
        seed: seed.to_vec(),
        skipped: None,
        steps,
        success_plus,
        success_minus,
    })
}

/// Iterates each seed forward under the map and backward under the inverse
/// representative, recording distances to the attracting and repelling
/// simplices; seeds in the peripheral or polynomially growing part are
/// skipped with a reason.
pub fn ns_experiment(
    analysis: &Analysis,
    inverse: &Analysis,
    seeds: &[Vec<i32>],
    opts: &NsOptions,
    f_subgraph: &BTreeSet<u32>,
) -> Result<Vec<NsTrace>> {
    check_inverse_pair(analysis, inverse)?;
    let window = opts.window;
    let plus = attracting_simplex(analysis, window, f_subgraph)?;
    let minus = attracting_simplex(inverse, window, f_subgraph)?;
    let threads = opts.threads.max(1).min(seeds.len().max(1));
    if threads <= 1 {
        return seeds
            .iter()
            .map(|s| ns_single(analysis, inverse, &plus, &minus, s, opts, f_subgraph))
            .collect();
    }
    let mut out: Vec<Option<Result<NsTrace>>> = (0..seeds.len()).map(|_| None).collect();
    let chunk = seeds.len().div_ceil(threads);
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (t, batch) in seeds.chunks(chunk).enumerate() {
            let plus = &plus;
            let minus = &minus;
            handles.push(scope.spawn(move || {
                batch
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        (
                            t * chunk + i,
                            ns_single(analysis, inverse, plus, minus, s, opts, f_subgraph),
                        )
                    })
                    .collect::<Vec<_>>()
            }));
        }
        for h in handles {
            for (i, r) in h.join().expect("worker thread panicked") {
                out[i] = Some(r);
            }
        }
    });
    out.into_iter().map(|r| r.expect("all seeds processed")).collect()
}

/// CSV rendering of North-South traces, one row per recorded stage.
pub fn ns_traces_to_csv(traces: &[NsTrace], ids: &[String]) -> Result<String> {
    if traces.is_empty() {
        return Err(Error::domain("no traces to export"));
    }
    let mut out = String::from("seed,n,ell_exp,ell_F,goodness,cs_goodness,dist_plus,dist_minus,ratio_F\n");
    for t in traces {
        let seed = crate::formats::encode_word(&t.seed, ids);
        for s in &t.steps {
            let cs = s
                .cs_goodness
                .as_ref()
                .map(|r| r.to_string())
                .unwrap_or_default();
            let ratio = if s.ratio_f.is_nan() {
                String::new()
            } else {
                format!("{:.6}", s.ratio_f)
            };
            out.push_str(&format!(
                "{seed},{},{},{},{},{cs},{:.6},{:.6},{ratio}\n",
                s.n, s.ell_exp, s.ell_f, s.goodness, s.dist_plus, s.dist_minus
            ));
        }
    }
    Ok(out)
}

/// The inverse of a word under a supplied inverse representative: helper
/// for cross-representative comparisons.
pub fn inverse_word(word: &[i32]) -> Vec<i32> {
    invert_word(word)
}
