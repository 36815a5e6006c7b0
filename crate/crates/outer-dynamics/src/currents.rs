//! Rational currents as finite occurrence-count windows, the pairing
//! `⟨γ,μ⟩`, the simplicial and exponential-length functionals, the
//! strict-containment partitions of the Nielsen family, and the window
//! pseudo-metric on projectivized currents.
//!
//! A current is represented by its values on every reduced path up to a
//! window length.  Convention, fixed once: `⟨γ,μ⟩` counts occurrences of
//! `γ` in both orientations, so `⟨γ,μ⟩ = ⟨γ⁻¹,μ⟩` holds by construction
//! and a palindromic pattern counts twice per position.

use crate::error::{Error, Result};
use crate::graph::{invert_word, is_reduced_word, Circuit};
use crate::lengths::{occurrences, reduced_paths_up_to};
use crate::nielsen::Analysis;
use num::rational::BigRational;
use num::{BigInt, Zero};
use std::collections::{BTreeMap, BTreeSet};

/// `⟨γ,δ⟩`: unoriented occurrence count of the reduced path `γ` in `δ`
/// (cyclically when `cyclic`).
pub fn count_occurrences(gamma: &[i32], delta: &[i32], cyclic: bool) -> usize {
    let inv = invert_word(gamma);
    occurrences(delta, gamma, cyclic).len() + occurrences(delta, &inv, cyclic).len()
}

/// Where a current's counts came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    /// Counting current of a conjugacy class, scaled by the root power.
    Rational { word: Vec<i32>, multiplicity: usize },
    /// Normalized occurrence counts of an iterate of a seed circuit.
    Iterate { seed: Vec<i32>, n: usize },
    Mix,
}

/// A finite-window approximation of a current: exact rational occurrence
/// counts on every reduced path up to the window length.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentApprox {
    /// Window paths, closed under inversion.
    pub window: Vec<Vec<i32>>,
    pub counts: BTreeMap<Vec<i32>, BigRational>,
    pub provenance: Provenance,
}

impl CurrentApprox {
    /// The count of a window path; zero for paths outside the window is a
    /// structural error, surfaced by `get`.
    pub fn get(&self, gamma: &[i32]) -> Result<&BigRational> {
        self.counts
            .get(gamma)
            .ok_or_else(|| Error::structural("path outside the current's window"))
    }

    /// The zero current on the given window.
    pub fn zero(window: Vec<Vec<i32>>) -> Self {
        let counts = window
            .iter()
            .map(|w| (w.clone(), BigRational::zero()))
            .collect();
        CurrentApprox {
            window,
            counts,
            provenance: Provenance::Mix,
        }
    }

    /// Pointwise sum; the windows must agree.
    pub fn add(&self, other: &CurrentApprox) -> Result<CurrentApprox> {
        if self.window != other.window {
            return Err(Error::domain("window mismatch"));
        }
        let counts = self
            .counts
            .iter()
            .map(|(k, v)| (k.clone(), v + &other.counts[k]))
            .collect();
        Ok(CurrentApprox {
            window: self.window.clone(),
            counts,
            provenance: Provenance::Mix,
        })
    }

    /// Pointwise scaling by a nonnegative rational.
    pub fn scale(&self, c: &BigRational) -> CurrentApprox {
        let counts = self
            .counts
            .iter()
            .map(|(k, v)| (k.clone(), v * c))
            .collect();
        CurrentApprox {
            window: self.window.clone(),
            counts,
            provenance: Provenance::Mix,
        }
    }
}

/// Minimum window length making every functional well-defined: covers the
/// edges, the family words and the strict-containment paths.
pub fn min_window_len(analysis: &Analysis, requested: usize) -> usize {
    let mut len = 2usize.max(requested);
    for p in &analysis.pg().npg {
        len = len.max(p.edges.len());
    }
    for entry in &npg_plusplus(analysis).entries {
        for w in &entry.lr {
            len = len.max(w.len());
        }
    }
    len
}

/// All reduced paths up to the auto-sized window length.
pub fn window_paths(analysis: &Analysis, requested: usize) -> Vec<Vec<i32>> {
    reduced_paths_up_to(analysis.map(), min_window_len(analysis, requested))
}

/// The counting current of a nontrivial circuit: counts are occurrence
/// pairings against the root circuit, scaled by the root power.
pub fn rational_current(
    analysis: &Analysis,
    circuit: &Circuit,
    window_len: usize,
) -> Result<CurrentApprox> {
    if circuit.len() == 0 {
        return Err(Error::domain("the trivial circuit carries no current"));
    }
    let (root, k) = circuit.root_power();
    let window = window_paths(analysis, window_len);
    let counts = window
        .iter()
        .map(|g| {
            let c = count_occurrences(g, root.edges(), true) * k;
            (g.clone(), BigRational::from_integer(BigInt::from(c)))
        })
        .collect();
    Ok(CurrentApprox {
        window,
        counts,
        provenance: Provenance::Rational {
            word: circuit.edges().to_vec(),
            multiplicity: k,
        },
    })
}

/// Strict-containment data of one family element.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PlusPlusEntry {
    /// Minimal strictly-containing elements that are single fixed paths
    /// (indices into the family).
    pub inp: Vec<usize>,
    /// Minimal elements extending on the left (`γ₁γ`).
    pub left: Vec<usize>,
    /// Minimal elements extending on the right (`γγ₂`).
    pub right: Vec<usize>,
    /// Two-sided compounds `γ₁γγ₂` assembled from left/right pairs.
    pub lr: Vec<Vec<i32>>,
}

/// Strict-containment partitions for every element of a path family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NpgPlusPlus {
    /// Family words (one orientation per element).
    pub family: Vec<Vec<i32>>,
    /// Parallel to `family`.
    pub entries: Vec<PlusPlusEntry>,
}

/// Computes the partitions for an explicit family; `inp_words` marks which
/// family members are single fixed paths.
pub fn npg_plusplus_of(family: &[Vec<i32>], inp_words: &[Vec<i32>]) -> NpgPlusPlus {
    let is_inp = |w: &[i32]| {
        inp_words
            .iter()
            .any(|p| p == w || *p == invert_word(w))
    };
    let contains = |outer: &[i32], inner: &[i32]| -> Vec<usize> {
        let mut occ = occurrences(outer, inner, false);
        occ.extend(occurrences(outer, &invert_word(inner), false));
        occ.sort_unstable();
        occ.dedup();
        occ
    };
    let mut entries = Vec::new();
    for (i, gamma) in family.iter().enumerate() {
        // Strictly containing elements.
        let sup: Vec<usize> = family
            .iter()
            .enumerate()
            .filter(|(j, delta)| {
                *j != i && delta.len() > gamma.len() && !contains(delta, gamma).is_empty()
            })
            .map(|(j, _)| j)
            .collect();
        // Minimal by containment among the superset elements.
        let minimal: Vec<usize> = sup
            .iter()
            .copied()
            .filter(|&j| {
                !sup.iter().any(|&j2| {
                    j2 != j
                        && family[j].len() > family[j2].len()
                        && !contains(&family[j], &family[j2]).is_empty()
                })
            })
            .collect();
        let mut entry = PlusPlusEntry::default();
        for j in minimal {
            let delta = &family[j];
            if is_inp(delta) {
                entry.inp.push(j);
                continue;
            }
            for pos in contains(delta, gamma) {
                if pos == 0 {
                    entry.right.push(j);
                } else if pos + gamma.len() == delta.len() {
                    entry.left.push(j);
                } else {
                    entry.inp.push(j);
                }
            }
        }
        entry.left.sort_unstable();
        entry.left.dedup();
        entry.right.sort_unstable();
        entry.right.dedup();
        entry.inp.sort_unstable();
        entry.inp.dedup();
        // Two-sided compounds γ₁γγ₂.
        for &l in &entry.left {
            for &r in &entry.right {
                let left_word = &family[l];
                let right_word = &family[r];
                let mut w = left_word[..left_word.len() - gamma.len()].to_vec();
                w.extend_from_slice(gamma);
                w.extend_from_slice(&right_word[gamma.len()..]);
                if is_reduced_word(&w) {
                    entry.lr.push(w);
                }
            }
        }
        entries.push(entry);
    }
    NpgPlusPlus {
        family: family.to_vec(),
        entries,
    }
}

/// Partitions for the map's own family.
pub fn npg_plusplus(analysis: &Analysis) -> NpgPlusPlus {
    let family: Vec<Vec<i32>> = analysis.pg().npg.iter().map(|p| p.edges.clone()).collect();
    let inp_words: Vec<Vec<i32>> = analysis
        .inps()
        .eg_inps
        .iter()
        .map(|r| r.path.edges.clone())
        .collect();
    npg_plusplus_of(&family, &inp_words)
}

/// The three linear functionals of a current.
#[derive(Debug, Clone, PartialEq)]
pub struct Functionals {
    /// Total oriented-edge mass.
    pub norm: BigRational,
    /// Exponential-length functional.
    pub psi0: BigRational,
    /// Subgraph-relative simplicial length (plain simplicial length for
    /// the empty subgraph).
    pub norm_f: BigRational,
}

/// Family words in both orientations.
fn closed_family(analysis: &Analysis) -> Vec<Vec<i32>> {
    let mut out = Vec::new();
    for p in &analysis.pg().npg {
        out.push(p.edges.clone());
        out.push(invert_word(&p.edges));
    }
    out
}

/// Per-oriented-edge summands of the exponential-length functional (before
/// the global `1/2`); each is nonnegative on counting currents.
pub fn psi0_edge_summands(
    analysis: &Analysis,
    mu: &CurrentApprox,
) -> Result<BTreeMap<i32, BigRational>> {
    let gpg_prime = analysis.pg().gpg_prime();
    let family = closed_family(analysis);
    let mut out = BTreeMap::new();
    for e in analysis.map().graph().oriented_edges() {
        if gpg_prime.contains(&e.unsigned_abs()) {
            continue;
        }
        let mut s = mu.get(&[e])?.clone();
        for g in &family {
            let n_e = g.iter().filter(|&&x| x == e).count();
            if n_e > 0 {
                s -= mu.get(g)?.clone() * BigRational::from_integer(BigInt::from(n_e));
            }
        }
        out.insert(e, s);
    }
    Ok(out)
}

/// Evaluates the three functionals exactly.  `f_subgraph` is the
/// designated subgraph of the relative length (empty for the plain
/// simplicial length).
pub fn current_functionals(
    analysis: &Analysis,
    mu: &CurrentApprox,
    f_subgraph: &BTreeSet<u32>,
) -> Result<Functionals> {
    let graph = analysis.map().graph();
    let mut norm = BigRational::zero();
    for e in graph.oriented_edges() {
        norm += mu.get(&[e])?.clone();
    }
    let two = BigRational::from_integer(BigInt::from(2));
    let psi0 = psi0_edge_summands(analysis, mu)?
        .into_values()
        .sum::<BigRational>()
        / two.clone();
    // Relative simplicial length: edges outside the subgraph-restricted
    // polynomial part, discounting the subgraph-supported family.
    let gpg_prime = analysis.pg().gpg_prime();
    let excluded: BTreeSet<u32> = gpg_prime.intersection(f_subgraph).copied().collect();
    let mut s = BigRational::zero();
    for e in graph.oriented_edges() {
        if !excluded.contains(&e.unsigned_abs()) {
            s += mu.get(&[e])?.clone();
        }
    }
    let mut s2 = BigRational::zero();
    for g in closed_family(analysis) {
        if !g.iter().all(|e| f_subgraph.contains(&e.unsigned_abs())) {
            continue;
        }
        let lo = g
            .iter()
            .filter(|e| !excluded.contains(&e.unsigned_abs()))
            .count();
        s2 += mu.get(&g)?.clone() * BigRational::from_integer(BigInt::from(lo));
    }
    let norm_f = (s - s2) / two;
    Ok(Functionals { norm, psi0, norm_f })
}

/// True when the current's exponential-length functional vanishes exactly.
pub fn in_kpg(analysis: &Analysis, mu: &CurrentApprox) -> Result<bool> {
    let f = current_functionals(analysis, mu, &BTreeSet::new())?;
    Ok(f.psi0.is_zero())
}

/// Window pseudo-metric between projectivized currents: sup over window
/// paths of the normalized count gap.
pub fn freq_distance(
    analysis: &Analysis,
    mu: &CurrentApprox,
    nu: &CurrentApprox,
    f_subgraph: &BTreeSet<u32>,
) -> Result<f64> {
    let fm = current_functionals(analysis, mu, f_subgraph)?;
    let fnu = current_functionals(analysis, nu, f_subgraph)?;
    if fm.norm_f.is_zero() || fnu.norm_f.is_zero() {
        return Err(Error::domain("zero current has no projective class"));
    }
    let mut best = BigRational::zero();
    for g in &mu.window {
        let a = mu.get(g)?.clone() / fm.norm_f.clone();
        let b = nu.get(g)?.clone() / fnu.norm_f.clone();
        let d = if a >= b { a - b } else { b - a };
        if d > best {
            best = d;
        }
    }
    Ok(num::ToPrimitive::to_f64(&best).unwrap_or(f64::MAX))
}
