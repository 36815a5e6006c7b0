//! Small nonnegative integer matrices: exact growth tests, irreducibility,
//! primitivity, Perron-Frobenius data and eigenvalues.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num::bigint::BigUint;
use num::traits::Zero;

/// Dense nonnegative integer matrix, row-major.
pub type IntMatrix = Vec<Vec<u64>>;

pub fn is_zero_matrix(m: &IntMatrix) -> bool {
    m.iter().all(|row| row.iter().all(|&x| x == 0))
}

pub fn big(m: &IntMatrix) -> Vec<Vec<BigUint>> {
    m.iter()
        .map(|r| r.iter().map(|&x| BigUint::from(x)).collect())
        .collect()
}

pub fn big_mul(a: &[Vec<BigUint>], b: &[Vec<BigUint>]) -> Vec<Vec<BigUint>> {
    let n = a.len();
    let p = b[0].len();
    let mut out = vec![vec![BigUint::zero(); p]; n];
    for i in 0..n {
        for k in 0..b.len() {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..p {
                let t = &a[i][k] * &b[k][j];
                out[i][j] += t;
            }
        }
    }
    out
}

pub fn big_entry_sum(m: &[Vec<BigUint>]) -> BigUint {
    m.iter().flatten().sum()
}

/// Strong connectivity of the digraph with arc `i -> j` iff `m[i][j] > 0`
/// (equivalently, irreducibility of the nonnegative matrix).
pub fn is_irreducible(m: &IntMatrix) -> bool {
    let n = m.len();
    if n == 0 {
        return false;
    }
    if n == 1 {
        // A 1x1 matrix is irreducible by convention (single-vertex SCC);
        // the zero 1x1 matrix is handled by the zero test first.
        return true;
    }
    let reach = |forward: bool| -> Vec<bool> {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let arc = if forward { m[i][j] > 0 } else { m[j][i] > 0 };
                if arc && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen
    };
    reach(true).into_iter().all(|x| x)
        && reach(false).into_iter().all(|x| x)
}

/// Exact-integer test for spectral radius > 1 of an irreducible nonnegative
/// integer matrix: the entry sum of `M^k` strictly exceeds the entry sum of
/// `M^{k-1}` for some `k <= 2*dim + 1`.
pub fn grows_exponentially(m: &IntMatrix) -> bool {
    let n = m.len();
    let mb = big(m);
    let mut prev = big_entry_sum(&mb);
    let mut pw = mb.clone();
    for _ in 0..(2 * n + 1) {
        pw = big_mul(&pw, &mb);
        let cur = big_entry_sum(&pw);
        if cur > prev {
            return true;
        }
        prev = cur;
    }
    false
}

/// Primitivity classification of a square nonnegative integer matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Primitivity {
    Primitive,
    Irreducible,
    Reducible,
}

/// Irreducibility via strong connectivity; primitivity via positivity of
/// `M^q` for some `q <= (dim-1)^2 + 1` (Wielandt bound), computed on the
/// boolean support.
pub fn primitivity_check(m: &IntMatrix) -> Primitivity {
    if !is_irreducible(m) || is_zero_matrix(m) {
        return Primitivity::Reducible;
    }
    let n = m.len();
    let bound = (n - 1) * (n - 1) + 1;
    let base: Vec<Vec<bool>> = m
        .iter()
        .map(|r| r.iter().map(|&x| x > 0).collect())
        .collect();
    let bool_mul = |a: &Vec<Vec<bool>>, b: &Vec<Vec<bool>>| -> Vec<Vec<bool>> {
        let mut out = vec![vec![false; n]; n];
        for i in 0..n {
            for k in 0..n {
                if a[i][k] {
                    for j in 0..n {
                        out[i][j] |= b[k][j];
                    }
                }
            }
        }
        out
    };
    let mut pw = base.clone();
    for _ in 0..bound {
        if pw.iter().all(|r| r.iter().all(|&x| x)) {
            return Primitivity::Primitive;
        }
        pw = bool_mul(&pw, &base);
    }
    if pw.iter().all(|r| r.iter().all(|&x| x)) {
        Primitivity::Primitive
    } else {
        Primitivity::Irreducible
    }
}

/// Perron-Frobenius data of an irreducible nonnegative matrix.
#[derive(Debug, Clone)]
pub struct PfData {
    pub lambda: f64,
    /// Right eigenvector normalized to sum 1.
    pub right: Vec<f64>,
    /// Absolute tolerance achieved.
    pub tol: f64,
}

/// Power iteration with Rayleigh quotient; absolute tolerance `1e-12`,
/// iteration cap `10^5`, eigenvector normalized to sum 1.
pub fn pf_data(m: &IntMatrix) -> Result<PfData> {
    if !is_irreducible(m) || is_zero_matrix(m) {
        return Err(Error::domain("pf_data requires an irreducible nonzero matrix"));
    }
    let n = m.len();
    let tol = 1e-12;
    let cap = 100_000usize;
    let mut v = vec![1.0f64 / n as f64; n];
    let mut lambda = 0.0f64;
    let mut residual = f64::INFINITY;
    for _ in 0..cap {
        // One step of M + I to kill period oscillation for irreducible
        // non-primitive matrices (same eigenvector, eigenvalue shifted by 1).
        let mut w = vec![0.0f64; n];
        for i in 0..n {
            for j in 0..n {
                w[i] += m[i][j] as f64 * v[j];
            }
            w[i] += v[i];
        }
        let num: f64 = (0..n).map(|i| w[i] * v[i]).sum();
        let den: f64 = (0..n).map(|i| v[i] * v[i]).sum();
        let rayleigh = num / den - 1.0;
        let s: f64 = w.iter().sum();
        for x in w.iter_mut() {
            *x /= s;
        }
        residual = (rayleigh - lambda).abs()
            + v.iter().zip(&w).map(|(a, b)| (a - b).abs()).sum::<f64>();
        lambda = rayleigh;
        v = w;
        if residual < tol {
            return Ok(PfData {
                lambda,
                right: v,
                tol: residual,
            });
        }
    }
    Err(Error::numeric(format!(
        "power iteration did not converge; residual {residual:.3e}"
    )))
}

/// Complex eigenvalues as `(re, im)` pairs.
pub fn eigenvalues(m: &IntMatrix) -> Vec<(f64, f64)> {
    let n = m.len();
    if n == 0 {
        return Vec::new();
    }
    let a = DMatrix::from_fn(n, n, |i, j| m[i][j] as f64);
    a.complex_eigenvalues()
        .iter()
        .map(|c| (c.re, c.im))
        .collect()
}
