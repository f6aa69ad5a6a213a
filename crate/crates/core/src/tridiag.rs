//! Lowest eigenpairs of real symmetric tridiagonal matrices: Sturm-sequence
//! bisection for the values, inverse iteration for the vectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 0x5eed;

const INVERSE_ITERATIONS: usize = 2;

/// Eigenvalues closer than this (relative) share a reorthogonalization cluster.
const CLUSTER_TOL: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct TridiagEigen {
    pub values: Vec<f64>,
    /// Euclidean-normalized vectors, when requested.
    pub vectors: Option<Vec<Vec<f64>>>,
}

fn pivot_floor(diag: &[f64], off: &[f64]) -> f64 {
    let emax = off.iter().fold(0.0f64, |m, e| m.max(e * e));
    let dmax = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    f64::MIN_POSITIVE.max(f64::EPSILON * f64::EPSILON * emax.max(dmax * dmax).max(1.0).sqrt())
}

/// Number of eigenvalues strictly below `x`.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    sturm_count_guarded(diag, off, x, pivot_floor(diag, off))
}

fn sturm_count_guarded(diag: &[f64], off: &[f64], x: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        q = diag[i] - x - off[i - 1] * off[i - 1] / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

/// Lowest `k` eigenvalues (ascending) and optionally eigenvectors, with the
/// default seed for the inverse-iteration start vectors.
pub fn eigs_tridiag(diag: &[f64], off: &[f64], k: usize, want_vectors: bool) -> Result<TridiagEigen> {
    eigs_tridiag_seeded(diag, off, k, want_vectors, DEFAULT_SEED)
}

pub fn eigs_tridiag_seeded(
    diag: &[f64],
    off: &[f64],
    k: usize,
    want_vectors: bool,
    seed: u64,
) -> Result<TridiagEigen> {
    let n = diag.len();
    if k == 0 || k > n {
        return Err(Error::EigenIndex { k, n });
    }
    if off.len() + 1 != n {
        return Err(Error::InvalidInput(format!(
            "off-diagonal has length {} for dimension {n}",
            off.len()
        )));
    }
    if diag.iter().chain(off).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    let pivmin = pivot_floor(diag, off);
    let (glo, ghi) = gershgorin(diag, off);
    let span = (ghi - glo).max(f64::MIN_POSITIVE);
    let (glo, ghi) = (glo - 1e-12 * span - pivmin, ghi + 1e-12 * span + pivmin);

    let mut values = Vec::with_capacity(k);
    let mut floor = glo;
    for j in 0..k {
        // Smallest x with more than j eigenvalues below it.
        let mut lo = floor;
        let mut hi = ghi;
        let mut step = (floor.abs()).max(1.0);
        // Exponential search keeps the bracket local to the target.
        loop {
            let probe = lo + step;
            if probe >= hi {
                break;
            }
            if sturm_count_guarded(diag, off, probe, pivmin) > j {
                hi = probe;
                break;
            }
            lo = probe;
            step *= 2.0;
        }
        for _ in 0..4000 {
            let mid = lo + 0.5 * (hi - lo);
            if mid <= lo || mid >= hi || hi - lo <= 1e-13 * lo.abs().max(hi.abs()) {
                break;
            }
            if sturm_count_guarded(diag, off, mid, pivmin) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let value = lo + 0.5 * (hi - lo);
        values.push(value);
        floor = lo;
    }

    let vectors = want_vectors.then(|| inverse_iteration(diag, off, &values, seed, glo.abs().max(ghi.abs())));
    Ok(TridiagEigen { values, vectors })
}

/// LU factorization of `T - shift` with partial pivoting (LAPACK `gttrf` layout).
struct PivotedLu {
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    dl: Vec<f64>,
    swapped: Vec<bool>,
}

impl PivotedLu {
    fn new(diag: &[f64], off: &[f64], shift: f64, tiny: f64) -> Self {
        let n = diag.len();
        let mut d: Vec<f64> = diag.iter().map(|v| v - shift).collect();
        let mut du = off.to_vec();
        let mut dl = off.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if let Some(last) = d.last_mut() {
            if *last == 0.0 {
                *last = tiny;
            }
        }
        for v in d.iter_mut() {
            if v.abs() < tiny {
                *v = tiny.copysign(*v);
            }
        }
        PivotedLu { d, du, du2, dl, swapped }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.dl[i] * b[i];
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

fn normalize(v: &mut [f64]) {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale > 0.0 {
        v.iter_mut().for_each(|x| *x /= scale);
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

fn inverse_iteration(diag: &[f64], off: &[f64], values: &[f64], seed: u64, norm: f64) -> Vec<Vec<f64>> {
    let n = diag.len();
    let tiny = f64::EPSILON * norm.max(f64::MIN_POSITIVE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(values.len());
    let mut cluster_start = 0;
    for (j, &lambda) in values.iter().enumerate() {
        if j > 0 && (lambda - values[j - 1]).abs() > CLUSTER_TOL * lambda.abs().max(1.0) {
            cluster_start = j;
        }
        let lu = PivotedLu::new(diag, off, lambda, tiny);
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for _ in 0..INVERSE_ITERATIONS {
            lu.solve(&mut v);
            normalize(&mut v);
            // Two Gram-Schmidt passes restore orthogonality to working precision.
            for _ in 0..2 {
                for u in &vectors[cluster_start..j] {
                    let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                    v.iter_mut().zip(u).for_each(|(x, y)| *x -= dot * y);
                }
                normalize(&mut v);
            }
        }
        let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-3 * vmax) {
            if *first < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        vectors.push(v);
    }
    vectors
}
