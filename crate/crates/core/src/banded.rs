//! Symmetric positive definite banded matrices: Cholesky factorization and
//! the lowest eigenpairs by subspace inverse iteration.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const MAX_SUBSPACE_ITERATIONS: u32 = 500;
const RITZ_TOL: f64 = 1e-12;

/// Lower band of a symmetric matrix: row `i` holds columns `i - bw ..= i`.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (j + self.bw - i)
    }

    /// Entry `(i, j)` with `j <= i`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// Adds to entry `(i, j)` (and implicitly `(j, i)`).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let row = &self.data[i * (self.bw + 1)..(i + 1) * (self.bw + 1)];
            for j in lo..i {
                let a = row[j + self.bw - i];
                y[i] += a * x[j];
                y[j] += a * x[i];
            }
            y[i] += row[self.bw] * x[i];
        }
        y
    }

    /// In-place `L L^T` factorization.
    pub fn cholesky(mut self) -> Result<BandCholesky> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let klo = lo.max(j.saturating_sub(bw));
                let mut s = self.data[i * w + (j + bw - i)];
                let ri = i * w + (klo + bw - i);
                let rj = j * w + (klo + bw - j);
                let len = j - klo;
                s -= self.data[ri..ri + len]
                    .iter()
                    .zip(&self.data[rj..rj + len])
                    .map(|(a, b)| a * b)
                    .sum::<f64>();
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::NotPositiveDefinite(i));
                    }
                    self.data[i * w + bw] = s.sqrt();
                } else {
                    self.data[i * w + (j + bw - i)] = s / self.data[j * w + bw];
                }
            }
        }
        Ok(BandCholesky { l: self })
    }
}

#[derive(Clone, Debug)]
pub struct BandCholesky {
    l: BandMatrix,
}

impl BandCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let l = &self.l;
        let (n, bw, w) = (l.n, l.bw, l.bw + 1);
        let mut y = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let row = &l.data[i * w..(i + 1) * w];
            let s: f64 = (lo..i).map(|j| row[j + bw - i] * y[j]).sum();
            y[i] = (y[i] - s) / row[bw];
        }
        for i in (0..n).rev() {
            y[i] /= l.data[i * w + bw];
            let yi = y[i];
            let lo = i.saturating_sub(bw);
            let row = &l.data[i * w..(i + 1) * w];
            for j in lo..i {
                y[j] -= row[j + bw - i] * yi;
            }
        }
        y
    }

    /// Solves for every column of the `n x p` matrix `b` in one sweep.
    pub fn solve_block(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let l = &self.l;
        let (n, bw, w) = (l.n, l.bw, l.bw + 1);
        let p = b.ncols();
        // Row-major copy so that one band entry updates all right-hand sides.
        let mut y: Vec<f64> = (0..n).flat_map(|i| (0..p).map(move |j| (i, j))).map(|(i, j)| b[(i, j)]).collect();
        let mut acc = vec![0.0; p];
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let row = &l.data[i * w..(i + 1) * w];
            acc.iter_mut().for_each(|a| *a = 0.0);
            for j in lo..i {
                let a = row[j + bw - i];
                for (s, v) in acc.iter_mut().zip(&y[j * p..(j + 1) * p]) {
                    *s += a * v;
                }
            }
            let d = row[bw];
            for (v, s) in y[i * p..(i + 1) * p].iter_mut().zip(&acc) {
                *v = (*v - s) / d;
            }
        }
        for i in (0..n).rev() {
            let d = l.data[i * w + bw];
            y[i * p..(i + 1) * p].iter_mut().for_each(|v| *v /= d);
            acc.copy_from_slice(&y[i * p..(i + 1) * p]);
            let lo = i.saturating_sub(bw);
            let row = &l.data[i * w..(i + 1) * w];
            for j in lo..i {
                let a = row[j + bw - i];
                for (v, s) in y[j * p..(j + 1) * p].iter_mut().zip(&acc) {
                    *v -= a * s;
                }
            }
        }
        DMatrix::from_row_slice(n, p, &y)
    }
}

/// Lowest `k` eigenpairs of an SPD band matrix.
#[derive(Clone, Debug)]
pub struct BandEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub iterations: u32,
}

fn orthonormalize(m: DMatrix<f64>) -> DMatrix<f64> {
    m.qr().q()
}

/// Subspace inverse iteration with Rayleigh-Ritz on a block of `k + guard` vectors.
pub fn lowest_eigenpairs(a: &BandMatrix, k: usize, seed: u64) -> Result<BandEigen> {
    let n = a.size();
    if k == 0 || k > n {
        return Err(Error::EigenIndex { k, n });
    }
    let p = (k + k.max(4)).min(n);
    let chol = a.clone().cholesky()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = orthonormalize(DMatrix::from_fn(n, p, |_, _| rng.gen_range(-1.0..1.0)));
    let mut prev = vec![f64::INFINITY; k];
    for it in 1..=MAX_SUBSPACE_ITERATIONS {
        // With Z = A^-1 X, the projected matrix Z^T A Z is just Z^T X.
        let z = chol.solve_block(&x);
        let h = z.transpose() * &x;
        let h = 0.5 * (&h + h.transpose());
        let g = z.transpose() * &z;
        let g = 0.5 * (&g + g.transpose());
        // Reduce the pencil (H, G) to standard form with G = C C^T.
        let c = g.cholesky().ok_or(Error::NotPositiveDefinite(0))?;
        let cinv = c.l().try_inverse().ok_or(Error::NotPositiveDefinite(0))?;
        let eig = SymmetricEigen::new(&cinv * h * cinv.transpose());
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let vecs = DMatrix::from_fn(p, p, |i, j| eig.eigenvectors[(i, order[j])]);
        x = z * (cinv.transpose() * vecs);
        let ritz: Vec<f64> = order.iter().take(k).map(|&i| eig.eigenvalues[i]).collect();
        let done = ritz
            .iter()
            .zip(&prev)
            .all(|(r, q)| (r - q).abs() <= RITZ_TOL * r.abs().max(f64::MIN_POSITIVE));
        prev = ritz;
        if done {
            let vectors = (0..k)
                .map(|j| {
                    let mut v: Vec<f64> = x.column(j).iter().copied().collect();
                    let big = v.iter().fold(0.0f64, |m, u| m.max(u.abs()));
                    if let Some(first) = v.iter().find(|u| u.abs() > 1e-3 * big) {
                        if *first < 0.0 {
                            v.iter_mut().for_each(|u| *u = -*u);
                        }
                    }
                    v
                })
                .collect();
            return Ok(BandEigen {
                values: prev,
                vectors,
                iterations: it,
            });
        }
    }
    Err(Error::NoConvergence(MAX_SUBSPACE_ITERATIONS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn laplacian_2d(m: usize) -> BandMatrix {
        let mut a = BandMatrix::zeros(m * m, m);
        for i in 0..m {
            for j in 0..m {
                let r = i * m + j;
                a.add(r, r, 4.0);
                if j > 0 {
                    a.add(r, r - 1, -1.0);
                }
                if i > 0 {
                    a.add(r, r - m, -1.0);
                }
            }
        }
        a
    }

    #[test]
    fn cholesky_solves() {
        let a = laplacian_2d(7);
        let x: Vec<f64> = (0..49).map(|i| (i as f64 * 0.37).sin()).collect();
        let b = a.mul_vec(&x);
        let y = a.clone().cholesky().unwrap().solve(&b);
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_is_rejected() {
        let mut a = BandMatrix::zeros(2, 1);
        a.add(0, 0, 1.0);
        a.add(1, 1, 1.0);
        a.add(1, 0, 2.0);
        assert!(matches!(a.cholesky(), Err(Error::NotPositiveDefinite(1))));
    }

    #[test]
    fn grid_laplacian_spectrum() {
        let m = 12;
        let a = laplacian_2d(m);
        let r = lowest_eigenpairs(&a, 3, 1).unwrap();
        let s = |p: usize| 2.0 - 2.0 * (p as f64 * std::f64::consts::PI / (m + 1) as f64).cos();
        assert_relative_eq!(r.values[0], 2.0 * s(1), max_relative = 1e-10);
        assert_relative_eq!(r.values[1], s(1) + s(2), max_relative = 1e-10);
        assert_relative_eq!(r.values[2], s(1) + s(2), max_relative = 1e-10);
        let av = a.mul_vec(&r.vectors[0]);
        for (u, v) in av.iter().zip(&r.vectors[0]) {
            assert!((u - r.values[0] * v).abs() < 1e-8);
        }
    }
}
