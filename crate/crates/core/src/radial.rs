//! Radial potentials in dimension `d >= 2`, solved sector by sector in the
//! angular momentum `l`.
//!
//! Each sector is `-r^{1-d} (r^{d-1} u')' + l(l+d-2)/r^2 u + W u` on `(0, R)`
//! with `u(R) = 0`, discretized by cell-centred finite volumes with exact
//! shell volumes. Regularity at the origin comes from the vanishing face
//! weight there, so no boundary condition is imposed at `r = 0`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::bessel_zeros;
use crate::error::{Error, Result};
use crate::potentials::{Potential, Side};
use crate::spectral1d::{GridInfo, ReferenceKind, ReferenceSpectrum, Rescaling, Spectrum, AGMON_DEPTH, MIN_TAIL_DEPTH, W_CAP};
use crate::spectral1d::end_depth;
use crate::tridiag::eigs_tridiag;
use crate::wellwidth::{solve_radial_delta, RadialDelta};

/// Sectors solved concurrently per round.
const SECTOR_BATCH: usize = 4;
const MAX_CELLS: usize = 1 << 18;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadialGrid {
    pub n_cells: usize,
    /// Outer radius in rescaled units, before any automatic extension.
    pub radius: f64,
    pub richardson: bool,
    /// Extend the radius until the tail is negligible at the target energy.
    pub auto_radius: bool,
    /// Highest angular momentum tried before giving up.
    pub l_max_cap: usize,
}

impl Default for RadialGrid {
    fn default() -> Self {
        Self {
            n_cells: 4096,
            radius: 2.0,
            richardson: true,
            auto_radius: true,
            l_max_cap: 64,
        }
    }
}

impl RadialGrid {
    pub fn validate(&self) -> Result<()> {
        if self.n_cells < 16 || self.n_cells > MAX_CELLS {
            return Err(Error::InvalidGrid(format!("n_cells = {} outside [16, {MAX_CELLS}]", self.n_cells)));
        }
        if !(self.radius > 1.0) || !self.radius.is_finite() {
            return Err(Error::InvalidGrid(format!("radius = {} must exceed 1", self.radius)));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        self.radius / self.n_cells as f64
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Dimension of the spherical harmonics of degree `l` on the sphere in `R^d`.
pub fn sector_multiplicity(l: usize, d: usize) -> usize {
    let lower = if l >= 2 { binomial(l + d - 3, d - 1) } else { 0 };
    binomial(l + d - 1, d - 1) - lower
}

fn check_dimension(d: usize) -> Result<()> {
    if d < 2 {
        Err(Error::Dimension(d))
    } else {
        Ok(())
    }
}

/// Values and error estimates of one sector.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorSolution {
    pub l: usize,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
}

fn sector_eigs(w: &[f64], d: usize, l: usize, step: f64, k: usize) -> Result<Vec<f64>> {
    let n = w.len();
    let dm1 = (d - 1) as i32;
    let df = d as f64;
    let centrifugal = (l * (l + d - 2)) as f64;
    let vol: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = (i as f64, (i + 1) as f64);
            (b.powi(d as i32) - a.powi(d as i32)) * step.powi(d as i32) / df
        })
        .collect();
    // Flux coefficient through the outer face of cell i; the last one is
    // the half-cell ghost condition at the outer radius.
    let flux: Vec<f64> = (0..n)
        .map(|i| {
            let f = ((i + 1) as f64 * step).powi(dm1) / step;
            if i + 1 == n {
                2.0 * f
            } else {
                f
            }
        })
        .collect();
    let diag: Vec<f64> = (0..n)
        .map(|i| {
            let r = (i as f64 + 0.5) * step;
            let inner = if i == 0 { 0.0 } else { flux[i - 1] };
            (inner + flux[i]) / vol[i] + centrifugal / (r * r) + w[i]
        })
        .collect();
    let off: Vec<f64> = (0..n - 1).map(|i| -flux[i] / (vol[i] * vol[i + 1]).sqrt()).collect();
    Ok(eigs_tridiag(&diag, &off, k.min(n), false)?.values)
}

fn capped(w: f64) -> f64 {
    if w.is_nan() {
        W_CAP
    } else {
        w.min(W_CAP)
    }
}

fn centres(radius: f64, n: usize) -> Vec<f64> {
    let step = radius / n as f64;
    (0..n).map(|i| (i as f64 + 0.5) * step).collect()
}

/// Lowest `k` eigenvalues of sector `l` on `(0, radius)` with `n` cells.
pub fn solve_sector(
    w: &(dyn Fn(f64) -> f64 + Sync),
    d: usize,
    l: usize,
    radius: f64,
    n: usize,
    k: usize,
    richardson: bool,
) -> Result<SectorSolution> {
    check_dimension(d)?;
    let step = radius / n as f64;
    let wc: Vec<f64> = centres(radius, n).into_iter().map(|r| capped(w(r))).collect();
    let coarse = sector_eigs(&wc, d, l, step, k)?;
    let (values, errors) = if richardson {
        let wf: Vec<f64> = centres(radius, 2 * n).into_iter().map(|r| capped(w(r))).collect();
        let fine = sector_eigs(&wf, d, l, 0.5 * step, k)?;
        fine.iter()
            .zip(&coarse)
            .map(|(f, c)| {
                let v = (4.0 * f - c) / 3.0;
                (v, (v - f).abs())
            })
            .unzip()
    } else {
        let errs = coarse.iter().map(|v| step * step * v * v / 12.0).collect();
        (coarse, errs)
    };
    Ok(SectorSolution { l, values, errors })
}

/// Merged spectrum over sectors: `(value, error, l)` repeated by multiplicity.
pub fn merge_sectors(
    w: &(dyn Fn(f64) -> f64 + Sync),
    d: usize,
    radius: f64,
    n: usize,
    k: usize,
    richardson: bool,
    l_max_cap: usize,
) -> Result<Vec<(f64, f64, usize)>> {
    check_dimension(d)?;
    let mut merged: Vec<(f64, f64, usize)> = Vec::new();
    let mut l0 = 0;
    loop {
        if l0 > l_max_cap {
            return Err(Error::SectorCap { cap: l_max_cap, k });
        }
        let hi = (l0 + SECTOR_BATCH).min(l_max_cap + 1);
        let batch: Vec<SectorSolution> = (l0..hi)
            .into_par_iter()
            .map(|l| solve_sector(w, d, l, radius, n, k, richardson))
            .collect::<Result<_>>()?;
        for s in &batch {
            let m = sector_multiplicity(s.l, d);
            for (v, e) in s.values.iter().zip(&s.errors) {
                merged.extend(std::iter::repeat((*v, *e, s.l)).take(m));
            }
            merged.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
            merged.truncate(k);
            // Higher sectors start above this one.
            if merged.len() == k && s.values.first().map_or(true, |&v| v > merged[k - 1].0) {
                return Ok(merged);
            }
        }
        l0 = hi;
    }
}

/// Radius at which the Agmon integral from `r = 1` reaches the target depth
/// at `energy` and the potential has cleared twice that energy.
fn agmon_radius(w: &dyn Fn(f64) -> f64, start: f64, step: f64, energy: f64) -> f64 {
    let mut integral = 0.0;
    let mut r = 1.0;
    let mut wr = capped(w(r));
    while r < start || !(integral >= AGMON_DEPTH && wr >= 2.0 * energy) {
        if ((r / step) as usize) >= MAX_CELLS {
            break;
        }
        r += step;
        wr = capped(w(r));
        integral += step * (wr - energy).max(0.0).sqrt();
    }
    r.max(start)
}

/// The rescaled radial potential `W(r) = V0(delta r) / V0(delta)`.
pub fn rescaled_radial_w(v0: &Potential, delta: &RadialDelta, r: f64) -> f64 {
    let level = v0.log_eval_side(Side::Right, delta.ln_delta);
    (v0.log_eval_side(Side::Right, delta.ln_delta + r.ln()) - level).exp()
}

/// Lowest `k` eigenvalues (with multiplicity) of `-h^2 Δ + V0(|x|)` in `R^d`.
pub fn radial_eigensolve(v0: &Potential, h: f64, d: usize, k: usize) -> Result<Spectrum> {
    radial_eigensolve_with(v0, h, d, k, &RadialGrid::default())
}

pub fn radial_eigensolve_with(v0: &Potential, h: f64, d: usize, k: usize, grid: &RadialGrid) -> Result<Spectrum> {
    check_dimension(d)?;
    grid.validate()?;
    if k == 0 {
        return Err(Error::EigenIndex { k, n: grid.n_cells });
    }
    let delta = solve_radial_delta(v0, h)?;
    let wfn = |r: f64| rescaled_radial_w(v0, &delta, r);
    let step = grid.spacing();
    let radius = if grid.auto_radius {
        let pilot = merge_sectors(&wfn, d, grid.radius, (grid.n_cells / 4).max(64), k, false, grid.l_max_cap)?;
        // W <= 1 on the unit ball, so its Dirichlet levels plus one bound from above.
        let ball = ball_dirichlet_reference(d, k).eigenvalues[k - 1] + 1.0;
        let energy = pilot[k - 1].0.min(ball) + 1.0;
        agmon_radius(&wfn, grid.radius, step, energy)
    } else {
        grid.radius
    };
    let n = ((radius / step).round() as usize).clamp(grid.n_cells, MAX_CELLS);
    let merged = merge_sectors(&wfn, d, radius, n, k, grid.richardson, grid.l_max_cap)?;
    let top = merged[k - 1].0;
    let rs = centres(radius, n);
    let ws: Vec<f64> = rs.iter().map(|&r| capped(wfn(r))).collect();
    let depth = end_depth(&rs, &ws, top);
    if depth < MIN_TAIL_DEPTH {
        return Err(Error::Truncation { k, value: top, depth });
    }
    let scale = delta.kinetic_scale();
    let rescaled: Vec<f64> = merged.iter().map(|m| m.0).collect();
    let errors: Vec<f64> = merged.iter().map(|m| m.1).collect();
    Ok(Spectrum {
        h,
        eigenvalues: rescaled.iter().map(|v| v * scale).collect(),
        error_estimates: errors.iter().map(|v| v * scale).collect(),
        rescaled_eigenvalues: rescaled,
        rescaled_error_estimates: errors,
        grid: GridInfo {
            left: 0.0,
            right: radius,
            n_points: n,
            spacing: radius / n as f64,
            richardson: grid.richardson,
        },
        grid_x: None,
        grid_weights: None,
        eigenvectors: None,
        sectors: Some(merged.iter().map(|m| m.2).collect()),
        rescaling: Rescaling::Radial { delta, dimension: d },
    })
}

/// Dirichlet eigenvalues of the unit ball in `R^d`, with multiplicity.
pub fn ball_dirichlet_reference(d: usize, k: usize) -> ReferenceSpectrum {
    let d = d.max(2);
    let mut merged: Vec<f64> = Vec::new();
    for l in 0.. {
        let nu = l as f64 + 0.5 * (d as f64 - 2.0);
        let zeros = bessel_zeros(nu, k);
        if merged.len() >= k && zeros[0] * zeros[0] > merged[k - 1] {
            break;
        }
        let m = sector_multiplicity(l, d);
        for z in zeros {
            merged.extend(std::iter::repeat(z * z).take(m));
        }
        merged.sort_by(f64::total_cmp);
        merged.truncate(k);
    }
    ReferenceSpectrum {
        kind: ReferenceKind::DirichletBall,
        params: BTreeMap::from([("dimension".to_string(), d as f64)]),
        eigenvalues: merged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::shorthand;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    const J01: f64 = 2.404825557695772768621632;
    const J11: f64 = 3.831705970207512315614436;
    const J21: f64 = 5.135622301840682556301402;
    const J02: f64 = 5.520078110286310649596604;

    #[test]
    fn multiplicities() {
        assert_eq!((0..4).map(|l| sector_multiplicity(l, 2)).collect::<Vec<_>>(), [1, 2, 2, 2]);
        assert_eq!((0..4).map(|l| sector_multiplicity(l, 3)).collect::<Vec<_>>(), [1, 3, 5, 7]);
        assert_eq!(sector_multiplicity(2, 4), 9);
    }

    #[test]
    fn ball_references() {
        let b2 = ball_dirichlet_reference(2, 6).eigenvalues;
        let want = [J01, J11, J11, J21, J21, J02].map(|j| j * j);
        for (a, b) in b2.iter().zip(want) {
            assert_relative_eq!(*a, b, max_relative = 1e-13);
        }
        let b3 = ball_dirichlet_reference(3, 4).eigenvalues;
        assert_relative_eq!(b3[0], PI * PI, max_relative = 1e-13);
        for v in &b3[1..] {
            assert_relative_eq!(*v, 4.493409457909064175307881f64.powi(2), max_relative = 1e-13);
        }
    }

    #[test]
    fn free_sectors_reproduce_bessel_zeros() {
        let zero = |_: f64| 0.0;
        for (d, want) in [(2, J01 * J01), (3, PI * PI)] {
            let s = solve_sector(&zero, d, 0, 1.0, 1024, 1, true).unwrap();
            assert_relative_eq!(s.values[0], want, max_relative = 1e-8);
        }
        let s = solve_sector(&zero, 2, 1, 1.0, 1024, 1, true).unwrap();
        assert_relative_eq!(s.values[0], J11 * J11, max_relative = 1e-8);
        let merged = merge_sectors(&zero, 3, 1.0, 512, 10, true, 64).unwrap();
        let reference = ball_dirichlet_reference(3, 10).eigenvalues;
        for (m, r) in merged.iter().zip(&reference) {
            assert_relative_eq!(m.0, *r, max_relative = 1e-6);
        }
    }

    #[test]
    fn harmonic_ladder_in_three_dimensions() {
        let p = shorthand("power2").unwrap();
        let h = 1e-3;
        let s = radial_eigensolve(&p, h, 3, 10).unwrap();
        let want = [3.0, 5.0, 5.0, 5.0, 7.0, 7.0, 7.0, 7.0, 7.0, 7.0];
        for (v, w) in s.eigenvalues.iter().zip(want) {
            assert_relative_eq!(v / h, w, max_relative = 1e-6);
        }
        assert_eq!(s.sectors.as_deref().unwrap()[..4], [0, 1, 1, 1]);
        let sevens = &s.sectors.as_ref().unwrap()[4..];
        assert_eq!(sevens.iter().filter(|&&l| l == 0).count(), 1);
        assert_eq!(sevens.iter().filter(|&&l| l == 2).count(), 5);
    }

    #[test]
    fn two_dimensional_harmonic_degeneracies() {
        let p = shorthand("power2").unwrap();
        let h = 1e-2;
        let s = radial_eigensolve(&p, h, 2, 6).unwrap();
        for (v, w) in s.eigenvalues.iter().zip([2.0, 4.0, 4.0, 6.0, 6.0, 6.0]) {
            assert_relative_eq!(v / h, w, max_relative = 1e-6);
        }
    }

    #[test]
    fn one_dimension_is_rejected() {
        let p = shorthand("power2").unwrap();
        assert!(matches!(radial_eigensolve(&p, 1e-2, 1, 1), Err(Error::Dimension(1))));
    }

    #[test]
    fn flat_well_approaches_the_ball() {
        let p = shorthand("exp_flat1").unwrap();
        let mut prev = f64::INFINITY;
        for h in [1e-4, 1e-8, 1e-12] {
            let s = radial_eigensolve(&p, h, 3, 1).unwrap();
            let err = (s.rescaled_eigenvalues[0] - PI * PI).abs();
            assert!(err < prev);
            assert!(s.rescaled_eigenvalues[0] < PI * PI);
            prev = err;
        }
    }

    #[test]
    fn sector_cap_is_reported() {
        let zero = |_: f64| 0.0;
        let r = merge_sectors(&zero, 2, 1.0, 64, 40, false, 3);
        assert!(matches!(r, Err(Error::SectorCap { cap: 3, .. })));
    }
}
