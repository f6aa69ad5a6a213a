//! Planar potentials `V0(|x| theta(x/|x|))` whose rescaled limit is the
//! Dirichlet Laplacian of the star domain `{|x| theta < 1}`, discretized with
//! the five-point Laplacian on a square lattice.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::banded::{lowest_eigenpairs, BandMatrix};
use crate::error::{Error, Result};
use crate::potentials::{AngularFactor, Potential, Side};
use crate::radial::ball_dirichlet_reference;
use crate::spectral1d::{GridInfo, ReferenceKind, ReferenceSpectrum, Rescaling, Spectrum, AGMON_DEPTH, MIN_TAIL_DEPTH, W_CAP};
use crate::spectral1d::end_depth;
use crate::tridiag::DEFAULT_SEED;
use crate::wellwidth::solve_radial_delta;

/// Minimum number of lattice points across the domain's narrower axis.
const MIN_POINTS_ACROSS: f64 = 10.0;
const MAX_UNKNOWNS: usize = 1 << 19;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Grid2d {
    pub spacing: f64,
    /// Choose the box from the decay of the potential at the target energy.
    pub auto_box: bool,
    /// Box half-widths as a multiple of the domain extents when `auto_box` is off.
    pub box_scale: f64,
    pub seed: u64,
}

impl Default for Grid2d {
    fn default() -> Self {
        Self {
            spacing: 0.01,
            auto_box: true,
            box_scale: 1.5,
            seed: DEFAULT_SEED,
        }
    }
}

impl Grid2d {
    pub fn validate(&self) -> Result<()> {
        if !(self.spacing > 0.0 && self.spacing < 0.5) {
            return Err(Error::InvalidGrid(format!("spacing {} outside (0, 0.5)", self.spacing)));
        }
        if !(self.box_scale >= 1.0 && self.box_scale.is_finite()) {
            return Err(Error::InvalidGrid(format!("box_scale {} below 1", self.box_scale)));
        }
        Ok(())
    }
}

/// How the angular factor enters the potential.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngularCoupling {
    /// `V0(|x| theta)`: the limit domain is the star domain.
    Argument,
    /// `V0(|x|) theta`: the limit domain stays the unit disk.
    Factor,
}

/// Interior lattice nodes of `(-ax, ax) x (-ay, ay)` kept by `keep`, numbered
/// row by row along the shorter side, with the five-point matrix on them.
struct Lattice {
    points: Vec<(f64, f64)>,
    matrix: BandMatrix,
}

fn lattice(ax: f64, ay: f64, h: f64, keep: &dyn Fn(f64, f64) -> bool, w: &dyn Fn(f64, f64) -> f64) -> Result<Lattice> {
    let nx = (2.0 * ax / h).round() as usize - 1;
    let ny = (2.0 * ay / h).round() as usize - 1;
    // Run the fast index along the shorter side to keep the band narrow.
    let swap = nx > ny;
    let (nf, ns) = if swap { (ny, nx) } else { (nx, ny) };
    // Centred indices keep the lattice exactly symmetric under reflections.
    let (cx, cy) = (0.5 * (nx - 1) as f64, 0.5 * (ny - 1) as f64);
    let coord = |f: usize, s: usize| -> (f64, f64) {
        let (i, j) = if swap { (s, f) } else { (f, s) };
        ((i as f64 - cx) * h, (j as f64 - cy) * h)
    };
    let mut index = vec![usize::MAX; nf * ns];
    let mut points = Vec::new();
    for s in 0..ns {
        for f in 0..nf {
            let (x, y) = coord(f, s);
            if keep(x, y) {
                index[s * nf + f] = points.len();
                points.push((x, y));
            }
        }
    }
    let n = points.len();
    if n > MAX_UNKNOWNS {
        return Err(Error::InvalidGrid(format!("{n} unknowns exceed {MAX_UNKNOWNS}")));
    }
    let mut bw = 0;
    for s in 1..ns {
        for f in 0..nf {
            let (a, b) = (index[s * nf + f], index[(s - 1) * nf + f]);
            if a != usize::MAX && b != usize::MAX {
                bw = bw.max(a - b);
            }
        }
    }
    let inv = 1.0 / (h * h);
    let mut m = BandMatrix::zeros(n, bw.max(1));
    for s in 0..ns {
        for f in 0..nf {
            let r = index[s * nf + f];
            if r == usize::MAX {
                continue;
            }
            let (x, y) = points[r];
            let wv = w(x, y);
            m.add(r, r, 4.0 * inv + if wv.is_nan() { W_CAP } else { wv.min(W_CAP) });
            if f > 0 && index[s * nf + f - 1] != usize::MAX {
                m.add(r, index[s * nf + f - 1], -inv);
            }
            if s > 0 && index[(s - 1) * nf + f] != usize::MAX {
                m.add(r, index[(s - 1) * nf + f], -inv);
            }
        }
    }
    Ok(Lattice { points, matrix: m })
}

fn inside(theta: &AngularFactor, x: f64, y: f64) -> bool {
    (x * x + y * y).sqrt() * theta.at_point(x, y) < 1.0
}

fn masked_eigs(theta: &AngularFactor, h: f64, k: usize, seed: u64) -> Result<Vec<f64>> {
    let (ex, ey) = theta.extents();
    if ex.min(ey) * 2.0 / h < MIN_POINTS_ACROSS {
        return Err(Error::GridTooCoarse(format!(
            "spacing {h} leaves fewer than {MIN_POINTS_ACROSS} points across the domain"
        )));
    }
    let keep = |x: f64, y: f64| inside(theta, x, y);
    let lat = lattice(ex + h, ey + h, h, &keep, &|_, _| 0.0)?;
    if lat.points.len() < 8 * k {
        return Err(Error::GridTooCoarse(format!(
            "{} interior points for {k} eigenvalues",
            lat.points.len()
        )));
    }
    Ok(lowest_eigenpairs(&lat.matrix, k, seed)?.values)
}

/// Masked reference solve at `grid.spacing` and twice it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarReferenceStudy {
    pub spacing: f64,
    pub fine: Vec<f64>,
    pub coarse: Vec<f64>,
    /// First-order extrapolation `2 fine - coarse`.
    pub extrapolated: Vec<f64>,
    /// `|fine - extrapolated| / extrapolated`.
    pub relative_error: Vec<f64>,
}

pub fn star_reference_study(theta: &AngularFactor, grid: &Grid2d, k: usize) -> Result<StarReferenceStudy> {
    grid.validate()?;
    let h = grid.spacing;
    let fine = masked_eigs(theta, h, k, grid.seed)?;
    let coarse = masked_eigs(theta, 2.0 * h, k, grid.seed)?;
    let extrapolated: Vec<f64> = fine.iter().zip(&coarse).map(|(f, c)| 2.0 * f - c).collect();
    let relative_error = fine
        .iter()
        .zip(&extrapolated)
        .map(|(f, e)| (f - e).abs() / e.abs())
        .collect();
    Ok(StarReferenceStudy {
        spacing: h,
        fine,
        coarse,
        extrapolated,
        relative_error,
    })
}

/// Dirichlet eigenvalues of `{|x| theta < 1}` on the masked lattice: points
/// with `|x| theta >= 1` are removed.
pub fn star_dirichlet_reference_2d(theta: &AngularFactor, grid: &Grid2d, k: usize) -> Result<ReferenceSpectrum> {
    let study = star_reference_study(theta, grid, k)?;
    let worst = study.relative_error.iter().copied().fold(0.0, f64::max);
    Ok(ReferenceSpectrum {
        kind: ReferenceKind::StarDomain,
        params: BTreeMap::from([
            ("spacing".to_string(), study.spacing),
            ("grid_error".to_string(), worst),
        ]),
        eigenvalues: study.fine,
    })
}

/// Lowest `k` eigenvalues of `-h^2 Δ + V` in the plane, with `V` built from
/// the radial profile `v0` and the angular factor `theta` via `coupling`.
pub fn star_domain_eigensolve_2d(
    v0: &Potential,
    theta: &AngularFactor,
    h: f64,
    k: usize,
    grid: &Grid2d,
    coupling: AngularCoupling,
) -> Result<Spectrum> {
    grid.validate()?;
    if k == 0 {
        return Err(Error::EigenIndex { k, n: 0 });
    }
    let delta = solve_radial_delta(v0, h)?;
    let level = v0.log_eval_side(Side::Right, delta.ln_delta);
    let radial = move |rho: f64| (v0.log_eval_side(Side::Right, delta.ln_delta + rho.ln()) - level).exp();
    let w = |x: f64, y: f64| {
        let r = (x * x + y * y).sqrt();
        if r == 0.0 {
            return 0.0;
        }
        let t = theta.at_point(x, y);
        match coupling {
            AngularCoupling::Argument => radial(r * t),
            AngularCoupling::Factor => radial(r) * t,
        }
    };
    let (ex, ey) = match coupling {
        AngularCoupling::Argument => theta.extents(),
        AngularCoupling::Factor => (1.0, 1.0),
    };
    let scale = if grid.auto_box {
        // Inside the limit domain W stays below max(1, max theta), so the
        // disk of the inscribed radius bounds the target level from above.
        let (inscribed, wmax) = match coupling {
            AngularCoupling::Argument => (1.0 / theta.max(), 1.0),
            AngularCoupling::Factor => (1.0, theta.max()),
        };
        let energy = ball_dirichlet_reference(2, k).eigenvalues[k - 1] / (inscribed * inscribed) + wmax + 1.0;
        let tmin = match coupling {
            AngularCoupling::Argument => theta.min(),
            AngularCoupling::Factor => 1.0,
        };
        let floor = theta.min().min(1.0);
        let step = grid.spacing;
        let mut rho: f64 = 1.0;
        let mut integral = 0.0;
        loop {
            let wr = match coupling {
                AngularCoupling::Argument => radial(rho),
                AngularCoupling::Factor => radial(rho) * floor,
            };
            if integral >= AGMON_DEPTH && wr >= 2.0 * energy || rho > 8.0 {
                break;
            }
            rho += step;
            // Physical distance per unit rho is at least 1 / max theta along any ray.
            integral += step / theta.max().max(tmin) * (wr - energy).max(0.0).sqrt();
        }
        rho
    } else {
        grid.box_scale
    };
    let (ax, ay) = (scale * ex, scale * ey);
    let lat = lattice(ax, ay, grid.spacing, &|_, _| true, &w)?;
    let fine = lowest_eigenpairs(&lat.matrix, k, grid.seed)?.values;
    let top = fine[k - 1];
    // Rays from the origin to the box edge through the axes and the corners.
    let depth = [(ax, 0.0), (-ax, 0.0), (0.0, ay), (0.0, -ay), (ax, ay), (-ax, ay), (ax, -ay), (-ax, -ay)]
        .iter()
        .map(|&(bx, by)| {
            let len = (bx * bx + by * by).sqrt();
            let m = (len / grid.spacing).ceil() as usize;
            let t: Vec<f64> = (1..=m).map(|i| len * i as f64 / m as f64).collect();
            let ws: Vec<f64> = t.iter().map(|s| w(bx * s / len, by * s / len).min(W_CAP)).collect();
            end_depth(&t, &ws, top)
        })
        .fold(f64::INFINITY, f64::min);
    if depth < MIN_TAIL_DEPTH {
        return Err(Error::Truncation { k, value: top, depth });
    }
    let coarse_lat = lattice(ax, ay, 2.0 * grid.spacing, &|_, _| true, &w)?;
    let coarse = lowest_eigenpairs(&coarse_lat.matrix, k, grid.seed)?.values;
    // Second order: the fine error is about a third of the difference.
    let errors: Vec<f64> = fine.iter().zip(&coarse).map(|(f, c)| (f - c).abs() / 3.0).collect();
    let kin = delta.kinetic_scale();
    Ok(Spectrum {
        h,
        eigenvalues: fine.iter().map(|v| v * kin).collect(),
        error_estimates: errors.iter().map(|v| v * kin).collect(),
        rescaled_eigenvalues: fine,
        rescaled_error_estimates: errors,
        grid: GridInfo {
            left: -ax,
            right: ax,
            n_points: lat.points.len(),
            spacing: grid.spacing,
            richardson: false,
        },
        grid_x: None,
        grid_weights: None,
        eigenvectors: None,
        sectors: None,
        rescaling: Rescaling::Radial { delta, dimension: 2 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::shorthand;
    use approx::assert_relative_eq;

    const J01_SQ: f64 = 5.783185962946784;

    fn coarse() -> Grid2d {
        Grid2d {
            spacing: 0.025,
            ..Grid2d::default()
        }
    }

    #[test]
    fn disk_reference_converges_to_bessel() {
        let disk = AngularFactor::constant(1.0).unwrap();
        let s = star_reference_study(&disk, &coarse(), 3).unwrap();
        let err_fine = (s.fine[0] - J01_SQ).abs();
        let err_coarse = (s.coarse[0] - J01_SQ).abs();
        assert!(err_fine < err_coarse);
        assert!(err_fine / J01_SQ < 0.03);
        // The first excited level is doubly degenerate.
        assert_relative_eq!(s.fine[1], s.fine[2], max_relative = 1e-8);
    }

    #[test]
    fn dirichlet_scaling() {
        let g = coarse();
        let a = star_dirichlet_reference_2d(&AngularFactor::ellipse(1.0, 0.6, 720).unwrap(), &g, 1).unwrap();
        let scaled = Grid2d {
            spacing: 2.0 * g.spacing,
            ..g.clone()
        };
        let b = star_dirichlet_reference_2d(&AngularFactor::ellipse(2.0, 1.2, 720).unwrap(), &scaled, 1).unwrap();
        assert_relative_eq!(a.eigenvalues[0], 4.0 * b.eigenvalues[0], max_relative = 1e-3);
    }

    #[test]
    fn too_coarse_is_rejected() {
        let g = Grid2d {
            spacing: 0.3,
            ..Grid2d::default()
        };
        let disk = AngularFactor::constant(1.0).unwrap();
        assert!(matches!(star_dirichlet_reference_2d(&disk, &g, 1), Err(Error::GridTooCoarse(_))));
    }

    #[test]
    fn harmonic_plane() {
        let p = shorthand("power2").unwrap();
        let disk = AngularFactor::constant(1.0).unwrap();
        let g = Grid2d {
            spacing: 0.06,
            auto_box: false,
            box_scale: 6.0,
            ..Grid2d::default()
        };
        let h = 1e-2;
        let s = star_domain_eigensolve_2d(&p, &disk, h, 3, &g, AngularCoupling::Argument).unwrap();
        for (v, want) in s.eigenvalues.iter().zip([2.0, 4.0, 4.0]) {
            assert_relative_eq!(v / h, want, max_relative = 2e-3);
        }
    }

    #[test]
    fn flat_well_sits_below_the_disk() {
        let p = shorthand("exp_flat1").unwrap();
        let disk = AngularFactor::constant(1.0).unwrap();
        let s = star_domain_eigensolve_2d(&p, &disk, 1e-8, 1, &coarse(), AngularCoupling::Argument).unwrap();
        let q = s.rescaled_eigenvalues[0];
        assert!(q < J01_SQ && q > 0.5 * J01_SQ, "{q}");
    }
}
