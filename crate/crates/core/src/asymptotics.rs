//! Predictions for flat wells checked against computed spectra: the
//! leading-order eigenvalue law, the universal bracket, the sine profile of
//! the eigenvectors, remainder fits along `h` sweeps and the probe telling
//! bounded from divergent `lambda_1 / h^2`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::{Potential, PotentialSpec};
use crate::spectral1d::{eigensolve, eigensolve_physical, square_well_reference, GridSpec, Spectrum};
use crate::wellwidth::WellWidths;

/// `pi^2 k^2 h^2 / (delta_plus - delta_minus)^2`.
pub fn predict_lambda(w: &WellWidths, k: usize) -> f64 {
    (PI * k as f64).powi(2) * w.kinetic_scale()
}

/// Lower bracket constant: `k`-th level of the unit square well of depth 1.
pub fn lower_constant(k: usize) -> f64 {
    square_well_reference(1.0, k).eigenvalues[k - 1]
}

pub fn upper_constant(k: usize) -> f64 {
    (PI * k as f64).powi(2) + 1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BracketReport {
    pub k: usize,
    pub lower_constant: f64,
    pub upper_constant: f64,
    /// `lambda_k` of the rescaled operator.
    pub rescaled_value: f64,
    pub error_bar: f64,
    /// Bounds on `lambda_k` of `-h^2 Δ + V`.
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub lower_margin: f64,
    pub upper_margin: f64,
    pub passed: bool,
}

/// Checks `c_k h^2/L^2 <= lambda_k <= (pi^2 k^2 + 1) h^2/L^2`; margins are in
/// rescaled units and the check passes when neither is below minus the
/// error bar.
pub fn bracket_check(s: &Spectrum, k: usize) -> Result<BracketReport> {
    let w = s
        .widths()
        .ok_or_else(|| Error::InvalidInput("bracket check needs an interval-rescaled spectrum".into()))?;
    if k == 0 || k > s.rescaled_eigenvalues.len() {
        return Err(Error::EigenIndex {
            k,
            n: s.rescaled_eigenvalues.len(),
        });
    }
    let q = s.rescaled_eigenvalues[k - 1];
    let err = s.rescaled_error_estimates[k - 1];
    let (lo, hi) = (lower_constant(k), upper_constant(k));
    let scale = w.kinetic_scale();
    let (lower_margin, upper_margin) = (q - lo, hi - q);
    Ok(BracketReport {
        k,
        lower_constant: lo,
        upper_constant: hi,
        rescaled_value: q,
        error_bar: err,
        lower_bound: lo * scale,
        upper_bound: hi * scale,
        lower_margin,
        upper_margin,
        passed: lower_margin >= -err && upper_margin >= -err,
    })
}

/// `sqrt(2/L) sin(pi k (x - delta_minus)/L)` on `[delta_minus, delta_plus]`, 0 elsewhere.
pub fn sine_profile(w: &WellWidths, k: usize, x: &[f64]) -> Vec<f64> {
    let len = w.width();
    let amp = (2.0 / len).sqrt();
    x.iter()
        .map(|&y| {
            let t = (y - w.delta_minus) / len;
            if (0.0..=1.0).contains(&t) {
                amp * (PI * k as f64 * t).sin()
            } else {
                0.0
            }
        })
        .collect()
}

/// The same profile in rescaled coordinates: `sqrt 2 sin(pi k x)` on `[0, 1]`.
pub fn rescaled_sine_profile(k: usize, x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&t| {
            if (0.0..=1.0).contains(&t) {
                2f64.sqrt() * (PI * k as f64 * t).sin()
            } else {
                0.0
            }
        })
        .collect()
}

/// `min over sign of || sign u_k - v_k ||` in `L^2`, evaluated in rescaled
/// coordinates (the rescaling is unitary).
pub fn eigenvector_residual(s: &Spectrum, k: usize) -> Result<f64> {
    let vs = s.eigenvectors.as_ref().ok_or(Error::MissingVectors)?;
    let x = s.grid_x.as_ref().ok_or(Error::MissingVectors)?;
    let wts = s.grid_weights.as_ref().ok_or(Error::MissingVectors)?;
    if k == 0 || k > vs.len() {
        return Err(Error::EigenIndex { k, n: vs.len() });
    }
    let u = &vs[k - 1];
    let v = rescaled_sine_profile(k, x);
    let dist = |sign: f64| -> f64 {
        u.iter()
            .zip(&v)
            .zip(wts)
            .map(|((a, b), w)| (sign * a - b).powi(2) * w)
            .sum::<f64>()
            .sqrt()
    };
    Ok(dist(1.0).min(dist(-1.0)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub h: f64,
    pub widths: WellWidths,
    pub lambda_numeric: Vec<f64>,
    pub lambda_rescaled: Vec<f64>,
    pub lambda_predicted: Vec<f64>,
    /// `lambda_numeric / lambda_predicted`.
    pub ratio: Vec<f64>,
    pub rescaled_error: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigvec_residual: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderFit {
    pub model: String,
    pub constant: f64,
    /// Coefficient of determination of the log-log fit.
    pub quality: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub potential: PotentialSpec,
    pub k_max: usize,
    pub h_grid: Vec<f64>,
    pub records: Vec<SweepRecord>,
    /// Fit of `|ratio_1 - 1|` over the tail of the sweep.
    pub fitted_remainder: Option<RemainderFit>,
    /// `|ratio_1 - 1|` per `h`.
    pub remainder_trend: Vec<f64>,
    /// `|ratio_1 - 1|` decreases strictly over the tail and by at least 1%.
    pub converging: bool,
}

pub const REMAINDER_MODEL: &str = "c ln|ln h| / |ln h|";

/// `ln|ln h| / |ln h|`.
pub fn remainder_gauge(h: f64) -> f64 {
    let l = h.ln().abs();
    l.ln() / l
}

/// Least-squares fit of `ln |r - 1| = ln c + ln g(h)` (unit slope), with the
/// coefficient of determination as quality.
pub fn fit_remainder(h: &[f64], remainder: &[f64]) -> Option<RemainderFit> {
    let pts: Vec<(f64, f64)> = h
        .iter()
        .zip(remainder)
        .filter(|(h, r)| **r > 0.0 && remainder_gauge(**h) > 0.0)
        .map(|(h, r)| (remainder_gauge(*h).ln(), r.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let ln_c = pts.iter().map(|(g, y)| y - g).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let ss_res: f64 = pts.iter().map(|(g, y)| (y - ln_c - g).powi(2)).sum();
    let ss_tot: f64 = pts.iter().map(|(_, y)| (y - mean_y).powi(2)).sum();
    let quality = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 0.0 };
    Some(RemainderFit {
        model: REMAINDER_MODEL.into(),
        constant: ln_c.exp(),
        quality,
        points: pts.len(),
    })
}

/// Last half (at least three points) of a sequence.
pub fn tail<T>(v: &[T]) -> &[T] {
    let n = v.len();
    &v[n.saturating_sub((n / 2).max(3).min(n))..]
}

pub fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn sorted_grid(h_grid: &[f64]) -> Result<Vec<f64>> {
    let mut hs = h_grid.to_vec();
    if hs.is_empty() || hs.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
        return Err(Error::InvalidInput("h grid must be non-empty and positive".into()));
    }
    hs.sort_by(|a, b| b.total_cmp(a));
    if hs.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput("h grid has repeated values".into()));
    }
    Ok(hs)
}

/// Per-`h` eigensolves (run on the current rayon pool), records ordered by
/// decreasing `h` regardless of scheduling.
pub fn sweep(p: &Potential, h_grid: &[f64], k_max: usize, grid: &GridSpec) -> Result<SweepResult> {
    if k_max == 0 {
        return Err(Error::EigenIndex { k: 0, n: 0 });
    }
    let hs = sorted_grid(h_grid)?;
    let records: Vec<SweepRecord> = hs
        .par_iter()
        .map(|&h| sweep_record(p, h, k_max, grid))
        .collect::<Result<_>>()?;
    let remainder_trend: Vec<f64> = records.iter().map(|r| (r.ratio[0] - 1.0).abs()).collect();
    let t = tail(&remainder_trend);
    let converging = t.len() >= 2 && strictly_decreasing(t) && t[t.len() - 1] < 0.99 * t[0];
    let fitted_remainder = fit_remainder(tail(&hs), t);
    Ok(SweepResult {
        potential: p.spec(),
        k_max,
        h_grid: hs,
        records,
        fitted_remainder,
        remainder_trend,
        converging,
    })
}

fn sweep_record(p: &Potential, h: f64, k_max: usize, grid: &GridSpec) -> Result<SweepRecord> {
    let s = eigensolve(p, h, k_max, grid)?;
    let widths = s.widths().cloned().expect("interval rescaling");
    let lambda_predicted: Vec<f64> = (1..=k_max).map(|k| predict_lambda(&widths, k)).collect();
    let ratio = s
        .rescaled_eigenvalues
        .iter()
        .enumerate()
        .map(|(i, q)| q / (PI * (i + 1) as f64).powi(2))
        .collect();
    let eigvec_residual = if s.eigenvectors.is_some() {
        Some((1..=k_max).map(|k| eigenvector_residual(&s, k)).collect::<Result<_>>()?)
    } else {
        None
    };
    Ok(SweepRecord {
        h,
        widths,
        lambda_numeric: s.eigenvalues,
        lambda_rescaled: s.rescaled_eigenvalues,
        lambda_predicted,
        ratio,
        rescaled_error: s.rescaled_error_estimates,
        eigvec_residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeClass {
    Bounded,
    Divergent,
    Inconclusive,
}

/// Decision constants of the probe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeThresholds {
    /// Divergent when the last ratio is at least this multiple of the first.
    pub divergent_growth: f64,
    /// Bounded when `(max - min) / min` stays below this.
    pub bounded_variation: f64,
}

impl Default for ProbeThresholds {
    fn default() -> Self {
        ProbeThresholds {
            divergent_growth: 10.0,
            bounded_variation: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub potential: PotentialSpec,
    pub classification: ProbeClass,
    pub h_grid: Vec<f64>,
    /// `lambda_1 / h^2` per `h`.
    pub ratios: Vec<f64>,
    pub growth: f64,
    pub variation: f64,
    /// The ratio never decreases as `h` decreases.
    pub monotone: bool,
    pub thresholds: ProbeThresholds,
}

/// Physical-coordinate cells per plateau half-width.
const PLATEAU_CELLS: usize = 2000;

/// `lambda_1 / h^2` of `-h^2 Δ + V` at one `h`.
pub fn first_ratio(p: &Potential, h: f64, grid: &GridSpec) -> Result<f64> {
    if p.is_point_well() {
        let s = eigensolve(p, h, 1, grid)?;
        Ok(s.rescaled_eigenvalues[0] * (-2.0 * s.widths().expect("interval rescaling").ln_width()).exp())
    } else {
        let a = p.params().get("a").copied().unwrap_or(0.1);
        let half = 1.5;
        let cells = ((2.0 * half / a) * PLATEAU_CELLS as f64).round() as usize;
        let s = eigensolve_physical(p, h, 1, -half, half, cells - 1, true)?;
        Ok(s.rescaled_eigenvalues[0])
    }
}

pub fn first_ratio_probe(p: &Potential, h_grid: &[f64], grid: &GridSpec, thresholds: ProbeThresholds) -> Result<ProbeResult> {
    let hs = sorted_grid(h_grid)?;
    let ratios: Vec<f64> = hs
        .par_iter()
        .map(|&h| first_ratio(p, h, grid))
        .collect::<Result<_>>()?;
    let first = ratios[0];
    let last = ratios[ratios.len() - 1];
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(*r), b.max(*r)));
    let growth = last / first;
    let variation = (hi - lo) / lo;
    let classification = if growth >= thresholds.divergent_growth {
        ProbeClass::Divergent
    } else if variation <= thresholds.bounded_variation {
        ProbeClass::Bounded
    } else {
        ProbeClass::Inconclusive
    };
    Ok(ProbeResult {
        potential: p.spec(),
        classification,
        monotone: ratios.windows(2).all(|w| w[1] >= w[0]),
        h_grid: hs,
        ratios,
        growth,
        variation,
        thresholds,
    })
}

/// `10^-a, ..., 10^-b` in decade steps.
pub fn decades(a: i32, b: i32) -> Vec<f64> {
    (a..=b).map(|e| 10f64.powi(-e)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pot(s: &str) -> Potential {
        s.parse().unwrap()
    }

    fn unit_widths(h: f64) -> WellWidths {
        WellWidths {
            h,
            delta_minus: -0.5,
            delta_plus: 0.5,
            ln_abs_delta_minus: 0.5f64.ln(),
            ln_delta_plus: 0.5f64.ln(),
            residual: 0.0,
            iterations: 0,
            degenerate: false,
        }
    }

    #[test]
    fn prediction_examples() {
        let w = unit_widths(1.0);
        assert_relative_eq!(predict_lambda(&w, 1), PI * PI, max_relative = 1e-14);
        assert_relative_eq!(predict_lambda(&w, 2), 4.0 * predict_lambda(&w, 1), max_relative = 1e-14);
    }

    #[test]
    fn exp_flat_prediction_leading_order() {
        // pi^2 k^2 h^2 |ln h|^2 up to the slowly vanishing width correction
        let p = pot("exp_flat1");
        let mut prev = f64::INFINITY;
        for e in [5, 20, 80, 150] {
            let h = 10f64.powi(-e);
            let w = crate::wellwidth::solve_even_delta(&p, h).unwrap();
            let lead = PI * PI * h * h * h.ln().powi(2);
            let d = (predict_lambda(&w, 1) / lead - 1.0).abs();
            assert!(d < prev);
            prev = d;
        }
        assert!(prev < 0.1);
    }

    #[test]
    fn sine_profile_examples() {
        let w = unit_widths(1.0);
        let n = 20000;
        let x: Vec<f64> = (0..=n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect();
        let dx = 2.0 / n as f64;
        let v1 = sine_profile(&w, 1, &x);
        let v2 = sine_profile(&w, 2, &x);
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * dx;
        assert_relative_eq!(dot(&v1, &v1), 1.0, max_relative = 1e-10);
        assert!(dot(&v1, &v2).abs() < 1e-10);
        assert_eq!(sine_profile(&w, 1, &[-0.7, 0.6]), vec![0.0, 0.0]);
        assert_relative_eq!(sine_profile(&w, 1, &[0.0])[0], 2f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn brackets_hold() {
        for name in ["power2", "exp_flat1", "asym_mixed", "log_power2"] {
            let s = eigensolve(&pot(name), 1e-6, 3, &GridSpec::default()).unwrap();
            for k in 1..=3 {
                let r = bracket_check(&s, k).unwrap();
                assert!(r.passed, "{name} {k}: {r:?}");
            }
        }
        assert_eq!(lower_constant(2), 1.0);
        assert_relative_eq!(lower_constant(1), 0.81066113551397528353, max_relative = 1e-13);
    }

    #[test]
    fn dirichlet_eigenvector_residual() {
        let sol = crate::spectral1d::solve_schrodinger_1d(&|_| 0.0, 0.0, 1.0, 2047, 3, true, true, 3).unwrap();
        let s = Spectrum {
            h: 1.0,
            rescaling: crate::spectral1d::Rescaling::Interval { widths: unit_widths(1.0) },
            eigenvalues: sol.values.clone(),
            rescaled_eigenvalues: sol.values.clone(),
            error_estimates: sol.errors.clone(),
            rescaled_error_estimates: sol.errors.clone(),
            grid: sol.grid.clone(),
            grid_x: Some(sol.x.clone()),
            grid_weights: Some(sol.weights.clone()),
            eigenvectors: sol.vectors.clone(),
            sectors: None,
        };
        for k in 1..=3 {
            assert!(eigenvector_residual(&s, k).unwrap() < 1e-6);
        }
        let no_vec = eigensolve(&pot("power2"), 1e-3, 1, &GridSpec::default()).unwrap();
        assert!(matches!(eigenvector_residual(&no_vec, 1), Err(Error::MissingVectors)));
    }

    #[test]
    fn exp_flat_sweep_trends() {
        let grid = GridSpec {
            vectors: true,
            ..GridSpec::default()
        };
        let hs = decades(4, 15);
        let r = sweep(&pot("exp_flat1"), &hs, 3, &grid).unwrap();
        assert!(r.converging, "{:?}", r.remainder_trend);
        let fit = r.fitted_remainder.as_ref().unwrap();
        assert!(fit.quality > 0.9, "{fit:?}");
        let res: Vec<f64> = r.records.iter().map(|x| x.eigvec_residual.as_ref().unwrap()[0]).collect();
        assert!(strictly_decreasing(tail(&res)), "{res:?}");
        let res2: Vec<f64> = r.records.iter().map(|x| x.eigvec_residual.as_ref().unwrap()[1]).collect();
        assert!(strictly_decreasing(tail(&res2)), "{res2:?}");
        // k^2 law at the smallest h
        let last = r.records.last().unwrap();
        for k in 2..=3 {
            let q = last.lambda_rescaled[k - 1] / last.lambda_rescaled[0];
            assert!((q / (k * k) as f64 - 1.0).abs() < 0.1, "k={k}: {q}");
        }
    }

    #[test]
    fn harmonic_sweep_does_not_converge() {
        let r = sweep(&pot("power2"), &decades(2, 8), 2, &GridSpec::default()).unwrap();
        for rec in &r.records {
            // (2k-1)h against pi^2 k^2 h / 2
            for k in 1..=2 {
                let expect = 2.0 * (2 * k - 1) as f64 / (PI * k as f64).powi(2);
                assert_relative_eq!(rec.ratio[k - 1], expect, max_relative = 1e-5);
            }
        }
        assert!(!r.converging);
    }

    #[test]
    fn sweep_is_ordered_and_deterministic() {
        let p = pot("exp_flat2");
        let hs = [1e-3, 1e-9, 1e-5, 1e-7];
        let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = pool.install(|| sweep(&p, &hs, 2, &GridSpec::default())).unwrap();
        let b = sweep(&p, &hs, 2, &GridSpec::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.h_grid, vec![1e-3, 1e-5, 1e-7, 1e-9]);
        assert!(sweep(&p, &[1e-3, 1e-3], 1, &GridSpec::default()).is_err());
    }

    #[test]
    fn remainder_fit_recovers_constant() {
        let hs = decades(3, 30);
        let r: Vec<f64> = hs.iter().map(|h| 2.5 * remainder_gauge(*h)).collect();
        let f = fit_remainder(&hs, &r).unwrap();
        assert_relative_eq!(f.constant, 2.5, max_relative = 1e-12);
        assert!(f.quality > 0.999999);
    }

    #[test]
    fn probe_point_wells_diverge() {
        let t = ProbeThresholds::default();
        let hs = [1e-2, 1e-4, 1e-6, 1e-8];
        for name in ["exp_flat1", "power2", "log_squared", "asym_mixed"] {
            let r = first_ratio_probe(&pot(name), &hs, &GridSpec::default(), t).unwrap();
            assert_eq!(r.classification, ProbeClass::Divergent, "{name}: {:?}", r.ratios);
            assert!(r.monotone);
        }
    }

    #[test]
    fn probe_plateau_stays_below_the_plateau_bound() {
        let p = pot("plateau");
        let hs = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
        let r = first_ratio_probe(&p, &hs, &GridSpec::default(), ProbeThresholds::default()).unwrap();
        let limit = (PI / 0.2).powi(2);
        assert!(r.monotone, "{:?}", r.ratios);
        assert!(r.ratios.iter().all(|x| *x <= limit * (1.0 + 1e-3)), "{:?}", r.ratios);
        assert!(r.ratios[r.ratios.len() - 1] > 0.95 * limit);
        let steps: Vec<f64> = r.ratios.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(strictly_decreasing(&steps), "{steps:?}");
    }
}
