//! The acceptance suite: twelve numerical criteria, each reduced to one
//! measured quantity compared against a threshold.
//!
//! Outcomes carry no timings, so the serialized suite is byte-identical
//! across thread counts; elapsed times go to stderr.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::asymptotics::{
    bracket_check, decades, eigenvector_residual, first_ratio_probe, strictly_decreasing, sweep, tail,
    ProbeThresholds,
};
use crate::error::{Error, Result};
use crate::potentials::{shorthand, zoo, AngularFactor, Potential};
use crate::radial::{ball_dirichlet_reference, radial_eigensolve};
use crate::spectral1d::{eigensolve, solve_schrodinger_1d, square_well_reference, GridSpec};
use crate::star2d::{star_domain_eigensolve_2d, star_reference_study, AngularCoupling, Grid2d};
use crate::tridiag::DEFAULT_SEED;

pub const CRITERIA: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: Value,
}

impl Outcome {
    fn new(id: usize, passed: bool, measured: f64, threshold: f64, detail: Value) -> Self {
        Self {
            id,
            name: NAMES[id - 1].to_string(),
            passed,
            measured,
            threshold,
            detail,
        }
    }

    fn failed(id: usize, err: &Error) -> Self {
        Self::new(
            id,
            false,
            f64::NAN,
            f64::NAN,
            json!({ "error": err.kind(), "message": err.to_string() }),
        )
    }

    /// `PASS` or `FAIL` followed by the criterion and its numbers.
    pub fn summary_line(&self) -> String {
        format!(
            "{} [{:>2}] {}: measured {:.6e}, threshold {:.6e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.threshold
        )
    }
}

const NAMES: [&str; CRITERIA] = [
    "dirichlet interval oracle",
    "harmonic ladder",
    "quartic scaling",
    "eigenvalue brackets over the zoo",
    "flat-well convergence and remainder fit",
    "exp_flat2 log-corrected constant",
    "eigenvector profile",
    "square-well large-coupling rate",
    "radial ball limit",
    "star-domain limit in the plane",
    "first-ratio probe dichotomy",
    "determinism across thread counts",
];

pub fn name(id: usize) -> &'static str {
    NAMES[id - 1]
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn max_rel(pairs: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    pairs
        .into_iter()
        .map(|(a, b)| ((a - b) / b).abs())
        .fold(0.0, f64::max)
}

/// Criterion `id` on the current rayon pool. Criterion 12 needs pools of its
/// own; see [`determinism`].
pub fn run(id: usize) -> Outcome {
    let (r, elapsed) = timed(|| match id {
        1 => dirichlet_oracle(),
        2 => harmonic_ladder(),
        3 => quartic_scaling(),
        4 => zoo_brackets(),
        5 => flat_convergence(),
        6 => log_corrected_constant(),
        7 => eigenvector_profile(),
        8 => large_coupling_rate(),
        9 => radial_limit(),
        10 => star_limit(),
        11 => probe_dichotomy(),
        12 => determinism(1, 8),
        _ => Err(Error::InvalidInput(format!("no criterion {id}"))),
    });
    eprintln!("criterion {id:>2}: {:.2} s", elapsed.as_secs_f64());
    r.unwrap_or_else(|e| Outcome::failed(id, &e))
}

/// Criteria `1..=11` in order.
pub fn run_numerical() -> Vec<Outcome> {
    (1..CRITERIA).map(run).collect()
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(e.to_string()))
}

/// Runs criteria `1..=11` on pools of `jobs_a` and `jobs_b` threads and
/// compares the serialized outcomes.
pub fn determinism(jobs_a: usize, jobs_b: usize) -> Result<Outcome> {
    let a = pool(jobs_a)?.install(run_numerical);
    let b = pool(jobs_b)?.install(run_numerical);
    Ok(compare_runs(&a, &b))
}

/// Criterion 12 from two completed runs of criteria `1..=11`.
pub fn compare_runs(a: &[Outcome], b: &[Outcome]) -> Outcome {
    let sa = serde_json::to_string(a).expect("outcomes serialize");
    let sb = serde_json::to_string(b).expect("outcomes serialize");
    let differing: Vec<usize> = a
        .iter()
        .zip(b)
        .filter(|(x, y)| serde_json::to_string(x).ok() != serde_json::to_string(y).ok())
        .map(|(x, _)| x.id)
        .collect();
    let identical = sa == sb;
    Outcome::new(
        12,
        identical,
        differing.len() as f64,
        0.0,
        json!({ "criteria_compared": a.len(), "differing": differing }),
    )
}

/// The whole suite on a pool of `jobs` threads; criterion 12 reruns
/// criteria `1..=11` on a pool of a different size.
pub fn run_suite(jobs: usize) -> Result<Vec<Outcome>> {
    let main = pool(jobs)?.install(run_numerical);
    let other = if jobs == 1 { 8 } else { 1 };
    let (rerun, elapsed) = timed(|| pool(other).map(|p| p.install(run_numerical)));
    eprintln!("criterion 12: {:.2} s", elapsed.as_secs_f64());
    let twelve = compare_runs(&main, &rerun?);
    let mut all = main;
    all.push(twelve);
    Ok(all)
}

fn dirichlet_oracle() -> Result<Outcome> {
    let limit = Duration::from_secs(1);
    let (sol, elapsed) = timed(|| solve_schrodinger_1d(&|_| 0.0, 0.0, 1.0, 4096, 5, true, false, DEFAULT_SEED));
    let sol = sol?;
    let err = max_rel(sol.values.iter().enumerate().map(|(i, v)| (*v, (PI * (i + 1) as f64).powi(2))));
    Ok(Outcome::new(
        1,
        err <= 1e-8 && elapsed < limit,
        err,
        1e-8,
        json!({ "values": sol.values, "runtime_limit_s": 1.0 }),
    ))
}

fn harmonic_ladder() -> Result<Outcome> {
    let limit = Duration::from_secs(1);
    let h = 1e-3;
    let (s, elapsed) = timed(|| eigensolve(&shorthand("power2")?, h, 3, &GridSpec::default()));
    let s = s?;
    let scaled: Vec<f64> = s.eigenvalues.iter().map(|l| l / h).collect();
    let err = max_rel(scaled.iter().enumerate().map(|(i, v)| (*v, (2 * i + 1) as f64)));
    Ok(Outcome::new(
        2,
        err <= 1e-4 && elapsed < limit,
        err,
        1e-4,
        json!({ "lambda_over_h": scaled, "runtime_limit_s": 1.0 }),
    ))
}

fn quartic_scaling() -> Result<Outcome> {
    let p = shorthand("power4")?;
    let hs = [1e-2, 1e-3, 1e-4];
    let table: Vec<Vec<f64>> = hs
        .par_iter()
        .map(|&h| {
            let s = eigensolve(&p, h, 3, &GridSpec::default())?;
            let ln_scale = s.kinetic_scale_ln() - 4.0 / 3.0 * h.ln();
            Ok(s.rescaled_eigenvalues.iter().map(|q| q * ln_scale.exp()).collect())
        })
        .collect::<Result<_>>()?;
    let spread = (0..3)
        .map(|k| {
            let col: Vec<f64> = table.iter().map(|row| row[k]).collect();
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (hi - lo) / lo
        })
        .fold(0.0, f64::max);
    Ok(Outcome::new(
        3,
        spread <= 1e-5,
        spread,
        1e-5,
        json!({ "h": hs, "lambda_over_h_4_3": table }),
    ))
}

fn zoo_brackets() -> Result<Outcome> {
    let limit = Duration::from_secs(30);
    let wells: Vec<(String, Potential)> = zoo()
        .into_iter()
        .filter(|e| e.potential.is_point_well() && e.potential.is_side_monotone())
        .map(|e| (e.name.to_string(), e.potential))
        .collect();
    let hs = decades(2, 10);
    let cases: Vec<(usize, f64)> = (0..wells.len()).flat_map(|i| hs.iter().map(move |&h| (i, h))).collect();
    let (reports, elapsed) = timed(|| {
        cases
            .par_iter()
            .map(|&(i, h)| {
                let s = eigensolve(&wells[i].1, h, 3, &GridSpec::default())?;
                (1..=3).map(|k| bracket_check(&s, k)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    });
    let reports = reports?;
    let mut failures = Vec::new();
    let (mut min_lower, mut min_upper) = (f64::INFINITY, f64::INFINITY);
    for (&(i, h), rs) in cases.iter().zip(&reports) {
        for r in rs {
            min_lower = min_lower.min(r.lower_margin);
            min_upper = min_upper.min(r.upper_margin);
            if !r.passed {
                failures.push(json!({ "potential": wells[i].0, "h": h, "k": r.k }));
            }
        }
    }
    let checks = cases.len() * 3;
    Ok(Outcome::new(
        4,
        failures.is_empty() && elapsed < limit,
        failures.len() as f64,
        0.0,
        json!({
            "potentials": wells.iter().map(|w| &w.0).collect::<Vec<_>>(),
            "h": hs,
            "checks": checks,
            "min_lower_margin": min_lower,
            "min_upper_margin": min_upper,
            "failures": failures,
            "runtime_limit_s": 30.0,
        }),
    ))
}

fn flat_convergence() -> Result<Outcome> {
    let r = sweep(&shorthand("exp_flat1")?, &decades(4, 15), 1, &GridSpec::default())?;
    let last = *r.remainder_trend.last().expect("non-empty sweep");
    let quality = r.fitted_remainder.as_ref().map_or(f64::NAN, |f| f.quality);
    let passed = last <= 0.25 && r.converging && quality >= 0.9;
    Ok(Outcome::new(
        5,
        passed,
        last,
        0.25,
        json!({
            "h": r.h_grid,
            "ratio": r.records.iter().map(|x| x.ratio[0]).collect::<Vec<_>>(),
            "tail_monotone": r.converging,
            "fit": r.fitted_remainder,
            "fit_quality_threshold": 0.9,
        }),
    ))
}

fn log_corrected_constant() -> Result<Outcome> {
    let r = sweep(&shorthand("exp_flat2")?, &decades(4, 15), 1, &GridSpec::default())?;
    let target = 0.5 * PI * PI;
    let scaled: Vec<f64> = r
        .records
        .iter()
        .map(|x| {
            let ln = x.lambda_rescaled[0].ln() - 2.0 * x.widths.ln_width() - x.h.ln().abs().ln();
            ln.exp()
        })
        .collect();
    let errors: Vec<f64> = scaled.iter().map(|v| (v / target - 1.0).abs()).collect();
    let last = *errors.last().expect("non-empty sweep");
    let decreasing = strictly_decreasing(&errors);
    Ok(Outcome::new(
        6,
        last <= 0.25 && decreasing,
        last,
        0.25,
        json!({
            "h": r.h_grid,
            "lambda_over_h2_ln": scaled,
            "target": target,
            "relative_error": errors,
            "decreasing": decreasing,
        }),
    ))
}

fn eigenvector_profile() -> Result<Outcome> {
    let p = shorthand("exp_flat1")?;
    let grid = GridSpec {
        vectors: true,
        ..GridSpec::default()
    };
    let r = sweep(&p, &decades(4, 15), 1, &grid)?;
    let residuals: Vec<f64> = r
        .records
        .iter()
        .map(|x| x.eigvec_residual.as_ref().map_or(f64::NAN, |v| v[0]))
        .collect();
    let last = *residuals.last().expect("non-empty sweep");
    let decreasing = strictly_decreasing(tail(&residuals));
    let s = eigensolve(&p, 1e-15, 3, &grid)?;
    let vs = s.eigenvectors.as_ref().ok_or(Error::MissingVectors)?;
    let w = s.grid_weights.as_ref().ok_or(Error::MissingVectors)?;
    let mut gram_error = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let dot: f64 = vs[i].iter().zip(&vs[j]).zip(w).map(|((a, b), c)| a * b * c).sum();
            gram_error = gram_error.max((dot - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    // The first-state residual at the smallest h from the three-state solve.
    let check = eigenvector_residual(&s, 1)?;
    Ok(Outcome::new(
        7,
        last <= 0.15 && decreasing && gram_error <= 1e-8,
        last,
        0.15,
        json!({
            "h": r.h_grid,
            "residual": residuals,
            "tail_decreasing": decreasing,
            "orthonormality_error": gram_error,
            "orthonormality_threshold": 1e-8,
            "residual_from_three_state_solve": check,
        }),
    ))
}

fn large_coupling_rate() -> Result<Outcome> {
    let ms = [1e2, 1e4, 1e6];
    let gaps: Vec<f64> = ms
        .iter()
        .map(|&m| PI * PI - square_well_reference(m, 1).eigenvalues[0])
        .collect();
    let xs: Vec<f64> = ms.iter().map(|m| m.ln()).collect();
    let ys: Vec<f64> = gaps.iter().map(|g| g.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let dev = (slope + 0.5).abs();
    Ok(Outcome::new(
        8,
        dev <= 0.05,
        slope,
        -0.5,
        json!({ "m": ms, "pi2_minus_e1": gaps, "tolerance": 0.05 }),
    ))
}

fn radial_limit() -> Result<Outcome> {
    let p = shorthand("exp_flat1")?;
    let hs = decades(4, 15);
    let mut worst = 0.0f64;
    let mut all_ok = true;
    let mut per_dim = Vec::new();
    for d in [3usize, 2] {
        let target = ball_dirichlet_reference(d, 1).eigenvalues[0];
        let values: Vec<f64> = hs
            .par_iter()
            .map(|&h| Ok(radial_eigensolve(&p, h, d, 1)?.rescaled_eigenvalues[0]))
            .collect::<Result<_>>()?;
        let errors: Vec<f64> = values.iter().map(|v| (v / target - 1.0).abs()).collect();
        let last = *errors.last().expect("non-empty sweep");
        let decreasing = strictly_decreasing(&errors);
        all_ok &= last <= 0.2 && decreasing;
        worst = worst.max(last);
        per_dim.push(json!({
            "dimension": d,
            "target": target,
            "rescaled": values,
            "relative_error": errors,
            "decreasing": decreasing,
        }));
    }
    Ok(Outcome::new(9, all_ok, worst, 0.2, json!({ "h": hs, "runs": per_dim })))
}

fn star_limit() -> Result<Outcome> {
    let p = shorthand("exp_flat1")?;
    let theta = AngularFactor::ellipse(1.25, 0.8, 720)?;
    let grid = Grid2d::default();
    let reference = star_reference_study(&theta, &grid, 1)?;
    let star = reference.fine[0];
    let grid_error = reference.relative_error[0];
    let h = 1e-12;
    let q = star_domain_eigensolve_2d(&p, &theta, h, 1, &grid, AngularCoupling::Argument)?.rescaled_eigenvalues[0];
    let err = (q / star - 1.0).abs();
    let disk = ball_dirichlet_reference(2, 1).eigenvalues[0];
    let control: Vec<f64> = [1e-8, h]
        .iter()
        .map(|&hh| {
            Ok(star_domain_eigensolve_2d(&p, &theta, hh, 1, &grid, AngularCoupling::Factor)?.rescaled_eigenvalues[0])
        })
        .collect::<Result<_>>()?;
    let to_disk: Vec<f64> = control.iter().map(|c| (c / disk - 1.0).abs()).collect();
    let to_star = (control[1] / star - 1.0).abs();
    let control_ok = to_disk[1] < to_disk[0] && to_disk[1] < to_star;
    Ok(Outcome::new(
        10,
        err <= 0.25 && grid_error <= 0.01 && control_ok,
        err,
        0.25,
        json!({
            "semi_axes": [1.25, 0.8],
            "h": h,
            "rescaled": q,
            "reference": reference,
            "reference_grid_threshold": 0.01,
            "control_h": [1e-8, h],
            "control_rescaled": control,
            "control_error_to_disk": to_disk,
            "control_error_to_star": to_star,
            "disk": disk,
        }),
    ))
}

fn probe_dichotomy() -> Result<Outcome> {
    let grid = GridSpec::default();
    let t = ProbeThresholds::default();
    let plateau = first_ratio_probe(&shorthand("plateau")?, &decades(2, 6), &grid, t)?;
    let flat = first_ratio_probe(&shorthand("exp_flat1")?, &decades(2, 8), &grid, t)?;
    let passed = plateau.variation <= t.bounded_variation && flat.growth >= t.divergent_growth;
    Ok(Outcome::new(
        11,
        passed,
        plateau.variation,
        t.bounded_variation,
        json!({ "plateau": plateau, "exp_flat1": flat }),
    ))
}
