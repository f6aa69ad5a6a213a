//! Well widths: the interval on which the potential stays below the kinetic
//! energy scale of that same interval.
//!
//! All unknowns are solved for in the variable `s = ln |delta|`, so widths far
//! below the smallest positive `f64` (as for the right side of `asym_mixed`)
//! are still resolved; the linear-scale fields then underflow to 0 while the
//! `ln_*` fields stay exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::{Family, Potential, Side};
use crate::roots::{bisect_increasing, Root};

/// Default tolerance on the log-residual of the defining equations.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Successively deeper lower brackets tried for `ln |delta|`.
const LOWER_BRACKETS: [f64; 6] = [-700.0, -7e3, -7e5, -7e8, -7e11, -7e15];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WellWidths {
    pub h: f64,
    pub delta_minus: f64,
    pub delta_plus: f64,
    pub ln_abs_delta_minus: f64,
    pub ln_delta_plus: f64,
    /// Largest absolute defect of the defining log-equations.
    pub residual: f64,
    pub iterations: u32,
    pub degenerate: bool,
}

impl WellWidths {
    pub fn ln_width(&self) -> f64 {
        logaddexp(self.ln_abs_delta_minus, self.ln_delta_plus)
    }

    pub fn width(&self) -> f64 {
        self.ln_width().exp()
    }

    /// `ln(h^2 / width^2)`, the log of the factor mapping rescaled eigenvalues
    /// back to physical ones.
    pub fn kinetic_scale_ln(&self) -> f64 {
        2.0 * self.h.ln() - 2.0 * self.ln_width()
    }

    pub fn kinetic_scale(&self) -> f64 {
        self.kinetic_scale_ln().exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialDelta {
    pub h: f64,
    pub delta: f64,
    pub ln_delta: f64,
    pub residual: f64,
    pub iterations: u32,
    pub degenerate: bool,
}

impl RadialDelta {
    pub fn kinetic_scale_ln(&self) -> f64 {
        2.0 * self.h.ln() - 2.0 * self.ln_delta
    }

    pub fn kinetic_scale(&self) -> f64 {
        self.kinetic_scale_ln().exp()
    }
}

pub fn logaddexp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

fn check_h(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "h".into(),
            value: h,
            reason: "must be finite and positive",
        })
    }
}

fn check_point_well(p: &Potential) -> Result<()> {
    if !p.is_point_well() {
        return Err(Error::NotPointWell);
    }
    if !p.is_side_monotone() {
        return Err(Error::NonMonotone);
    }
    Ok(())
}

/// Upper end of the bracket for `ln |delta|` on one side: where the potential
/// reaches its floor.
fn upper_ln(p: &Potential, side: Side) -> f64 {
    (crate::potentials::RAMP_END / p.theta(side)).ln()
}

/// Solves `g(s) = target` for nondecreasing `g`, searching ever deeper lower
/// brackets, optionally seeded with a guess for `s`.
fn solve_log(g: impl Fn(f64) -> f64, hi: f64, target: f64, guess: Option<f64>, h: f64) -> Result<Root> {
    if !(g(hi) >= target) {
        return Err(Error::Bracket {
            h,
            reason: "h too large: the equation has no solution below the potential floor".into(),
        });
    }
    if let Some(s0) = guess.filter(|s| s.is_finite()) {
        let (a, b) = (s0 - 1.0, (s0 + 1.0).min(hi));
        if a < b && g(a) < target && g(b) >= target {
            return bisect_increasing(&g, a, b, target);
        }
    }
    for lo in LOWER_BRACKETS {
        if lo < hi && g(lo) < target {
            return bisect_increasing(&g, lo, hi, target);
        }
    }
    Err(Error::Bracket {
        h,
        reason: "h too small: width below the deepest searched bracket".into(),
    })
}

/// Even case: `4 delta^2 V(delta) = h^2`, with `delta_minus = -delta_plus`.
pub fn solve_even_delta(p: &Potential, h: f64) -> Result<WellWidths> {
    check_h(h)?;
    check_point_well(p)?;
    if !p.is_even() {
        return Err(Error::NotEven);
    }
    let target = 2.0 * h.ln();
    let g = |s: f64| 2.0 * (std::f64::consts::LN_2 + s) + p.log_eval_side(Side::Right, s);
    let guess = asymptotic_delta(p, h).ok().map(f64::ln);
    let root = solve_log(g, upper_ln(p, Side::Right), target, guess, h)?;
    let s = root.x;
    Ok(WellWidths {
        h,
        delta_minus: -s.exp(),
        delta_plus: s.exp(),
        ln_abs_delta_minus: s,
        ln_delta_plus: s,
        residual: (root.value - target).abs(),
        iterations: root.iterations,
        degenerate: root.degenerate,
    })
}

/// Left width matching a given log-level of the potential.
fn inner_minus(p: &Potential, level: f64, h: f64) -> Result<Root> {
    let hi = upper_ln(p, Side::Left);
    if level >= p.log_eval_side(Side::Left, hi) {
        return Ok(Root {
            x: hi,
            value: level,
            iterations: 0,
            degenerate: false,
        });
    }
    if level == f64::NEG_INFINITY {
        return Err(Error::Bracket {
            h,
            reason: "potential level underflows on the left side".into(),
        });
    }
    solve_log(|s| p.log_eval_side(Side::Left, s), hi, level, None, h)
}

/// General case: `V(delta_minus) = V(delta_plus) = h^2 / (delta_plus - delta_minus)^2`,
/// by an outer bisection in `delta_plus` around an inner one for `delta_minus`.
pub fn solve_delta_pm(p: &Potential, h: f64) -> Result<WellWidths> {
    check_h(h)?;
    check_point_well(p)?;
    let target = 2.0 * h.ln();
    let outer = |s_plus: f64| -> f64 {
        let level = p.log_eval_side(Side::Right, s_plus);
        match inner_minus(p, level, h) {
            Ok(r) => level + 2.0 * logaddexp(s_plus, r.x),
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let guess = asymptotic_delta(p, h).ok().map(f64::ln);
    let root = solve_log(outer, upper_ln(p, Side::Right), target, guess, h)?;
    let s_plus = root.x;
    let level = p.log_eval_side(Side::Right, s_plus);
    let inner = inner_minus(p, level, h)?;
    let s_minus = inner.x;
    let match_defect = (p.log_eval_side(Side::Left, s_minus) - level).abs();
    let width_defect = (level + 2.0 * logaddexp(s_plus, s_minus) - target).abs();
    Ok(WellWidths {
        h,
        delta_minus: -s_minus.exp(),
        delta_plus: s_plus.exp(),
        ln_abs_delta_minus: s_minus,
        ln_delta_plus: s_plus,
        residual: match_defect.max(width_defect),
        iterations: root.iterations + inner.iterations,
        degenerate: root.degenerate || inner.degenerate,
    })
}

/// Radial case: `delta^2 V0(delta) = h^2`.
pub fn solve_radial_delta(v0: &Potential, h: f64) -> Result<RadialDelta> {
    check_h(h)?;
    check_point_well(v0)?;
    let target = 2.0 * h.ln();
    let g = |s: f64| 2.0 * s + v0.log_eval_side(Side::Right, s);
    // The radial width is the even width at 2h.
    let guess = asymptotic_delta(v0, 2.0 * h).ok().map(f64::ln);
    let root = solve_log(g, upper_ln(v0, Side::Right), target, guess, h)?;
    Ok(RadialDelta {
        h,
        delta: root.x.exp(),
        ln_delta: root.x,
        residual: (root.value - target).abs(),
        iterations: root.iterations,
        degenerate: root.degenerate,
    })
}

/// Leading-order (for `power` and `log_squared`: exact) even-case width.
///
/// Only used as a cross-check and to seed brackets.
pub fn asymptotic_delta(p: &Potential, h: f64) -> Result<f64> {
    if !p.is_even() {
        return Err(Error::NoAsymptoticForm(p.family().to_string()));
    }
    let theta = p.theta(Side::Right);
    let h = theta * h;
    let lh = h.ln().abs();
    let param = |k: &str| p.params()[k];
    let d = match p.family() {
        Family::Power => (h / 2.0).powf(2.0 / (param("exponent") + 2.0)),
        Family::ExpFlat => (2.0 * lh).powf(-1.0 / param("alpha")),
        Family::LogPower => h * lh.powf(param("alpha") / 2.0) / 2.0,
        Family::LogSquared => (1.0 - (1.0 + 2.0 * (h / 2.0).ln().abs()).sqrt()).exp(),
        f => return Err(Error::NoAsymptoticForm(f.to_string())),
    };
    Ok(d / theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pot(s: &str) -> Potential {
        s.parse().unwrap()
    }

    #[test]
    fn even_power2() {
        let w = solve_even_delta(&pot("power2"), 0.02).unwrap();
        assert_relative_eq!(w.delta_plus, 0.1, max_relative = 1e-14);
        assert_eq!(w.delta_minus, -w.delta_plus);
        assert!(w.residual <= RESIDUAL_TOL);
    }

    #[test]
    fn radial_power2() {
        let r = solve_radial_delta(&pot("power2"), 0.01).unwrap();
        assert_relative_eq!(r.delta, 0.1, max_relative = 1e-14);
    }

    #[test]
    fn exp_flat_oracles() {
        let cases = [
            (1e-2, 0.147682995271646689651873538495),
            (1e-4, 0.0691386400327490403990399051696),
            (1e-6, 0.0439237697888798857972547222488),
            (1e-10, 0.0249641945880208702920275779155),
            (1e-15, 0.0160763848402429641710117430685),
        ];
        let p = pot("exp_flat1");
        for (h, d) in cases {
            let w = solve_even_delta(&p, h).unwrap();
            assert_relative_eq!(w.delta_plus, d, max_relative = 1e-13);
            assert!(w.residual <= RESIDUAL_TOL);
        }
        let p = pot("exp_flat2");
        for (h, d) in [
            (1e-2, 0.343783723598716850608532138075),
            (1e-4, 0.242712581005007219873727021712),
            (1e-10, 0.151338885208726316747288797183),
            (1e-15, 0.12284038251362492041311089438),
        ] {
            assert_relative_eq!(solve_even_delta(&p, h).unwrap().delta_plus, d, max_relative = 1e-13);
        }
        let r = solve_radial_delta(&pot("exp_flat1"), 1e-8).unwrap();
        assert_relative_eq!(r.delta, 0.0332927908226658482326302439052, max_relative = 1e-13);
    }

    #[test]
    fn radial_is_even_at_twice_h() {
        for name in ["exp_flat1", "power4", "log_squared"] {
            let p = pot(name);
            for h in [1e-3, 1e-7] {
                let r = solve_radial_delta(&p, h).unwrap();
                let e = solve_even_delta(&p, 2.0 * h).unwrap();
                assert_relative_eq!(r.delta, e.delta_plus, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn pm_matches_even() {
        for name in ["power2", "power4", "exp_flat1", "exp_flat2", "log_power2", "log_squared"] {
            let p = pot(name);
            for h in [1e-2, 1e-5, 1e-9, 1e-14] {
                let e = solve_even_delta(&p, h).unwrap();
                let g = solve_delta_pm(&p, h).unwrap();
                assert_relative_eq!(e.delta_plus, g.delta_plus, max_relative = 1e-9);
                assert_relative_eq!(g.delta_minus, -g.delta_plus, max_relative = 1e-9);
                assert!(g.residual <= RESIDUAL_TOL, "{name} {h}: {}", g.residual);
            }
        }
    }

    #[test]
    fn asymptotic_forms() {
        let p = pot("exp_flat2");
        assert_relative_eq!(asymptotic_delta(&p, 1e-10).unwrap(), 0.14736, max_relative = 1e-4);
        let ls = pot("log_squared");
        let exact = (1.0 - (1.0 + 2.0 * 0.01f64.ln().abs()).sqrt()).exp();
        assert_relative_eq!(asymptotic_delta(&ls, 0.02).unwrap(), exact, max_relative = 1e-15);
        assert_relative_eq!(
            solve_even_delta(&ls, 0.02).unwrap().delta_plus,
            exact,
            max_relative = 1e-13
        );
        assert_relative_eq!(asymptotic_delta(&pot("power2"), 0.3).unwrap(), 0.15f64.sqrt(), max_relative = 1e-15);
        assert!(matches!(
            asymptotic_delta(&pot("asym_mixed"), 0.1),
            Err(Error::NoAsymptoticForm(_))
        ));
    }

    #[test]
    fn exp_flat_width_trend() {
        let p = pot("exp_flat1");
        let mut prev = f64::INFINITY;
        for e in [2, 5, 10, 20, 50, 100] {
            let h = 10f64.powi(-e);
            let w = solve_even_delta(&p, h).unwrap();
            let d = (w.delta_plus * 2.0 * h.ln().abs() - 1.0).abs();
            assert!(d < prev);
            prev = d;
        }
        assert!(prev < 0.05);
    }

    #[test]
    fn log_power_trend() {
        let p = pot("log_power2");
        let mut prev = f64::INFINITY;
        for e in [3, 6, 12, 24, 48, 96] {
            let h = 10f64.powi(-e);
            let w = solve_delta_pm(&p, h).unwrap();
            let r = (2.0 * w.delta_plus / (h * h.ln().abs()) - 1.0).abs();
            assert!(r < prev, "{e}: {r}");
            prev = r;
        }
        assert!(prev < 0.1);
    }

    #[test]
    fn asym_mixed_scales() {
        let p = pot("asym_mixed");
        for e in [2, 4, 6, 8, 10, 12, 15] {
            let h = 10f64.powi(-e);
            let w = solve_delta_pm(&p, h).unwrap();
            assert!(w.residual <= RESIDUAL_TOL);
            let r = (w.delta_minus.abs() / h.powf(2.0 / 3.0) - 1.0).abs();
            assert!(r < 0.05, "{e}: {r}");
            if e >= 4 {
                assert!(r < 1e-12, "{e}: {r}");
                assert!(w.ln_delta_plus < 10.0 * h.ln());
            }
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(solve_even_delta(&pot("asym_mixed"), 1e-3), Err(Error::NotEven)));
        assert!(matches!(solve_even_delta(&pot("plateau"), 1e-3), Err(Error::NotPointWell)));
        assert!(matches!(solve_delta_pm(&pot("oscillatory"), 1e-3), Err(Error::NonMonotone)));
        assert!(matches!(solve_even_delta(&pot("exp_flat1"), 10.0), Err(Error::Bracket { .. })));
        assert!(solve_even_delta(&pot("exp_flat1"), -1.0).is_err());
    }

    #[test]
    fn side_scaled_widths() {
        // delta(h) ~ +-theta(+-1) delta_pm(h) for the slices of a star potential
        let p: Potential = r#"{"family":"exp_flat","params":{"alpha":1,"theta_minus":2}}"#
            .parse()
            .unwrap();
        let base = pot("exp_flat1");
        let mut prev = f64::INFINITY;
        for e in [4, 8, 15, 30, 60] {
            let h = 10f64.powi(-e);
            let w = solve_delta_pm(&p, h).unwrap();
            let r = solve_even_delta(&base, h).unwrap().delta_plus;
            let defect = ((2.0 * w.delta_minus.abs() / r - 1.0).abs()).max((w.delta_plus / r - 1.0).abs());
            assert!(defect < prev);
            prev = defect;
        }
        assert!(prev < 0.05);
    }

    #[test]
    fn flat_widths_beat_powers() {
        let p = pot("exp_flat1");
        for a in [0.5, 0.1, 0.05] {
            let f = |h: f64| solve_even_delta(&p, h).unwrap().ln_delta_plus - a * h.ln();
            assert!(f(1e-300) > f(1e-100) && f(1e-100) > 0.0, "{a}");
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        const ZOO: [&str; 7] = ["power2", "power4", "exp_flat1", "exp_flat2", "log_power2", "log_squared", "asym_mixed"];

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn widths_monotone_in_h(which in 0usize..7, e in 1.5f64..14.0, step in 0.01f64..2.0) {
                let p = pot(ZOO[which]);
                let h_small = 10f64.powf(-e - step);
                let h_big = 10f64.powf(-e);
                let a = solve_delta_pm(&p, h_small).unwrap();
                let b = solve_delta_pm(&p, h_big).unwrap();
                prop_assert!(a.ln_delta_plus <= b.ln_delta_plus);
                prop_assert!(a.ln_abs_delta_minus <= b.ln_abs_delta_minus);
                prop_assert!(a.residual <= RESIDUAL_TOL && b.residual <= RESIDUAL_TOL);
            }

            #[test]
            fn residual_certificate_is_sharp(which in 0usize..6, e in 1.5f64..14.0) {
                let p = pot(ZOO[which]);
                let h = 10f64.powf(-e);
                let w = solve_even_delta(&p, h).unwrap();
                let s = w.ln_delta_plus + 1.01f64.ln();
                let defect = (2.0 * (std::f64::consts::LN_2 + s) + p.log_eval_side(Side::Right, s) - 2.0 * h.ln()).abs();
                prop_assert!(defect > RESIDUAL_TOL);
            }
        }
    }
}
