//! The potential zoo.
//!
//! Every builtin family is defined by an exact formula on a core neighbourhood
//! of the origin and continued by a linear ramp up to the constant floor `1`,
//! reached at `|x| = 2`, so all potentials are confining and monotone away from
//! the well. Values are available both directly ([`Potential::eval`]) and in
//! log form ([`Potential::log_eval`]); the log form is computed symbolically
//! per family and stays finite where `V` itself underflows.
//!
//! An optional per-side scale (`theta_minus`, `theta_plus`) evaluates the
//! family at `theta * |x|`, which is how one-dimensional slices of
//! `V0(|x| theta(x/|x|))` are represented.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Value of every builtin potential far from the well.
pub const SUPPORT_FLOOR: f64 = 1.0;

/// Radius at which the confining ramp reaches [`SUPPORT_FLOOR`].
pub const RAMP_END: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `|x|^exponent`
    Power,
    /// `exp(-|x|^-alpha)`
    ExpFlat,
    /// `|ln|x||^-alpha`
    LogPower,
    /// `exp(-|ln|x||^2)`
    LogSquared,
    /// `|x|` on the left, `1/|ln x|` on the right
    AsymMixed,
    /// `exp(-|x|^-4 - |x|^-2 (1 + sin(|x|^-36)))`, flat but not monotone
    Oscillatory,
    /// zero on `[-a, a]`, smooth rise to the floor at `|x| = 1`
    Plateau,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Power,
        Family::ExpFlat,
        Family::LogPower,
        Family::LogSquared,
        Family::AsymMixed,
        Family::Oscillatory,
        Family::Plateau,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Power => "power",
            Family::ExpFlat => "exp_flat",
            Family::LogPower => "log_power",
            Family::LogSquared => "log_squared",
            Family::AsymMixed => "asym_mixed",
            Family::Oscillatory => "oscillatory",
            Family::Plateau => "plateau",
        }
    }

    fn shape_params(self) -> &'static [&'static str] {
        match self {
            Family::Power => &["exponent"],
            Family::ExpFlat | Family::LogPower => &["alpha"],
            Family::Plateau => &["a"],
            Family::LogSquared | Family::AsymMixed | Family::Oscillatory => &[],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownFamily(s.to_owned()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Shape {
    Power { exponent: f64 },
    ExpFlat { alpha: f64 },
    LogPower { alpha: f64 },
    LogSquared,
    AsymMixed,
    Oscillatory,
    Plateau { a: f64 },
}

/// Wire form of a potential: `{"family": ..., "params": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub family: Family,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

/// An immutable, validated builtin potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialSpec", into = "PotentialSpec")]
pub struct Potential {
    family: Family,
    params: BTreeMap<String, f64>,
    shape: Shape,
    theta_minus: f64,
    theta_plus: f64,
    support_floor: f64,
    // (ln of core radius, log value at the core radius) per side
    core: [(f64, f64); 2],
}

impl TryFrom<PotentialSpec> for Potential {
    type Error = Error;

    fn try_from(spec: PotentialSpec) -> Result<Self> {
        make_builtin(spec.family, spec.params)
    }
}

impl From<Potential> for PotentialSpec {
    fn from(p: Potential) -> Self {
        PotentialSpec {
            family: p.family,
            params: p.params,
        }
    }
}

fn positive(params: &BTreeMap<String, f64>, name: &str) -> Result<f64> {
    let value = *params
        .get(name)
        .ok_or_else(|| Error::MissingParameter(name.to_owned()))?;
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::InvalidParameter {
            name: name.to_owned(),
            value,
            reason: "must be finite and positive",
        });
    }
    Ok(value)
}

/// Builds a builtin potential, validating its parameters.
///
/// Besides the family's own parameters every family accepts the optional side
/// scales `theta_minus` and `theta_plus` (default 1).
pub fn make_builtin(family: Family, params: BTreeMap<String, f64>) -> Result<Potential> {
    let allowed = family.shape_params();
    for (name, &value) in &params {
        if !allowed.contains(&name.as_str()) && name != "theta_minus" && name != "theta_plus" {
            return Err(Error::InvalidParameter {
                name: name.clone(),
                value,
                reason: "not a parameter of this family",
            });
        }
    }
    let shape = match family {
        Family::Power => Shape::Power {
            exponent: positive(&params, "exponent")?,
        },
        Family::ExpFlat => Shape::ExpFlat {
            alpha: positive(&params, "alpha")?,
        },
        Family::LogPower => Shape::LogPower {
            alpha: positive(&params, "alpha")?,
        },
        Family::LogSquared => Shape::LogSquared,
        Family::AsymMixed => Shape::AsymMixed,
        Family::Oscillatory => Shape::Oscillatory,
        Family::Plateau => {
            let a = positive(&params, "a")?;
            if a >= 1.0 {
                return Err(Error::InvalidParameter {
                    name: "a".into(),
                    value: a,
                    reason: "plateau half-width must be below 1",
                });
            }
            Shape::Plateau { a }
        }
    };
    let theta_minus = match params.get("theta_minus") {
        Some(_) => positive(&params, "theta_minus")?,
        None => 1.0,
    };
    let theta_plus = match params.get("theta_plus") {
        Some(_) => positive(&params, "theta_plus")?,
        None => 1.0,
    };
    let mut p = Potential {
        family,
        params,
        shape,
        theta_minus,
        theta_plus,
        support_floor: SUPPORT_FLOOR,
        core: [(0.0, 0.0); 2],
    };
    for side in [Side::Left, Side::Right] {
        let ln_rc = p.core_radius(side).ln();
        p.core[side_index(side)] = (ln_rc, p.core_log(side, ln_rc));
    }
    Ok(p)
}

fn side_index(side: Side) -> usize {
    match side {
        Side::Left => 0,
        Side::Right => 1,
    }
}

/// Named shorthands accepted by the CLI (`power2`, `exp_flat1`, `plateau`, ...).
pub fn shorthand(name: &str) -> Result<Potential> {
    let param = |key: &str, v: f64| BTreeMap::from([(key.to_owned(), v)]);
    let split = name
        .find(|c: char| c.is_ascii_digit())
        .map(|i| name.split_at(i));
    match split {
        Some((base, num)) => {
            let v: f64 = num
                .parse()
                .map_err(|_| Error::UnknownFamily(name.to_owned()))?;
            match base {
                "power" => make_builtin(Family::Power, param("exponent", v)),
                "exp_flat" => make_builtin(Family::ExpFlat, param("alpha", v)),
                "log_power" => make_builtin(Family::LogPower, param("alpha", v)),
                _ => Err(Error::UnknownFamily(name.to_owned())),
            }
        }
        None => match name {
            "log_squared" => make_builtin(Family::LogSquared, BTreeMap::new()),
            "asym_mixed" => make_builtin(Family::AsymMixed, BTreeMap::new()),
            "oscillatory" => make_builtin(Family::Oscillatory, BTreeMap::new()),
            "plateau" => make_builtin(Family::Plateau, param("a", 0.1)),
            _ => Err(Error::UnknownFamily(name.to_owned())),
        },
    }
}

impl FromStr for Potential {
    type Err = Error;

    /// Parses either a JSON object `{family, params}` or a shorthand name.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.starts_with('{') {
            Ok(serde_json::from_str(t)?)
        } else {
            shorthand(t)
        }
    }
}

impl Potential {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn support_floor(&self) -> f64 {
        self.support_floor
    }

    pub fn theta(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.theta_minus,
            Side::Right => self.theta_plus,
        }
    }

    pub fn spec(&self) -> PotentialSpec {
        self.clone().into()
    }

    /// `V` vanishes only at the origin (false for the plateau family).
    pub fn is_point_well(&self) -> bool {
        !matches!(self.shape, Shape::Plateau { .. })
    }

    /// `V` is nonincreasing left of 0 and nondecreasing right of 0.
    pub fn is_side_monotone(&self) -> bool {
        !matches!(self.shape, Shape::Oscillatory)
    }

    pub fn is_even(&self) -> bool {
        !matches!(self.shape, Shape::AsymMixed) && self.theta_minus == self.theta_plus
    }

    /// `V` vanishes faster than any power at 0 on both sides.
    pub fn is_flat(&self) -> bool {
        matches!(
            self.shape,
            Shape::ExpFlat { .. } | Shape::LogSquared | Shape::Oscillatory
        )
    }

    /// Radius (in the scaled variable) below which the family formula holds.
    fn core_radius(&self, side: Side) -> f64 {
        match (self.shape, side) {
            (Shape::LogPower { .. }, _) => (-1.0f64).exp(),
            (Shape::AsymMixed, Side::Right) => (-2.0f64).exp(),
            _ => 1.0,
        }
    }

    /// Family formula for `ln V` at scaled radius `exp(t)`, valid inside the core.
    fn core_log(&self, side: Side, t: f64) -> f64 {
        match self.shape {
            Shape::Power { exponent } => exponent * t,
            Shape::ExpFlat { alpha } => -(-alpha * t).exp(),
            Shape::LogPower { alpha } => -alpha * (-t).ln(),
            Shape::LogSquared => -t * t,
            Shape::AsymMixed => match side {
                Side::Left => t,
                Side::Right => -(-t).ln(),
            },
            Shape::Oscillatory => {
                let quartic = (-4.0 * t).exp();
                let quadratic = (-2.0 * t).exp();
                let phase = (-36.0 * t).exp();
                // Beyond representable phases the sine is replaced by its mean.
                let osc = if phase.is_finite() { 1.0 + phase.sin() } else { 1.0 };
                -quartic - quadratic * osc
            }
            Shape::Plateau { a } => {
                let s = t.exp();
                if s <= a {
                    f64::NEG_INFINITY
                } else {
                    let u = (s - a) / (1.0 - a);
                    2.0 * u.ln() + (3.0 - 2.0 * u).ln()
                }
            }
        }
    }

    /// Direct (linear-domain) family formula at scaled radius `s` inside the core.
    fn core_value(&self, side: Side, s: f64) -> f64 {
        match self.shape {
            Shape::Power { exponent } => s.powf(exponent),
            Shape::ExpFlat { alpha } => (-s.powf(-alpha)).exp(),
            Shape::LogPower { alpha } => s.ln().abs().powf(-alpha),
            Shape::LogSquared => {
                let l = s.ln();
                (-l * l).exp()
            }
            Shape::AsymMixed => match side {
                Side::Left => s,
                Side::Right => 1.0 / s.ln().abs(),
            },
            Shape::Oscillatory => {
                let phase = s.powi(-36);
                let osc = if phase.is_finite() { 1.0 + phase.sin() } else { 1.0 };
                (-s.powi(-4) - s.powi(-2) * osc).exp()
            }
            Shape::Plateau { a } => {
                if s <= a {
                    0.0
                } else {
                    let u = (s - a) / (1.0 - a);
                    u * u * (3.0 - 2.0 * u)
                }
            }
        }
    }

    fn ramp_value(&self, side: Side, s: f64) -> f64 {
        if s >= RAMP_END {
            return self.support_floor;
        }
        let rc = self.core_radius(side);
        let vc = self.core[side_index(side)].1.exp();
        vc + (self.support_floor - vc) * (s - rc) / (RAMP_END - rc)
    }

    /// `ln V` at distance `exp(ln_r)` from the origin on the given side.
    ///
    /// This is the primitive used by the well-width solvers: `ln_r` may be far
    /// below the smallest representable `ln` of an `f64`.
    pub fn log_eval_side(&self, side: Side, ln_r: f64) -> f64 {
        if ln_r == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let t = ln_r + self.theta(side).ln();
        let (ln_rc, _) = self.core[side_index(side)];
        if t < ln_rc {
            self.core_log(side, t)
        } else {
            self.ramp_value(side, t.exp()).ln()
        }
    }

    /// `ln V(x)`, `-inf` at zeros of `V`.
    pub fn log_eval(&self, x: f64) -> f64 {
        let side = if x < 0.0 { Side::Left } else { Side::Right };
        self.log_eval_side(side, x.abs().ln())
    }

    /// `V(x)`; underflows to 0 for flat families, use [`Potential::log_eval`]
    /// for ratios.
    pub fn eval(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let side = if x < 0.0 { Side::Left } else { Side::Right };
        let s = x.abs() * self.theta(side);
        if s < self.core_radius(side) {
            self.core_value(side, s)
        } else {
            self.ramp_value(side, s)
        }
    }

    /// Short human-readable description of the family formula.
    pub fn describe(&self) -> String {
        match self.shape {
            Shape::Power { exponent } => format!("|x|^{exponent}"),
            Shape::ExpFlat { alpha } => format!("exp(-|x|^-{alpha})"),
            Shape::LogPower { alpha } => format!("|ln|x||^-{alpha}"),
            Shape::LogSquared => "exp(-|ln|x||^2)".into(),
            Shape::AsymMixed => "|x| for x < 0, 1/|ln x| for x > 0".into(),
            Shape::Oscillatory => "exp(-|x|^-4 - |x|^-2 (1 + sin(|x|^-36)))".into(),
            Shape::Plateau { a } => format!("0 on [-{a}, {a}], smoothstep to 1 at |x| = 1"),
        }
    }
}

/// Sampled check of the flatness/monotonicity hypotheses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    /// `flatness_ok[n - 1]`: `|x|^-n V(x)` is monotone on both sides.
    pub flatness_ok: Vec<bool>,
    pub monotonicity_ok: bool,
    pub sampled_n_range: (u32, u32),
    pub sample_grid: Vec<f64>,
    pub failures: Vec<HypothesisFailure>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisFailure {
    /// 0 refers to `V` itself.
    pub n: u32,
    pub side: Side,
    /// Consecutive radii where the sampled function decreased.
    pub pair: (f64, f64),
}

impl HypothesisReport {
    pub fn all_flat_ok(&self) -> bool {
        self.flatness_ok.iter().all(|&b| b)
    }
}

/// Checks, on the sampled radii, that `r -> r^-n V(+-r)` is nondecreasing for
/// every `n` in `1..=n_max` and that `V` itself is (n = 0).
///
/// Grid points outside `(0, 1)` are ignored and the rest sorted. A passing
/// report is evidence on the sampled grid only.
pub fn check_hypotheses(p: &Potential, n_max: u32, grid: &[f64]) -> HypothesisReport {
    let mut radii: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|&x| x > 0.0 && x < 1.0)
        .collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let ln_r: Vec<f64> = radii.iter().map(|r| r.ln()).collect();

    let mut failures = Vec::new();
    let first_failure = |n: u32| -> Option<HypothesisFailure> {
        for side in [Side::Left, Side::Right] {
            let g: Vec<f64> = ln_r
                .iter()
                .map(|&l| p.log_eval_side(side, l) - f64::from(n) * l)
                .collect();
            for i in 1..g.len() {
                // NaN never counts as an increase.
                if !(g[i] >= g[i - 1]) {
                    return Some(HypothesisFailure {
                        n,
                        side,
                        pair: (radii[i - 1], radii[i]),
                    });
                }
            }
        }
        None
    };

    let mut flatness_ok = Vec::with_capacity(n_max as usize);
    let monotonicity_ok = match first_failure(0) {
        Some(f) => {
            failures.push(f);
            false
        }
        None => true,
    };
    for n in 1..=n_max {
        match first_failure(n) {
            Some(f) => {
                failures.push(f);
                flatness_ok.push(false);
            }
            None => flatness_ok.push(true),
        }
    }
    HypothesisReport {
        flatness_ok,
        monotonicity_ok,
        sampled_n_range: (1, n_max),
        sample_grid: radii,
        failures,
    }
}

/// `2^-j` for `j = first .. first + count`.
pub fn dyadic_grid(first: i32, count: usize) -> Vec<f64> {
    (0..count as i32).map(|j| 2f64.powi(-(first + j))).collect()
}

/// Positive angular factor on the circle, tabulated on a uniform grid of
/// `[0, 2 pi)` and linearly interpolated (periodically).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct AngularFactor {
    values: Vec<f64>,
}

impl TryFrom<Vec<f64>> for AngularFactor {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        AngularFactor::from_values(values)
    }
}

impl From<AngularFactor> for Vec<f64> {
    fn from(t: AngularFactor) -> Self {
        t.values
    }
}

impl AngularFactor {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidTheta("no samples".into()));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidTheta(format!("sample {v} is not positive")));
        }
        Ok(AngularFactor { values })
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::from_values(vec![value])
    }

    /// `theta(phi) = sqrt(cos^2/a^2 + sin^2/b^2)`, for which
    /// `{|x| theta < 1}` is the ellipse with semi-axes `a`, `b`.
    pub fn ellipse(a: f64, b: f64, samples: usize) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::InvalidTheta("semi-axes must be positive".into()));
        }
        let samples = samples.max(4);
        Self::from_values(
            (0..samples)
                .map(|i| {
                    let phi = TAU * i as f64 / samples as f64;
                    ((phi.cos() / a).powi(2) + (phi.sin() / b).powi(2)).sqrt()
                })
                .collect(),
        )
    }

    pub fn samples(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, phi: f64) -> f64 {
        let n = self.values.len();
        if n == 1 {
            return self.values[0];
        }
        let u = phi.rem_euclid(TAU) / TAU * n as f64;
        let i = (u.floor() as usize).min(n - 1);
        let frac = u - i as f64;
        let j = (i + 1) % n;
        self.values[i] * (1.0 - frac) + self.values[j] * frac
    }

    pub fn at_point(&self, x: f64, y: f64) -> f64 {
        self.at(y.atan2(x))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Largest `|cos phi| / theta(phi)` and `|sin phi| / theta(phi)`: the
    /// half-extents of `{|x| theta < 1}` along the axes.
    pub fn extents(&self) -> (f64, f64) {
        let m = 4 * self.values.len().max(90);
        (0..m).fold((0.0f64, 0.0f64), |(ex, ey), i| {
            let phi = TAU * i as f64 / m as f64;
            let t = self.at(phi);
            (ex.max(phi.cos().abs() / t), ey.max(phi.sin().abs() / t))
        })
    }
}

/// A named member of the builtin catalogue.
#[derive(Clone, Debug)]
pub struct ZooEntry {
    pub name: &'static str,
    pub potential: Potential,
    /// What the entry is used to exhibit.
    pub origin: &'static str,
}

const ZOO: [(&str, &str); 9] = [
    ("power2", "harmonic model well: levels (2k - 1) h"),
    ("power4", "homogeneous quartic well: levels scale exactly as h^(4/3)"),
    ("exp_flat1", "flat well exp(-1/|x|) with a log-log remainder"),
    ("exp_flat2", "flat well exp(-1/x^2): lambda_1 ~ (pi^2 / 2) h^2 |ln h|"),
    ("log_power1", "non-flat logarithmic well |ln|x||^-1"),
    ("log_squared", "flat well exp(-ln^2|x|)"),
    ("asym_mixed", "asymmetric well: linear on the left, 1/|ln x| on the right"),
    ("oscillatory", "flat but not monotone: the width equations fail"),
    ("plateau", "vanishes on an interval: lambda_1 / h^2 stays bounded"),
];

/// The builtin catalogue, in a fixed order.
pub fn zoo() -> Vec<ZooEntry> {
    ZOO.iter()
        .map(|&(name, origin)| ZooEntry {
            name,
            potential: shorthand(name).expect("catalogue names parse"),
            origin,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn pot(s: &str) -> Potential {
        s.parse().unwrap()
    }

    #[test]
    fn zoo_is_well_formed() {
        let z = zoo();
        assert_eq!(z.len(), 9);
        let wells = z.iter().filter(|e| e.potential.is_point_well() && e.potential.is_side_monotone());
        assert_eq!(wells.count(), 7);
    }

    #[test]
    fn eval_examples() {
        assert_eq!(pot("power2").eval(3.0), 1.0); // clamped beyond the core
        let p = make_builtin(Family::Power, BTreeMap::from([("exponent".into(), 2.0)])).unwrap();
        assert_relative_eq!(p.eval(0.3), 0.09, max_relative = 1e-15);
        assert_eq!(pot("exp_flat1").eval(0.0), 0.0);
        assert_relative_eq!(pot("exp_flat1").eval(0.05), (-20.0f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn log_eval_examples() {
        assert_relative_eq!(pot("exp_flat1").log_eval(0.01), -100.0, max_relative = 1e-12);
        assert_relative_eq!(
            pot("log_power2").log_eval((-10.0f64).exp()),
            -2.0 * 10f64.ln(),
            max_relative = 1e-12
        );
        assert_relative_eq!(pot("power4").log_eval(0.1), 4.0 * 0.1f64.ln(), max_relative = 1e-12);
        assert_eq!(pot("exp_flat1").log_eval(0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn far_below_underflow() {
        let p = pot("exp_flat1");
        assert_eq!(p.eval(1e-4), 0.0);
        assert_relative_eq!(p.log_eval(1e-4), -1e4, max_relative = 1e-12);
        // ln r far below f64 range
        assert_relative_eq!(p.log_eval_side(Side::Right, -5000.0), f64::NEG_INFINITY);
        let asym = pot("asym_mixed");
        assert_relative_eq!(asym.log_eval_side(Side::Right, -1e6), -(1e6f64).ln(), max_relative = 1e-14);
    }

    #[test]
    fn builtin_examples() {
        let p = pot(r#"{"family":"exp_flat","params":{"alpha":1}}"#);
        for x in [0.1, 0.5, 0.9, -0.3] {
            assert_relative_eq!(p.log_eval(x), -1.0 / f64::abs(x), max_relative = 1e-14);
        }
        let plateau = pot("plateau");
        assert_eq!(plateau.eval(0.1), 0.0);
        assert_eq!(plateau.eval(-0.05), 0.0);
        assert_eq!(plateau.log_eval(0.07), f64::NEG_INFINITY);
        assert!(plateau.eval(0.2) > 0.0);
        assert_eq!(plateau.eval(1.0), 1.0);
        assert_eq!(plateau.eval(-1.5), 1.0);

        let asym = pot("asym_mixed");
        assert_relative_eq!(asym.eval(-0.3), 0.3, max_relative = 1e-15);
        assert_relative_eq!(asym.eval(0.01), 1.0 / 0.01f64.ln().abs(), max_relative = 1e-15);
        assert_eq!(asym.eval(5.0), 1.0);
        assert!(!asym.is_even());
    }

    #[test]
    fn builtin_errors() {
        assert!(matches!(
            "{\"family\":\"cubic\",\"params\":{}}".parse::<Potential>(),
            Err(Error::Json(_))
        ));
        assert!(matches!("cubic".parse::<Potential>(), Err(Error::UnknownFamily(_))));
        assert!(matches!(
            make_builtin(Family::ExpFlat, BTreeMap::from([("alpha".into(), -1.0)])),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            make_builtin(Family::ExpFlat, BTreeMap::new()),
            Err(Error::MissingParameter(_))
        ));
        assert!(matches!(
            make_builtin(Family::Plateau, BTreeMap::from([("a".into(), 0.0)])),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            make_builtin(Family::LogSquared, BTreeMap::from([("alpha".into(), 1.0)])),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let p = pot(r#"{"family":"power","params":{"exponent":2,"theta_minus":2}}"#);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"family":"power","params":{"exponent":2.0,"theta_minus":2.0}}"#);
        assert_eq!(serde_json::from_str::<Potential>(&s).unwrap(), p);
    }

    #[test]
    fn ramp_is_continuous_and_monotone() {
        for name in ["power2", "exp_flat1", "log_power2", "log_squared", "asym_mixed", "plateau"] {
            let p = pot(name);
            let mut prev = 0.0;
            for i in 0..4000 {
                let x = 1e-3 + i as f64 * 1e-3;
                let v = p.eval(x);
                assert!(v >= prev - 1e-15, "{name} decreases at {x}");
                prev = v;
            }
            assert_eq!(p.eval(3.0), 1.0);
        }
    }

    #[test]
    fn side_scale() {
        let p = pot(r#"{"family":"exp_flat","params":{"alpha":1,"theta_minus":2}}"#);
        assert_relative_eq!(p.log_eval(-0.1), -5.0, max_relative = 1e-14);
        assert_relative_eq!(p.log_eval(0.1), -10.0, max_relative = 1e-14);
        assert!(!p.is_even());
    }

    #[test]
    fn hypothesis_examples() {
        let grid = dyadic_grid(6, 200);
        let r = check_hypotheses(&pot("exp_flat1"), 5, &grid);
        assert!(r.all_flat_ok() && r.monotonicity_ok, "{:?}", r.failures);

        let r = check_hypotheses(&pot("power2"), 3, &grid);
        assert_eq!(r.flatness_ok, vec![true, true, false]);
        assert_eq!(r.failures[0].n, 3);

        let uniform: Vec<f64> = (1..1000).map(|i| i as f64 / 1000.0).collect();
        let r = check_hypotheses(&pot("oscillatory"), 1, &uniform);
        assert!(!r.monotonicity_ok);
        assert_eq!(r.failures[0].n, 0);
    }

    #[test]
    fn hypothesis_dyadic_n20() {
        let grid = dyadic_grid(16, 1000);
        for name in ["exp_flat1", "log_squared"] {
            let r = check_hypotheses(&pot(name), 20, &grid);
            assert!(r.all_flat_ok(), "{name}: {:?}", r.failures);
        }
        for e in [2u32, 4] {
            let r = check_hypotheses(&pot(&format!("power{e}")), e + 1, &grid);
            assert!(r.flatness_ok[..e as usize].iter().all(|&b| b));
            assert!(!r.flatness_ok[e as usize]);
        }
    }

    #[test]
    fn hypothesis_report_is_deterministic() {
        let grid: Vec<f64> = (1..500).map(|i| (i as f64 / 500.0).powi(3)).collect();
        let p = pot("oscillatory");
        assert_eq!(check_hypotheses(&p, 4, &grid), check_hypotheses(&p, 4, &grid));
    }

    #[test]
    fn angular_factor() {
        let t = AngularFactor::ellipse(2.0, 1.0, 720).unwrap();
        assert_relative_eq!(t.at(0.0), 0.5, max_relative = 1e-14);
        assert_relative_eq!(t.at(PI / 2.0), 1.0, max_relative = 1e-12);
        assert_relative_eq!(t.at(TAU + 0.0), 0.5, max_relative = 1e-12);
        let (ex, ey) = t.extents();
        assert_relative_eq!(ex, 2.0, max_relative = 1e-3);
        assert_relative_eq!(ey, 1.0, max_relative = 1e-3);
        assert!(AngularFactor::from_values(vec![1.0, 0.0]).is_err());
        assert!(serde_json::from_str::<AngularFactor>("[1.0, -2.0]").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn log_and_direct_agree(x in -0.999f64..0.999, which in 0usize..7) {
                let names = ["power2", "exp_flat1", "exp_flat2", "log_power2", "log_squared", "asym_mixed", "plateau"];
                let p = pot(names[which]);
                let v = p.eval(x);
                if v > 1e-300 {
                    let l = p.log_eval(x).exp();
                    prop_assert!((v - l).abs() <= 1e-12 * v, "{} at {}: {} vs {}", names[which], x, v, l);
                }
                prop_assert!(v >= 0.0);
            }
        }
    }
}
