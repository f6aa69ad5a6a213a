//! Bisection for monotone scalar equations.

use crate::error::{Error, Result};

pub const MAX_BISECTIONS: u32 = 200;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub x: f64,
    pub value: f64,
    pub iterations: u32,
    /// The equation holds exactly on an interval next to `x`.
    pub degenerate: bool,
}

/// Solves `f(x) = target` for nondecreasing `f` on `[lo, hi]`, given
/// `f(lo) <= target <= f(hi)`, down to adjacent floating point numbers.
pub fn bisect_increasing<F>(f: F, mut lo: f64, mut hi: f64, target: f64) -> Result<Root>
where
    F: Fn(f64) -> f64,
{
    let mut iterations = 0;
    loop {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if iterations == MAX_BISECTIONS {
            return Err(Error::NoConvergence(MAX_BISECTIONS));
        }
        iterations += 1;
        let v = f(mid);
        if v.is_nan() {
            return Err(Error::InvalidInput(format!("equation is undefined at {mid}")));
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (flo, fhi) = (f(lo), f(hi));
    let (x, value) = if (fhi - target).abs() <= (target - flo).abs() {
        (hi, fhi)
    } else {
        (lo, flo)
    };
    let probe = 1e-9 * x.abs().max(1e-300);
    let degenerate = value == target && (f(x - probe) == target || f(x + probe) == target);
    Ok(Root {
        x,
        value,
        iterations,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_root() {
        let r = bisect_increasing(|x| x * x * x, 0.0, 10.0, 27.0).unwrap();
        assert!((r.x - 3.0).abs() < 1e-14);
        assert!(r.iterations < 80);
        assert!(!r.degenerate);
    }

    #[test]
    fn flat_solution_is_flagged() {
        let f = |x: f64| x.clamp(-1.0, 1.0).max(0.0).min(0.5) * 2.0;
        let r = bisect_increasing(f, -3.0, 3.0, 1.0).unwrap();
        assert_eq!(r.value, 1.0);
        assert!(r.degenerate);
    }

    #[test]
    fn nan_is_an_error() {
        assert!(bisect_increasing(|_| f64::NAN, 0.0, 1.0, 0.5).is_err());
    }
}
