//! Bessel functions of the first kind and their positive zeros, for the
//! integer and half-integer orders met by Dirichlet balls.
//!
//! Integer orders use the trapezoid rule on the periodic integral
//! representation, which is exact up to aliasing and never cancels.
//! Half-integer orders use the terminating Hankel expansion (exact) above the
//! order and the power series below it. Other orders fall back to the series
//! and the asymptotic Hankel expansion.

use std::f64::consts::PI;

fn is_integer(nu: f64) -> bool {
    nu.fract() == 0.0
}

fn is_half_integer(nu: f64) -> bool {
    (nu - 0.5).fract() == 0.0
}

/// `sum_m (-x^2/4)^m / (m! (nu+1)_m)`, i.e. `J_nu(x) Γ(nu+1) (2/x)^nu`.
fn scaled_series(nu: f64, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..500 {
        let mf = m as f64;
        term *= q / (mf * (nu + mf));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && mf > 0.5 * x {
            break;
        }
    }
    sum
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos, g = 7
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

fn series(nu: f64, x: f64) -> f64 {
    let s = scaled_series(nu, x);
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    s * (nu * (0.5 * x).ln() - ln_gamma(nu + 1.0)).exp()
}

/// `(P, Q)` of the Hankel expansion; exact when `nu` is a half-integer.
fn hankel_pq(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let exact = is_half_integer(nu);
    let mut prev = f64::INFINITY;
    for k in 0..200usize {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        }
        if term == 0.0 {
            break;
        }
        // Asymptotic for general orders: stop at the smallest term.
        if !exact && term.abs() > prev {
            break;
        }
        prev = term.abs();
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
    }
    (p, q)
}

fn hankel(nu: f64, x: f64) -> f64 {
    let (p, q) = hankel_pq(nu, x);
    let chi = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

fn integer_order(n: f64, x: f64) -> f64 {
    // (1/2pi) int_0^2pi cos(n t - x sin t) dt
    let m = (64.0 + 2.0 * (x.abs() + n)).ceil() as usize;
    let h = 2.0 * PI / m as f64;
    (0..m)
        .map(|i| {
            let t = i as f64 * h;
            (n * t - x * t.sin()).cos()
        })
        .sum::<f64>()
        / m as f64
}

/// `J_nu(x)` for `nu >= 0`, `x >= 0`.
pub fn bessel_j(nu: f64, x: f64) -> f64 {
    if is_integer(nu) {
        integer_order(nu, x)
    } else if is_half_integer(nu) && x > nu {
        hankel(nu, x)
    } else if x <= 12.0 || x <= nu {
        series(nu, x)
    } else {
        hankel(nu, x)
    }
}

/// First `count` positive zeros of `J_nu`.
pub fn bessel_zeros(nu: f64, count: usize) -> Vec<f64> {
    let step = 0.1;
    let mut zeros = Vec::with_capacity(count);
    let mut a = nu.max(step);
    let mut fa = bessel_j(nu, a);
    while zeros.len() < count {
        let b = a + step;
        let fb = bessel_j(nu, b);
        if fa == 0.0 {
            zeros.push(a);
        } else if fa * fb < 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            loop {
                let mid = lo + 0.5 * (hi - lo);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = bessel_j(nu, mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (fm < 0.0) == (flo < 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            zeros.push(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    zeros
}
