//! Bessel function of the first kind, order zero.
//!
//! Power series for |x| ≤ 12 and the Hankel asymptotic expansion (truncated
//! at its smallest term) beyond. Both branches hold 1e-12 absolute accuracy
//! where they are used; the crossover at 12 is where the asymptotic series
//! first reaches that level.

use std::f64::consts::PI;

use crate::error::{domain, Result};

/// Crossover between the power series and the asymptotic expansion.
pub const SERIES_LIMIT: f64 = 12.0;

/// First positive zero of J0.
pub const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

/// J0(x) with a finiteness check.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain(format!("J0 argument must be finite, got {x}")));
    }
    Ok(j0(x))
}

/// J0(x). Non-finite input propagates as NaN.
pub fn j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        j0_series(ax)
    } else {
        j0_asymptotic(ax)
    }
}

/// Σ (−1)^k (x²/4)^k / (k!)².
pub fn j0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= -q / (k * k);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && k > 0.5 * x {
            break;
        }
        if k > 300.0 {
            break;
        }
        k += 1.0;
    }
    sum
}

/// Hankel expansion √(2/πx)·(P cos χ − Q sin χ), χ = x − π/4, with the
/// series for P and Q stopped before the terms start to grow.
pub fn j0_asymptotic(x: f64) -> f64 {
    let x = x.abs();
    let mut a = 1.0;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut last = 1.0;
    let mut xk = 1.0;
    for k in 1..60usize {
        let kf = k as f64;
        a *= -((2.0 * kf - 1.0).powi(2)) / (8.0 * kf);
        xk *= x;
        let term = a / xk;
        if term.abs() >= last {
            break;
        }
        last = term.abs();
        if k % 2 == 0 {
            p += if (k / 2) % 2 == 0 { term } else { -term };
        } else {
            q += if ((k - 1) / 2) % 2 == 0 { term } else { -term };
        }
    }
    let chi = x - 0.25 * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Locate the first zero of J0 by bisection on [2, 3].
pub fn j0_first_zero() -> f64 {
    let (mut lo, mut hi) = (2.0f64, 3.0f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if j0(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
