//! Error function evaluated to ~1e-13 absolute accuracy without external math crates.
//!
//! For `|x| <= 3` the Maclaurin series is summed until terms drop below
//! machine precision. Past that, `erfc` is evaluated by Lentz's algorithm on
//! the Laplace continued fraction and `erf = 1 - erfc`.

use crate::error::{Error, Result};

const SERIES_LIMIT: f64 = 3.0;
const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

pub fn erf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("erf of non-finite value {x}")));
    }
    Ok(erf_finite(x))
}

/// `erf` for inputs already known to be finite.
pub(crate) fn erf_finite(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT {
        maclaurin(ax)
    } else {
        1.0 - erfc_continued_fraction(ax)
    };
    v.copysign(x)
}

fn maclaurin(x: f64) -> f64 {
    // erf(x) = 2/sqrt(pi) * sum_n (-1)^n x^(2n+1) / (n! (2n+1))
    let x2 = x * x;
    let mut power = x; // (-1)^n x^(2n+1) / n!
    let mut sum = x;
    let mut n = 0.0_f64;
    loop {
        n += 1.0;
        power *= -x2 / n;
        let term = power / (2.0 * n + 1.0);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    FRAC_2_SQRT_PI * sum
}

fn erfc_continued_fraction(x: f64) -> f64 {
    // erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64 / 2.0;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (f * std::f64::consts::PI.sqrt())
}
