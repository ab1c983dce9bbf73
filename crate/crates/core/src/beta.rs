//! Regularized incomplete beta function `I_x(m1, m2)` and its inverse.
//!
//! The edge test needs the lower `alpha/2` quantile of the symmetric beta
//! law `Be((n-p)/2, (n-p)/2)`. Shapes are half-integers and may be below one
//! (`n - p = 1` gives the arcsine law), so the kernel is written for general
//! positive shapes.

#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use crate::error::{Error, Result};

const CF_MAX_ITER: usize = 10_000;
const CF_TINY: f64 = 1e-300;

/// Shape parameters of a beta distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    m1: f64,
    m2: f64,
}

impl BetaParams {
    pub fn new(m1: f64, m2: f64) -> Result<Self> {
        if !(m1 > 0.0 && m2 > 0.0 && m1.is_finite() && m2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "beta shapes must be positive, got ({m1}, {m2})"
            )));
        }
        Ok(Self { m1, m2 })
    }

    /// `Be(m, m)`.
    pub fn symmetric(m: f64) -> Result<Self> {
        Self::new(m, m)
    }

    pub fn m1(&self) -> f64 {
        self.m1
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }
}

// Lanczos approximation, g = 7, nine terms.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection: Γ(x) Γ(1-x) = π / sin(πx)
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + k as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Beta density.
pub fn beta_pdf(x: f64, params: BetaParams) -> f64 {
    let BetaParams { m1: a, m2: b } = params;
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    ((a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_beta(a, b)).exp()
}

/// Regularized incomplete beta function `I_x(m1, m2)`.
pub fn beta_cdf(x: f64, params: BetaParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("beta_cdf argument {x} outside [0, 1]")));
    }
    let BetaParams { m1: a, m2: b } = params;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    // The continued fraction converges quickly below the switch point;
    // above it use I_x(a, b) = 1 - I_{1-x}(b, a).
    if x < (a + 1.0) / (a + b + 2.0) {
        continued_fraction(a, b, x)
    } else {
        Ok(1.0 - continued_fraction(b, a, 1.0 - x)?)
    }
}

/// `x^a (1-x)^b / (a B(a,b))` times the Lentz evaluation of the continued
/// fraction for the incomplete beta function.
fn continued_fraction(a: f64, b: f64, x: f64) -> Result<f64> {
    let ln_front = a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b);
    let front = ln_front.exp() / a;

    let clamp = |v: f64| if v.abs() < CF_TINY { CF_TINY } else { v };
    let mut c = 1.0;
    let mut d = 1.0 / clamp(1.0 - (a + b) * x / (a + 1.0));
    let mut f = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let even = m * (b - m) * x / ((a + 2.0 * m - 1.0) * (a + 2.0 * m));
        d = 1.0 / clamp(1.0 + even * d);
        c = clamp(1.0 + even / c);
        f *= d * c;

        let odd = -(a + m) * (a + b + m) * x / ((a + 2.0 * m) * (a + 2.0 * m + 1.0));
        d = 1.0 / clamp(1.0 + odd * d);
        c = clamp(1.0 + odd / c);
        let delta = d * c;
        f *= delta;
        if (delta - 1.0).abs() <= f64::EPSILON {
            return Ok((front * f).clamp(0.0, 1.0));
        }
    }
    Err(Error::Convergence(format!(
        "incomplete beta continued fraction at x={x}, a={a}, b={b}"
    )))
}

/// Quantile of the beta distribution: `q` with `I_q(m1, m2) = prob`.
///
/// Bracketing on `[0, 1]` with Newton steps; a step that leaves the current
/// bracket is replaced by bisection.
pub fn beta_quantile(prob: f64, params: BetaParams) -> Result<f64> {
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::Domain(format!("quantile level {prob} outside (0, 1)")));
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut x = params.m1 / (params.m1 + params.m2);
    let mut best = (f64::INFINITY, x);
    for _ in 0..400 {
        let f = beta_cdf(x, params)? - prob;
        if f.abs() < best.0 {
            best = (f.abs(), x);
        }
        if f == 0.0 {
            return Ok(x);
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let density = beta_pdf(x, params);
        let newton = x - f / density;
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else if lo > 0.0 && hi / lo > 4.0 {
            // deep tail: bisect on a log scale
            (lo * hi).sqrt()
        } else if lo == 0.0 && hi < 0.25 {
            hi * 0.0625
        } else {
            0.5 * (lo + hi)
        };
        if next == x || next <= lo || next >= hi {
            break;
        }
        x = next;
    }
    Ok(best.1)
}
