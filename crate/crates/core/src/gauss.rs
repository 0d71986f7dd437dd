//! Closed-form standard-normal analytics: pdf/cdf/quantile, the cdf of |t+Z|
//! and its exact interval integral, and truncated second moments.
//!
//! Everything here is unit-variance; the normalized regime never needs a
//! general sigma.

use std::fmt;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const SQRT_2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Clone, PartialEq)]
pub enum GaussError {
    /// Quantile requested at p outside (0,1).
    QuantileDomain(f64),
    /// Truncation interval carries zero probability mass.
    EmptyTruncation { mu: f64, lo: f64, hi: f64 },
}

impl fmt::Display for GaussError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaussError::QuantileDomain(p) => write!(f, "normal quantile undefined at p = {p}"),
            GaussError::EmptyTruncation { mu, lo, hi } => {
                write!(f, "N({mu},1) truncated to ({lo},{hi}) has zero mass")
            }
        }
    }
}

impl std::error::Error for GaussError {}

/// A closed interval of integration; ends may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    /// Panics if `lo > hi` or either end is NaN.
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "invalid interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn all() -> Self {
        Interval::new(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn above(lo: f64) -> Self {
        Interval::new(lo, f64::INFINITY)
    }

    pub fn below(hi: f64) -> Self {
        Interval::new(f64::NEG_INFINITY, hi)
    }
}

pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Survival function 1 - Phi(x), evaluated without cancellation in the tail.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Inverse of `normal_cdf`.
///
/// Acklam's rational approximation (~1e-9 relative), then a single Halley
/// step against the erfc-based cdf pushes it to ~1e-15.
pub fn normal_quantile(p: f64) -> Result<f64, GaussError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(GaussError::QuantileDomain(p));
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    let e = normal_cdf(x) - p;
    let u = e / normal_pdf(x);
    Ok(x - u / (1.0 + x * u / 2.0))
}

/// P(|t+Z| < x) = max(Phi(x-t) - Phi(-x-t), 0) for Z standard normal.
pub fn abs_shift_cdf(t: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    (normal_cdf(x - t) - normal_cdf(-x - t)).max(0.0)
}

// Antiderivative of Phi: d/du [u Phi(u) + phi(u)] = Phi(u).
fn phi_antideriv(u: f64) -> f64 {
    if u == f64::NEG_INFINITY {
        return 0.0;
    }
    u * normal_cdf(u) + normal_pdf(u)
}

// Antiderivative of Phi(x-t) - Phi(-x-t); valid on x >= 0 where the
// difference equals P(|t+Z|<x).
fn abs_shift_antideriv(t: f64, x: f64) -> f64 {
    phi_antideriv(x - t) + phi_antideriv(-x - t)
}

/// Exact integral of `abs_shift_cdf(t, .)` over `iv`.
///
/// The integrand vanishes on x <= 0, so the interval is clipped there first.
/// Narrow intervals use a Simpson step instead of differencing the
/// antiderivative, which would cancel.
pub fn abs_shift_cdf_integral(t: f64, iv: Interval) -> f64 {
    let lo = iv.lo.max(0.0);
    let hi = iv.hi.max(0.0);
    if hi <= lo {
        return 0.0;
    }
    let width = hi - lo;
    if width.is_finite() && width <= 1e-4 {
        let mid = 0.5 * (lo + hi);
        return width / 6.0
            * (abs_shift_cdf(t, lo) + 4.0 * abs_shift_cdf(t, mid) + abs_shift_cdf(t, hi));
    }
    abs_shift_antideriv(t, hi) - abs_shift_antideriv(t, lo)
}

/// E(X^2 | lo < X < hi) for X ~ N(mu, 1).
pub fn truncated_second_moment(mu: f64, iv: Interval) -> Result<f64, GaussError> {
    let alpha = iv.lo - mu;
    let beta = iv.hi - mu;
    let mass = normal_cdf(beta) - normal_cdf(alpha);
    if !(mass > 0.0) {
        return Err(GaussError::EmptyTruncation {
            mu,
            lo: iv.lo,
            hi: iv.hi,
        });
    }
    // phi(u) (u + 2 mu) -> 0 as u -> +/- infinity.
    let edge = |u: f64| {
        if u.is_finite() {
            normal_pdf(u) * (u + 2.0 * mu)
        } else {
            0.0
        }
    };
    Ok(mu * mu + 1.0 - (edge(beta) - edge(alpha)) / mass)
}
