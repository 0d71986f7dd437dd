//! Asymptotic analytics for the normalized 2-level penalty: the shared
//! magnitude h with its quantiles, the explicit limiting scalar function and
//! its effective penalty, the closed-form scalar risk, the F functional,
//! the state-evolution fixed point for tau, and penalty calibration back to
//! the original scale.

use std::fmt;

use crate::gauss::{
    abs_shift_cdf, abs_shift_cdf_integral, normal_cdf, normal_pdf, normal_sf, Interval,
};
use crate::prox::{ProxError, TwoLevelPenalty};

#[derive(Debug, Clone, PartialEq)]
pub enum AsymError {
    /// Equal penalty levels: the shared-magnitude equation degenerates and
    /// callers must use the explicit 1-level path.
    DegeneratePenalty,
    BadSigma(f64),
    /// The derivative correction wipes out the calibration factor.
    CalibrationInfeasible { derivative: f64, delta: f64 },
    BadPrior(String),
}

impl fmt::Display for AsymError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AsymError::DegeneratePenalty => {
                write!(f, "equal penalty levels: use the 1-level path")
            }
            AsymError::BadSigma(s) => write!(f, "noise level must be positive, got {s}"),
            AsymError::CalibrationInfeasible { derivative, delta } => write!(
                f,
                "calibration factor 1 - E[eta']/delta is nonpositive (E[eta']={derivative}, delta={delta})"
            ),
            AsymError::BadPrior(msg) => write!(f, "invalid prior: {msg}"),
        }
    }
}

impl std::error::Error for AsymError {}

/// Finite-atom signal distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePrior {
    atoms: Vec<(f64, f64)>,
}

impl DiscretePrior {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self, AsymError> {
        if atoms.is_empty() {
            return Err(AsymError::BadPrior("no atoms".into()));
        }
        let mut total = 0.0;
        for &(v, p) in &atoms {
            if !v.is_finite() {
                return Err(AsymError::BadPrior(format!("non-finite atom value {v}")));
            }
            if !(p >= 0.0 && p <= 1.0) {
                return Err(AsymError::BadPrior(format!("bad atom probability {p}")));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(AsymError::BadPrior(format!("probabilities sum to {total}")));
        }
        Ok(DiscretePrior { atoms })
    }

    /// Zero with probability `1 - eps`, `value` otherwise.
    pub fn two_point(value: f64, eps: f64) -> Result<Self, AsymError> {
        DiscretePrior::new(vec![(0.0, 1.0 - eps), (value, eps)])
    }

    pub fn point_mass_zero() -> Self {
        DiscretePrior {
            atoms: vec![(0.0, 1.0)],
        }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// Sparsity P(value != 0).
    pub fn eps(&self) -> f64 {
        self.atoms
            .iter()
            .filter(|&&(v, _)| v != 0.0)
            .map(|&(_, p)| p)
            .sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.atoms.iter().map(|&(v, p)| p * v * v).sum()
    }

    pub fn max_abs_value(&self) -> f64 {
        self.atoms.iter().map(|&(v, _)| v.abs()).fold(0.0, f64::max)
    }

    /// The normalized prior value/tau.
    pub fn scaled(&self, factor: f64) -> DiscretePrior {
        DiscretePrior {
            atoms: self.atoms.iter().map(|&(v, p)| (v * factor, p)).collect(),
        }
    }

    /// Conditional law given value != 0, renormalized.
    pub fn nonzero_part(&self) -> Result<DiscretePrior, AsymError> {
        let eps = self.eps();
        if eps <= 0.0 {
            return Err(AsymError::BadPrior("no nonzero atoms".into()));
        }
        DiscretePrior::new(
            self.atoms
                .iter()
                .filter(|&&(v, _)| v != 0.0)
                .map(|&(v, p)| (v, p / eps))
                .collect(),
        )
    }

    /// S(x) = P(|prior + Z| < x).
    pub fn abs_cdf(&self, x: f64) -> f64 {
        self.atoms
            .iter()
            .map(|&(v, p)| p * abs_shift_cdf(v, x))
            .sum()
    }

    /// P(|prior + Z| > x).
    pub fn abs_sf(&self, x: f64) -> f64 {
        (1.0 - self.abs_cdf(x)).max(0.0)
    }

    /// P(lo < |prior + Z| < hi).
    pub fn abs_band(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        (self.abs_cdf(hi) - self.abs_cdf(lo)).max(0.0)
    }

    /// Integral of S over the interval.
    pub fn abs_cdf_integral(&self, iv: Interval) -> f64 {
        self.atoms
            .iter()
            .map(|&(v, p)| p * abs_shift_cdf_integral(v, iv))
            .sum()
    }
}

/// Normalized 2-level penalty (alpha1, alpha2, s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedTwoLevel {
    pub a1: f64,
    pub a2: f64,
    pub s: f64,
}

impl NormalizedTwoLevel {
    pub fn new(a1: f64, a2: f64, s: f64) -> Result<Self, AsymError> {
        if !(a1.is_finite() && a2.is_finite() && a1 >= a2 && a2 >= 0.0 && a1 > 0.0) {
            return Err(AsymError::BadPrior(format!(
                "normalized levels must satisfy a1 >= a2 >= 0, a1 > 0; got ({a1}, {a2})"
            )));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(AsymError::BadPrior(format!("splitting ratio {s} not in (0,1)")));
        }
        Ok(NormalizedTwoLevel { a1, a2, s })
    }
}

/// The scalarized asymptotic state at a state-evolution fixed point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarizedSolution {
    pub tau: f64,
    pub h: f64,
    pub q1: f64,
    pub q2: f64,
    pub zero_threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeOutcome {
    Feasible(ScalarizedSolution),
    /// The iteration diverged: no tau solves the fixed point for this
    /// (prior, penalty, delta, sigma).
    Infeasible,
}

impl SeOutcome {
    pub fn feasible(&self) -> Option<&ScalarizedSolution> {
        match self {
            SeOutcome::Feasible(s) => Some(s),
            SeOutcome::Infeasible => None,
        }
    }
}

/// Solves `int_{h+a2}^{h+a1} S(x) dx = (1-s)(a1-a2)` for the unique h, and
/// returns (h, q1, q2) with q1 = S(h+a1), q2 = S(h+a2).
pub fn shared_height(
    prior: &DiscretePrior,
    pen: &NormalizedTwoLevel,
) -> Result<(f64, f64, f64), AsymError> {
    shared_height_hinted(prior, pen, None)
}

pub(crate) fn shared_height_hinted(
    prior: &DiscretePrior,
    pen: &NormalizedTwoLevel,
    hint: Option<f64>,
) -> Result<(f64, f64, f64), AsymError> {
    if !(pen.a1 > pen.a2) {
        return Err(AsymError::DegeneratePenalty);
    }
    let width = pen.a1 - pen.a2;
    let rhs = (1.0 - pen.s) * width;
    let max_abs = prior.max_abs_value();
    let mut lo = -pen.a1 - max_abs - 10.0;
    let mut hi = max_abs + 10.0;
    let residual =
        |h: f64| prior.abs_cdf_integral(Interval::new(h + pen.a2, h + pen.a1)) - rhs;
    // monotone increasing in h with opposite signs at the bracket ends
    let mut h = hint.filter(|v| *v > lo && *v < hi).unwrap_or(0.5 * (lo + hi));
    let tol = (1e-12 * width).min(1e-10);
    let mut res = residual(h);
    for _ in 0..200 {
        if res.abs() <= tol || hi - lo <= 1e-13 * (1.0 + h.abs()) {
            break;
        }
        if res > 0.0 {
            hi = h;
        } else {
            lo = h;
        }
        let slope = prior.abs_cdf(h + pen.a1) - prior.abs_cdf(h + pen.a2);
        let newton = if slope > 0.0 { h - res / slope } else { f64::NAN };
        h = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        res = residual(h);
    }
    Ok((h, prior.abs_cdf(h + pen.a1), prior.abs_cdf(h + pen.a2)))
}

/// The explicit limiting scalar function: soft-thresholding at the outer
/// levels with a flat band of height max(h,0) in between.
pub fn limiting_scalar(x: f64, pen: &NormalizedTwoLevel, h: f64) -> f64 {
    let ax = x.abs();
    if ax > pen.a1 + h {
        soft(x, pen.a1)
    } else if ax > pen.a2 + h {
        x.signum() * h.max(0.0)
    } else {
        soft(x, pen.a2)
    }
}

fn soft(x: f64, theta: f64) -> f64 {
    let m = x.abs() - theta;
    if m <= 0.0 {
        0.0
    } else {
        x.signum() * m
    }
}

/// The adaptive soft-threshold level such that
/// `limiting_scalar(x) = soft(x, effective_penalty(x))`, banded by the
/// quantiles of S(|x|).
pub fn effective_penalty(
    x: f64,
    pen: &NormalizedTwoLevel,
    h: f64,
    q1: f64,
    q2: f64,
    prior: &DiscretePrior,
) -> f64 {
    let s_val = prior.abs_cdf(x.abs());
    if s_val > q1 {
        pen.a1
    } else if s_val >= q2 {
        x.abs() - h
    } else {
        pen.a2
    }
}

/// Smallest level at which the limiting scalar function turns on: a2 when
/// the flat band survives truncation (h > 0), a1 otherwise.
pub fn zero_threshold(pen: &NormalizedTwoLevel, h: f64) -> f64 {
    if h > 0.0 {
        pen.a2
    } else {
        pen.a1
    }
}

/// Closed form for `E[(soft(t+Z; A_eff(t+Z)) - t)^2]`.
///
/// For h <= 0 the flat band is truncated away and the function collapses to
/// plain soft-thresholding at a1, which is exactly the closed form evaluated
/// at h = 0.
pub fn risk_e(t: f64, pen: &NormalizedTwoLevel, h: f64) -> f64 {
    debug_assert!(t.is_finite());
    let (a1, a2) = (pen.a1, pen.a2);
    let hp = h.max(0.0);
    let cdf = normal_cdf;
    let pdf = normal_pdf;
    (a1 * a1 + 1.0) * (normal_sf(a1 + hp - t) + cdf(-a1 - hp - t))
        + t * t * (cdf(a2 - t) - cdf(-a2 - t))
        + (hp - t) * (hp - t) * (cdf(a1 + hp - t) - cdf(a2 + hp - t))
        + (hp + t) * (hp + t) * (cdf(-a2 - hp - t) - cdf(-a1 - hp - t))
        + (a2 * a2 + 1.0)
            * (cdf(-a2 - t) - cdf(-a2 - hp - t) + cdf(a2 + hp - t) - cdf(a2 - t))
        - (a1 - hp + t) * pdf(a1 + hp - t)
        - (a1 - hp - t) * pdf(-a1 - hp - t)
        + (a2 - hp - t) * pdf(-a2 - hp - t)
        + (a2 - hp + t) * pdf(a2 + hp - t)
        - (a2 - t) * pdf(-a2 - t)
        - (a2 + t) * pdf(a2 - t)
}

/// Scalar soft-thresholding risk `E[(soft(t+Z; alpha) - t)^2]`; the 1-level
/// specialization of `risk_e`.
pub fn soft_risk(t: f64, alpha: f64) -> f64 {
    let cdf = normal_cdf;
    let pdf = normal_pdf;
    (alpha * alpha + 1.0) * (normal_sf(alpha - t) + cdf(-alpha - t))
        + t * t * (cdf(alpha - t) - cdf(-alpha - t))
        - (alpha + t) * pdf(alpha - t)
        - (alpha - t) * pdf(-alpha - t)
}

/// F[pi; a1, a2, s]: the normalized state-evolution functional, an
/// atom-weighted sum of closed-form risks at the prior's shared magnitude.
pub fn f_functional(
    prior_normalized: &DiscretePrior,
    pen: &NormalizedTwoLevel,
) -> Result<f64, AsymError> {
    let (h, _, _) = shared_height(prior_normalized, pen)?;
    Ok(prior_normalized
        .atoms()
        .iter()
        .map(|&(v, p)| p * risk_e(v, pen, h))
        .sum())
}

const SE_DAMPING: f64 = 0.5;
const SE_MAX_ITERS: usize = 2000;
const SE_TOL: f64 = 1e-12;

fn se_fixed_point<F: FnMut(f64) -> f64>(
    mut f_of_tau: F,
    delta: f64,
    sigma: f64,
    tau0_sq: f64,
) -> Option<f64> {
    let mut tau_sq = tau0_sq.max(sigma * sigma);
    let blowup = 1e6 * tau_sq.max(1.0);
    for _ in 0..SE_MAX_ITERS {
        let f = f_of_tau(tau_sq.sqrt());
        let next = (1.0 - SE_DAMPING) * tau_sq + SE_DAMPING * (sigma * sigma + tau_sq * f / delta);
        if !next.is_finite() || next > blowup {
            return None;
        }
        let done = (next - tau_sq).abs() <= SE_TOL * tau_sq.max(1.0);
        tau_sq = next;
        if done {
            return Some(tau_sq.sqrt());
        }
    }
    // damped iteration stalled without diverging; accept only a genuine fixed point
    let f = f_of_tau(tau_sq.sqrt());
    let res = tau_sq - sigma * sigma - tau_sq * f / delta;
    if res.abs() <= 1e-8 * tau_sq {
        Some(tau_sq.sqrt())
    } else {
        None
    }
}

/// Fixed point of `tau^2 = sigma^2 + tau^2 F[prior/tau] / delta` by damped
/// iteration; fills the scalarized state at the solution. Divergence is an
/// infeasibility signal, not an error.
pub fn state_evolution_tau(
    prior: &DiscretePrior,
    pen: &NormalizedTwoLevel,
    delta: f64,
    sigma: f64,
) -> Result<SeOutcome, AsymError> {
    if !(sigma > 0.0) {
        return Err(AsymError::BadSigma(sigma));
    }
    if !(pen.a1 > pen.a2) {
        return Err(AsymError::DegeneratePenalty);
    }
    let tau0_sq = sigma * sigma + prior.second_moment() / delta;
    let mut h_hint = None;
    let tau = se_fixed_point(
        |tau| {
            let pi = prior.scaled(1.0 / tau);
            let (h, _, _) = shared_height_hinted(&pi, pen, h_hint)
                .expect("penalty verified non-degenerate");
            h_hint = Some(h);
            pi.atoms().iter().map(|&(v, p)| p * risk_e(v, pen, h)).sum()
        },
        delta,
        sigma,
        tau0_sq,
    );
    match tau {
        None => Ok(SeOutcome::Infeasible),
        Some(tau) => {
            let pi = prior.scaled(1.0 / tau);
            let (h, q1, q2) = shared_height_hinted(&pi, pen, h_hint)?;
            Ok(SeOutcome::Feasible(ScalarizedSolution {
                tau,
                h,
                q1,
                q2,
                zero_threshold: zero_threshold(pen, h),
            }))
        }
    }
}

/// 1-level state evolution: the explicit path for equal penalty levels.
pub fn state_evolution_tau_one_level(
    prior: &DiscretePrior,
    alpha: f64,
    delta: f64,
    sigma: f64,
) -> Result<Option<f64>, AsymError> {
    if !(sigma > 0.0) {
        return Err(AsymError::BadSigma(sigma));
    }
    if !(alpha > 0.0) {
        return Err(AsymError::BadPrior(format!("threshold {alpha} must be positive")));
    }
    let tau0_sq = sigma * sigma + prior.second_moment() / delta;
    Ok(se_fixed_point(
        |tau| {
            let pi = prior.scaled(1.0 / tau);
            pi.atoms().iter().map(|&(v, p)| p * soft_risk(v, alpha)).sum()
        },
        delta,
        sigma,
        tau0_sq,
    ))
}

/// E[eta'(pi + Z)]: the limiting scalar function has slope one exactly on
/// the active soft branches, zero on the flat band and below threshold.
pub fn eta_derivative_expectation(
    prior_normalized: &DiscretePrior,
    pen: &NormalizedTwoLevel,
    h: f64,
) -> f64 {
    let hp = h.max(0.0);
    prior_normalized.abs_sf(pen.a1 + hp) + prior_normalized.abs_band(pen.a2, pen.a2 + hp)
}

/// Maps the normalized penalty back to the original scale:
/// `lambda = A tau (1 - E[eta'] / delta)`.
pub fn calibrate(
    pen: &NormalizedTwoLevel,
    sol: &ScalarizedSolution,
    prior: &DiscretePrior,
    delta: f64,
) -> Result<TwoLevelPenalty, AsymError> {
    let pi = prior.scaled(1.0 / sol.tau);
    let d = eta_derivative_expectation(&pi, pen, sol.h);
    let factor = 1.0 - d / delta;
    if factor <= 0.0 {
        return Err(AsymError::CalibrationInfeasible {
            derivative: d,
            delta,
        });
    }
    TwoLevelPenalty::new(pen.a1 * sol.tau * factor, pen.a2 * sol.tau * factor, pen.s)
        .map_err(|e: ProxError| AsymError::BadPrior(e.to_string()))
}

/// 1-level calibration: `lambda = alpha tau (1 - P(|pi+Z| > alpha)/delta)`.
pub fn calibrate_one_level(
    alpha: f64,
    tau: f64,
    prior: &DiscretePrior,
    delta: f64,
) -> Result<f64, AsymError> {
    let pi = prior.scaled(1.0 / tau);
    let d = pi.abs_sf(alpha);
    let factor = 1.0 - d / delta;
    if factor <= 0.0 {
        return Err(AsymError::CalibrationInfeasible {
            derivative: d,
            delta,
        });
    }
    Ok(alpha * tau * factor)
}

/// Inverse of `calibrate` at the same fixed point; used to verify the
/// bijectivity round trip.
pub fn normalize_two_level(
    lam: &TwoLevelPenalty,
    sol: &ScalarizedSolution,
    prior: &DiscretePrior,
    delta: f64,
    pen_hint: &NormalizedTwoLevel,
) -> Result<NormalizedTwoLevel, AsymError> {
    let pi = prior.scaled(1.0 / sol.tau);
    let d = eta_derivative_expectation(&pi, pen_hint, sol.h);
    let factor = 1.0 - d / delta;
    if factor <= 0.0 {
        return Err(AsymError::CalibrationInfeasible {
            derivative: d,
            delta,
        });
    }
    NormalizedTwoLevel::new(
        lam.lam1 / (sol.tau * factor),
        lam.lam2 / (sol.tau * factor),
        lam.s,
    )
}
