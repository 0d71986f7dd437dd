//! Asymptotic TPP/FDP machinery: the mixing weight for three-point priors,
//! the state-evolution functional F on them, the maximum-zero-threshold
//! searches (all priors, fixed prior, constant-or-nothing prior), the LASSO
//! trade-off with its Donoho-Tanner power limit, and the analytic general
//! SLOPE penalty used for comparison curves.

use std::fmt;

use crate::asymptotics::{
    calibrate, calibrate_one_level, risk_e, shared_height, state_evolution_tau,
    state_evolution_tau_one_level, AsymError, DiscretePrior, NormalizedTwoLevel,
    ScalarizedSolution,
};
use crate::gauss::{abs_shift_cdf, normal_cdf, normal_quantile, Interval};
use crate::prox::TwoLevelPenalty;

#[derive(Debug, Clone, PartialEq)]
pub enum TradeoffError {
    /// Bisection endpoints do not straddle the feasibility boundary.
    Bracket {
        lo: f64,
        hi: f64,
        lo_feasible: bool,
        hi_feasible: bool,
    },
    Domain(String),
    Asym(AsymError),
}

impl fmt::Display for TradeoffError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TradeoffError::Bracket {
                lo,
                hi,
                lo_feasible,
                hi_feasible,
            } => write!(
                f,
                "bad alpha2 bracket [{lo}, {hi}]: feasibility ({lo_feasible}, {hi_feasible})"
            ),
            TradeoffError::Domain(msg) => write!(f, "{msg}"),
            TradeoffError::Asym(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for TradeoffError {}

impl From<AsymError> for TradeoffError {
    fn from(e: AsymError) -> Self {
        TradeoffError::Asym(e)
    }
}

/// Argmax parameters behind one trade-off point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub a1: f64,
    pub a2: f64,
    pub s: f64,
    pub t1: f64,
    pub t2: f64,
    pub rho: f64,
}

/// One point of a TPP/FDP trade-off curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffPoint {
    pub u: f64,
    pub min_fdp: f64,
    pub alpha_star: f64,
    pub argmax: Witness,
}

/// Grids steering the zero-threshold searches.
#[derive(Debug, Clone)]
pub struct SearchGrid {
    pub a2_bracket: Interval,
    pub a1_offsets: Vec<f64>,
    pub s_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub bisect_tol: f64,
}

impl SearchGrid {
    /// Default resolution for a given alpha2 bracket: log-spaced level
    /// offsets from 1e-6 to 10 plus a wide sentinel, 60 splitting ratios in
    /// [0.005, 0.995], 50 signal magnitudes in [0, hi+6].
    pub fn default_for(a2_lo: f64, a2_hi: f64) -> Self {
        let n_off = 44;
        let mut a1_offsets: Vec<f64> = (0..n_off)
            .map(|k| {
                let t = k as f64 / (n_off - 1) as f64;
                10f64.powf(-6.0 + 7.0 * t)
            })
            .collect();
        a1_offsets.push(12.0);
        let s_grid: Vec<f64> = (0..60)
            .map(|k| 0.005 + 0.99 * k as f64 / 59.0)
            .collect();
        let t_hi = a2_hi + 6.0;
        let t_grid: Vec<f64> = (0..50).map(|k| t_hi * k as f64 / 49.0).collect();
        SearchGrid {
            a2_bracket: Interval::new(a2_lo, a2_hi),
            a1_offsets,
            s_grid,
            t_grid,
            bisect_tol: 1e-4,
        }
    }
}

/// P(|t + Z| > a).
pub fn detection_power(t: f64, a: f64) -> f64 {
    normal_cdf(t - a) + normal_cdf(-t - a)
}

/// Asymptotic TPP at zero-threshold `alpha` for the nonzero prior component.
pub fn tpp_inf(prior_nonzero: &DiscretePrior, alpha: f64) -> f64 {
    prior_nonzero
        .atoms()
        .iter()
        .map(|&(v, p)| p * (1.0 - abs_shift_cdf(v, alpha)))
        .sum()
}

/// Asymptotic FDP at zero-threshold `alpha`, given TPP = u and sparsity eps.
pub fn fdp_inf(alpha: f64, u: f64, eps: f64) -> Result<f64, TradeoffError> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(TradeoffError::Domain(format!("tpp u={u} outside (0,1]")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(TradeoffError::Domain(format!("eps={eps} outside (0,1)")));
    }
    let null = 2.0 * (1.0 - eps) * normal_cdf(-alpha);
    Ok(null / (null + eps * u))
}

/// Mixing weight of the t1 atom in the least-favorable three-point prior,
/// pinned by TPP = u at zero-threshold alpha2. `None` when the pair cannot
/// realize u.
pub fn rho(t1: f64, t2: f64, alpha2: f64, u: f64) -> Option<f64> {
    let p1 = detection_power(t1, alpha2);
    let p2 = detection_power(t2, alpha2);
    if t1 == t2 || (p1 - p2).abs() < 1e-15 {
        return if (p1 - u).abs() <= 1e-9 {
            Some(1.0)
        } else {
            None
        };
    }
    let r = (u - p2) / (p1 - p2);
    if (0.0..=1.0).contains(&r) {
        Some(r + 0.0)
    } else {
        None
    }
}

fn three_point_atoms(t1: f64, t2: f64, rho: f64, eps: f64) -> Vec<(f64, f64)> {
    vec![(0.0, 1.0 - eps), (t1, eps * rho), (t2, eps * (1.0 - rho))]
}

/// F[pi_min(t1, t2)] for a given penalty; `Ok(None)` when the (t1, t2) pair
/// cannot realize TPP = u at zero-threshold a2.
pub fn f_pi_min(
    t1: f64,
    t2: f64,
    u: f64,
    eps: f64,
    pen: &NormalizedTwoLevel,
) -> Result<Option<f64>, TradeoffError> {
    Ok(f_pi_min_detailed(t1, t2, u, eps, pen)?.map(|d| d.f))
}

pub(crate) struct FDetail {
    pub f: f64,
    pub h: f64,
    pub rho: f64,
}

pub(crate) fn f_pi_min_detailed(
    t1: f64,
    t2: f64,
    u: f64,
    eps: f64,
    pen: &NormalizedTwoLevel,
) -> Result<Option<FDetail>, TradeoffError> {
    let Some(r) = rho(t1, t2, pen.a2, u) else {
        return Ok(None);
    };
    let prior = DiscretePrior::new(three_point_atoms(t1, t2, r, eps))
        .map_err(TradeoffError::Asym)?;
    let (h, _, _) = shared_height(&prior, pen)?;
    let f = (1.0 - eps) * risk_e(0.0, pen, h)
        + eps * r * risk_e(t1, pen, h)
        + eps * (1.0 - r) * risk_e(t2, pen, h);
    Ok(Some(FDetail { f, h, rho: r }))
}

// Conservative acceptance margin: a scanned witness must clear delta by this
// much so that re-evaluating it through the h-bisection path stays feasible.
const F_MARGIN: f64 = 1e-6;

// Feasibility scan over (a1 offset, h) for a fixed three-point prior shape.
// Parametrized by h rather than s: each h maps to s = 1 - I(h)/(a1-a2)
// directly, which avoids one nested root-find per grid cell. Descending h
// means ascending s, so the first hit carries the smallest feasible s.
struct PenScan<'a> {
    alpha2: f64,
    delta: f64,
    grid: &'a SearchGrid,
    s_lo: f64,
    s_hi: f64,
}

struct ScanHit {
    a1: f64,
    s: f64,
    f: f64,
}

impl<'a> PenScan<'a> {
    fn new(alpha2: f64, delta: f64, grid: &'a SearchGrid) -> Self {
        let s_lo = *grid.s_grid.first().expect("nonempty s grid");
        let s_hi = *grid.s_grid.last().expect("nonempty s grid");
        PenScan {
            alpha2,
            delta,
            grid,
            s_lo,
            s_hi,
        }
    }

    fn h_candidates(&self, a1: f64, t2: f64) -> Vec<f64> {
        let n = self.grid.s_grid.len().max(16);
        let near_hi = (t2.min(self.alpha2 + 6.0) + a1 + 3.0).max(2.0 * a1);
        let mut hs: Vec<f64> = (1..=n)
            .map(|k| near_hi * k as f64 / n as f64)
            .collect();
        // band-riding candidates when the far atom sits beyond the local span
        if t2 > near_hi - a1 {
            let lo = (t2 - a1 - 3.0).max(near_hi);
            let hi = t2 + 3.0;
            hs.extend((0..n / 2).map(|k| lo + (hi - lo) * k as f64 / (n / 2 - 1) as f64));
        }
        hs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        hs.dedup();
        hs
    }

    // Best (smallest-s first) feasible configuration for one prior shape and
    // one a1; also reports the best objective seen for near-boundary polish.
    fn scan_offset(
        &self,
        a1: f64,
        atoms: &[(f64, f64)],
        weights: &[(f64, f64)],
    ) -> (Option<ScanHit>, Option<(f64, f64)>) {
        let prior = DiscretePrior::new(atoms.to_vec()).expect("atom probabilities sum to one");
        let width = a1 - self.alpha2;
        let mut best: Option<(f64, f64)> = None; // (f, h)
        for h in self.h_candidates(a1, atoms.last().map(|&(v, _)| v).unwrap_or(0.0)) {
            let integral = prior.abs_cdf_integral(Interval::new(h + self.alpha2, h + a1));
            let s = 1.0 - integral / width;
            if s < self.s_lo {
                continue;
            }
            if s > self.s_hi {
                break; // s grows as h shrinks
            }
            let pen = NormalizedTwoLevel {
                a1,
                a2: self.alpha2,
                s,
            };
            let f: f64 = weights.iter().map(|&(v, p)| p * risk_e(v, &pen, h)).sum();
            if best.map_or(true, |(bf, _)| f < bf) {
                best = Some((f, h));
            }
            if f <= self.delta - F_MARGIN {
                return (
                    Some(ScanHit { a1, s, f }),
                    best,
                );
            }
        }
        (None, best)
    }

    // Ternary polish of F over h near a candidate, respecting the s range.
    fn polish(&self, a1: f64, atoms: &[(f64, f64)], weights: &[(f64, f64)], h0: f64) -> Option<ScanHit> {
        let prior = DiscretePrior::new(atoms.to_vec()).expect("atom probabilities sum to one");
        let width = a1 - self.alpha2;
        let span = (h0.abs() * 0.2).max(0.5);
        let eval = |h: f64| -> (f64, f64) {
            if h <= 0.0 {
                return (f64::INFINITY, f64::NAN);
            }
            let integral = prior.abs_cdf_integral(Interval::new(h + self.alpha2, h + a1));
            let s = 1.0 - integral / width;
            if s < self.s_lo || s > self.s_hi {
                return (f64::INFINITY, s);
            }
            let pen = NormalizedTwoLevel {
                a1,
                a2: self.alpha2,
                s,
            };
            (weights.iter().map(|&(v, p)| p * risk_e(v, &pen, h)).sum(), s)
        };
        let (mut lo, mut hi) = ((h0 - span).max(1e-9), h0 + span);
        for _ in 0..80 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if eval(m1).0 <= eval(m2).0 {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let h = 0.5 * (lo + hi);
        let (f, s) = eval(h);
        if f.is_finite() && f <= self.delta - F_MARGIN {
            Some(ScanHit { a1, s, f })
        } else {
            None
        }
    }
}

// Upper end of t values able to keep TPP at u: solves P(|t+Z|>a2) = u.
fn max_undetected_signal(alpha2: f64, u: f64) -> Option<f64> {
    if detection_power(0.0, alpha2) > u {
        return None;
    }
    let (mut lo, mut hi) = (0.0, alpha2 + 45.0);
    if detection_power(hi, alpha2) < u {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if detection_power(mid, alpha2) < u {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * (1.0 + hi) {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

// Near-LASSO feasibility certificate: smallest level offset, an escaping
// far atom, and a 1-D golden search over the near atom.
fn lasso_limit_probe(
    alpha2: f64,
    u: f64,
    eps: f64,
    delta: f64,
    grid: &SearchGrid,
) -> Option<Witness> {
    let t_hi = max_undetected_signal(alpha2, u)?;
    let t2 = alpha2 + 40.0;
    let offset = grid.a1_offsets.first().copied().unwrap_or(1e-6);
    let s_cap = (1.0 - eps) * 2.0 * normal_cdf(-alpha2) + eps * u;
    let s = (0.5 * s_cap).clamp(grid.s_grid[0], *grid.s_grid.last().unwrap());
    let pen = NormalizedTwoLevel {
        a1: alpha2 + offset,
        a2: alpha2,
        s,
    };
    let eval = |t1: f64| -> (f64, f64, f64) {
        match f_pi_min_detailed(t1, t2, u, eps, &pen) {
            Ok(Some(d)) if d.h > 0.0 => (d.f, d.h, d.rho),
            _ => (f64::INFINITY, f64::NAN, f64::NAN),
        }
    };
    // coarse pre-grid, then golden section around the best cell
    let n = 24;
    let mut best_k = 0;
    let mut best_f = f64::INFINITY;
    for k in 0..=n {
        let t1 = t_hi * k as f64 / n as f64;
        let f = eval(t1).0;
        if f < best_f {
            best_f = f;
            best_k = k;
        }
    }
    let step = t_hi / n as f64;
    let mut lo = (best_k as f64 * step - step).max(0.0);
    let mut hi = (best_k as f64 * step + step).min(t_hi);
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (eval(x1).0, eval(x2).0);
    for _ in 0..60 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = eval(x1).0;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = eval(x2).0;
        }
    }
    let t1 = 0.5 * (lo + hi);
    let (f, _h, r) = eval(t1);
    if f <= delta - F_MARGIN {
        Some(Witness {
            a1: pen.a1,
            a2: alpha2,
            s,
            t1,
            t2,
            rho: r,
        })
    } else {
        None
    }
}

// Full feasibility probe at one alpha2: is there a penalty (a1, s) and a
// three-point prior realizing TPP = u with F <= delta and a surviving flat
// band (so that alpha2 really is the zero-threshold)?
fn probe_all_priors(
    alpha2: f64,
    u: f64,
    eps: f64,
    delta: f64,
    grid: &SearchGrid,
) -> Option<Witness> {
    if detection_power(0.0, alpha2) > u + 1e-12 {
        return None;
    }
    if let Some(w) = lasso_limit_probe(alpha2, u, eps, delta, grid) {
        return Some(w);
    }
    let scan = PenScan::new(alpha2, delta, grid);
    let sentinel = alpha2 + 40.0;
    let mut t_values = grid.t_grid.clone();
    t_values.push(sentinel);
    let n_t = t_values.len();
    let powers: Vec<f64> = t_values.iter().map(|&t| detection_power(t, alpha2)).collect();

    let mut best: Option<(f64, f64, usize, usize, f64)> = None; // (f, a1, i, j, h)
    for &off in grid.a1_offsets.iter().chain(std::iter::once(&12.0)).take(grid.a1_offsets.len() + 1) {
        let a1 = alpha2 + off.max(1e-9);
        for i in 0..n_t {
            for j in i..n_t {
                let (t1, t2) = (t_values[i], t_values[j]);
                let Some(r) = rho_from_powers(powers[i], powers[j], t1, t2, u) else {
                    continue;
                };
                // unavoidable error of the undetected signal mass
                let f_floor = eps
                    * (r * t1 * t1 * (1.0 - powers[i])
                        + (1.0 - r) * t2 * t2 * (1.0 - powers[j]));
                if f_floor > delta {
                    continue;
                }
                let atoms = three_point_atoms(t1, t2, r, eps);
                let weights = vec![(0.0, 1.0 - eps), (t1, eps * r), (t2, eps * (1.0 - r))];
                let (hit, local_best) = scan.scan_offset(a1, &atoms, &weights);
                if let Some(hit) = hit {
                    return Some(Witness {
                        a1: hit.a1,
                        a2: alpha2,
                        s: hit.s,
                        t1,
                        t2,
                        rho: r,
                    });
                }
                if let Some((f, h)) = local_best {
                    if best.map_or(true, |(bf, ..)| f < bf) {
                        best = Some((f, a1, i, j, h));
                    }
                }
            }
        }
    }
    // near-miss polish over h at the best scanned cell
    if let Some((f, a1, i, j, h)) = best {
        if f <= delta * 1.5 + 0.05 {
            let (t1, t2) = (t_values[i], t_values[j]);
            let r = rho_from_powers(powers[i], powers[j], t1, t2, u)?;
            let atoms = three_point_atoms(t1, t2, r, eps);
            let weights = vec![(0.0, 1.0 - eps), (t1, eps * r), (t2, eps * (1.0 - r))];
            if let Some(hit) = scan.polish(a1, &atoms, &weights, h) {
                return Some(Witness {
                    a1: hit.a1,
                    a2: alpha2,
                    s: hit.s,
                    t1,
                    t2,
                    rho: r,
                });
            }
        }
    }
    None
}

fn rho_from_powers(p1: f64, p2: f64, t1: f64, t2: f64, u: f64) -> Option<f64> {
    if t1 == t2 || (p1 - p2).abs() < 1e-15 {
        return if (p1 - u).abs() <= 1e-9 { Some(1.0) } else { None };
    }
    let r = (u - p2) / (p1 - p2);
    if (0.0..=1.0).contains(&r) {
        Some(r + 0.0)
    } else {
        None
    }
}

/// Largest feasible zero-threshold over all priors and 2-level penalties at
/// TPP = u, by bisection on the grid's alpha2 bracket. The lower end must be
/// feasible and the upper end infeasible.
pub fn max_zero_threshold_all_priors(
    u: f64,
    eps: f64,
    delta: f64,
    grid: &SearchGrid,
) -> Result<TradeoffPoint, TradeoffError> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(TradeoffError::Domain(format!("tpp u={u} outside (0,1]")));
    }
    let (mut lo, mut hi) = (grid.a2_bracket.lo, grid.a2_bracket.hi);
    let lo_w = probe_all_priors(lo, u, eps, delta, grid);
    let hi_w = probe_all_priors(hi, u, eps, delta, grid);
    if lo_w.is_none() || hi_w.is_some() {
        return Err(TradeoffError::Bracket {
            lo,
            hi,
            lo_feasible: lo_w.is_some(),
            hi_feasible: hi_w.is_some(),
        });
    }
    let mut best = (lo, lo_w.expect("checked feasible"));
    while hi - lo > grid.bisect_tol {
        let mid = 0.5 * (lo + hi);
        match probe_all_priors(mid, u, eps, delta, grid) {
            Some(w) => {
                best = (mid, w);
                lo = mid;
            }
            None => hi = mid,
        }
    }
    let (alpha_star, witness) = best;
    Ok(TradeoffPoint {
        u,
        min_fdp: fdp_inf(alpha_star, u, eps)?,
        alpha_star,
        argmax: witness,
    })
}

/// The 2-level trade-off q(u): minimum FDP at TPP = u over all priors and
/// penalties. Builds its own alpha2 bracket: from the LASSO zero-threshold
/// when it exists, otherwise by an upward scan.
pub fn q_two_level(u: f64, eps: f64, delta: f64) -> Result<TradeoffPoint, TradeoffError> {
    let coarse = SearchGrid::default_for(0.0, 1.0); // resolution donor; bracket set below
    let lo = match lasso_zero_threshold(u, eps, delta) {
        Ok(t_star) => Some(t_star - 5e-5),
        Err(_) => None,
    };
    let lo = match lo {
        Some(v) => v,
        None => {
            // above the LASSO power limit: scan for any feasible alpha2
            let start = -normal_quantile(u / 2.0).map_err(|e| TradeoffError::Domain(e.to_string()))?;
            let mut found = None;
            let mut a = start.max(0.02) + 0.02;
            while a < start + 8.0 {
                let probe_grid = SearchGrid {
                    a2_bracket: Interval::new(a, a + 1.0),
                    ..coarse.clone()
                };
                if probe_all_priors(a, u, eps, delta, &probe_grid).is_some() {
                    found = Some(a);
                    break;
                }
                a += 0.1;
            }
            found.ok_or_else(|| {
                TradeoffError::Domain(format!("no feasible zero-threshold found at u={u}"))
            })?
        }
    };
    // push the upper end out until infeasible
    let mut hi = lo + 1.0;
    let mut grid = SearchGrid::default_for(lo, hi + 6.0);
    while probe_all_priors(hi, u, eps, delta, &grid).is_some() && hi < lo + 14.0 {
        hi += 1.0;
    }
    grid.a2_bracket = Interval::new(lo, hi);
    max_zero_threshold_all_priors(u, eps, delta, &grid)
}

/// Donoho-Tanner power limit: the supremum of LASSO TPP over all priors and
/// penalties. Returns 1 when eps is below the critical sparsity (or when
/// delta >= 1, where no limit binds).
pub fn dt_limit(delta: f64, eps: f64) -> Result<f64, TradeoffError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(TradeoffError::Domain(format!("eps={eps} outside (0,1)")));
    }
    if delta >= 1.0 {
        return Ok(1.0);
    }
    if !(delta > 0.0) {
        return Err(TradeoffError::Domain(format!("delta={delta} outside (0,1)")));
    }
    // delta(t) = 2 phi(t) / (2 phi(t) + t (2 Phi(t) - 1)) decreases from 1 to
    // 0; invert by bisection, then evaluate the critical sparsity.
    let delta_of = |t: f64| {
        let denom = 2.0 * crate::gauss::normal_pdf(t) + t * (2.0 * normal_cdf(t) - 1.0);
        2.0 * crate::gauss::normal_pdf(t) / denom
    };
    let (mut lo, mut hi) = (1e-12, 60.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if delta_of(mid) > delta {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * (1.0 + hi) {
            break;
        }
    }
    let t = 0.5 * (lo + hi);
    let denom = 2.0 * crate::gauss::normal_pdf(t) + t * (2.0 * normal_cdf(t) - 1.0);
    let eps_star = (2.0 * crate::gauss::normal_pdf(t) - 2.0 * t * normal_cdf(-t)) / denom;
    if eps <= eps_star {
        return Ok(1.0);
    }
    Ok(1.0 - (1.0 - delta) * (eps - eps_star) / (eps * (1.0 - eps_star)))
}

/// Largest positive root t*(u) of the LASSO trade-off equation: the LASSO
/// maximum zero-threshold at TPP = u.
pub fn lasso_zero_threshold(u: f64, eps: f64, delta: f64) -> Result<f64, TradeoffError> {
    let u_dt = dt_limit(delta, eps)?;
    if !(u > 0.0 && u < u_dt) {
        return Err(TradeoffError::Domain(format!(
            "u={u} outside the LASSO domain (0, {u_dt})"
        )));
    }
    let g = |x: f64| lasso_root_equation(x, u, eps, delta);
    // scan down from a high start; the first sign change brackets the
    // largest root
    let mut prev_x = 20.0;
    let mut prev_g = g(prev_x);
    let mut bracket = None;
    let mut x = prev_x;
    while x > 1e-4 {
        x -= 0.01;
        let gx = g(x);
        if gx == 0.0 {
            return Ok(x);
        }
        if gx.is_finite() && prev_g.is_finite() && gx.signum() != prev_g.signum() {
            bracket = Some((x, prev_x));
            break;
        }
        prev_x = x;
        prev_g = gx;
    }
    let (mut lo, mut hi) = bracket.ok_or_else(|| {
        TradeoffError::Domain(format!("no LASSO zero-threshold root found at u={u}"))
    })?;
    let (mut glo, _) = (g(lo), g(hi));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * (1.0 + hi) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Residual of the defining equation for t*(u); zero at the root.
pub fn lasso_root_equation(x: f64, u: f64, eps: f64, delta: f64) -> f64 {
    let phi = crate::gauss::normal_pdf(x);
    let cdf_neg = normal_cdf(-x);
    let one_plus = 1.0 + x * x;
    let lhs_num = 2.0 * (1.0 - eps) * (one_plus * cdf_neg - x * phi) + eps * one_plus - delta;
    let lhs_den = eps * (one_plus * (1.0 - 2.0 * cdf_neg) + 2.0 * x * phi);
    let rhs = (1.0 - u) / (1.0 - 2.0 * cdf_neg);
    lhs_num / lhs_den - rhs
}

/// The LASSO trade-off curve q(u) below the Donoho-Tanner limit.
pub fn q_lasso(u: f64, eps: f64, delta: f64) -> Result<f64, TradeoffError> {
    let t_star = lasso_zero_threshold(u, eps, delta)?;
    fdp_inf(t_star, u, eps)
}

/// LASSO point of a fixed-prior search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LassoFixedPoint {
    pub alpha: f64,
    pub tau: f64,
    /// Calibrated original-scale level; `None` when calibration is infeasible.
    pub lambda: Option<f64>,
}

/// 2-level point of a fixed-prior search at the maximum zero-threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPriorPoint {
    pub alpha2: f64,
    pub a1: f64,
    pub s: f64,
    pub sol: ScalarizedSolution,
    pub min_fdp: f64,
    /// Calibrated original-scale penalty; `None` when calibration is infeasible.
    pub lambda: Option<TwoLevelPenalty>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPriorResult {
    pub u: f64,
    pub lasso: Option<LassoFixedPoint>,
    pub two_level: Option<FixedPriorPoint>,
    /// Set when no 2-level penalty beats the starting point, or no LASSO
    /// point attains u at all.
    pub boundary: bool,
}

// TPP of the fixed prior at zero-threshold alpha given tau.
fn fixed_prior_tpp(prior_nonzero: &DiscretePrior, tau: f64, alpha: f64) -> f64 {
    tpp_inf(&prior_nonzero.scaled(1.0 / tau), alpha)
}

// tau solving TPP(tau) = u at threshold alpha; TPP decreases in tau from 1
// to the null power.
fn tau_for_tpp(prior_nonzero: &DiscretePrior, alpha: f64, u: f64) -> Option<f64> {
    if detection_power(0.0, alpha) >= u {
        return None;
    }
    let (mut lo, mut hi) = (1e-9, 1.0);
    while fixed_prior_tpp(prior_nonzero, hi, alpha) > u {
        hi *= 2.0;
        if hi > 1e12 {
            return None;
        }
    }
    for _ in 0..220 {
        let mid = 0.5 * (lo + hi);
        if fixed_prior_tpp(prior_nonzero, mid, alpha) > u {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Maximum zero-threshold at TPP = u for a fixed prior: starts from the
/// LASSO fixed point, then scans alpha2 upward accepting points where some
/// (a1, s) makes the state evolution consistent with the TPP constraint and
/// keeps the flat band positive.
pub fn fixed_prior_max_zero_threshold(
    prior: &DiscretePrior,
    u: f64,
    delta: f64,
    sigma: f64,
    grid: &SearchGrid,
) -> Result<FixedPriorResult, TradeoffError> {
    if !(u > 0.0 && u < 1.0) {
        return Err(TradeoffError::Domain(format!("tpp u={u} outside (0,1)")));
    }
    let eps = prior.eps();
    if !(eps > 0.0 && eps < 1.0) {
        return Err(TradeoffError::Domain(
            "fixed prior needs both zero and nonzero atoms".into(),
        ));
    }
    let star = prior.nonzero_part()?;
    let lasso = lasso_fixed_point(prior, &star, u, delta, sigma);
    let start = match &lasso {
        Some(p) => p.alpha,
        None => {
            let min = -normal_quantile(u / 2.0).map_err(|e| TradeoffError::Domain(e.to_string()))?;
            min.max(0.02) + 0.01
        }
    };

    let feasible = |alpha2: f64| -> Option<(NormalizedTwoLevel, ScalarizedSolution)> {
        probe_fixed_prior(prior, &star, alpha2, u, delta, sigma, grid)
    };

    // coarse upward scan, then bisection between the last feasible and the
    // first infeasible alpha2
    let step = 0.05;
    let mut last_good: Option<(f64, (NormalizedTwoLevel, ScalarizedSolution))> = None;
    let mut first_bad = None;
    let mut alpha2 = start + 1e-3;
    while alpha2 < start + 6.0 {
        match feasible(alpha2) {
            Some(w) => last_good = Some((alpha2, w)),
            None => {
                if last_good.is_some() {
                    first_bad = Some(alpha2);
                    break;
                }
            }
        }
        alpha2 += step;
    }
    let Some((mut lo, mut best)) = last_good else {
        return Ok(FixedPriorResult {
            u,
            lasso,
            two_level: None,
            boundary: true,
        });
    };
    let mut hi = first_bad.unwrap_or(lo + step);
    while hi - lo > grid.bisect_tol {
        let mid = 0.5 * (lo + hi);
        match feasible(mid) {
            Some(w) => {
                best = w;
                lo = mid;
            }
            None => hi = mid,
        }
    }
    let (pen, sol) = best;
    let lambda = calibrate(&pen, &sol, prior, delta).ok();
    Ok(FixedPriorResult {
        u,
        lasso,
        two_level: Some(FixedPriorPoint {
            alpha2: pen.a2,
            a1: pen.a1,
            s: pen.s,
            min_fdp: fdp_inf(pen.a2, u, eps)?,
            sol,
            lambda,
        }),
        boundary: false,
    })
}

fn lasso_fixed_point(
    prior: &DiscretePrior,
    star: &DiscretePrior,
    u: f64,
    delta: f64,
    sigma: f64,
) -> Option<LassoFixedPoint> {
    // TPP against alpha along the 1-level state-evolution path; find the
    // crossing with u
    let mut prev: Option<(f64, f64)> = None;
    let mut alpha = 0.05;
    let mut bracket = None;
    while alpha <= 12.0 {
        if let Ok(Some(tau)) = state_evolution_tau_one_level(prior, alpha, delta, sigma) {
            let tpp = fixed_prior_tpp(star, tau, alpha);
            if let Some((pa, pt)) = prev {
                if (pt - u) * (tpp - u) <= 0.0 && pt != tpp {
                    bracket = Some((pa, alpha));
                    break;
                }
            }
            prev = Some((alpha, tpp));
        }
        alpha += 0.05;
    }
    let (mut lo, mut hi) = bracket?;
    let tpp_at = |a: f64| -> Option<f64> {
        state_evolution_tau_one_level(prior, a, delta, sigma)
            .ok()
            .flatten()
            .map(|tau| fixed_prior_tpp(star, tau, a))
    };
    let tpp_lo = tpp_at(lo)?;
    let increasing = tpp_lo < u;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let t = tpp_at(mid)?;
        if (t < u) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-9 {
            break;
        }
    }
    let alpha = 0.5 * (lo + hi);
    let tau = state_evolution_tau_one_level(prior, alpha, delta, sigma).ok()??;
    let lambda = calibrate_one_level(alpha, tau, prior, delta).ok();
    Some(LassoFixedPoint { alpha, tau, lambda })
}

#[allow(clippy::too_many_arguments)]
fn probe_fixed_prior(
    prior: &DiscretePrior,
    star: &DiscretePrior,
    alpha2: f64,
    u: f64,
    delta: f64,
    sigma: f64,
    grid: &SearchGrid,
) -> Option<(NormalizedTwoLevel, ScalarizedSolution)> {
    let tau_target = tau_for_tpp(star, alpha2, u)?;
    for &off in &grid.a1_offsets {
        let a1 = alpha2 + off.max(1e-9);
        let mut prev: Option<(f64, f64)> = None; // (s, tau - tau_target)
        for &s in &grid.s_grid {
            let pen = NormalizedTwoLevel { a1, a2: alpha2, s };
            let Ok(out) = state_evolution_tau(prior, &pen, delta, sigma) else {
                prev = None;
                continue;
            };
            let Some(sol) = out.feasible() else {
                prev = None;
                continue;
            };
            let gap = sol.tau - tau_target;
            if gap.abs() <= 1e-7 * tau_target && sol.h > 0.0 {
                return Some((pen, *sol));
            }
            if let Some((ps, pgap)) = prev {
                if pgap.signum() != gap.signum() {
                    if let Some(hit) =
                        refine_fixed_prior_s(prior, star, alpha2, a1, (ps, s), tau_target, u, delta, sigma)
                    {
                        return Some(hit);
                    }
                }
            }
            prev = Some((s, gap));
        }
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn refine_fixed_prior_s(
    prior: &DiscretePrior,
    star: &DiscretePrior,
    alpha2: f64,
    a1: f64,
    s_bracket: (f64, f64),
    tau_target: f64,
    u: f64,
    delta: f64,
    sigma: f64,
) -> Option<(NormalizedTwoLevel, ScalarizedSolution)> {
    let gap_at = |s: f64| -> Option<(f64, ScalarizedSolution, NormalizedTwoLevel)> {
        let pen = NormalizedTwoLevel { a1, a2: alpha2, s };
        let sol = *state_evolution_tau(prior, &pen, delta, sigma).ok()?.feasible()?;
        Some((sol.tau - tau_target, sol, pen))
    };
    let (mut lo, mut hi) = s_bracket;
    let (mut glo, ..) = gap_at(lo)?;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let (gm, sol, pen) = gap_at(mid)?;
        if gm.abs() <= 1e-8 * tau_target {
            if sol.h > 0.0 && (fixed_prior_tpp(star, sol.tau, alpha2) - u).abs() <= 1e-4 {
                return Some((pen, sol));
            }
            return None;
        }
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    let (_, sol, pen) = gap_at(0.5 * (lo + hi))?;
    if sol.h > 0.0 && (fixed_prior_tpp(star, sol.tau, alpha2) - u).abs() <= 1e-4 {
        Some((pen, sol))
    } else {
        None
    }
}

/// A trade-off point for the constant-or-nothing prior, with the implied
/// normalized signal t and scale tau = T / t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantPriorPoint {
    pub point: TradeoffPoint,
    pub t: f64,
    pub tau: f64,
    /// delta (tau^2 - sigma^2) at the implied noise level, i.e. tau^2 F.
    pub mse: f64,
}

/// Maximum zero-threshold at TPP = u for the constant-or-nothing prior
/// Pi* = T. The TPP constraint pins the normalized signal per alpha2, so
/// feasibility is the analytic check F <= delta with no tau iteration.
pub fn constant_prior_max_zero_threshold(
    t_value: f64,
    eps: f64,
    delta: f64,
    u: f64,
    grid: &SearchGrid,
) -> Result<ConstantPriorPoint, TradeoffError> {
    if !(t_value > 0.0) {
        return Err(TradeoffError::Domain(format!(
            "constant prior value must be positive, got {t_value}"
        )));
    }
    if !(u > 0.0 && u < 1.0) {
        return Err(TradeoffError::Domain(format!("tpp u={u} outside (0,1)")));
    }
    let probe = |alpha2: f64| -> Option<(Witness, f64)> {
        let t = max_undetected_signal(alpha2, u)?;
        let scan = PenScan::new(alpha2, delta, grid);
        let atoms = vec![(0.0, 1.0 - eps), (t, eps)];
        let weights = atoms.clone();
        let mut best: Option<(f64, f64, f64)> = None; // (f, a1, h)
        for &off in &grid.a1_offsets {
            let a1 = alpha2 + off.max(1e-9);
            let (hit, local) = scan.scan_offset(a1, &atoms, &weights);
            if let Some(hit) = hit {
                return Some((
                    Witness {
                        a1: hit.a1,
                        a2: alpha2,
                        s: hit.s,
                        t1: t,
                        t2: t,
                        rho: 1.0,
                    },
                    hit.f,
                ));
            }
            if let Some((f, h)) = local {
                if best.map_or(true, |(bf, ..)| f < bf) {
                    best = Some((f, a1, h));
                }
            }
        }
        if let Some((f, a1, h)) = best {
            if f <= delta * 1.5 + 0.05 {
                if let Some(hit) = scan.polish(a1, &atoms, &weights, h) {
                    return Some((
                        Witness {
                            a1: hit.a1,
                            a2: alpha2,
                            s: hit.s,
                            t1: t,
                            t2: t,
                            rho: 1.0,
                        },
                        hit.f,
                    ));
                }
            }
        }
        None
    };

    // scan upward for the feasible band, then bisect its upper edge
    let start = (-normal_quantile(u / 2.0).map_err(|e| TradeoffError::Domain(e.to_string()))?)
        .max(0.02)
        + 0.01;
    let step = 0.05;
    let mut last_good: Option<(f64, (Witness, f64))> = None;
    let mut first_bad = None;
    let mut alpha2 = start;
    while alpha2 < start + 8.0 {
        match probe(alpha2) {
            Some(w) => last_good = Some((alpha2, w)),
            None => {
                if last_good.is_some() {
                    first_bad = Some(alpha2);
                    break;
                }
            }
        }
        alpha2 += step;
    }
    let Some((mut lo, mut best)) = last_good else {
        return Err(TradeoffError::Domain(format!(
            "no feasible zero-threshold for the constant prior at u={u}"
        )));
    };
    let mut hi = first_bad.unwrap_or(lo + step);
    while hi - lo > grid.bisect_tol {
        let mid = 0.5 * (lo + hi);
        match probe(mid) {
            Some(w) => {
                best = w;
                lo = mid;
            }
            None => hi = mid,
        }
    }
    let (witness, f) = best;
    let t = witness.t1;
    let tau = t_value / t;
    Ok(ConstantPriorPoint {
        point: TradeoffPoint {
            u,
            min_fdp: fdp_inf(witness.a2, u, eps)?,
            alpha_star: witness.a2,
            argmax: witness,
        },
        t,
        tau,
        mse: tau * tau * f,
    })
}

/// Normalized signal level t solving P(|t+Z| > alpha2) = u, when one exists.
pub fn constant_prior_signal_for_tpp(alpha2: f64, u: f64) -> Option<f64> {
    max_undetected_signal(alpha2, u)
}

/// Maximum LASSO zero-threshold for the constant-or-nothing prior under the
/// scale-free reading: largest alpha with (1-eps) E(0) + eps E(t(alpha)) <=
/// delta along the TPP constraint.
pub fn constant_prior_lasso_threshold(eps: f64, delta: f64, u: f64) -> Option<f64> {
    let feasible = |alpha: f64| -> bool {
        match max_undetected_signal(alpha, u) {
            None => false,
            Some(t) => {
                (1.0 - eps) * crate::asymptotics::soft_risk(0.0, alpha)
                    + eps * crate::asymptotics::soft_risk(t, alpha)
                    <= delta
            }
        }
    };
    let start = (-normal_quantile(u / 2.0).ok()?).max(0.01) + 0.01;
    let mut last_good = None;
    let mut first_bad = None;
    let mut alpha = start;
    while alpha < start + 10.0 {
        if feasible(alpha) {
            last_good = Some(alpha);
        } else if last_good.is_some() {
            first_bad = Some(alpha);
            break;
        }
        alpha += 0.05;
    }
    let mut lo = last_good?;
    let mut hi = first_bad.unwrap_or(lo + 0.05);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// The analytic general-SLOPE effective penalty -H'(x)/H(x) for a
/// three-point prior, clamped at `alpha` below the zero-threshold.
#[derive(Debug, Clone, Copy)]
pub struct GeneralSlopePenalty {
    pub t1: f64,
    pub t2: f64,
    pub rho: f64,
    pub eps: f64,
    pub alpha: f64,
    /// Whether the penalty is nondecreasing in |x|; when false it is not a
    /// valid optimal-SLOPE construction and the curve should be excluded.
    pub monotone: bool,
}

pub fn general_slope_analytic_penalty(
    t1: f64,
    t2: f64,
    rho: f64,
    eps: f64,
    alpha: f64,
) -> Result<GeneralSlopePenalty, TradeoffError> {
    if !(alpha > 0.0) {
        return Err(TradeoffError::Domain(format!(
            "zero-threshold must be positive, got {alpha}"
        )));
    }
    let mut pen = GeneralSlopePenalty {
        t1,
        t2,
        rho,
        eps,
        alpha,
        monotone: true,
    };
    let hi = t2.max(alpha) + 8.0;
    let n = 10_000;
    let mut prev = pen.eval(0.0);
    let mut monotone = true;
    for k in 1..=n {
        let x = hi * k as f64 / n as f64;
        let v = pen.eval(x);
        if v < prev - 1e-12 {
            monotone = false;
            break;
        }
        prev = v;
    }
    pen.monotone = monotone;
    Ok(pen)
}

impl GeneralSlopePenalty {
    /// Effective penalty level at |x|.
    pub fn eval(&self, x: f64) -> f64 {
        let ax = x.abs();
        if ax <= self.alpha {
            return self.alpha;
        }
        let phi = crate::gauss::normal_pdf;
        let pair = |t: f64| (phi(ax - t), phi(ax + t));
        let (p1m, p1p) = pair(self.t1);
        let (p2m, p2p) = pair(self.t2);
        let h = 4.0 * (1.0 - self.eps) * phi(ax)
            + 2.0 * self.eps * self.rho * (p1m + p1p)
            + 2.0 * self.eps * (1.0 - self.rho) * (p2m + p2p);
        let hprime = -4.0 * (1.0 - self.eps) * ax * phi(ax)
            - 2.0 * self.eps * self.rho * ((ax - self.t1) * p1m + (ax + self.t1) * p1p)
            - 2.0 * self.eps * (1.0 - self.rho) * ((ax - self.t2) * p2m + (ax + self.t2) * p2p);
        -hprime / h
    }
}
