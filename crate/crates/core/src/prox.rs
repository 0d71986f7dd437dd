//! Exact SLOPE proximal operators.
//!
//! The general path is stack-based PAVA (sort, difference, average, truncate,
//! restore); the 2-level path exploits the single vertical drop in the
//! difference sequence and pools one block around it. Block means are always
//! recomputed from a canonical left-to-right sum once the block boundaries
//! are fixed, so both paths emit bit-identical outputs.

use std::collections::HashMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum ProxError {
    LengthMismatch { v_len: usize, theta_len: usize },
    InvalidPenalty(String),
}

impl fmt::Display for ProxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProxError::LengthMismatch { v_len, theta_len } => {
                write!(f, "input length {v_len} does not match penalty length {theta_len}")
            }
            ProxError::InvalidPenalty(msg) => write!(f, "invalid penalty: {msg}"),
        }
    }
}

impl std::error::Error for ProxError {}

/// Nonincreasing, nonnegative penalty sequence with at least one positive entry.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyVector {
    values: Vec<f64>,
}

impl PenaltyVector {
    pub fn new(values: Vec<f64>) -> Result<Self, ProxError> {
        if values.is_empty() {
            return Err(ProxError::InvalidPenalty("empty penalty vector".into()));
        }
        for w in values.windows(2) {
            if !(w[0] >= w[1]) {
                return Err(ProxError::InvalidPenalty(format!(
                    "not nonincreasing at {} -> {}",
                    w[0], w[1]
                )));
            }
        }
        let last = *values.last().unwrap();
        if !(last >= 0.0) {
            return Err(ProxError::InvalidPenalty(format!("negative entry {last}")));
        }
        if !(values[0] > 0.0) {
            return Err(ProxError::InvalidPenalty("all entries zero".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ProxError::InvalidPenalty("non-finite entry".into()));
        }
        Ok(PenaltyVector { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The triplet (lambda1, lambda2, s): about `ceil(s p)` coordinates at the
/// large level, the rest at the small one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelPenalty {
    pub lam1: f64,
    pub lam2: f64,
    pub s: f64,
}

impl TwoLevelPenalty {
    pub fn new(lam1: f64, lam2: f64, s: f64) -> Result<Self, ProxError> {
        if !(lam1.is_finite() && lam2.is_finite() && lam1 >= lam2 && lam2 >= 0.0 && lam1 > 0.0) {
            return Err(ProxError::InvalidPenalty(format!(
                "levels must satisfy lam1 >= lam2 >= 0, lam1 > 0; got ({lam1}, {lam2})"
            )));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(ProxError::InvalidPenalty(format!(
                "splitting ratio must lie strictly in (0,1); got {s}"
            )));
        }
        Ok(TwoLevelPenalty { lam1, lam2, s })
    }

    /// Number of coordinates penalized at the large level for dimension `p`.
    pub fn split_count(&self, p: usize) -> usize {
        ((self.s * p as f64).ceil() as usize).clamp(1, p)
    }

    /// Length-`p` nonincreasing penalty vector with `ceil(s p)` copies of
    /// `lam1` followed by copies of `lam2`.
    pub fn materialize(&self, p: usize) -> PenaltyVector {
        let k = self.split_count(p);
        let mut values = vec![self.lam1; k];
        values.resize(p, self.lam2);
        PenaltyVector { values }
    }
}

pub fn soft_threshold(v: f64, theta: f64) -> f64 {
    debug_assert!(theta >= 0.0);
    let m = v.abs() - theta;
    if m <= 0.0 {
        0.0
    } else {
        v.signum() * m
    }
}

// Indices of v sorted ascending by (|v|, original index); the index tiebreak
// keeps the ordering reproducible across platforms.
fn ascending_abs_order(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| {
        v[a].abs()
            .partial_cmp(&v[b].abs())
            .expect("non-finite input to prox")
            .then(a.cmp(&b))
    });
    idx
}

// Pool-adjacent-violators on d, in place: averages strictly decreasing
// sub-sequences until the sequence is nondecreasing. Returns block
// boundaries; the caller fills values from canonical block means.
fn isotonic_pool(d: &mut [f64]) {
    let n = d.len();
    // (start, count, sum) per block; mean compared as sum ratios.
    let mut blocks: Vec<(usize, usize, f64)> = Vec::with_capacity(n);
    for (i, &x) in d.iter().enumerate() {
        let mut start = i;
        let mut count = 1usize;
        let mut sum = x;
        while let Some(&(ps, pc, psum)) = blocks.last() {
            if psum / pc as f64 > sum / count as f64 {
                blocks.pop();
                start = ps;
                count += pc;
                sum += psum;
            } else {
                break;
            }
        }
        blocks.push((start, count, sum));
    }
    for &(start, count, _) in &blocks {
        emit_block_mean(d, start, count);
    }
}

// Canonical block mean: left-to-right accumulation, written once.
fn emit_block_mean(d: &mut [f64], start: usize, count: usize) {
    if count == 1 {
        return;
    }
    let mut sum = 0.0;
    for &x in &d[start..start + count] {
        sum += x;
    }
    let mean = sum / count as f64;
    for x in &mut d[start..start + count] {
        *x = mean;
    }
}

fn restore(v: &[f64], order: &[usize], pooled: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for (k, &i) in order.iter().enumerate() {
        let w = pooled[k].max(0.0);
        out[i] = if w == 0.0 { 0.0 } else { v[i].signum() * w };
    }
    out
}

// Penalty term of the prox output, computed on the sorted scale where the
// k-th smallest magnitude pairs with the k-th smallest penalty level.
fn penalty_value_sorted(pooled: &[f64], theta_ascending: impl Fn(usize) -> f64) -> f64 {
    let mut acc = 0.0;
    for (k, &w) in pooled.iter().enumerate() {
        let w = w.max(0.0);
        if w > 0.0 {
            acc += theta_ascending(k) * w;
        }
    }
    acc
}

/// Exact minimizer of `1/2 ||v - b||^2 + sum_i theta_i |b|_(i)`.
pub fn slope_prox(v: &[f64], theta: &PenaltyVector) -> Result<Vec<f64>, ProxError> {
    if v.len() != theta.len() {
        return Err(ProxError::LengthMismatch {
            v_len: v.len(),
            theta_len: theta.len(),
        });
    }
    let p = v.len();
    let order = ascending_abs_order(v);
    // smallest |v| pairs with the smallest penalty
    let mut d: Vec<f64> = (0..p)
        .map(|k| v[order[k]].abs() - theta.values[p - 1 - k])
        .collect();
    isotonic_pool(&mut d);
    Ok(restore(v, &order, &d))
}

/// `slope_prox` plus the penalty term of the objective at the output,
/// obtained from the sort the prox already performs.
pub(crate) fn slope_prox_with_penalty(
    v: &[f64],
    theta: &PenaltyVector,
) -> Result<(Vec<f64>, f64), ProxError> {
    if v.len() != theta.len() {
        return Err(ProxError::LengthMismatch {
            v_len: v.len(),
            theta_len: theta.len(),
        });
    }
    let p = v.len();
    let order = ascending_abs_order(v);
    let mut d: Vec<f64> = (0..p)
        .map(|k| v[order[k]].abs() - theta.values[p - 1 - k])
        .collect();
    isotonic_pool(&mut d);
    let pen_val = penalty_value_sorted(&d, |k| theta.values[p - 1 - k]);
    Ok((restore(v, &order, &d), pen_val))
}

/// Identical output to `slope_prox` on the materialized 2-level penalty; the
/// difference sequence has a single vertical drop, so at most one block needs
/// pooling.
pub fn two_level_prox(v: &[f64], pen: &TwoLevelPenalty) -> Vec<f64> {
    two_level_prox_with_penalty(v, pen).0
}

pub(crate) fn two_level_prox_with_penalty(v: &[f64], pen: &TwoLevelPenalty) -> (Vec<f64>, f64) {
    let p = v.len();
    assert!(p >= 2, "two_level_prox needs at least two coordinates");
    let k = pen.split_count(p);
    let order = ascending_abs_order(v);
    let mut d: Vec<f64> = (0..p)
        .map(|m| {
            let theta = if m < p - k { pen.lam2 } else { pen.lam1 };
            v[order[m]].abs() - theta
        })
        .collect();
    // the only possible violation sits at the penalty changeover
    let drop = p - k;
    if drop > 0 && d[drop - 1] > d[drop] {
        let mut i = drop - 1;
        let mut j = drop;
        let mut sum = d[i] + d[j];
        let mut count = 2usize;
        loop {
            let mean = sum / count as f64;
            if i > 0 && d[i - 1] > mean {
                i -= 1;
                sum += d[i];
                count += 1;
            } else if j + 1 < p && mean > d[j + 1] {
                j += 1;
                sum += d[j];
                count += 1;
            } else {
                break;
            }
        }
        emit_block_mean(&mut d, i, count);
    }
    let pen_val = penalty_value_sorted(&d, |m| if m < p - k { pen.lam2 } else { pen.lam1 });
    (restore(v, &order, &d), pen_val)
}

/// Magnitudes attained by at least two entries of |w| (descending), plus the
/// count of the non-zero ones. Equality is exact on bits.
pub fn shared_magnitudes(w: &[f64]) -> (Vec<f64>, usize) {
    let mut counts: HashMap<u64, usize> = HashMap::new();
    for &x in w {
        *counts.entry(x.abs().to_bits()).or_insert(0) += 1;
    }
    let mut shared: Vec<f64> = counts
        .into_iter()
        .filter(|&(_, c)| c > 1)
        .map(|(bits, _)| f64::from_bits(bits))
        .collect();
    shared.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let nonzero = shared.iter().filter(|&&h| h != 0.0).count();
    (shared, nonzero)
}
