mod common;

use common::rng;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use slope2::mat::{dot, Mat};
use slope2::prox::{shared_magnitudes, slope_prox, PenaltyVector, TwoLevelPenalty};
use slope2::solver::*;

fn random_mat(r: &mut impl Rng, n: usize, p: usize, scale: f64) -> Mat {
    let mut m = Mat::zeros(n, p);
    for j in 0..p {
        for i in 0..n {
            let z: f64 = StandardNormal.sample(r);
            m.set(i, j, z * scale);
        }
    }
    m
}

// Gram-Schmidt orthonormal columns (p <= n).
fn orthonormal_design(r: &mut impl Rng, n: usize, p: usize) -> Mat {
    let mut cols: Vec<Vec<f64>> = vec![];
    while cols.len() < p {
        let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(r)).collect();
        for c in &cols {
            let proj = dot(&v, c);
            for (vi, ci) in v.iter_mut().zip(c) {
                *vi -= proj * ci;
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-6 {
            v.iter_mut().for_each(|x| *x /= norm);
            cols.push(v);
        }
    }
    let mut m = Mat::zeros(n, p);
    for (j, c) in cols.iter().enumerate() {
        for (i, &x) in c.iter().enumerate() {
            m.set(i, j, x);
        }
    }
    m
}

#[test]
fn lipschitz_close_to_dense_svd_on_gaussian_design() {
    let mut r = rng(3);
    let n = 50;
    let p = 100;
    let x = random_mat(&mut r, n, p, 1.0 / (n as f64).sqrt());
    // power-iterate to near-convergence as the oracle
    let mut v: Vec<f64> = (0..p).map(|_| StandardNormal.sample(&mut r)).collect();
    let mut xv = vec![0.0; n];
    let mut xtxv = vec![0.0; p];
    for _ in 0..5000 {
        x.mul_vec(&v, &mut xv);
        x.tr_mul_vec(&xv, &mut xtxv);
        let norm = dot(&xtxv, &xtxv).sqrt();
        for (vi, &wi) in v.iter_mut().zip(&xtxv) {
            *vi = wi / norm;
        }
    }
    x.mul_vec(&v, &mut xv);
    let sigma_max_sq = dot(&xv, &xv);
    let est = lipschitz_estimate(&x);
    assert!(est >= sigma_max_sq * 0.999, "underestimate: {est} < {sigma_max_sq}");
    assert!(est <= sigma_max_sq * 1.02, "overestimate: {est} vs {sigma_max_sq}");
}

#[test]
fn orthonormal_design_reduces_to_prox() {
    let mut r = rng(17);
    let (n, p) = (40, 12);
    let x = orthonormal_design(&mut r, n, p);
    let y: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut r)).collect();
    let mut vals: Vec<f64> = (0..p).map(|_| r.random_range(0.0..0.8)).collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    vals[0] += 0.1;
    let theta = PenaltyVector::new(vals).unwrap();
    let prob = Problem::new(x.clone(), y.clone(), PenaltySpec::Vector(theta.clone())).unwrap();
    let res = slope_solve(
        &prob,
        &SolverOptions {
            rel_tol: 1e-14,
            ..Default::default()
        },
    );
    let mut xty = vec![0.0; p];
    x.tr_mul_vec(&y, &mut xty);
    let direct = slope_prox(&xty, &theta).unwrap();
    for (a, b) in res.beta.iter().zip(&direct) {
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
}

#[test]
fn two_level_solve_matches_long_reference_run() {
    let mut r = rng(29);
    let (n, p) = (30, 60);
    let x = random_mat(&mut r, n, p, 1.0 / (n as f64).sqrt());
    let y: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut r)).collect();
    let pen = TwoLevelPenalty::new(0.4, 0.15, 0.2).unwrap();
    let prob = Problem::new(x, y, PenaltySpec::TwoLevel(pen)).unwrap();
    let reference = slope_solve(
        &prob,
        &SolverOptions {
            max_iters: 1_000_000,
            rel_tol: 1e-14,
            ..Default::default()
        },
    );
    let res = slope_solve(&prob, &SolverOptions::default());
    assert!(res.converged);
    assert!(
        res.final_cost <= reference.final_cost + 1e-6,
        "{} vs {}",
        res.final_cost,
        reference.final_cost
    );
}

#[test]
fn cost_sequence_nonincreasing_with_restarts() {
    let mut r = rng(31);
    let (n, p) = (25, 50);
    let x = random_mat(&mut r, n, p, 1.0 / (n as f64).sqrt());
    let y: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut r)).collect();
    let pen = TwoLevelPenalty::new(0.3, 0.1, 0.3).unwrap();
    let prob = Problem::new(x, y, PenaltySpec::TwoLevel(pen)).unwrap();
    let res = slope_solve(
        &prob,
        &SolverOptions {
            record_costs: true,
            ..Default::default()
        },
    );
    for w in res.cost_trace.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12, "cost increased: {w:?}");
    }
}

#[test]
fn fixed_point_stationarity_at_convergence() {
    let mut r = rng(43);
    let (n, p) = (40, 70);
    let x = random_mat(&mut r, n, p, 1.0 / (n as f64).sqrt());
    let y: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut r)).collect();
    let pen = TwoLevelPenalty::new(0.5, 0.2, 0.25).unwrap();
    let theta = pen.materialize(p);
    let prob = Problem::new(x.clone(), y.clone(), PenaltySpec::TwoLevel(pen)).unwrap();
    let res = slope_solve(
        &prob,
        &SolverOptions {
            rel_tol: 1e-14,
            ..Default::default()
        },
    );
    let step = 1.0 / lipschitz_estimate(&x);
    let mut resid = vec![0.0; n];
    x.mul_vec(&res.beta, &mut resid);
    for (ri, yi) in resid.iter_mut().zip(&y) {
        *ri = yi - *ri;
    }
    let mut grad_step = vec![0.0; p];
    x.tr_mul_vec(&resid, &mut grad_step);
    for (g, b) in grad_step.iter_mut().zip(&res.beta) {
        *g = b + step * *g;
    }
    let scaled: Vec<f64> = theta.values().iter().map(|t| t * step).collect();
    let back = slope_prox(&grad_step, &PenaltyVector::new(scaled).unwrap()).unwrap();
    for (a, b) in back.iter().zip(&res.beta) {
        assert!((a - b).abs() < 1e-6, "fixed point violated: {a} vs {b}");
    }
}

#[test]
fn two_level_minimizer_shares_at_most_one_nonzero_magnitude() {
    let mut r = rng(59);
    for _ in 0..10 {
        let (n, p) = (30, 45);
        let x = random_mat(&mut r, n, p, 1.0 / (n as f64).sqrt());
        let y: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut r)).collect();
        let pen = TwoLevelPenalty::new(0.6, 0.25, 0.3).unwrap();
        let prob = Problem::new(x, y, PenaltySpec::TwoLevel(pen)).unwrap();
        let res = slope_solve(&prob, &SolverOptions::default());
        let (_, nonzero_shared) = shared_magnitudes(&res.beta);
        assert!(nonzero_shared <= 1, "shared {nonzero_shared}");
    }
}
