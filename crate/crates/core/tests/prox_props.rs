mod common;

use common::rng;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use slope2::prox::*;

fn random_vec(r: &mut impl Rng, p: usize, scale: f64) -> Vec<f64> {
    (0..p)
        .map(|_| {
            let z: f64 = StandardNormal.sample(r);
            z * scale
        })
        .collect()
}

fn random_penalty(r: &mut impl Rng, p: usize) -> PenaltyVector {
    let mut vals: Vec<f64> = (0..p).map(|_| r.random_range(0.0..3.0)).collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    if vals[0] == 0.0 {
        vals[0] = 1.0;
    }
    PenaltyVector::new(vals).unwrap()
}

fn objective(v: &[f64], theta: &PenaltyVector, b: &[f64]) -> f64 {
    let mut mags: Vec<f64> = b.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, c| c.partial_cmp(a).unwrap());
    let fit: f64 = v.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    0.5 * fit + mags.iter().zip(theta.values()).map(|(m, t)| m * t).sum::<f64>()
}

#[test]
fn two_level_matches_general_pava_exactly() {
    let mut r = rng(11);
    for case in 0..60 {
        let p = if case % 2 == 0 { 200 } else { 2 + r.random_range(0..60) };
        let v = random_vec(&mut r, p, 2.5);
        let lam2: f64 = r.random_range(0.0..1.5);
        let lam1: f64 = lam2 + r.random_range(0.0..2.0);
        let s: f64 = r.random_range(0.01..0.99);
        let Ok(pen) = TwoLevelPenalty::new(lam1.max(1e-9), lam2, s) else {
            continue;
        };
        let fast = two_level_prox(&v, &pen);
        let slow = slope_prox(&v, &pen.materialize(p)).unwrap();
        assert_eq!(fast, slow, "case {case}: fast/slow paths disagree");
    }
}

#[test]
fn prox_minimizes_the_objective_locally() {
    let mut r = rng(23);
    for case in 0..1000 {
        let p = 2 + (case % 19);
        let v = random_vec(&mut r, p, 2.0);
        let theta = random_penalty(&mut r, p);
        let out = slope_prox(&v, &theta).unwrap();
        let base = objective(&v, &theta, &out);
        for _ in 0..10_000 {
            let mut perturbed = out.clone();
            for x in &mut perturbed {
                let z: f64 = StandardNormal.sample(&mut r);
                *x += 1e-3 * z;
            }
            let other = objective(&v, &theta, &perturbed);
            assert!(
                other >= base - 1e-12,
                "case {case}: perturbation beat the prox output by {}",
                base - other
            );
        }
    }
}

#[test]
fn prox_is_nonexpansive() {
    let mut r = rng(37);
    for _ in 0..300 {
        let p = 2 + r.random_range(0..40);
        let v1 = random_vec(&mut r, p, 3.0);
        let v2 = random_vec(&mut r, p, 3.0);
        let theta = random_penalty(&mut r, p);
        let p1 = slope_prox(&v1, &theta).unwrap();
        let p2 = slope_prox(&v2, &theta).unwrap();
        let dist_in: f64 = v1.iter().zip(&v2).map(|(a, b)| (a - b) * (a - b)).sum();
        let dist_out: f64 = p1.iter().zip(&p2).map(|(a, b)| (a - b) * (a - b)).sum();
        assert!(dist_out <= dist_in * (1.0 + 1e-12) + 1e-15);
    }
}

#[test]
fn prox_preserves_magnitude_order() {
    let mut r = rng(41);
    for _ in 0..300 {
        let p = 2 + r.random_range(0..30);
        let v = random_vec(&mut r, p, 2.0);
        let theta = random_penalty(&mut r, p);
        let out = slope_prox(&v, &theta).unwrap();
        let mut idx: Vec<usize> = (0..p).collect();
        idx.sort_by(|&a, &b| v[a].abs().partial_cmp(&v[b].abs()).unwrap());
        for w in idx.windows(2) {
            assert!(
                out[w[0]].abs() <= out[w[1]].abs() + 1e-12,
                "|v| order not preserved"
            );
        }
    }
}

#[test]
fn k_level_penalties_share_at_most_k_minus_one_nonzero_magnitudes() {
    let mut r = rng(53);
    for &k in &[1usize, 2, 3, 5] {
        for _ in 0..200 {
            let p = (k + 1) + r.random_range(0..40);
            // k distinct levels, each used at least once
            let mut levels: Vec<f64> = (0..k).map(|_| r.random_range(0.05..3.0)).collect();
            levels.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let mut values: Vec<f64> = levels.clone();
            while values.len() < p {
                let pick = levels[r.random_range(0..k)];
                values.push(pick);
            }
            values.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let theta = PenaltyVector::new(values).unwrap();
            let v = random_vec(&mut r, p, 2.5);
            let out = slope_prox(&v, &theta).unwrap();
            let (_, nonzero_shared) = shared_magnitudes(&out);
            assert!(
                nonzero_shared <= k - 1,
                "k={k}: shared {nonzero_shared} nonzero magnitudes"
            );
        }
    }
}

#[test]
fn two_level_prox_output_shares_at_most_one_nonzero_magnitude() {
    let mut r = rng(67);
    for _ in 0..400 {
        let p = 2 + r.random_range(0..60);
        let v = random_vec(&mut r, p, 2.5);
        let lam2: f64 = r.random_range(0.0..1.0);
        let pen = TwoLevelPenalty::new(lam2 + r.random_range(0.001..2.0), lam2, r.random_range(0.01..0.99)).unwrap();
        let out = two_level_prox(&v, &pen);
        let (_, nonzero_shared) = shared_magnitudes(&out);
        assert!(nonzero_shared <= 1);
    }
}
