mod common;

use common::{adaptive_quadrature, eta_reference, mean_and_sd, risk_oracle, rng};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use slope2::asymptotics::*;
use slope2::gauss::{abs_shift_cdf, normal_cdf, normal_pdf};
use slope2::prox::{shared_magnitudes, two_level_prox, TwoLevelPenalty};

fn bernoulli_half() -> DiscretePrior {
    DiscretePrior::two_point(1.0, 0.5).unwrap()
}

// Independent h solver: adaptive quadrature of the prior's |.|-cdf plus a
// plain bisection, no shared code with the library path.
fn shared_height_oracle(prior: &DiscretePrior, pen: &NormalizedTwoLevel) -> f64 {
    let s_of = |x: f64| -> f64 {
        prior
            .atoms()
            .iter()
            .map(|&(v, p)| p * abs_shift_cdf(v, x))
            .sum()
    };
    let rhs = (1.0 - pen.s) * (pen.a1 - pen.a2);
    let integral = |h: f64| {
        let lo = (h + pen.a2).max(0.0);
        let hi = (h + pen.a1).max(0.0);
        if hi <= lo {
            0.0
        } else {
            adaptive_quadrature(&s_of, lo, hi, 1e-13)
        }
    };
    let (mut lo, mut hi) = (-pen.a1 - prior.max_abs_value() - 10.0, prior.max_abs_value() + 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if integral(mid) - rhs > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn shared_height_matches_quadrature_oracle() {
    let cases = [
        (DiscretePrior::point_mass_zero(), 2.0, 1.0, 0.25),
        (bernoulli_half(), 2.0, 1.0, 0.15),
        (bernoulli_half(), 2.0, 1.0, 0.35),
        (
            DiscretePrior::new(vec![(0.0, 0.7), (0.9, 0.1), (2.7, 0.2)]).unwrap(),
            1.6,
            0.8,
            0.4,
        ),
    ];
    for (prior, a1, a2, s) in cases {
        let pen = NormalizedTwoLevel::new(a1, a2, s).unwrap();
        let (h, q1, q2) = shared_height(&prior, &pen).unwrap();
        let oracle = shared_height_oracle(&prior, &pen);
        assert!((h - oracle).abs() < 1e-9, "h={h} oracle={oracle}");
        assert!(q2 <= 1.0 - s + 1e-12 && 1.0 - s <= q1 + 1e-12);
    }
}

#[test]
fn shared_height_residual_is_tight_and_brackets() {
    let mut r = rng(5);
    for _ in 0..50 {
        let a2: f64 = r.random_range(0.2..2.0);
        let a1: f64 = a2 + r.random_range(0.1..2.5);
        let s: f64 = r.random_range(0.05..0.9);
        let t: f64 = r.random_range(0.0..3.0);
        let eps: f64 = r.random_range(0.05..0.9);
        let prior = DiscretePrior::two_point(t, eps).unwrap();
        let pen = NormalizedTwoLevel::new(a1, a2, s).unwrap();
        let (h, _, _) = shared_height(&prior, &pen).unwrap();
        let residual = |hh: f64| {
            prior.abs_cdf_integral(slope2::gauss::Interval::new(hh + a2, hh + a1))
                - (1.0 - s) * (a1 - a2)
        };
        assert!(residual(h).abs() <= 1e-10, "residual {}", residual(h));
        assert!(residual(h - 1e-6) < 0.0 && residual(h + 1e-6) > 0.0);
    }
}

#[test]
fn finite_dimensional_prox_reproduces_the_shared_height() {
    let prior = bernoulli_half();
    let pen = NormalizedTwoLevel::new(2.0, 1.0, 0.15).unwrap();
    let (h, _, _) = shared_height(&prior, &pen).unwrap();
    assert!(h > 0.0);
    let tl = TwoLevelPenalty::new(2.0, 1.0, 0.15).unwrap();
    let mut r = rng(77);
    let p = 10_000;
    let mut values = vec![];
    for _ in 0..20 {
        let v: Vec<f64> = (0..p)
            .map(|_| {
                let signal = if r.random::<f64>() < 0.5 { 1.0 } else { 0.0 };
                let z: f64 = StandardNormal.sample(&mut r);
                signal + z
            })
            .collect();
        let out = two_level_prox(&v, &tl);
        let (set, nonzero) = shared_magnitudes(&out);
        assert!(nonzero <= 1);
        if let Some(&m) = set.iter().find(|&&m| m != 0.0) {
            values.push(m);
        }
    }
    assert!(values.len() >= 19, "flat band almost always present");
    let (mean, sd) = mean_and_sd(&values);
    let se = sd / (values.len() as f64).sqrt();
    assert!(
        (mean - h).abs() < 4.0 * se.max(2e-3),
        "empirical {mean} vs asymptotic {h} (se {se})"
    );
}

#[test]
fn limiting_scalar_tracks_finite_dimensional_prox() {
    // mean squared gap between the coordinatewise prox output and the
    // limiting scalar function shrinks with p
    let prior = bernoulli_half();
    let pen = NormalizedTwoLevel::new(2.0, 1.0, 0.15).unwrap();
    let (h, _, _) = shared_height(&prior, &pen).unwrap();
    let tl = TwoLevelPenalty::new(2.0, 1.0, 0.15).unwrap();
    let mut r = rng(99);
    let mut gaps = vec![];
    for &p in &[1000usize, 100_000] {
        let v: Vec<f64> = (0..p)
            .map(|_| {
                let signal = if r.random::<f64>() < 0.5 { 1.0 } else { 0.0 };
                let z: f64 = StandardNormal.sample(&mut r);
                signal + z
            })
            .collect();
        let out = two_level_prox(&v, &tl);
        let gap = v
            .iter()
            .zip(&out)
            .map(|(&x, &o)| {
                let d = o - limiting_scalar(x, &pen, h);
                d * d
            })
            .sum::<f64>()
            / p as f64;
        gaps.push(gap);
    }
    assert!(gaps[1] < 1e-2, "gap at p=1e5: {}", gaps[1]);
    assert!(gaps[1] < gaps[0], "gap should shrink with p: {gaps:?}");
}

#[test]
fn effective_penalty_identity_and_continuity() {
    let prior = DiscretePrior::new(vec![(0.0, 0.6), (1.3, 0.4)]).unwrap();
    let pen = NormalizedTwoLevel::new(1.9, 0.9, 0.2).unwrap();
    let (h, q1, q2) = shared_height(&prior, &pen).unwrap();
    for k in 0..1000 {
        let x = -6.0 + 12.0 * k as f64 / 999.0;
        let aeff = effective_penalty(x, &pen, h, q1, q2, &prior);
        let soft = x.signum() * (x.abs() - aeff).max(0.0);
        let eta = limiting_scalar(x, &pen, h);
        assert!((soft - eta).abs() < 1e-10, "x={x} soft={soft} eta={eta}");
    }
    // band edge: both branches give a2
    let edge = h + pen.a2;
    let aeff = effective_penalty(edge, &pen, h, q1, q2, &prior);
    assert!((aeff - pen.a2).abs() < 1e-10);
    // deep tail band: a1 branch
    assert_eq!(effective_penalty(h + pen.a1 + 3.0, &pen, h, q1, q2, &prior), pen.a1);
}

#[test]
fn risk_closed_form_matches_quadrature() {
    let mut r = rng(13);
    for case in 0..100 {
        let a2: f64 = r.random_range(0.1..2.5);
        let a1: f64 = a2 + r.random_range(0.01..3.0);
        let pen = NormalizedTwoLevel::new(a1, a2, 0.5).unwrap();
        let h: f64 = r.random_range(-1.5..2.5);
        let t: f64 = r.random_range(-4.0..4.0);
        let closed = risk_e(t, &pen, h);
        let quad = risk_oracle(t, a1, a2, h);
        assert!(
            (closed - quad).abs() < 1e-8,
            "case {case}: t={t} pen=({a1},{a2}) h={h}: closed={closed} quad={quad}"
        );
    }
}

#[test]
fn risk_collapses_to_soft_threshold_risk_at_equal_levels() {
    let mut r = rng(19);
    for _ in 0..40 {
        let alpha: f64 = r.random_range(0.1..3.0);
        let t: f64 = r.random_range(-4.0..4.0);
        let h: f64 = r.random_range(-1.0..2.0);
        let pen = NormalizedTwoLevel::new(alpha, alpha, 0.5).unwrap();
        let collapsed = risk_e(t, &pen, h);
        let direct = soft_risk(t, alpha);
        assert!((collapsed - direct).abs() < 1e-12);
        let quad = adaptive_quadrature(
            |z| {
                let e = (t + z).signum() * ((t + z).abs() - alpha).max(0.0) - t;
                e * e * normal_pdf(z)
            },
            -16.0 - t.abs(),
            16.0 + t.abs(),
            1e-12,
        );
        assert!((collapsed - quad).abs() < 1e-8, "collapsed={collapsed} quad={quad}");
    }
}

#[test]
fn risk_mirror_symmetry_under_monte_carlo() {
    // E(t) and the mirrored construction agree for the symmetric band
    let pen = NormalizedTwoLevel::new(2.0, 1.0, 0.15).unwrap();
    let prior = bernoulli_half();
    let (h, _, _) = shared_height(&prior, &pen).unwrap();
    let t = 1.0;
    let mut r = rng(21);
    let n = 10_000_000usize;
    let mut acc = 0.0;
    for _ in 0..n {
        let z: f64 = StandardNormal.sample(&mut r);
        let e = eta_reference(t + z, pen.a1, pen.a2, h) - t;
        acc += e * e;
    }
    let mc = acc / n as f64;
    let closed = risk_e(t, &pen, h);
    assert!((mc - closed).abs() < 1e-3, "mc={mc} closed={closed}");
}

#[test]
fn null_soft_threshold_risk_formula() {
    // E(soft(Z; alpha))^2 = 2 (1+alpha^2) Phi(-alpha) - 2 alpha phi(alpha)
    for &alpha in &[0.3, 0.8, 1.5, 2.4] {
        let formula = 2.0 * ((1.0 + alpha * alpha) * normal_cdf(-alpha) - alpha * normal_pdf(alpha));
        assert!((soft_risk(0.0, alpha) - formula).abs() < 1e-12);
        let quad = adaptive_quadrature(
            |z| {
                let e = z.signum() * (z.abs() - alpha).max(0.0);
                e * e * normal_pdf(z)
            },
            -16.0,
            16.0,
            1e-12,
        );
        assert!((formula - quad).abs() < 1e-8);
    }
}

#[test]
fn f_functional_matches_monte_carlo_on_three_point_prior() {
    let pen = NormalizedTwoLevel::new(1.8, 0.9, 0.25).unwrap();
    let prior = DiscretePrior::new(vec![(0.0, 0.8), (0.7, 0.12), (2.1, 0.08)]).unwrap();
    let f = f_functional(&prior, &pen).unwrap();
    let (h, _, _) = shared_height(&prior, &pen).unwrap();
    let mut r = rng(33);
    let n = 10_000_000usize;
    let mut acc = 0.0;
    for _ in 0..n {
        let u: f64 = r.random();
        let pi = if u < 0.8 {
            0.0
        } else if u < 0.92 {
            0.7
        } else {
            2.1
        };
        let z: f64 = StandardNormal.sample(&mut r);
        let e = eta_reference(pi + z, pen.a1, pen.a2, h) - pi;
        acc += e * e;
    }
    let mc = acc / n as f64;
    assert!((mc - f).abs() < 1.5e-3, "mc={mc} f={f}");
}

#[test]
fn state_evolution_fixed_point_residual_is_small() {
    let prior = DiscretePrior::two_point(5.0, 0.2).unwrap();
    let pen = NormalizedTwoLevel::new(2.0, 1.0, 0.15).unwrap();
    let (delta, sigma) = (0.3, 1.0);
    let sol = state_evolution_tau(&prior, &pen, delta, sigma)
        .unwrap()
        .feasible()
        .cloned()
        .expect("feasible configuration");
    let pi = prior.scaled(1.0 / sol.tau);
    let f = f_functional(&pi, &pen).unwrap();
    let residual = sol.tau * sol.tau - sigma * sigma - sol.tau * sol.tau * f / delta;
    assert!(
        residual.abs() <= 1e-8 * sol.tau * sol.tau,
        "residual {residual} at tau {}",
        sol.tau
    );
    assert!(sol.q2 <= 1.0 - pen.s && 1.0 - pen.s <= sol.q1);
    assert_eq!(sol.zero_threshold, if sol.h > 0.0 { pen.a2 } else { pen.a1 });
}

#[test]
fn limiting_scalar_is_odd_monotone_and_1_lipschitz() {
    let mut r = rng(47);
    for _ in 0..30 {
        let a2: f64 = r.random_range(0.1..2.0);
        let a1: f64 = a2 + r.random_range(0.05..2.0);
        let h: f64 = r.random_range(-1.0..2.0);
        let pen = NormalizedTwoLevel::new(a1, a2, 0.4).unwrap();
        let n = 4001;
        let xs: Vec<f64> = (0..n).map(|k| -8.0 + 16.0 * k as f64 / (n - 1) as f64).collect();
        let mut prev = f64::NEG_INFINITY;
        for (k, &x) in xs.iter().enumerate() {
            let v = limiting_scalar(x, &pen, h);
            let odd = limiting_scalar(-x, &pen, h);
            assert!((v + odd).abs() < 1e-12, "odd symmetry at {x}");
            assert!(v >= prev - 1e-12, "monotone at {x}");
            if k > 0 {
                let dx = xs[k] - xs[k - 1];
                assert!(v - prev <= dx + 1e-12, "1-Lipschitz at {x}");
            }
            prev = v;
        }
    }
}

#[test]
fn calibration_round_trips_and_matches_monte_carlo_derivative() {
    let prior = DiscretePrior::two_point(5.0, 0.2).unwrap();
    let pen = NormalizedTwoLevel::new(2.0, 1.0, 0.15).unwrap();
    let (delta, sigma) = (0.3, 1.0);
    let sol = state_evolution_tau(&prior, &pen, delta, sigma)
        .unwrap()
        .feasible()
        .cloned()
        .expect("feasible");
    let lam = calibrate(&pen, &sol, &prior, delta).unwrap();
    assert_eq!(lam.s, pen.s);
    let back = normalize_two_level(&lam, &sol, &prior, delta, &pen).unwrap();
    assert!((back.a1 - pen.a1).abs() < 1e-8);
    assert!((back.a2 - pen.a2).abs() < 1e-8);

    // 1-level derivative cross-check by Monte Carlo
    let alpha = 1.4;
    let tau = state_evolution_tau_one_level(&prior, alpha, delta, sigma)
        .unwrap()
        .expect("feasible");
    let pi = prior.scaled(1.0 / tau);
    let d = pi.abs_sf(alpha);
    let mut r = rng(61);
    let n = 10_000_000usize;
    let mut hits = 0usize;
    for _ in 0..n {
        let v = if r.random::<f64>() < 0.2 { 5.0 / tau } else { 0.0 };
        let z: f64 = StandardNormal.sample(&mut r);
        if (v + z).abs() > alpha {
            hits += 1;
        }
    }
    let mc = hits as f64 / n as f64;
    assert!((mc - d).abs() < 1e-3, "mc={mc} d={d}");
    let lam1 = calibrate_one_level(alpha, tau, &prior, delta).unwrap();
    assert!((lam1 - alpha * tau * (1.0 - d / delta)).abs() < 1e-12);
}
