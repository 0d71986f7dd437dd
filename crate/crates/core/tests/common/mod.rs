//! Shared oracle helpers for the integration tests: adaptive quadrature and
//! a reference limiting scalar function, kept independent of the library's
//! closed-form evaluation paths.

#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

fn simpson(fa: f64, fm: f64, fb: f64, width: f64) -> f64 {
    width / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    adaptive_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
        + adaptive_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of f over [a, b]. Pre-splits into panels so
/// integrands that vanish at symmetric probe points cannot fool the error
/// estimate into stopping early.
pub fn adaptive_quadrature<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let panels = 16;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = a + (b - a) * k as f64 / panels as f64;
        let hi = a + (b - a) * (k + 1) as f64 / panels as f64;
        let m = 0.5 * (lo + hi);
        let (fa, fm, fb) = (f(lo), f(m), f(hi));
        let whole = simpson(fa, fm, fb, hi - lo);
        total += adaptive_step(&f, lo, fa, hi, fb, m, fm, whole, tol / panels as f64, 44);
    }
    total
}

fn soft(x: f64, theta: f64) -> f64 {
    let m = x.abs() - theta;
    if m <= 0.0 {
        0.0
    } else {
        x.signum() * m
    }
}

/// Reference limiting scalar function built directly from the effective
/// penalty bands, valid for any h.
pub fn eta_reference(x: f64, a1: f64, a2: f64, h: f64) -> f64 {
    let ax = x.abs();
    let aeff = if ax > a1 + h {
        a1
    } else if ax >= a2 + h {
        ax - h
    } else {
        a2
    };
    soft(x, aeff)
}

/// Quadrature oracle for E[(eta(t+Z) - t)^2].
pub fn risk_oracle(t: f64, a1: f64, a2: f64, h: f64) -> f64 {
    let span = 14.0 + t.abs() + a1 + h.abs();
    adaptive_quadrature(
        |z| {
            let e = eta_reference(t + z, a1, a2, h) - t;
            e * e * slope2::gauss::normal_pdf(z)
        },
        -span,
        span,
        1e-12,
    )
}

pub fn mean_and_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
