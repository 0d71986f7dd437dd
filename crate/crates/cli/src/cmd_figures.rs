//! The figures subcommand: batch-reproduces the plot data files at desk
//! scale (or full scale with --scale full).

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use slope2::sim::*;
use slope2::tradeoff::*;

use crate::args::{Args, Spec};
use crate::io::{fmt_num, write_csv, ManifestTimer};
use crate::CliError;

pub const SPEC: Spec = Spec {
    valued: &["out-dir", "seed", "scale", "threads"],
    switches: &[],
};

struct Scale {
    u_points: usize,
    sim_p: usize,
    sim_reps: usize,
    sigmas: Vec<f64>,
}

pub fn cmd_figures(args: &Args) -> Result<(), CliError> {
    let timer = ManifestTimer::new("figures", args.manifest_params(), None);
    let dir = PathBuf::from(args.require("out-dir").map_err(CliError::Usage)?);
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Failed(format!("cannot create {}: {e}", dir.display())))?;
    let seed = args.get_u64("seed").map_err(CliError::Usage)?.unwrap_or(20_240_801);
    let scale = match args.get("scale").unwrap_or("desk") {
        "desk" => Scale {
            u_points: 9,
            sim_p: 100,
            sim_reps: 3,
            sigmas: vec![0.1, 0.5, 1.0],
        },
        "full" => Scale {
            u_points: 19,
            sim_p: 500,
            sim_reps: 10,
            sigmas: vec![0.1, 0.3, 0.5, 1.0, 2.0],
        },
        other => return Err(CliError::Usage(format!("unknown scale '{other}' (desk|full)"))),
    };

    let mut outputs = vec![];
    for &(eps, delta) in &[(0.2, 0.3), (0.5, 0.3), (0.1, 0.5)] {
        outputs.push(tradeoff_file(&dir, eps, delta, scale.u_points)?);
    }
    for &(eps, delta) in &[(0.2, 0.3), (0.5, 0.3), (0.5, 0.5)] {
        outputs.push(constant_prior_file(&dir, eps, delta, scale.u_points)?);
    }
    outputs.push(vary_file(&dir, true)?);
    outputs.push(vary_file(&dir, false)?);
    outputs.push(tuning_file(&dir, &scale, seed)?);
    timer.write(&outputs).map_err(CliError::Failed)?;
    for p in &outputs {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

// LASSO vs 2-level trade-off and zero-thresholds over all priors.
fn tradeoff_file(dir: &Path, eps: f64, delta: f64, n_u: usize) -> Result<PathBuf, CliError> {
    let us: Vec<f64> = (0..n_u).map(|k| 0.05 + 0.9 * k as f64 / (n_u - 1) as f64).collect();
    let rows: Vec<Vec<String>> = us
        .par_iter()
        .filter_map(|&u| {
            let (ql, al) = match (q_lasso(u, eps, delta), lasso_zero_threshold(u, eps, delta)) {
                (Ok(q), Ok(a)) => (q, a),
                _ => (f64::NAN, f64::NAN),
            };
            let two = q_two_level(u, eps, delta).ok()?;
            Some(vec![
                fmt_num(u),
                fmt_num(ql),
                fmt_num(al),
                fmt_num(two.min_fdp),
                fmt_num(two.alpha_star),
                fmt_num(1.0 - eps),
            ])
        })
        .collect();
    let path = dir.join(format!("tradeoff_eps{eps}_delta{delta}.csv"));
    write_csv(
        &path,
        &["u", "q_lasso", "alpha_lasso", "q_two_level", "alpha_two_level", "fdp_ceiling"],
        &rows,
    )
    .map_err(CliError::Failed)?;
    Ok(path)
}

// Fixed constant-or-nothing prior: LASSO vs 2-level threshold and MSE.
fn constant_prior_file(dir: &Path, eps: f64, delta: f64, n_u: usize) -> Result<PathBuf, CliError> {
    let t_value = 5.0;
    let us: Vec<f64> = (0..n_u).map(|k| 0.05 + 0.9 * k as f64 / (n_u - 1) as f64).collect();
    let grid = SearchGrid::default_for(0.0, 6.0);
    let rows: Vec<Vec<String>> = us
        .par_iter()
        .filter_map(|&u| {
            let point = constant_prior_max_zero_threshold(t_value, eps, delta, u, &grid).ok()?;
            let lasso = constant_prior_lasso_threshold(eps, delta, u).unwrap_or(f64::NAN);
            Some(vec![
                fmt_num(u),
                fmt_num(point.point.min_fdp),
                fmt_num(point.point.alpha_star),
                fmt_num(lasso),
                fmt_num(point.t),
                fmt_num(point.tau),
                fmt_num(point.mse),
            ])
        })
        .collect();
    let path = dir.join(format!("fixed_prior_T5_eps{eps}_delta{delta}.csv"));
    write_csv(
        &path,
        &["u", "min_fdp", "alpha_two_level", "alpha_lasso", "t", "tau", "mse"],
        &rows,
    )
    .map_err(CliError::Failed)?;
    Ok(path)
}

// FDP and MSE at fixed u = 0.5 while one of (eps, delta) varies.
fn vary_file(dir: &Path, vary_eps: bool) -> Result<PathBuf, CliError> {
    let t_value = 5.0;
    let u = 0.5;
    let grid = SearchGrid::default_for(0.0, 6.0);
    let values: Vec<f64> = (1..=9).map(|k| 0.1 * k as f64).collect();
    let rows: Vec<Vec<String>> = values
        .par_iter()
        .filter_map(|&v| {
            let (eps, delta) = if vary_eps { (v, 0.5) } else { (0.5, v) };
            let point = constant_prior_max_zero_threshold(t_value, eps, delta, u, &grid).ok()?;
            let lasso = constant_prior_lasso_threshold(eps, delta, u).unwrap_or(f64::NAN);
            Some(vec![
                fmt_num(if vary_eps { eps } else { delta }),
                fmt_num(point.point.min_fdp),
                fmt_num(point.point.alpha_star),
                fmt_num(lasso),
                fmt_num(point.mse),
            ])
        })
        .collect();
    let (name, var) = if vary_eps {
        ("fixed_prior_vary_eps.csv", "eps")
    } else {
        ("fixed_prior_vary_delta.csv", "delta")
    };
    let path = dir.join(name);
    write_csv(
        &path,
        &[var, "min_fdp", "alpha_two_level", "alpha_lasso", "mse"],
        &rows,
    )
    .map_err(CliError::Failed)?;
    Ok(path)
}

// MSE of tuned penalties across design/prior cells and noise levels.
fn tuning_file(dir: &Path, scale: &Scale, seed: u64) -> Result<PathBuf, CliError> {
    let p = scale.sim_p;
    let n = (0.9 * p as f64).round() as usize;
    let eps = 0.5;
    let mut rows = vec![];
    let grids = TuneGrids::default();
    for &tail in &[Tail::Gaussian, Tail::Student3] {
        for &rho in &[0.0, 0.8] {
            for &tied in &[false, true] {
                for &sigma in &scale.sigmas {
                    let design = DesignSpec {
                        n,
                        p,
                        tail,
                        corr_rho: rho,
                    };
                    let prior = if tied {
                        PriorKind::Tied(5.0)
                    } else {
                        PriorKind::Uniform(5.0)
                    };
                    let cells: Vec<(f64, f64, f64, f64)> = (0..scale.sim_reps)
                        .into_par_iter()
                        .map(|r| {
                            let (x, beta, y) =
                                replicate_data(&design, eps, prior, sigma, seed, r);
                            let two = mse_tune_two_level(&x, &y, &beta, &grids)
                                .map_err(|e| CliError::Failed(e.to_string()))?;
                            let bh = mse_tune_scale(&x, &y, &beta, &grids, |g| PenaltyKind::Bh {
                                gamma: g,
                                q: 0.5,
                            })
                            .map_err(|e| CliError::Failed(e.to_string()))?;
                            let unif =
                                mse_tune_scale(&x, &y, &beta, &grids, |g| PenaltyKind::Uniform {
                                    gamma: g,
                                })
                                .map_err(|e| CliError::Failed(e.to_string()))?;
                            Ok((two.best.mse, two.best_lasso.mse, bh.1, unif.1))
                        })
                        .collect::<Result<Vec<_>, CliError>>()?;
                    let mean = |f: &dyn Fn(&(f64, f64, f64, f64)) -> f64| {
                        cells.iter().map(f).sum::<f64>() / cells.len() as f64
                    };
                    rows.push(vec![
                        format!("{tail:?}").to_lowercase(),
                        fmt_num(rho),
                        (if tied { "tied" } else { "uniform" }).to_string(),
                        fmt_num(sigma),
                        fmt_num(mean(&|c| c.1)),
                        fmt_num(mean(&|c| c.0)),
                        fmt_num(mean(&|c| c.2)),
                        fmt_num(mean(&|c| c.3)),
                    ]);
                }
            }
        }
    }
    let path = dir.join("tuned_mse_grid.csv");
    write_csv(
        &path,
        &[
            "tail",
            "corr_rho",
            "prior",
            "sigma",
            "mse_lasso",
            "mse_two_level",
            "mse_bh",
            "mse_uniform",
        ],
        &rows,
    )
    .map_err(CliError::Failed)?;
    Ok(path)
}
