//! The simulate and mse-tune subcommands.

use std::path::PathBuf;

use rayon::prelude::*;
use slope2::sim::*;

use crate::args::{Args, Spec};
use crate::config::StudyConfig;
use crate::io::{fmt_num, write_csv, ManifestTimer};
use crate::CliError;

pub const SPEC: Spec = Spec {
    valued: &["config", "out", "threads"],
    switches: &[],
};

fn load_config(args: &Args) -> Result<StudyConfig, CliError> {
    let path = PathBuf::from(args.require("config").map_err(CliError::Usage)?);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    StudyConfig::parse(&text).map_err(CliError::Usage)
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

pub fn cmd_simulate(args: &Args) -> Result<(), CliError> {
    let cfg = load_config(args)?;
    let timer = ManifestTimer::new("simulate", args.manifest_params(), Some(cfg.seed));
    let study = cfg.study().map_err(CliError::Usage)?;
    let records = run_study(&study).map_err(|e| CliError::Failed(e.to_string()))?;
    let mut rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            vec![
                r.replicate.to_string(),
                fmt_num(r.mse),
                fmt_num(r.tpp),
                fmt_num(r.fdp),
                r.iters.to_string(),
                r.converged.to_string(),
            ]
        })
        .collect();
    let mses: Vec<f64> = records.iter().map(|r| r.mse).collect();
    let tpps: Vec<f64> = records.iter().map(|r| r.tpp).collect();
    let fdps: Vec<f64> = records.iter().map(|r| r.fdp).collect();
    for (label, stat) in [("mean", 0usize), ("sd", 1usize)] {
        let pick = |pair: (f64, f64)| if stat == 0 { pair.0 } else { pair.1 };
        rows.push(vec![
            label.into(),
            fmt_num(pick(mean_sd(&mses))),
            fmt_num(pick(mean_sd(&tpps))),
            fmt_num(pick(mean_sd(&fdps))),
            String::new(),
            String::new(),
        ]);
    }
    let out = PathBuf::from(args.require("out").map_err(CliError::Usage)?);
    write_csv(&out, &["replicate", "mse", "tpp", "fdp", "iters", "converged"], &rows)
        .map_err(CliError::Failed)?;
    timer.write(&[out]).map_err(CliError::Failed)?;
    Ok(())
}

pub fn cmd_mse_tune(args: &Args) -> Result<(), CliError> {
    let cfg = load_config(args)?;
    let timer = ManifestTimer::new("mse-tune", args.manifest_params(), Some(cfg.seed));
    let design = cfg.design().map_err(CliError::Usage)?;
    let grids = cfg.tune_grids();
    let prior_kind = cfg.prior_kind();
    let outcomes: Result<Vec<(usize, TuneResult)>, CliError> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let (x, beta, y) = replicate_data(&design, cfg.eps, prior_kind, cfg.sigma, cfg.seed, r);
            let tuned = mse_tune_two_level(&x, &y, &beta, &grids)
                .map_err(|e| CliError::Failed(e.to_string()))?;
            Ok((r, tuned))
        })
        .collect();
    let outcomes = outcomes?;
    let mut rows = vec![];
    let mut best_mses = vec![];
    let mut lasso_mses = vec![];
    for (r, tuned) in &outcomes {
        best_mses.push(tuned.best.mse);
        lasso_mses.push(tuned.best_lasso.mse);
        rows.push(vec![
            r.to_string(),
            fmt_num(tuned.best.a_ratio),
            fmt_num(tuned.best.s),
            fmt_num(tuned.best.gamma),
            fmt_num(tuned.best.lam1),
            fmt_num(tuned.best.lam2),
            fmt_num(tuned.best.mse),
            fmt_num(tuned.best_lasso.gamma),
            fmt_num(tuned.best_lasso.mse),
            tuned.solves.to_string(),
        ]);
    }
    let (bm, bs) = mean_sd(&best_mses);
    let (lm, ls) = mean_sd(&lasso_mses);
    rows.push(vec![
        "mean".into(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        fmt_num(bm),
        String::new(),
        fmt_num(lm),
        String::new(),
    ]);
    rows.push(vec![
        "sd".into(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        fmt_num(bs),
        String::new(),
        fmt_num(ls),
        String::new(),
    ]);
    let out = PathBuf::from(args.require("out").map_err(CliError::Usage)?);
    write_csv(
        &out,
        &[
            "replicate",
            "a_ratio",
            "s",
            "gamma",
            "lam1",
            "lam2",
            "mse",
            "lasso_gamma",
            "lasso_mse",
            "solves",
        ],
        &rows,
    )
    .map_err(CliError::Failed)?;
    timer.write(&[out]).map_err(CliError::Failed)?;
    Ok(())
}
