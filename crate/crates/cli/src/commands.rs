//! The prox, solve, and se subcommands.

use std::path::PathBuf;

use serde_json::json;
use slope2::asymptotics::{state_evolution_tau, DiscretePrior, NormalizedTwoLevel, SeOutcome};
use slope2::mat::Mat;
use slope2::prox::{slope_prox, two_level_prox, PenaltyVector, TwoLevelPenalty};
use slope2::sim::{build_penalty, PenaltyKind};
use slope2::solver::{slope_solve, PenaltySpec, Problem, SolverOptions};

use crate::args::{parse_list, parse_prior, Args, Spec};
use crate::io::{fmt_num, write_csv, write_json, write_stdout, ManifestTimer};
use crate::CliError;

pub const PROX_SPEC: Spec = Spec {
    valued: &["v", "theta", "lam1", "lam2", "split", "out", "threads"],
    switches: &[],
};

pub fn cmd_prox(args: &Args) -> Result<(), CliError> {
    let timer = ManifestTimer::new("prox", args.manifest_params(), None);
    let v = parse_list(args.require("v").map_err(CliError::Usage)?).map_err(CliError::Usage)?;
    let out = if let Some(theta_text) = args.get("theta") {
        let theta = parse_list(theta_text).map_err(CliError::Usage)?;
        let theta = PenaltyVector::new(theta).map_err(|e| CliError::Usage(e.to_string()))?;
        slope_prox(&v, &theta).map_err(|e| CliError::Usage(e.to_string()))?
    } else {
        let lam1 = args.require_f64("lam1").map_err(CliError::Usage)?;
        let lam2 = args.require_f64("lam2").map_err(CliError::Usage)?;
        let s = args.require_f64("split").map_err(CliError::Usage)?;
        let pen = TwoLevelPenalty::new(lam1, lam2, s).map_err(|e| CliError::Usage(e.to_string()))?;
        two_level_prox(&v, &pen)
    };
    let line = out
        .iter()
        .map(|x| format!("{x}"))
        .collect::<Vec<_>>()
        .join(",");
    match args.get("out") {
        None => write_stdout(&format!("{line}\n")),
        Some(path) => {
            let path = PathBuf::from(path);
            std::fs::write(&path, format!("{line}\n"))
                .map_err(|e| CliError::Failed(format!("cannot write {}: {e}", path.display())))?;
            timer.write(&[path]).map_err(CliError::Failed)?;
        }
    }
    Ok(())
}

pub const SOLVE_SPEC: Spec = Spec {
    valued: &["x", "y", "penalty", "out", "max-iters", "rel-tol", "threads"],
    switches: &["no-accel"],
};

fn parse_penalty_spec(text: &str, p: usize) -> Result<PenaltySpec, String> {
    let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
    match kind {
        "none" => Ok(PenaltySpec::None),
        "lasso" => {
            let lam: f64 = rest.parse().map_err(|_| format!("bad lasso level '{rest}'"))?;
            Ok(PenaltySpec::Vector(
                build_penalty(&PenaltyKind::Lasso(lam), p).map_err(|e| e.to_string())?,
            ))
        }
        "two-level" => {
            let vals = parse_list(rest)?;
            if vals.len() != 3 {
                return Err("two-level penalty needs lam1,lam2,s".into());
            }
            let pen = TwoLevelPenalty::new(vals[0], vals[1], vals[2]).map_err(|e| e.to_string())?;
            Ok(PenaltySpec::TwoLevel(pen))
        }
        "bh" => {
            let vals = parse_list(rest)?;
            if vals.len() != 2 {
                return Err("bh penalty needs gamma,q".into());
            }
            Ok(PenaltySpec::Vector(
                build_penalty(
                    &PenaltyKind::Bh {
                        gamma: vals[0],
                        q: vals[1],
                    },
                    p,
                )
                .map_err(|e| e.to_string())?,
            ))
        }
        "uniform" => {
            let gamma: f64 = rest.parse().map_err(|_| format!("bad uniform level '{rest}'"))?;
            Ok(PenaltySpec::Vector(
                build_penalty(&PenaltyKind::Uniform { gamma }, p).map_err(|e| e.to_string())?,
            ))
        }
        other => Err(format!(
            "unknown penalty '{other}' (none|lasso:L|two-level:L1,L2,S|bh:G,Q|uniform:G)"
        )),
    }
}

pub fn cmd_solve(args: &Args) -> Result<(), CliError> {
    let timer = ManifestTimer::new("solve", args.manifest_params(), None);
    let x_path = PathBuf::from(args.require("x").map_err(CliError::Usage)?);
    let y_path = PathBuf::from(args.require("y").map_err(CliError::Usage)?);
    let out_path = PathBuf::from(args.require("out").map_err(CliError::Usage)?);
    let x_rows = crate::io::read_numeric_csv(&x_path).map_err(CliError::Usage)?;
    let y_rows = crate::io::read_numeric_csv(&y_path).map_err(CliError::Usage)?;
    let x = Mat::from_rows(&x_rows);
    let y: Vec<f64> = y_rows.iter().map(|r| r[0]).collect();
    let penalty = parse_penalty_spec(args.require("penalty").map_err(CliError::Usage)?, x.n_cols())
        .map_err(CliError::Usage)?;
    let prob = Problem::new(x, y, penalty).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut opts = SolverOptions::default();
    if let Some(m) = args.get_usize("max-iters").map_err(CliError::Usage)? {
        opts.max_iters = m;
    }
    if let Some(t) = args.get_f64("rel-tol").map_err(CliError::Usage)? {
        opts.rel_tol = t;
    }
    opts.use_acceleration = !args.has("no-accel");
    let res = slope_solve(&prob, &opts);
    let rows: Vec<Vec<String>> = res.beta.iter().map(|b| vec![fmt_num(*b)]).collect();
    write_csv(&out_path, &["beta"], &rows).map_err(CliError::Failed)?;
    eprintln!(
        "solved: iters={} converged={} cost={}",
        res.iters,
        res.converged,
        fmt_num(res.final_cost)
    );
    timer.write(&[out_path]).map_err(CliError::Failed)?;
    Ok(())
}

pub const SE_SPEC: Spec = Spec {
    valued: &["prior", "a1", "a2", "s", "delta", "sigma", "out", "threads"],
    switches: &[],
};

pub fn cmd_se(args: &Args) -> Result<(), CliError> {
    let timer = ManifestTimer::new("se", args.manifest_params(), None);
    let atoms = parse_prior(args.require("prior").map_err(CliError::Usage)?).map_err(CliError::Usage)?;
    let prior = DiscretePrior::new(atoms).map_err(|e| CliError::Usage(e.to_string()))?;
    let a1 = args.require_f64("a1").map_err(CliError::Usage)?;
    let a2 = args.require_f64("a2").map_err(CliError::Usage)?;
    let s = args.require_f64("s").map_err(CliError::Usage)?;
    let delta = args.require_f64("delta").map_err(CliError::Usage)?;
    let sigma = args.require_f64("sigma").map_err(CliError::Usage)?;
    let pen = NormalizedTwoLevel::new(a1, a2, s).map_err(|e| CliError::Usage(e.to_string()))?;
    let outcome =
        state_evolution_tau(&prior, &pen, delta, sigma).map_err(|e| CliError::Usage(e.to_string()))?;
    let record = match outcome {
        SeOutcome::Feasible(sol) => json!({
            "tau": sol.tau,
            "h": sol.h,
            "q1": sol.q1,
            "q2": sol.q2,
            "zero_threshold": sol.zero_threshold,
            "feasible": true,
        }),
        SeOutcome::Infeasible => json!({ "feasible": false }),
    };
    match args.get("out") {
        None => write_stdout(&format!("{}\n", serde_json::to_string_pretty(&record).unwrap())),
        Some(path) => {
            let path = PathBuf::from(path);
            write_json(&path, &record).map_err(CliError::Failed)?;
            timer.write(&[path]).map_err(CliError::Failed)?;
        }
    }
    Ok(())
}
