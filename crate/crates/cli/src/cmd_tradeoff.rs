//! The tradeoff subcommand: all-priors, fixed, constant, lasso, dt-limit.

use std::path::PathBuf;

use rayon::prelude::*;
use slope2::asymptotics::DiscretePrior;
use slope2::tradeoff::*;

use crate::args::{parse_grid, parse_prior, Args, Spec};
use crate::io::{fmt_num, write_csv, write_stdout, ManifestTimer};
use crate::CliError;

pub const SPEC: Spec = Spec {
    valued: &[
        "eps", "delta", "u", "u-grid", "t-value", "prior", "sigma", "out", "bisect-tol", "threads",
    ],
    switches: &[],
};

pub fn cmd_tradeoff(args: &Args) -> Result<(), CliError> {
    let mode = args
        .positional
        .first()
        .cloned()
        .ok_or_else(|| CliError::Usage("tradeoff needs a mode: all-priors|fixed|constant|lasso|dt-limit".into()))?;
    let timer = ManifestTimer::new("tradeoff", args.manifest_params(), None);
    match mode.as_str() {
        "dt-limit" => {
            let eps = args.require_f64("eps").map_err(CliError::Usage)?;
            let delta = args.require_f64("delta").map_err(CliError::Usage)?;
            let u = dt_limit(delta, eps).map_err(|e| CliError::Usage(e.to_string()))?;
            write_stdout(&format!("{}\n", fmt_num(u)));
            Ok(())
        }
        "lasso" => {
            let eps = args.require_f64("eps").map_err(CliError::Usage)?;
            let delta = args.require_f64("delta").map_err(CliError::Usage)?;
            let us = u_grid(args)?;
            let mut rows = vec![];
            for &u in &us {
                match (lasso_zero_threshold(u, eps, delta), q_lasso(u, eps, delta)) {
                    (Ok(alpha), Ok(q)) => {
                        rows.push(vec![fmt_num(u), fmt_num(q), fmt_num(alpha)]);
                    }
                    _ => eprintln!("u={u}: above the LASSO power limit, skipped"),
                }
            }
            if rows.is_empty() {
                return Err(CliError::Failed("no u in the LASSO domain".into()));
            }
            emit(args, timer, &["u", "q_lasso", "alpha_lasso"], rows)
        }
        "all-priors" => {
            let eps = args.require_f64("eps").map_err(CliError::Usage)?;
            let delta = args.require_f64("delta").map_err(CliError::Usage)?;
            let us = u_grid(args)?;
            let points: Vec<(f64, Result<TradeoffPoint, TradeoffError>)> = us
                .par_iter()
                .map(|&u| (u, q_two_level(u, eps, delta)))
                .collect();
            let mut rows = vec![];
            for (u, point) in points {
                match point {
                    Ok(p) => {
                        let w = p.argmax;
                        rows.push(vec![
                            fmt_num(u),
                            fmt_num(p.min_fdp),
                            fmt_num(p.alpha_star),
                            fmt_num(w.a1),
                            fmt_num(w.a2),
                            fmt_num(w.s),
                            fmt_num(w.t1),
                            fmt_num(w.t2),
                            fmt_num(w.rho),
                        ]);
                    }
                    Err(e) => eprintln!("u={u}: {e}"),
                }
            }
            if rows.is_empty() {
                return Err(CliError::Failed("no feasible trade-off points".into()));
            }
            emit(
                args,
                timer,
                &["u", "min_fdp", "alpha_star", "a1", "a2", "s", "t1", "t2", "rho"],
                rows,
            )
        }
        "constant" => {
            let eps = args.require_f64("eps").map_err(CliError::Usage)?;
            let delta = args.require_f64("delta").map_err(CliError::Usage)?;
            let t_value = args.require_f64("t-value").map_err(CliError::Usage)?;
            let us = u_grid(args)?;
            let grid = SearchGrid::default_for(0.0, 6.0);
            let points: Vec<(f64, Result<ConstantPriorPoint, TradeoffError>)> = us
                .par_iter()
                .map(|&u| {
                    let mut g = grid.clone();
                    g.bisect_tol = args.get_f64("bisect-tol").ok().flatten().unwrap_or(1e-4);
                    (u, constant_prior_max_zero_threshold(t_value, eps, delta, u, &g))
                })
                .collect();
            let mut rows = vec![];
            for (u, point) in points {
                match point {
                    Ok(p) => {
                        let w = p.point.argmax;
                        let lasso = constant_prior_lasso_threshold(eps, delta, u);
                        rows.push(vec![
                            fmt_num(u),
                            fmt_num(p.point.min_fdp),
                            fmt_num(p.point.alpha_star),
                            fmt_num(w.a1),
                            fmt_num(w.a2),
                            fmt_num(w.s),
                            fmt_num(p.t),
                            fmt_num(p.tau),
                            fmt_num(p.mse),
                            fmt_num(lasso.unwrap_or(f64::NAN)),
                        ]);
                    }
                    Err(e) => eprintln!("u={u}: {e}"),
                }
            }
            if rows.is_empty() {
                return Err(CliError::Failed("no feasible trade-off points".into()));
            }
            emit(
                args,
                timer,
                &[
                    "u", "min_fdp", "alpha_star", "a1", "a2", "s", "t", "tau", "mse",
                    "alpha_lasso",
                ],
                rows,
            )
        }
        "fixed" => {
            let delta = args.require_f64("delta").map_err(CliError::Usage)?;
            let sigma = args.require_f64("sigma").map_err(CliError::Usage)?;
            let atoms =
                parse_prior(args.require("prior").map_err(CliError::Usage)?).map_err(CliError::Usage)?;
            let prior = DiscretePrior::new(atoms).map_err(|e| CliError::Usage(e.to_string()))?;
            let us = if args.get("u").is_some() {
                vec![args.require_f64("u").map_err(CliError::Usage)?]
            } else {
                u_grid(args)?
            };
            let grid = SearchGrid::default_for(0.0, 6.0);
            let points: Vec<(f64, Result<FixedPriorResult, TradeoffError>)> = us
                .par_iter()
                .map(|&u| (u, fixed_prior_max_zero_threshold(&prior, u, delta, sigma, &grid)))
                .collect();
            let mut rows = vec![];
            for (u, point) in points {
                match point {
                    Ok(r) => {
                        let (la, lt, ll) = match &r.lasso {
                            Some(l) => (l.alpha, l.tau, l.lambda.unwrap_or(f64::NAN)),
                            None => (f64::NAN, f64::NAN, f64::NAN),
                        };
                        let (a2, a1, s, tau, h, fdp, lam1, lam2) = match &r.two_level {
                            Some(t) => (
                                t.alpha2,
                                t.a1,
                                t.s,
                                t.sol.tau,
                                t.sol.h,
                                t.min_fdp,
                                t.lambda.as_ref().map(|l| l.lam1).unwrap_or(f64::NAN),
                                t.lambda.as_ref().map(|l| l.lam2).unwrap_or(f64::NAN),
                            ),
                            None => (
                                f64::NAN,
                                f64::NAN,
                                f64::NAN,
                                f64::NAN,
                                f64::NAN,
                                f64::NAN,
                                f64::NAN,
                                f64::NAN,
                            ),
                        };
                        rows.push(vec![
                            fmt_num(u),
                            fmt_num(la),
                            fmt_num(lt),
                            fmt_num(ll),
                            (if r.boundary { "true" } else { "false" }).into(),
                            fmt_num(a2),
                            fmt_num(a1),
                            fmt_num(s),
                            fmt_num(tau),
                            fmt_num(h),
                            fmt_num(fdp),
                            fmt_num(lam1),
                            fmt_num(lam2),
                        ]);
                    }
                    Err(e) => eprintln!("u={u}: {e}"),
                }
            }
            if rows.is_empty() {
                return Err(CliError::Failed("no fixed-prior points".into()));
            }
            emit(
                args,
                timer,
                &[
                    "u",
                    "lasso_alpha",
                    "lasso_tau",
                    "lasso_lambda",
                    "boundary",
                    "alpha2",
                    "a1",
                    "s",
                    "tau",
                    "h",
                    "min_fdp",
                    "lambda1",
                    "lambda2",
                ],
                rows,
            )
        }
        other => Err(CliError::Usage(format!("unknown tradeoff mode '{other}'"))),
    }
}

fn u_grid(args: &Args) -> Result<Vec<f64>, CliError> {
    parse_grid(args.require("u-grid").map_err(CliError::Usage)?).map_err(CliError::Usage)
}

fn emit(
    args: &Args,
    timer: ManifestTimer,
    header: &[&str],
    rows: Vec<Vec<String>>,
) -> Result<(), CliError> {
    match args.get("out") {
        None => {
            let mut text = header.join(",");
            text.push('\n');
            for row in rows {
                text.push_str(&row.join(","));
                text.push('\n');
            }
            write_stdout(&text);
        }
        Some(path) => {
            let path = PathBuf::from(path);
            write_csv(&path, header, &rows).map_err(CliError::Failed)?;
            timer.write(&[path]).map_err(CliError::Failed)?;
        }
    }
    Ok(())
}
