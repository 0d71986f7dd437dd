//! Command-line front end for the 2-level SLOPE toolkit.

mod args;
mod cmd_figures;
mod cmd_sim;
mod cmd_tradeoff;
mod commands;
mod config;
mod io;

use std::process::ExitCode;

use args::{Args, Spec};

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or inputs: usage text, exit 2.
    Usage(String),
    /// The computation could not produce its output: exit 1.
    Failed(String),
}

const USAGE: &str = "\
slope2: 2-level SLOPE estimation, asymptotics, and simulation

usage: slope2 <subcommand> [flags]

subcommands:
  prox       --v 5,-4,0.5 --theta 4,1,0.7          exact SLOPE prox
             --v ... --lam1 4 --lam2 2 --split 0.25  (2-level fast path)
  solve      --x X.csv --y y.csv --penalty two-level:4,2,0.25 --out beta.csv
             [--max-iters N --rel-tol T --no-accel]
  se         --prior 0:0.8,5:0.2 --a1 2 --a2 1 --s 0.15 --delta 0.3 --sigma 1
             [--out state.json]                     state-evolution record
  tradeoff   all-priors|fixed|constant|lasso|dt-limit
             --eps E --delta D [--u-grid lo:hi:n | --u U] [--t-value T]
             [--prior atoms --sigma S] [--out curve.csv]
  simulate   --config study.json --out results.csv
  mse-tune   --config study.json --out tuned.csv
  figures    --out-dir DIR [--scale desk|full] [--seed S]

Every file-producing run writes `<out>.manifest.json` capturing the full
invocation. All flags are explicit; no environment variables are read.
Use --threads N on any subcommand to cap the worker pool.
";

fn set_threads(args: &Args) -> Result<(), CliError> {
    if let Some(n) = args.get_usize("threads").map_err(CliError::Usage)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Failed(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn dispatch() -> Result<(), CliError> {
    let raw: Vec<String> = std::env::args().skip(1).collect();
    let Some(sub) = raw.first().cloned() else {
        return Err(CliError::Usage("no subcommand given".into()));
    };
    let rest = &raw[1..];
    let parse = |spec: &Spec| -> Result<Args, CliError> {
        let args = Args::parse(rest, spec).map_err(CliError::Usage)?;
        set_threads(&args)?;
        Ok(args)
    };
    match sub.as_str() {
        "prox" => commands::cmd_prox(&parse(&commands::PROX_SPEC)?),
        "solve" => commands::cmd_solve(&parse(&commands::SOLVE_SPEC)?),
        "se" => commands::cmd_se(&parse(&commands::SE_SPEC)?),
        "tradeoff" => cmd_tradeoff::cmd_tradeoff(&parse(&cmd_tradeoff::SPEC)?),
        "simulate" => cmd_sim::cmd_simulate(&parse(&cmd_sim::SPEC)?),
        "mse-tune" => cmd_sim::cmd_mse_tune(&parse(&cmd_sim::SPEC)?),
        "figures" => cmd_figures::cmd_figures(&parse(&cmd_figures::SPEC)?),
        "help" | "--help" | "-h" => {
            io::write_stdout(USAGE);
            Ok(())
        }
        other => Err(CliError::Usage(format!("unknown subcommand '{other}'"))),
    }
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}\n");
            eprintln!("{USAGE}");
            ExitCode::from(2)
        }
        Err(CliError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
