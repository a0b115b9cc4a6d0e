//! shrinkage-lab: risk experiments for shrinkage estimators of a
//! multivariate normal mean.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure
//! (series truncation / quadrature budget), 4 verdict failure under
//! `--assert`.

mod commands;
mod fmt;
mod parse;
mod report;

use clap::{Parser, Subcommand, ValueEnum};
use shrinkage_lab::grid;
use shrinkage_lab::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "shrinkage-lab",
    version,
    about = "Shrinkage estimator experiments: phi tables, risk curves, domination checks, quasi-admissibility probes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Dimension p (>= 3)
    #[arg(long, global = true, default_value_t = 5)]
    p: u32,

    /// Estimator family, repeatable: js, positive-part, constant=C,
    /// alpha=A, li-kuo=B1, kt1=R, kt2=R
    /// (qa-check reads marginals here: js, identity, power=E, alpha=A)
    #[arg(long, global = true)]
    family: Vec<String>,

    /// Alpha sequence for converge, comma-separated (default 1,10,100,1000)
    #[arg(long, global = true)]
    alpha: Option<String>,

    /// Noncentrality grid, comma-separated (default 0,1,4,9,25)
    #[arg(long, global = true)]
    lambda_grid: Option<String>,

    /// w grid, comma-separated (default: 60-point log+linear grid on
    /// [0, 50] plus tail probes 1e2, 1e3, 1e4)
    #[arg(long, global = true)]
    w_grid: Option<String>,

    /// Monte Carlo sample count
    #[arg(long, global = true, default_value_t = 1_000_000)]
    samples: u64,

    /// Monte Carlo seed
    #[arg(long, global = true, default_value_t = 20_240_101)]
    seed: u64,

    /// Risk-margin tolerance used by verdicts
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,

    /// Output path (default: stdout)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format: csv (primary) or json (summary, includes wall clock)
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Worker threads (default: machine parallelism;
    /// SHRINKAGE_LAB_THREADS as fallback)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Turn verdict failures into exit code 4
    #[arg(long, global = true)]
    assert: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate phi and phi' over the w grid
    PhiTable,
    /// Quadrature + Monte Carlo risk per (family, lambda)
    RiskCurve,
    /// Kubokawa condition, risk margins and origin gain per family
    Dominate,
    /// Quasi-admissibility divergence probes for pseudo-Bayes marginals
    QaCheck,
    /// Sup-gap of phi_alpha to the positive part along an alpha sequence
    Converge,
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::Domain(_)
        | Error::Grid(_)
        | Error::DimensionMismatch { .. }
        | Error::UnsupportedFamily(_) => 2,
        Error::Truncation { .. } | Error::QuadratureBudget { .. } | Error::Inconclusive(_) => 3,
    }
}

fn resolve_threads(cli_threads: Option<usize>) -> Result<Option<usize>, Error> {
    if cli_threads.is_some() {
        return Ok(cli_threads);
    }
    match std::env::var("SHRINKAGE_LAB_THREADS") {
        Ok(v) => {
            let n = v.parse::<usize>().map_err(|_| {
                Error::Domain(format!("SHRINKAGE_LAB_THREADS={v:?} is not a thread count"))
            })?;
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    if cli.p < 3 {
        return Err(Error::Domain(format!("p must be >= 3, got {}", cli.p)));
    }
    let threads = resolve_threads(cli.threads)?;
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::Domain("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
    }

    let lambda_grid = match &cli.lambda_grid {
        Some(s) => parse::parse_grid(s)?,
        None => grid::default_lambda_grid(),
    };
    for &l in &lambda_grid {
        if l < 0.0 {
            return Err(Error::Domain(format!("lambda must be >= 0, got {l}")));
        }
    }
    let w_grid = match &cli.w_grid {
        Some(s) => {
            let g = parse::parse_grid(s)?;
            if g.iter().any(|&w| w < 0.0) {
                return Err(Error::Domain("w grid must be nonnegative".into()));
            }
            g
        }
        None => grid::standard_w_grid_with_tail(),
    };
    let alphas = match &cli.alpha {
        Some(s) => {
            let a = parse::parse_grid(s)?;
            for &x in &a {
                if x < 1.0 {
                    return Err(Error::Domain(format!("alpha must be >= 1, got {x}")));
                }
            }
            Some(a)
        }
        None => None,
    };

    let ctx = commands::Ctx {
        p: cli.p,
        families: cli.family.clone(),
        alphas,
        lambda_grid,
        w_grid,
        samples: cli.samples,
        seed: cli.seed,
        tol: cli.tol,
        threads,
        format: match cli.format {
            Format::Csv => "csv",
            Format::Json => "json",
        },
        assertive: cli.assert,
    };

    let bundle = match cli.command {
        Command::PhiTable => commands::phi_table(&ctx)?,
        Command::RiskCurve => commands::risk_curve(&ctx)?,
        Command::Dominate => commands::dominate(&ctx)?,
        Command::QaCheck => commands::qa_check(&ctx)?,
        Command::Converge => commands::converge(&ctx)?,
    };

    let rendered = match cli.format {
        Format::Csv => bundle.to_csv(),
        Format::Json => bundle.to_json(),
    };
    match &cli.out {
        Some(path) => std::fs::write(path, rendered)
            .map_err(|e| Error::Domain(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{rendered}"),
    }

    if cli.assert && !bundle.all_pass() {
        for v in bundle.verdicts.iter().filter(|v| !v.pass) {
            eprintln!("verdict failed: {} ({})", v.name, v.detail);
        }
        return Ok(ExitCode::from(4));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
