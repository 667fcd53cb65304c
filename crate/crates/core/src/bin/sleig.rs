use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sleig::bench::{
    cache_path_for, calibrate_cached, catalog_labels, parse_constant, parse_eps_list, parse_seeds,
    render, run_study_with, run_validation, Format, SolverKind, StudyConfig,
};
use sleig::qkernel::{kernel_budget, BUDGET_ENV};
use sleig::Error;

#[derive(Parser)]
#[command(
    name = "sleig",
    version,
    about = "Smallest Sturm-Liouville eigenvalue: classical and simulated quantum solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver at a single accuracy.
    Solve(RunArgs),
    /// Run a solver over a list of accuracies and seeds, with slope fits.
    Study(RunArgs),
    /// Estimate the overlap constant and the coarse dimension n0.
    Calibrate(CalibrateArgs),
    /// Cross-check statevector and analytic phase-estimation distributions.
    Validate,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value = "worst")]
    solver: String,
    #[arg(long, default_value = "constant:0.5")]
    potential: String,
    /// Comma-separated accuracies, strictly decreasing.
    #[arg(long, default_value = "1e-3")]
    eps: String,
    /// Comma list or half-open range `a..b`.
    #[arg(long, default_value = "")]
    seeds: String,
    /// Constant override `name=value`; repeatable.
    #[arg(long = "const", value_name = "NAME=VALUE")]
    constants: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long, default_value_t = 1)]
    repetitions: u32,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Corpus potentials; defaults to the built-in catalog. Repeatable.
    #[arg(long)]
    potential: Vec<String>,
    #[arg(long = "const", value_name = "NAME=VALUE")]
    constants: Vec<String>,
    /// Any path in the output directory; the cache is written beside it.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build_config(a: &RunArgs) -> sleig::Result<(StudyConfig, Format)> {
    let mut cfg = StudyConfig::new(
        a.solver.parse::<SolverKind>()?,
        a.potential.clone(),
        parse_eps_list(&a.eps)?,
        parse_seeds(&a.seeds)?,
    );
    for c in &a.constants {
        let (k, v) = parse_constant(c)?;
        cfg.constants.insert(k, v);
    }
    cfg.repetitions = a.repetitions;
    Ok((cfg, a.format.parse()?))
}

fn run(a: &RunArgs, single: bool) -> sleig::Result<()> {
    let (cfg, format) = build_config(a)?;
    if single && cfg.eps_list.len() != 1 {
        return Err(Error::Config(
            "solve takes exactly one eps; use study for a list".into(),
        ));
    }
    let (_, constants) = cfg.validate()?;
    let calibration = if cfg.solver == SolverKind::Power {
        let cache = cache_path_for(a.out.as_deref());
        let (rec, hit) = calibrate_cached(&catalog_labels(), &constants, Some(&cache))?;
        if !hit {
            eprintln!(
                "calibrated n0 = {} (c_hat = {:.6}), cached in {}",
                rec.calibration.n0,
                rec.calibration.c_hat,
                cache.display()
            );
        }
        Some(rec.calibration)
    } else {
        None
    };
    let report = run_study_with(&cfg, calibration)?;
    let text = render(&report, format)?;
    match &a.out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    if !single {
        for f in &report.fits {
            eprintln!(
                "slope {:<16} {:+.4} ({} points)",
                f.quantity, f.slope, f.points
            );
        }
    }
    Ok(())
}

fn calibrate(a: &CalibrateArgs) -> sleig::Result<()> {
    let corpus = if a.potential.is_empty() {
        catalog_labels()
    } else {
        a.potential.clone()
    };
    let mut constants = sleig::classical::Constants::default();
    for c in &a.constants {
        let (k, v) = parse_constant(c)?;
        constants.set(&k, v)?;
    }
    let cache = cache_path_for(a.out.as_deref());
    let (rec, hit) = calibrate_cached(&corpus, &constants, Some(&cache))?;
    println!("key={}", rec.key);
    println!("corpus={}", rec.corpus.join(";"));
    println!("c_hat={}", rec.calibration.c_hat);
    println!("n0={}", rec.calibration.n0);
    println!(
        "cache={} ({})",
        cache.display(),
        if hit { "hit" } else { "written" }
    );
    Ok(())
}

fn validate() -> sleig::Result<bool> {
    let cases = run_validation()?;
    println!("m,n,potential,total_variation,state_norm");
    let mut ok = true;
    for c in &cases {
        println!(
            "{},{},{},{:.3e},{:.15}",
            c.m, c.n, c.potential, c.total_variation, c.state_norm
        );
        ok &= c.total_variation <= 1e-10 && (c.state_norm - 1.0).abs() <= 1e-10;
    }
    eprintln!(
        "{} cases, {}",
        cases.len(),
        if ok { "all within 1e-10" } else { "MISMATCH" }
    );
    Ok(ok)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Spec(_) | Error::Domain { .. } | Error::Infeasible(_) => 2,
        Error::Budget { .. } => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve(a) => run(a, true).map(|_| true),
        Command::Study(a) => run(a, false).map(|_| true),
        Command::Calibrate(a) => calibrate(a).map(|_| true),
        Command::Validate => validate(),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::Budget { .. }) {
                eprintln!(
                    "(budget {} kernel evaluations; raise it with {BUDGET_ENV})",
                    kernel_budget()
                );
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
