use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use schur_dilation::calculus::{contour_error, ContourQuadrature, SectorFunction};
use schur_dilation::SchurSemigroup;
use schur_dilation_cli::config::{Format, MarkovMode, RunConfig, Suite};
use schur_dilation_cli::gen::{generate, Style};
use schur_dilation_cli::parallel::Exec;
use schur_dilation_cli::report::write_records;
use schur_dilation_cli::Checks;
use serde_json::json;

#[derive(Parser)]
#[command(name = "schur-dilation", version, about = "Verify Gaussian dilations of Schur multiplier semigroups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites from a config file and emit report records.
    Verify(VerifyArgs),
    /// Compare the contour-quadrature functional calculus with the entrywise oracle.
    Calculus(CalculusArgs),
    /// Emit a reproducible space descriptor.
    Gen(GenArgs),
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// Suite to run; overrides the config.
    #[arg(value_enum)]
    suite_pos: Option<Suite>,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum)]
    suite: Option<Suite>,
    #[arg(long, value_enum)]
    mode: Option<MarkovMode>,
    #[arg(long = "mc.samples")]
    mc_samples: Option<u64>,
    #[arg(long = "mc.seed")]
    mc_seed: Option<u64>,
    #[arg(long = "grid.step")]
    grid_step: Option<f64>,
    #[arg(long = "grid.horizon")]
    grid_horizon: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Spread Monte Carlo chunks over threads; results are unchanged.
    #[arg(long)]
    parallel: bool,
}

#[derive(clap::Args)]
struct CalculusArgs {
    /// A built-in name or `rational:<num coeffs>/<den coeffs>` (ascending, comma-separated).
    #[arg(long, default_value = "z/(1+z)^2")]
    function: String,
    #[arg(long, default_value_t = 0.75 * std::f64::consts::PI)]
    theta: f64,
    #[arg(long, default_value_t = 400)]
    nodes: usize,
    #[arg(long, default_value_t = 30.0)]
    truncation: f64,
    /// Space to use; a random one is generated when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "random")]
    style: Style,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn sink(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn verify(args: VerifyArgs) -> Result<bool> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(s) = args.suite.or(args.suite_pos) {
        cfg.suite = s;
    }
    if let Some(m) = args.mode {
        cfg.mode = m;
    }
    if let Some(n) = args.mc_samples {
        cfg.mc.samples = n;
    }
    if let Some(s) = args.mc_seed {
        cfg.mc.root_seed = s;
    }
    if let Some(s) = args.grid_step {
        cfg.grid.step = s;
    }
    if let Some(h) = args.grid_horizon {
        cfg.grid.horizon = h;
    }
    if let Some(f) = args.format {
        cfg.output.format = f;
    }
    if let Some(p) = args.out {
        cfg.output.path = Some(p);
    }
    let exec = if args.parallel { Exec::Parallel } else { Exec::Sequential };
    let suite = cfg.suite;
    let (format, out) = (cfg.output.format, cfg.output.path.clone());
    let checks = Checks::new(cfg, exec)?;
    let records = checks.run(suite)?;
    write_records(&records, format, &mut sink(out.as_ref())?)?;
    let mut ok = true;
    for r in records.iter().filter(|r| !r.pass) {
        ok = false;
        eprintln!("FAILED {}", serde_json::to_string(r)?);
    }
    Ok(ok)
}

fn calculus(args: CalculusArgs) -> Result<bool> {
    let emb = match &args.config {
        Some(p) => RunConfig::load(p)?.embedding()?,
        None => generate(args.n, 2, args.seed, Style::Random)?.build()?,
    };
    let sg = SchurSemigroup::new(emb);
    let f = SectorFunction::parse(&args.function)?;
    let q = ContourQuadrature::new(args.theta, args.nodes, args.truncation)?;
    let err = contour_error(&sg, &f, &q)?;
    let tol = schur_dilation_cli::config::Tolerances::default().calculus;
    let report = json!({
        "function": f.name(),
        "max_err_vs_oracle": err,
        "nodes": q.nodes,
        "theta": q.theta,
        "L": q.truncation,
        "pass": err <= tol,
    });
    let mut out = sink(args.out.as_ref())?;
    serde_json::to_writer_pretty(&mut out, &report)?;
    writeln!(out)?;
    Ok(err <= tol)
}

fn gen(args: GenArgs) -> Result<bool> {
    let desc = generate(args.n, args.d, args.seed, args.style)?;
    let mut out = sink(args.out.as_ref())?;
    serde_json::to_writer_pretty(&mut out, &desc)?;
    writeln!(out)?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => verify(a),
        Command::Calculus(a) => calculus(a),
        Command::Gen(a) => gen(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
