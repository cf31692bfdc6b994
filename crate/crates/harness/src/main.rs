use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, ValueEnum};
use spectra_harness::config::parse_list;
use spectra_harness::{run_experiment, ExperimentConfig, RawConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

/// Runs conditional-gradient solvers over the spectrahedron and writes
/// per-seed CSV traces plus a summary. Command-line flags override keys
/// from `--config`.
#[derive(Debug, Parser)]
#[command(name = "spectra-bench", version)]
struct Cli {
    /// TOML file with any of the keys below (snake_case).
    #[arg(long)]
    config: Option<PathBuf>,
    /// quadratic | matcomp
    #[arg(long)]
    objective: Option<String>,
    /// Comma-separated: cg, ror-cg, away-cg, pgd-oracle.
    #[arg(long)]
    solver: Option<String>,
    /// Ratings file (user<TAB>item<TAB>rating<TAB>timestamp).
    #[arg(long, conflicts_with = "synth")]
    data: Option<PathBuf>,
    /// Synthetic matrix completion: d1,d2,rank,n,noise.
    #[arg(long)]
    synth: Option<String>,
    /// Nuclear-norm radius for matcomp.
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    iters: Option<usize>,
    /// Comma-separated seeds.
    #[arg(long)]
    seeds: Option<String>,
    /// random | greedy
    #[arg(long)]
    selection: Option<String>,
    #[arg(long, value_enum)]
    line_search: Option<Switch>,
    /// theorem | power:P | const:X
    #[arg(long)]
    tol: Option<String>,
    /// Fraction of ratings kept, in (0, 1].
    #[arg(long)]
    subsample: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Quadratic instance dimension.
    #[arg(long)]
    dim: Option<usize>,
    /// Quadratic target rank.
    #[arg(long)]
    rank: Option<usize>,
    /// Smallest eigenvalue of the quadratic target.
    #[arg(long)]
    lambda_min: Option<f64>,
    /// Smoothness modulus for matcomp.
    #[arg(long)]
    beta: Option<f64>,
    /// Seed for instance generation and subsampling.
    #[arg(long)]
    instance_seed: Option<u64>,
    #[arg(long)]
    trace_every: Option<usize>,
}

impl Cli {
    fn overrides(&self) -> anyhow::Result<RawConfig> {
        Ok(RawConfig {
            objective: self.objective.clone(),
            solvers: self.solver.as_deref().map(parse_list::<String>).transpose()?,
            data: self.data.clone(),
            synth: self.synth.clone(),
            theta: self.theta,
            iters: self.iters,
            seeds: self.seeds.as_deref().map(parse_list::<u64>).transpose()?,
            selection: self.selection.clone(),
            line_search: self.line_search.map(|s| matches!(s, Switch::On)),
            tol: self.tol.clone(),
            subsample: self.subsample,
            out: self.out.clone(),
            dim: self.dim,
            rank: self.rank,
            lambda_min: self.lambda_min,
            beta: self.beta,
            instance_seed: self.instance_seed,
            trace_every: self.trace_every,
            record_gap: None,
        })
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let base = match &cli.config {
        Some(p) => RawConfig::from_file(p)?,
        None => RawConfig::default(),
    };
    let cfg = ExperimentConfig::try_from(base.overlay(cli.overrides()?))?;
    let out = run_experiment(&cfg).context("experiment failed")?;
    for f in &out.trace_files {
        println!("{}", f.display());
    }
    println!("{}", out.summary.display());
    if let Some(f_star) = out.reference {
        println!("reference f_star = {f_star}");
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
