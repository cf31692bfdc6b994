//! Multi-seed orchestration and CSV output.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use spectra_cg::objectives::{LiftedMatComp, ObjectiveParams};
use spectra_cg::oracle::run_projected_gradient;
use spectra_cg::solvers::{run_solver, SolverConfig};
use spectra_cg::{Objective, TraceRecord};

use crate::config::{DataSource, ExperimentConfig, ObjectiveKind, SolverChoice};
use crate::error::{csv_err, io_err, Result};
use crate::ratings::parse_ratings;
use crate::synth::{quadratic_instance, synth_matcomp};

pub const TRACE_HEADER: [&str; 9] =
    ["iter", "elapsed_ms", "objective", "fw_gap", "k", "eta", "eta_tilde", "xi", "ev_iters"];
pub const SUMMARY_HEADER: [&str; 4] = ["iter", "solver", "median_objective", "mean_objective"];

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    /// One per (solver, seed), in configuration order.
    pub trace_files: Vec<PathBuf>,
    pub summary: PathBuf,
    /// Final projected-gradient value, when `pgd-oracle` was among the solvers.
    pub reference: Option<f64>,
}

pub fn trace_file_name(solver: &str, seed: u64) -> String {
    format!("trace_{solver}_seed{seed}.csv")
}

/// Builds the objective described by the configuration. Instance
/// generation and ratings subsampling use `instance_seed`, so every solver
/// and seed sees the same instance.
pub fn build_objective(cfg: &ExperimentConfig) -> Result<Box<dyn Objective>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.instance_seed);
    match cfg.objective {
        ObjectiveKind::Quadratic => Ok(Box::new(quadratic_instance(cfg.dim, cfg.rank, cfg.lambda_min, &mut rng)?)),
        ObjectiveKind::Matcomp => {
            let theta = cfg.theta.unwrap_or(1.0);
            let data = match &cfg.data {
                Some(DataSource::File(p)) => parse_ratings(p, cfg.subsample, cfg.instance_seed, theta)?,
                Some(DataSource::Synth(spec)) => synth_matcomp(spec, theta, &mut rng)?.0,
                None => return Err(crate::HarnessError::Config("matcomp needs a data source".into())),
            };
            let mut obj = LiftedMatComp::new(data)?;
            if let Some(beta) = cfg.beta {
                obj = obj.with_params(ObjectiveParams::new(0.0, beta)?)?;
            }
            Ok(Box::new(obj))
        }
    }
}

fn solver_config(cfg: &ExperimentConfig, seed: u64) -> SolverConfig {
    SolverConfig {
        max_iters: cfg.iters,
        seed,
        selection: cfg.selection,
        line_search: cfg.line_search,
        trace_every: cfg.trace_every,
        tol: cfg.tol,
        record_gap: cfg.record_gap,
        ..SolverConfig::default()
    }
}

/// Runs every (solver, seed) pair in parallel, writes one trace per pair
/// and then `summary.csv`. The projected-gradient oracle ignores the seed,
/// so it runs once and its trace is written under every seed; its final
/// value also goes to `reference.csv`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out).map_err(io_err(&cfg.out))?;
    let obj = build_objective(cfg)?;
    let obj: &dyn Objective = obj.as_ref();

    let oracle = if cfg.solvers.contains(&SolverChoice::PgdOracle) {
        let tr = run_projected_gradient(obj, cfg.iters, None)?;
        let kept: Vec<TraceRecord> = tr
            .records
            .into_iter()
            .filter(|r| r.iter % cfg.trace_every == 0 || r.iter == cfg.iters)
            .collect();
        Some((kept, tr.final_value))
    } else {
        None
    };

    let tasks: Vec<(SolverChoice, u64)> = cfg
        .solvers
        .iter()
        .flat_map(|&s| cfg.seeds.iter().map(move |&seed| (s, seed)))
        .collect();
    let results: Vec<(SolverChoice, PathBuf, Vec<TraceRecord>)> = tasks
        .par_iter()
        .map(|&(choice, seed)| {
            let records = match choice {
                SolverChoice::Cg(kind) => run_solver(kind, obj, &solver_config(cfg, seed))?.records,
                SolverChoice::PgdOracle => oracle.as_ref().map(|o| o.0.clone()).unwrap_or_default(),
            };
            let path = cfg.out.join(trace_file_name(choice.name(), seed));
            write_trace(&path, &records)?;
            Ok((choice, path, records))
        })
        .collect::<Result<_>>()?;

    let summary = cfg.out.join("summary.csv");
    write_summary(&summary, &results)?;
    let reference = oracle.map(|o| o.1);
    if let Some(f_star) = reference {
        let path = cfg.out.join("reference.csv");
        let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
        w.write_record(["f_star"]).map_err(csv_err(&path))?;
        w.write_record([f_star.to_string()]).map_err(csv_err(&path))?;
        w.flush().map_err(io_err(&path))?;
    }
    Ok(ExperimentOutput {
        trace_files: results.into_iter().map(|r| r.1).collect(),
        summary,
        reference,
    })
}

pub fn write_trace(path: &Path, records: &[TraceRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(TRACE_HEADER).map_err(csv_err(path))?;
    for r in records {
        w.write_record([
            r.iter.to_string(),
            r.elapsed_ms.to_string(),
            r.objective.to_string(),
            r.fw_gap.to_string(),
            r.k.to_string(),
            r.eta.to_string(),
            r.eta_tilde.to_string(),
            r.xi.to_string(),
            r.ev_iters.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Median of a non-empty slice; the mean of the two middle values for even
/// lengths.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn write_summary(path: &Path, results: &[(SolverChoice, PathBuf, Vec<TraceRecord>)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(SUMMARY_HEADER).map_err(csv_err(path))?;
    let mut order: Vec<SolverChoice> = Vec::new();
    for (s, _, _) in results {
        if !order.contains(s) {
            order.push(*s);
        }
    }
    for solver in order {
        let mut by_iter: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for (_, _, records) in results.iter().filter(|r| r.0 == solver) {
            for r in records {
                by_iter.entry(r.iter).or_default().push(r.objective);
            }
        }
        for (iter, values) in by_iter {
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            w.write_record([
                iter.to_string(),
                solver.name().to_string(),
                median(&values).to_string(),
                mean.to_string(),
            ])
            .map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_examples() {
        assert_eq!(median(&[3.0]), 3.0);
        assert_eq!(median(&[4.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn names() {
        assert_eq!(trace_file_name("ror-cg", 3), "trace_ror-cg_seed3.csv");
    }
}
