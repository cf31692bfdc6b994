//! Experiment configuration: a TOML file and/or command-line overrides,
//! resolved into a validated [`ExperimentConfig`].

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;
use spectra_cg::solvers::{Selection, SolverKind, TolSchedule};

use crate::error::{io_err, HarnessError, Result};
use crate::synth::SynthSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveKind {
    Quadratic,
    Matcomp,
}

impl FromStr for ObjectiveKind {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadratic" => Ok(Self::Quadratic),
            "matcomp" => Ok(Self::Matcomp),
            _ => Err(HarnessError::Config(format!("unknown objective {s:?} (quadratic|matcomp)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverChoice {
    Cg(SolverKind),
    PgdOracle,
}

impl SolverChoice {
    pub fn name(&self) -> &'static str {
        match self {
            SolverChoice::Cg(k) => k.name(),
            SolverChoice::PgdOracle => "pgd-oracle",
        }
    }
}

impl FromStr for SolverChoice {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cg" => Ok(Self::Cg(SolverKind::Cg)),
            "ror-cg" => Ok(Self::Cg(SolverKind::RorCg)),
            "away-cg" => Ok(Self::Cg(SolverKind::AwayCg)),
            "pgd-oracle" => Ok(Self::PgdOracle),
            _ => Err(HarnessError::Config(format!(
                "unknown solver {s:?} (cg|ror-cg|away-cg|pgd-oracle)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    File(PathBuf),
    Synth(SynthSpec),
}

/// `theorem`, `power` (exponent 2), `power:P` or `const:X`.
pub fn parse_tol(s: &str) -> Result<TolSchedule> {
    let bad = || HarnessError::Config(format!("tolerance mode {s:?} is not theorem|power:P|const:X"));
    let num = |v: &str| v.parse::<f64>().map_err(|_| bad());
    match s.split_once(':') {
        None if s == "theorem" => Ok(TolSchedule::Theorem),
        None if s == "power" => Ok(TolSchedule::Power { xi0: None, p: 2.0 }),
        Some(("power", p)) => Ok(TolSchedule::Power { xi0: None, p: num(p)? }),
        Some(("const", x)) => Ok(TolSchedule::Constant(num(x)?)),
        _ => Err(bad()),
    }
}

pub fn parse_selection(s: &str) -> Result<Selection> {
    match s {
        "random" => Ok(Selection::Random),
        "greedy" => Ok(Selection::Greedy),
        _ => Err(HarnessError::Config(format!("unknown selection {s:?} (random|greedy)"))),
    }
}

/// Comma-separated list, e.g. `cg,ror-cg` or `1,2,3`.
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<T>().map_err(|_| HarnessError::Config(format!("cannot parse {p:?} in {s:?}"))))
        .collect()
}

/// Unresolved settings: every key optional. Used both for the TOML file
/// and for command-line overrides.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub objective: Option<String>,
    pub solvers: Option<Vec<String>>,
    pub data: Option<PathBuf>,
    /// `d1,d2,rank,n,noise`.
    pub synth: Option<String>,
    pub theta: Option<f64>,
    pub iters: Option<usize>,
    pub seeds: Option<Vec<u64>>,
    pub selection: Option<String>,
    pub line_search: Option<bool>,
    pub tol: Option<String>,
    pub subsample: Option<f64>,
    pub out: Option<PathBuf>,
    /// Quadratic instance: dimension, rank of the target, its smallest eigenvalue.
    pub dim: Option<usize>,
    pub rank: Option<usize>,
    pub lambda_min: Option<f64>,
    /// Smoothness modulus attached to the matrix-completion objective.
    pub beta: Option<f64>,
    /// Seed for instance generation and ratings subsampling.
    pub instance_seed: Option<u64>,
    pub trace_every: Option<usize>,
    pub record_gap: Option<bool>,
}

impl RawConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    /// Keys set in `other` win.
    pub fn overlay(self, other: RawConfig) -> RawConfig {
        macro_rules! pick {
            ($($f:ident),*) => { RawConfig { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(
            objective, solvers, data, synth, theta, iters, seeds, selection, line_search, tol,
            subsample, out, dim, rank, lambda_min, beta, instance_seed, trace_every, record_gap
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub objective: ObjectiveKind,
    pub solvers: Vec<SolverChoice>,
    /// Matrix completion only.
    pub data: Option<DataSource>,
    pub theta: Option<f64>,
    pub iters: usize,
    pub seeds: Vec<u64>,
    pub selection: Selection,
    pub line_search: bool,
    pub tol: TolSchedule,
    pub subsample: f64,
    pub out: PathBuf,
    pub dim: usize,
    pub rank: usize,
    pub lambda_min: f64,
    pub beta: Option<f64>,
    pub instance_seed: u64,
    pub trace_every: usize,
    pub record_gap: bool,
}

impl TryFrom<RawConfig> for ExperimentConfig {
    type Error = HarnessError;

    fn try_from(raw: RawConfig) -> Result<Self> {
        let objective = raw.objective.as_deref().unwrap_or("quadratic").parse()?;
        let solvers = match raw.solvers {
            Some(list) => list.iter().map(|s| s.parse()).collect::<Result<Vec<SolverChoice>>>()?,
            None => vec![SolverChoice::Cg(SolverKind::Cg), SolverChoice::Cg(SolverKind::RorCg)],
        };
        let data = match (raw.data, raw.synth) {
            (Some(_), Some(_)) => {
                return Err(HarnessError::Config("give either a data file or a synthetic spec, not both".into()))
            }
            (Some(p), None) => Some(DataSource::File(p)),
            (None, Some(s)) => Some(DataSource::Synth(s.parse()?)),
            (None, None) => None,
        };
        let cfg = ExperimentConfig {
            objective,
            solvers,
            data,
            theta: raw.theta,
            iters: raw.iters.unwrap_or(100),
            seeds: raw.seeds.unwrap_or_else(|| vec![0]),
            selection: parse_selection(raw.selection.as_deref().unwrap_or("random"))?,
            line_search: raw.line_search.unwrap_or(false),
            tol: raw.tol.as_deref().map(parse_tol).transpose()?.unwrap_or_default(),
            subsample: raw.subsample.unwrap_or(1.0),
            out: raw.out.unwrap_or_else(|| PathBuf::from("out")),
            dim: raw.dim.unwrap_or(40),
            rank: raw.rank.unwrap_or(3),
            lambda_min: raw.lambda_min.unwrap_or(0.1),
            beta: raw.beta,
            instance_seed: raw.instance_seed.unwrap_or(0),
            trace_every: raw.trace_every.unwrap_or(1),
            record_gap: raw.record_gap.unwrap_or(true),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(HarnessError::Config(m));
        if self.iters == 0 {
            return err("iters must be at least 1".into());
        }
        if self.trace_every == 0 {
            return err("trace_every must be at least 1".into());
        }
        if self.solvers.is_empty() {
            return err("no solvers selected".into());
        }
        if self.seeds.is_empty() {
            return err("no seeds given".into());
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(s) = self.solvers.iter().find(|s| !seen.insert(s.name())) {
            return err(format!("solver {} listed twice", s.name()));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(s) = self.seeds.iter().find(|s| !seen.insert(**s)) {
            return err(format!("seed {s} listed twice"));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return err(format!("subsample must lie in (0, 1], got {}", self.subsample));
        }
        if let Some(b) = self.beta {
            if !(b > 0.0 && b.is_finite()) {
                return err(format!("beta must be positive, got {b}"));
            }
        }
        match self.objective {
            ObjectiveKind::Matcomp => {
                if self.data.is_none() {
                    return err("matcomp needs a data file or a synthetic spec".into());
                }
                match self.theta {
                    Some(t) if t > 0.0 && t.is_finite() => {}
                    Some(t) => return err(format!("theta must be positive, got {t}")),
                    None => return err("matcomp needs theta".into()),
                }
            }
            ObjectiveKind::Quadratic => {
                if self.data.is_some() {
                    return err("the quadratic objective takes no data source".into());
                }
                if self.beta.is_some() {
                    return err("beta is fixed to 1 for the quadratic objective".into());
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tol_modes() {
        assert_eq!(parse_tol("theorem").unwrap(), TolSchedule::Theorem);
        assert_eq!(parse_tol("power:1.5").unwrap(), TolSchedule::Power { xi0: None, p: 1.5 });
        assert_eq!(parse_tol("const:0.01").unwrap(), TolSchedule::Constant(0.01));
        assert!(parse_tol("const").is_err());
        assert!(parse_tol("power:x").is_err());
    }

    #[test]
    fn defaults_resolve() {
        let c = ExperimentConfig::try_from(RawConfig::default()).unwrap();
        assert_eq!(c.objective, ObjectiveKind::Quadratic);
        assert_eq!(c.seeds, vec![0]);
        assert_eq!(c.solvers.len(), 2);
    }

    #[test]
    fn overlay_prefers_overrides() {
        let base = RawConfig::from_toml_str("iters = 5\nseeds = [1, 2]\n").unwrap();
        let cli = RawConfig { iters: Some(7), ..Default::default() };
        let c = ExperimentConfig::try_from(base.overlay(cli)).unwrap();
        assert_eq!((c.iters, c.seeds), (7, vec![1, 2]));
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(RawConfig::from_toml_str("itres = 5").is_err());
        let cases = [
            "iters = 0",
            "subsample = 0.0",
            "objective = \"matcomp\"\nsynth = \"4,4,1,8,0\"",
            "objective = \"matcomp\"\ntheta = 1.0",
            "synth = \"4,4,1,8,0\"",
            "solvers = [\"cg\", \"cg\"]",
            "solvers = [\"sgd\"]",
            "seeds = []",
        ];
        for case in cases {
            let raw = RawConfig::from_toml_str(case).unwrap();
            assert!(ExperimentConfig::try_from(raw).is_err(), "{case}");
        }
    }
}
