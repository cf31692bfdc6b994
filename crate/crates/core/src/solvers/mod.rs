//! Conditional-gradient solvers over the spectrahedron.
//!
//! All three solvers share the same start: a seeded random unit `x0`, then
//! `X_1 = x_1 x_1^T` with `x_1` an approximate leading eigenvector of
//! `-grad f(x0 x0^T)`. Iteration `t` uses `eta_t` and `xi_t` and produces
//! the iterate reported in trace record `t`.

mod line_search;
mod schedule;

pub use line_search::{line_search, Direction, LineSearchResult, FLAT_CURVATURE};
pub use schedule::{
    eta_at, theorem_branch1, theorem_branch2, theorem_branch3, xi_at, StepSchedule, TolSchedule,
    BRANCH1_C, BRANCH2_C34, BRANCH3_C, THEOREM_T0,
};

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{eta_tilde, max_away_step, SpectraIterate};
use crate::error::{Error, Result};
use crate::linalg::{approx_leading_ev, default_ev_max_iters, random_unit, EvResult, SymmetricOperator};
use crate::objectives::Objective;

/// Eigenvector tolerance used for the Frank-Wolfe gap certificate.
pub const GAP_XI: f64 = 1e-8;

// The gap certificate draws from its own stream so that recording it never
// changes the trajectory.
const GAP_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    Random,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Cg,
    RorCg,
    AwayCg,
}

impl SolverKind {
    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::Cg => "cg",
            SolverKind::RorCg => "ror-cg",
            SolverKind::AwayCg => "away-cg",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub seed: u64,
    pub selection: Selection,
    pub line_search: bool,
    /// Stop once the Frank-Wolfe gap drops to this value.
    pub stop_gap: Option<f64>,
    /// Merge near-parallel components after every step (off by default).
    pub compaction: Option<f64>,
    /// Record every `trace_every`-th iteration; the last one is always kept.
    pub trace_every: usize,
    pub step: StepSchedule,
    pub tol: TolSchedule,
    /// Cap on operator applications per eigenvector call; derived from the
    /// tolerance when unset.
    pub ev_max_iters: Option<usize>,
    /// Compute the Frank-Wolfe gap for each record (one extra eigenvector call).
    pub record_gap: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 100,
            seed: 0,
            selection: Selection::Random,
            line_search: false,
            stop_gap: None,
            compaction: None,
            trace_every: 1,
            step: StepSchedule::default(),
            tol: TolSchedule::default(),
            ev_max_iters: None,
            record_gap: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if self.trace_every == 0 {
            return Err(Error::Config("trace_every must be at least 1".into()));
        }
        if self.ev_max_iters == Some(0) {
            return Err(Error::Config("ev_max_iters must be at least 1".into()));
        }
        if let Some(tol) = self.compaction {
            if !(0.0..=crate::domain::MAX_COMPACTION_TOL).contains(&tol) {
                return Err(Error::Config(format!("compaction tolerance {tol} out of range")));
            }
        }
        self.step.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub elapsed_ms: f64,
    pub objective: f64,
    /// NaN when gap recording is disabled.
    pub fw_gap: f64,
    /// Number of rank-one components.
    pub k: usize,
    pub eta: f64,
    /// Step actually taken (after the effective-step rule or line search).
    pub eta_tilde: f64,
    pub xi: f64,
    pub ev_iters: usize,
    pub ev_converged: bool,
}

#[derive(Debug, Clone)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
    pub final_iterate: SpectraIterate,
    pub final_value: f64,
    /// Eigenvector calls that hit their iteration cap.
    pub ev_nonconverged: usize,
}

/// What the observer sees after each iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub iter: usize,
    pub eta: f64,
    pub step: f64,
    /// Component the step moved mass from, if any.
    pub selected: Option<usize>,
    pub value: f64,
}

/// Classical conditional gradient: `X <- (1 - s) X + s v v^T` with
/// `s = min(1, eta_t)` or the line-search step in `[0, 1]`.
pub fn run_cg(obj: &dyn Objective, config: &SolverConfig) -> Result<RunTrace> {
    run(SolverKind::Cg, obj, config, &mut |_, _| {})
}

/// Randomized rank-one-regularized conditional gradient.
pub fn run_ror_cg(obj: &dyn Objective, config: &SolverConfig) -> Result<RunTrace> {
    run(SolverKind::RorCg, obj, config, &mut |_, _| {})
}

/// Conditional gradient with away steps.
pub fn run_away_cg(obj: &dyn Objective, config: &SolverConfig) -> Result<RunTrace> {
    run(SolverKind::AwayCg, obj, config, &mut |_, _| {})
}

pub fn run_solver(kind: SolverKind, obj: &dyn Objective, config: &SolverConfig) -> Result<RunTrace> {
    run(kind, obj, config, &mut |_, _| {})
}

/// Like [`run_solver`], calling `observer` with every iterate (not only the
/// traced ones).
pub fn run_solver_observed(
    kind: SolverKind,
    obj: &dyn Objective,
    config: &SolverConfig,
    observer: &mut dyn FnMut(&StepInfo, &SpectraIterate),
) -> Result<RunTrace> {
    run(kind, obj, config, observer)
}

/// `(X - v v^T) . G` with `v` an approximate leading eigenvector of `-G`.
pub fn fw_gap<R: Rng + ?Sized>(obj: &dyn Objective, x: &SpectraIterate, rng: &mut R) -> Result<f64> {
    let (_, grad) = obj.value_grad(x)?;
    fw_gap_with_grad(x, &grad, rng).map(|(g, _)| g)
}

/// Gap and the eigenvector result behind it.
pub fn fw_gap_with_grad<R: Rng + ?Sized>(
    x: &SpectraIterate,
    grad: &SymmetricOperator,
    rng: &mut R,
) -> Result<(f64, EvResult)> {
    let neg = grad.negated();
    let ev = approx_leading_ev(&neg, GAP_XI, rng, default_ev_max_iters(&neg, GAP_XI))?;
    Ok((x.inner_with(grad)? + ev.rayleigh, ev))
}

struct Ev {
    vector: Vec<f64>,
    iters: usize,
    converged: bool,
}

fn leading_ev(op: &SymmetricOperator, xi: f64, rng: &mut ChaCha8Rng, config: &SolverConfig) -> Result<Ev> {
    let cap = config
        .ev_max_iters
        .unwrap_or_else(|| default_ev_max_iters(op, xi));
    let r = approx_leading_ev(op, xi, rng, cap)?;
    Ok(Ev {
        vector: r.vector,
        iters: r.iterations_used,
        converged: r.converged,
    })
}

fn run(
    kind: SolverKind,
    obj: &dyn Objective,
    config: &SolverConfig,
    observer: &mut dyn FnMut(&StepInfo, &SpectraIterate),
) -> Result<RunTrace> {
    config.validate()?;
    let params = *obj.params();
    params.validate()?;
    let start = Instant::now();
    let d = obj.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut gap_rng = ChaCha8Rng::seed_from_u64(config.seed ^ GAP_SEED_SALT);
    let mut ev_nonconverged = 0;

    let x0 = SpectraIterate::rank_one(&random_unit(d, &mut rng))?;
    let (_, g0) = obj.value_grad(&x0)?;
    let xi0 = xi_at(&config.tol, &params, 0)?;
    let first = leading_ev(&g0.negated(), xi0, &mut rng, config)?;
    if !first.converged {
        ev_nonconverged += 1;
    }
    let mut x = SpectraIterate::rank_one(&first.vector)?;
    let (mut value, mut grad) = obj.value_grad(&x)?;
    let mut records = Vec::new();

    for t in 1..=config.max_iters {
        let eta = eta_at(&config.step, t as u64);
        let xi = xi_at(&config.tol, &params, t as u64)?;
        let (next, step, selected, ev) = match kind {
            SolverKind::Cg => {
                let ev = leading_ev(&grad.negated(), xi, &mut rng, config)?;
                let dir = Direction::Global { v: ev.vector.clone() };
                let step = if config.line_search {
                    line_search(obj, &x, &dir, 1.0, value, &grad)?.step
                } else {
                    eta.min(1.0)
                };
                (dir.apply(&x, step)?, step, None, ev)
            }
            SolverKind::RorCg => {
                let i = match config.selection {
                    Selection::Random => x.sample_component(&mut rng),
                    Selection::Greedy => x.greedy_component(&grad)?,
                };
                let c = &x.components()[i];
                let a = c.weight;
                let op = grad.negated().with_rank_one(eta * params.beta, c.vector.clone())?;
                let ev = leading_ev(&op, xi, &mut rng, config)?;
                let dir = Direction::RankOne { index: i, v: ev.vector.clone() };
                let step = if config.line_search {
                    line_search(obj, &x, &dir, a, value, &grad)?.step
                } else {
                    eta_tilde(a, eta)
                };
                (dir.apply(&x, step)?, step, Some(i), ev)
            }
            SolverKind::AwayCg => {
                let ev = leading_ev(&grad.negated(), xi, &mut rng, config)?;
                let x_g = x.inner_with(&grad)?;
                let fw_slope = grad.quad_form(&ev.vector)? - x_g;
                let away = if x.len() >= 2 {
                    let a = x.greedy_component(&grad)?;
                    let slope = x_g - grad.quad_form(&x.components()[a].vector)?;
                    let cap = max_away_step(x.components()[a].weight);
                    (slope < fw_slope && cap > 0.0).then_some((a, cap))
                } else {
                    None
                };
                let (dir, cap, selected) = match away {
                    Some((a, cap)) => (Direction::Away { index: a }, cap, Some(a)),
                    None => (Direction::Global { v: ev.vector.clone() }, 1.0, None),
                };
                let step = if config.line_search {
                    line_search(obj, &x, &dir, cap, value, &grad)?.step
                } else {
                    eta.min(cap)
                };
                (dir.apply(&x, step)?, step, selected, ev)
            }
        };
        if !ev.converged {
            ev_nonconverged += 1;
        }
        x = match config.compaction {
            Some(tol) => next.compact(tol)?,
            None => next,
        };
        (value, grad) = obj.value_grad(&x)?;
        if !value.is_finite() {
            return Err(Error::ContractViolation(format!("objective is {value} at iteration {t}")));
        }

        let last = t == config.max_iters;
        let want_record = last || t % config.trace_every == 0;
        let need_gap = config.stop_gap.is_some() || (want_record && config.record_gap);
        let gap = if need_gap {
            fw_gap_with_grad(&x, &grad, &mut gap_rng)?.0
        } else {
            f64::NAN
        };
        let stop = config.stop_gap.is_some_and(|s| gap <= s);

        observer(
            &StepInfo {
                iter: t,
                eta,
                step,
                selected,
                value,
            },
            &x,
        );

        if want_record || stop {
            records.push(TraceRecord {
                iter: t,
                elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
                objective: value,
                fw_gap: gap,
                k: x.len(),
                eta,
                eta_tilde: step,
                xi,
                ev_iters: ev.iters,
                ev_converged: ev.converged,
            });
        }
        if stop {
            break;
        }
    }

    Ok(RunTrace {
        records,
        final_iterate: x,
        final_value: value,
        ev_nonconverged,
    })
}
