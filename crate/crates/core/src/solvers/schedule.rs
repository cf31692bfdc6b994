use crate::error::{Error, Result};
use crate::objectives::ObjectiveParams;

/// Step sizes `eta_t = c / (3 (t + t0))`. The default `c = 54, t0 = 8` gives
/// `eta_t = 18 / (t + 8)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule {
    pub c: f64,
    pub t0: u32,
}

impl Default for StepSchedule {
    fn default() -> Self {
        Self { c: 54.0, t0: 8 }
    }
}

impl StepSchedule {
    /// Positive, and `eta_1 <= 2` so the effective-step weight bound applies.
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("step constant must be positive, got {}", self.c)));
        }
        let first = eta_at(self, 1);
        if first > 2.0 {
            return Err(Error::Config(format!("first step {first} exceeds 2")));
        }
        Ok(())
    }
}

pub fn eta_at(s: &StepSchedule, t: u64) -> f64 {
    s.c / (3.0 * (t as f64 + s.t0 as f64))
}

/// Eigenvector tolerance schedule `xi_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TolSchedule {
    /// The minimum over the available closed forms: always
    /// `9 beta / (t + 8)`, plus a rank-based and a `lambda_min`-based branch
    /// when the objective carries those hints. Requires `alpha > 0`.
    Theorem,
    /// `xi0 / t^p`, with `xi0` defaulting to `beta`.
    Power { xi0: Option<f64>, p: f64 },
    /// `xi_t = value` for `t >= 1`.
    Constant(f64),
}

impl Default for TolSchedule {
    fn default() -> Self {
        TolSchedule::Power { xi0: None, p: 2.0 }
    }
}

/// Constants of the theorem-mode schedule: offset `t0` and the
/// branch constants `C` (branch 1), `C^{3/4}` (branch 2), `C` (branch 3).
pub const THEOREM_T0: f64 = 8.0;
pub const BRANCH1_C: f64 = 54.0;
pub const BRANCH2_C34: f64 = 54.0;
pub const BRANCH3_C: f64 = 2916.0;

pub fn theorem_branch1(beta: f64, t: u64) -> f64 {
    beta * BRANCH1_C / (6.0 * (t as f64 + THEOREM_T0))
}

pub fn theorem_branch2(beta: f64, alpha: f64, rank: usize, t: u64) -> f64 {
    let inner = 5.0 * BRANCH2_C34 * beta * (2f64.sqrt() * rank as f64).sqrt()
        / (alpha.powf(0.25) * (t as f64 + THEOREM_T0));
    inner.powf(4.0 / 3.0) / 6.0
}

pub fn theorem_branch3(beta: f64, alpha: f64, lambda_min: f64, t: u64) -> f64 {
    let inner =
        3.0 * (2.0 * BRANCH3_C).sqrt() * beta / (alpha.sqrt() * lambda_min * (t as f64 + THEOREM_T0));
    inner * inner / 6.0
}

/// `xi_0 = beta` in every mode.
pub fn xi_at(s: &TolSchedule, params: &ObjectiveParams, t: u64) -> Result<f64> {
    let beta = params.beta;
    if let TolSchedule::Theorem = s {
        if !(params.alpha > 0.0) {
            return Err(Error::Config(
                "theorem tolerance schedule needs alpha > 0; use a power schedule".into(),
            ));
        }
    }
    if t == 0 {
        return Ok(beta);
    }
    let xi = match *s {
        TolSchedule::Theorem => {
            let mut xi = theorem_branch1(beta, t);
            if let Some(r) = params.rank_hint {
                xi = xi.min(theorem_branch2(beta, params.alpha, r, t));
            }
            if let Some(l) = params.lambda_min_hint {
                xi = xi.min(theorem_branch3(beta, params.alpha, l, t));
            }
            xi
        }
        TolSchedule::Power { xi0, p } => {
            if !(p >= 0.0) {
                return Err(Error::Config(format!("power exponent must be >= 0, got {p}")));
            }
            xi0.unwrap_or(beta) / (t as f64).powf(p)
        }
        TolSchedule::Constant(x) => x,
    };
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::Config(format!("tolerance at t = {t} is {xi}, expected positive")));
    }
    Ok(xi)
}
