//! Objective oracles: value, gradient as a [`SymmetricOperator`], and the
//! curvature constants the schedules need.

mod matcomp;
mod quadratic;

pub use matcomp::{extract_z, matcomp_value, LiftedMatComp, MatCompDataset};
pub use quadratic::QuadraticObjective;

use crate::domain::SpectraIterate;
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SymmetricOperator};

/// Curvature constants and optional facts about the minimizer `X*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveParams {
    /// Strong-convexity modulus; 0 when absent or unknown.
    pub alpha: f64,
    /// Smoothness modulus.
    pub beta: f64,
    /// `rank(X*)`.
    pub rank_hint: Option<usize>,
    /// `lambda_min(X*)`, the smallest non-zero eigenvalue.
    pub lambda_min_hint: Option<f64>,
}

impl ObjectiveParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            rank_hint: None,
            lambda_min_hint: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_rank_hint(mut self, rank: usize) -> Result<Self> {
        self.rank_hint = Some(rank);
        self.validate()?;
        Ok(self)
    }

    pub fn with_lambda_min_hint(mut self, lambda_min: f64) -> Result<Self> {
        self.lambda_min_hint = Some(lambda_min);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.alpha >= 0.0) || self.alpha > self.beta {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in [0, beta], got alpha = {}, beta = {}",
                self.alpha, self.beta
            )));
        }
        if self.rank_hint == Some(0) {
            return Err(Error::InvalidArgument("rank hint must be at least 1".into()));
        }
        if let Some(l) = self.lambda_min_hint {
            if !(l > 0.0 && l <= 1.0) {
                return Err(Error::InvalidArgument(format!("lambda_min hint {l} outside (0, 1]")));
            }
            if let Some(r) = self.rank_hint {
                // A unit-trace PSD matrix of rank r has lambda_min <= 1 / r.
                if l > 1.0 / r as f64 + 1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "lambda_min hint {l} exceeds 1 / rank = {}",
                        1.0 / r as f64
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A smooth convex function on the spectrahedron.
///
/// The `_dense` variants evaluate at an arbitrary symmetric matrix (not
/// necessarily feasible) and exist for oracles and derivative checks.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn params(&self) -> &ObjectiveParams;

    fn value(&self, x: &SpectraIterate) -> Result<f64>;

    fn value_grad(&self, x: &SpectraIterate) -> Result<(f64, SymmetricOperator)>;

    fn value_dense(&self, x: &DenseMatrix) -> Result<f64>;

    fn gradient_dense(&self, x: &DenseMatrix) -> Result<DenseMatrix>;

    /// A smoothness constant that provably holds in Frobenius norm; may be
    /// larger than `params().beta` when the latter is a tuning choice.
    fn smoothness_certificate(&self) -> f64;
}

/// `sqrt(2 gap / alpha)`: an upper bound on `||X - X*||_F` for an
/// `alpha`-strongly convex objective with `f(X) - f(X*) = gap`.
pub fn strong_convexity_gap_bound(value_gap: f64, alpha: f64) -> Result<f64> {
    if alpha == 0.0 {
        return Err(Error::Unsupported(
            "distance bound needs a strongly convex objective (alpha > 0)".into(),
        ));
    }
    if !(alpha > 0.0) || !(value_gap >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need alpha > 0 and gap >= 0, got alpha = {alpha}, gap = {value_gap}"
        )));
    }
    Ok((2.0 * value_gap / alpha).sqrt())
}
