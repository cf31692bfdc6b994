use crate::domain::SpectraIterate;
use crate::error::{Error, Result};
use crate::linalg::SymmetricOperator;
use crate::objectives::Objective;

/// Curvature below which the restriction is treated as linear.
pub const FLAT_CURVATURE: f64 = 1e-14;

/// A feasible direction `D` at an iterate `X`, moved along as `X + s D`.
#[derive(Debug, Clone, PartialEq)]
pub enum Direction {
    /// `D = v v^T - x_i x_i^T`.
    RankOne { index: usize, v: Vec<f64> },
    /// `D = v v^T - X`.
    Global { v: Vec<f64> },
    /// `D = X - x_i x_i^T`.
    Away { index: usize },
}

impl Direction {
    /// `D . G` for the gradient `G` at `x`; `x_inner_g` is `X . G`.
    pub fn slope(&self, x: &SpectraIterate, grad: &SymmetricOperator, x_inner_g: f64) -> Result<f64> {
        Ok(match self {
            Direction::RankOne { index, v } => {
                grad.quad_form(v)? - grad.quad_form(&component(x, *index)?)?
            }
            Direction::Global { v } => grad.quad_form(v)? - x_inner_g,
            Direction::Away { index } => x_inner_g - grad.quad_form(&component(x, *index)?)?,
        })
    }

    pub fn apply(&self, x: &SpectraIterate, s: f64) -> Result<SpectraIterate> {
        match self {
            Direction::RankOne { index, v } => x.apply_rank_one_step(*index, v, s),
            Direction::Global { v } => x.cg_global_step(v, s),
            Direction::Away { index } => x.apply_away_step(*index, s),
        }
    }
}

fn component(x: &SpectraIterate, i: usize) -> Result<Vec<f64>> {
    x.components()
        .get(i)
        .map(|c| c.vector.to_vec())
        .ok_or_else(|| Error::InvalidArgument(format!("component index {i} out of range")))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchResult {
    pub step: f64,
    /// `phi(step)`.
    pub value: f64,
}

/// Minimizes `phi(s) = f(X + s D)` over `[0, s_max]` assuming `phi` is
/// quadratic, fitting the curvature from `phi(0)`, `phi'(0)` and `phi(s_max)`.
/// Falls back to `s = 0` if the chosen step would increase the objective.
pub fn line_search(
    obj: &dyn Objective,
    x: &SpectraIterate,
    direction: &Direction,
    s_max: f64,
    f0: f64,
    grad: &SymmetricOperator,
) -> Result<LineSearchResult> {
    if !(s_max > 0.0) {
        return Err(Error::InvalidArgument(format!("s_max must be positive, got {s_max}")));
    }
    let x_inner_g = match direction {
        Direction::RankOne { .. } => 0.0,
        _ => x.inner_with(grad)?,
    };
    let d1 = direction.slope(x, grad, x_inner_g)?;
    if d1 >= 0.0 {
        return Ok(LineSearchResult { step: 0.0, value: f0 });
    }
    let f_max = obj.value(&direction.apply(x, s_max)?)?;
    let curvature = 2.0 * (f_max - f0 - d1 * s_max) / (s_max * s_max);
    let step = if curvature <= FLAT_CURVATURE {
        s_max
    } else {
        (-d1 / curvature).clamp(0.0, s_max)
    };
    let value = if step == s_max {
        f_max
    } else {
        obj.value(&direction.apply(x, step)?)?
    };
    if value > f0 {
        return Ok(LineSearchResult { step: 0.0, value: f0 });
    }
    Ok(LineSearchResult { step, value })
}
