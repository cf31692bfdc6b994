use std::collections::HashSet;

use super::{Objective, ObjectiveParams};
use crate::domain::SpectraIterate;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{DenseMatrix, SymmetricOperator};

/// Observed entries `(row, col, rating)` of a `d1 x d2` matrix plus the
/// nuclear-norm radius `theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatCompDataset {
    pub d1: usize,
    pub d2: usize,
    pub observations: Vec<(usize, usize, f64)>,
    pub theta: f64,
}

impl MatCompDataset {
    pub fn new(
        d1: usize,
        d2: usize,
        observations: Vec<(usize, usize, f64)>,
        theta: f64,
    ) -> Result<Self> {
        if d1 == 0 || d2 == 0 {
            return Err(Error::InvalidArgument("matrix dimensions must be positive".into()));
        }
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::InvalidArgument(format!("theta must be positive, got {theta}")));
        }
        let mut seen = HashSet::with_capacity(observations.len());
        for (l, &(i, j, r)) in observations.iter().enumerate() {
            if i >= d1 || j >= d2 {
                return Err(Error::InvalidArgument(format!(
                    "observation {l} at ({i}, {j}) outside {d1}x{d2}"
                )));
            }
            if !r.is_finite() {
                return Err(Error::InvalidArgument(format!("observation {l} is not finite")));
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidArgument(format!("duplicate observation at ({i}, {j})")));
            }
        }
        Ok(Self {
            d1,
            d2,
            observations,
            theta,
        })
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Same observations with another radius.
    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        Self::new(self.d1, self.d2, self.observations.clone(), theta)
    }
}

/// `1/2 sum_l (Z_l - r_l)^2` with `z_obs[l]` the entry of `Z` at observation `l`.
pub fn matcomp_value(ds: &MatCompDataset, z_obs: &[f64]) -> Result<f64> {
    check_dim(ds.len(), z_obs.len())?;
    Ok(0.5
        * ds
            .observations
            .iter()
            .zip(z_obs)
            .map(|(&(_, _, r), z)| (z - r) * (z - r))
            .sum::<f64>())
}

/// `Z = 2 theta X_2` where `X_2` is the top-right `d1 x d2` block of `X`.
pub fn extract_z(x: &SpectraIterate, d1: usize, d2: usize, theta: f64) -> Result<DenseMatrix> {
    check_dim(d1 + d2, x.dim())?;
    let mut z = DenseMatrix::zeros(d1, d2);
    for c in x.components() {
        let (top, bottom) = c.vector.split_at(d1);
        for (i, &ti) in top.iter().enumerate() {
            let s = 2.0 * theta * c.weight * ti;
            if s == 0.0 {
                continue;
            }
            for (j, &bj) in bottom.iter().enumerate() {
                z[(i, j)] += s * bj;
            }
        }
    }
    Ok(z)
}

/// Matrix completion over the nuclear ball of radius `theta`, lifted to the
/// spectrahedron of dimension `d1 + d2`: `f^(X) = f(2 theta X_2)`.
///
/// `Z` is only ever evaluated at observed coordinates, so value and gradient
/// cost `O(k n)` for an iterate with `k` components.
#[derive(Debug, Clone)]
pub struct LiftedMatComp {
    data: MatCompDataset,
    params: ObjectiveParams,
}

impl LiftedMatComp {
    /// Defaults to `beta = 1` and `alpha = 0` (not strongly convex).
    pub fn new(data: MatCompDataset) -> Result<Self> {
        Ok(Self {
            data,
            params: ObjectiveParams::new(0.0, 1.0)?,
        })
    }

    pub fn with_params(mut self, params: ObjectiveParams) -> Result<Self> {
        params.validate()?;
        self.params = params;
        Ok(self)
    }

    pub fn data(&self) -> &MatCompDataset {
        &self.data
    }

    /// `Z` at every observed coordinate.
    pub fn observed_z(&self, x: &SpectraIterate) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.dim())?;
        let d1 = self.data.d1;
        let two_theta = 2.0 * self.data.theta;
        let mut z = vec![0.0; self.data.len()];
        for c in x.components() {
            let w = two_theta * c.weight;
            for (zl, &(i, j, _)) in z.iter_mut().zip(&self.data.observations) {
                *zl += w * c.vector[i] * c.vector[d1 + j];
            }
        }
        Ok(z)
    }

    fn observed_z_dense(&self, x: &DenseMatrix) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.rows())?;
        check_dim(self.dim(), x.cols())?;
        let d1 = self.data.d1;
        let two_theta = 2.0 * self.data.theta;
        Ok(self
            .data
            .observations
            .iter()
            .map(|&(i, j, _)| two_theta * x[(i, d1 + j)])
            .collect())
    }

    fn gradient_triplets(&self, z: &[f64]) -> Vec<(usize, usize, f64)> {
        let theta = self.data.theta;
        let d1 = self.data.d1;
        self.data
            .observations
            .iter()
            .zip(z)
            .map(|(&(i, j, r), zl)| (i, d1 + j, theta * (zl - r)))
            .collect()
    }
}

impl Objective for LiftedMatComp {
    fn dim(&self) -> usize {
        self.data.d1 + self.data.d2
    }

    fn params(&self) -> &ObjectiveParams {
        &self.params
    }

    fn value(&self, x: &SpectraIterate) -> Result<f64> {
        matcomp_value(&self.data, &self.observed_z(x)?)
    }

    /// The gradient has `theta G` in the top-right block and its transpose in
    /// the bottom-left, `G_l = Z_l - r_l` at observed entries.
    fn value_grad(&self, x: &SpectraIterate) -> Result<(f64, SymmetricOperator)> {
        let z = self.observed_z(x)?;
        let value = matcomp_value(&self.data, &z)?;
        let grad = SymmetricOperator::new(self.dim(), self.gradient_triplets(&z), vec![])?;
        Ok((value, grad))
    }

    fn value_dense(&self, x: &DenseMatrix) -> Result<f64> {
        matcomp_value(&self.data, &self.observed_z_dense(x)?)
    }

    fn gradient_dense(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        let z = self.observed_z_dense(x)?;
        let mut g = DenseMatrix::zeros(self.dim(), self.dim());
        for (r, c, v) in self.gradient_triplets(&z) {
            g[(r, c)] = v;
            g[(c, r)] = v;
        }
        Ok(g)
    }

    /// `2 theta^2`: the Hessian quadratic form is `2 theta^2 sum_l D_l^2`
    /// and each observed off-diagonal entry appears twice in `||D||_F^2`.
    fn smoothness_certificate(&self) -> f64 {
        2.0 * self.data.theta * self.data.theta
    }
}
