use std::sync::Arc;

use super::{Objective, ObjectiveParams};
use crate::domain::SpectraIterate;
use crate::error::{check_dim, Result};
use crate::linalg::{dot, DenseMatrix, RankOneTerm, SymmetricOperator};

/// `f(X) = 1/2 ||X - M||_F^2` for a target `M` in the spectrahedron, given
/// in low-rank form. Strongly convex and smooth with `alpha = beta = 1`.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    target: SpectraIterate,
    // Dense copy of M, used once the iterate has more components than `d`.
    target_dense: DenseMatrix,
    params: ObjectiveParams,
}

impl QuadraticObjective {
    pub fn new(target: SpectraIterate) -> Result<Self> {
        target.check_invariants()?;
        let d = target.dim();
        let mut target_dense = DenseMatrix::zeros(d, d);
        for c in target.components() {
            target_dense.add_outer(c.weight, &c.vector);
        }
        Ok(Self {
            target,
            target_dense,
            params: ObjectiveParams::new(1.0, 1.0)?,
        })
    }

    /// Attaches `rank(M)` and `lambda_min(M)`; the caller vouches for them.
    pub fn with_hints(mut self, rank: Option<usize>, lambda_min: Option<f64>) -> Result<Self> {
        let mut p = self.params;
        if let Some(r) = rank {
            p = p.with_rank_hint(r)?;
        }
        if let Some(l) = lambda_min {
            p = p.with_lambda_min_hint(l)?;
        }
        self.params = p;
        Ok(self)
    }

    pub fn target(&self) -> &SpectraIterate {
        &self.target
    }

    // Signed rank-one expansion of X - M.
    fn signed_terms<'a>(&'a self, x: &'a SpectraIterate) -> impl Iterator<Item = (f64, &'a [f64])> {
        x.components()
            .iter()
            .map(|c| (c.weight, &c.vector[..]))
            .chain(self.target.components().iter().map(|c| (-c.weight, &c.vector[..])))
    }

    fn residual_dense(&self, x: &SpectraIterate) -> DenseMatrix {
        let d = x.dim();
        let mut r = self.target_dense.scale(-1.0);
        for c in x.components() {
            r.add_outer(c.weight, &c.vector);
        }
        debug_assert_eq!(r.rows(), d);
        r
    }

    fn uses_gram(&self, x: &SpectraIterate) -> bool {
        x.len() + self.target.len() <= x.dim()
    }
}

fn half_squared_norm(m: &DenseMatrix) -> f64 {
    0.5 * m.as_slice().iter().map(|v| v * v).sum::<f64>()
}

impl Objective for QuadraticObjective {
    fn dim(&self) -> usize {
        self.target.dim()
    }

    fn params(&self) -> &ObjectiveParams {
        &self.params
    }

    fn value(&self, x: &SpectraIterate) -> Result<f64> {
        check_dim(self.dim(), x.dim())?;
        if self.uses_gram(x) {
            // ||sum c_l w_l w_l^T||^2 = sum_{l,m} c_l c_m (w_l . w_m)^2
            let terms: Vec<(f64, &[f64])> = self.signed_terms(x).collect();
            let mut acc = 0.0;
            for (l, &(cl, wl)) in terms.iter().enumerate() {
                acc += cl * cl * dot(wl, wl).powi(2);
                for &(cm, wm) in &terms[l + 1..] {
                    acc += 2.0 * cl * cm * dot(wl, wm).powi(2);
                }
            }
            Ok(0.5 * acc.max(0.0))
        } else {
            Ok(half_squared_norm(&self.residual_dense(x)))
        }
    }

    fn value_grad(&self, x: &SpectraIterate) -> Result<(f64, SymmetricOperator)> {
        let value = self.value(x)?;
        let d = self.dim();
        let grad = if self.uses_gram(x) {
            let terms = x
                .components()
                .iter()
                .map(|c| RankOneTerm::new(c.weight, Arc::clone(&c.vector)))
                .chain(
                    self.target
                        .components()
                        .iter()
                        .map(|c| RankOneTerm::new(-c.weight, Arc::clone(&c.vector))),
                )
                .collect();
            SymmetricOperator::new(d, vec![], terms)?
        } else {
            SymmetricOperator::from_dense(&self.residual_dense(x))?
        };
        Ok((value, grad))
    }

    fn value_dense(&self, x: &DenseMatrix) -> Result<f64> {
        Ok(half_squared_norm(&x.sub(&self.target_dense)?))
    }

    fn gradient_dense(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        x.sub(&self.target_dense)
    }

    fn smoothness_certificate(&self) -> f64 {
        1.0
    }
}
