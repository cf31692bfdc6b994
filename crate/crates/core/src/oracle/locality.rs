//! Constructive decomposition of a target `Y` aligned with the components of
//! an iterate `X = sum_i a_i x_i x_i^T`:
//!
//! `Y = sum_i b_i y_i y_i^T + (sum_i (a_i - b_i)) W`, with `W` in the
//! spectrahedron and the misalignment controlled by `||X - Y||_F`.

use crate::domain::SpectraIterate;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dense_eigendecomposition, norm, DenseMatrix};

/// Relative slack on the `gamma tau >= (1 - gamma) ||X - Y||_F` check, so
/// that parameters chosen to meet it with equality survive rounding.
pub const PRECONDITION_SLACK: f64 = 1e-12;

const ZERO_NORM: f64 = 1e-12;
const EIGEN_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct LocalityDecomposition {
    pub b: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    /// `sum_i (a_i - b_i)`.
    pub residual_weight: f64,
    /// Defined when `residual_weight > 1e-12`.
    pub w: Option<DenseMatrix>,
    /// Numerical rank of `Y`.
    pub rank_y: usize,
    /// `||Y P_perp||_F`.
    pub tail_norm: f64,
    /// `||X - Y||_F`.
    pub distance: f64,
}

impl LocalityDecomposition {
    /// `sqrt(rank Y) (||Y P_perp|| + ||X - Y||) + gamma`, the cap on the
    /// residual weight.
    pub fn residual_bound(&self, gamma: f64) -> f64 {
        self.misalignment_scale() + gamma
    }

    /// `2 sqrt(rank Y) (||Y P_perp|| + ||X - Y||)`, the cap on
    /// `sum_i b_i ||x_i x_i^T - y_i y_i^T||_F^2`.
    pub fn alignment_bound(&self) -> f64 {
        2.0 * self.misalignment_scale()
    }

    fn misalignment_scale(&self) -> f64 {
        (self.rank_y as f64).sqrt() * (self.tail_norm + self.distance)
    }

    /// `sum_i b_i ||x_i x_i^T - y_i y_i^T||_F^2`, using
    /// `||x x^T - y y^T||_F^2 = 2 - 2 (x . y)^2` for unit vectors.
    pub fn alignment_cost(&self, x: &SpectraIterate) -> f64 {
        x.components()
            .iter()
            .zip(&self.b)
            .zip(&self.y)
            .map(|((c, &b), y)| {
                let p: f64 = c.vector.iter().zip(y).map(|(a, b)| a * b).sum();
                b * (2.0 - 2.0 * p * p).max(0.0)
            })
            .sum()
    }

    /// `sum_i b_i y_i y_i^T + residual_weight W`.
    pub fn reconstruct(&self) -> Option<DenseMatrix> {
        let d = self.y.first()?.len();
        let mut m = match &self.w {
            Some(w) => w.scale(self.residual_weight),
            None => DenseMatrix::zeros(d, d),
        };
        for (b, y) in self.b.iter().zip(&self.y) {
            m.add_outer(*b, y);
        }
        Some(m)
    }
}

/// `tau = sqrt(dist / (2 rank))`, `gamma = sqrt(2 rank dist)`, both clamped
/// to `[0, 1]`.
pub fn tau_gamma_distance_schedule(distance: f64, rank: usize) -> (f64, f64) {
    let r = rank.max(1) as f64;
    let tau = (distance / (2.0 * r)).sqrt();
    let gamma = (2.0 * r * distance).sqrt();
    (tau.clamp(0.0, 1.0), gamma.clamp(0.0, 1.0))
}

/// `tau = lambda_min`, `gamma = dist / lambda_min`, both clamped to `[0, 1]`.
pub fn tau_gamma_lambda_min_schedule(distance: f64, lambda_min: f64) -> (f64, f64) {
    let gamma = if lambda_min > 0.0 { distance / lambda_min } else { 1.0 };
    (lambda_min.clamp(0.0, 1.0), gamma.clamp(0.0, 1.0))
}

pub fn locality_decomposition(
    x: &SpectraIterate,
    y: &DenseMatrix,
    tau: f64,
    gamma: f64,
) -> Result<LocalityDecomposition> {
    let d = x.dim();
    check_dim(d, y.rows())?;
    check_dim(d, y.cols())?;
    if !(0.0..=1.0).contains(&tau) || !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidArgument(format!(
            "tau = {tau} and gamma = {gamma} must lie in [0, 1]"
        )));
    }
    let distance = x.materialize()?.sub(y)?.frobenius_norm();
    let lhs = gamma * tau;
    let rhs = (1.0 - gamma) * distance;
    if lhs < rhs - PRECONDITION_SLACK * rhs.max(1.0) {
        return Err(Error::Precondition(format!(
            "need gamma * tau / (1 - gamma) >= ||X - Y||_F, got gamma * tau = {lhs} \
             < (1 - gamma) * ||X - Y||_F = {rhs}"
        )));
    }

    let eig = dense_eigendecomposition(y)?;
    let scale = eig.values.first().map_or(1.0, |v| v.abs().max(1.0));
    let rank_y = eig.values.iter().filter(|&&l| l > EIGEN_TOL * scale).count();
    let mut kept = Vec::new();
    let mut tail_sq = 0.0;
    for (j, &lambda) in eig.values.iter().enumerate() {
        if lambda.abs() >= tau - EIGEN_TOL * scale {
            kept.push(eig.vector(j));
        } else {
            tail_sq += lambda * lambda;
        }
    }

    let mut b = Vec::with_capacity(x.len());
    let mut ys = Vec::with_capacity(x.len());
    for c in x.components() {
        let mut proj = vec![0.0; d];
        for v in &kept {
            let s: f64 = v.iter().zip(c.vector.iter()).map(|(a, b)| a * b).sum();
            for (p, vi) in proj.iter_mut().zip(v) {
                *p += s * vi;
            }
        }
        let n = norm(&proj);
        if n <= ZERO_NORM {
            let mut e = vec![0.0; d];
            e[0] = 1.0;
            b.push(0.0);
            ys.push(e);
        } else {
            b.push(c.weight * (1.0 - gamma) * n * n);
            ys.push(proj.into_iter().map(|p| p / n).collect());
        }
    }

    let residual_weight: f64 = x
        .components()
        .iter()
        .zip(&b)
        .map(|(c, bi)| c.weight - bi)
        .sum();
    let w = if residual_weight > ZERO_NORM {
        let mut m = y.clone();
        for (bi, yi) in b.iter().zip(&ys) {
            m.add_outer(-bi, yi);
        }
        Some(m.scale(1.0 / residual_weight))
    } else {
        None
    };

    Ok(LocalityDecomposition {
        b,
        y: ys,
        residual_weight,
        w,
        rank_y,
        tail_norm: tail_sq.sqrt(),
        distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: usize, d: usize) -> Vec<f64> {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        v
    }

    #[test]
    fn identical_rank_one() {
        let x = SpectraIterate::rank_one(&e(0, 3)).unwrap();
        let y = x.materialize().unwrap();
        let dec = locality_decomposition(&x, &y, 0.5, 0.0).unwrap();
        assert_eq!(dec.b, vec![1.0]);
        assert_eq!(dec.y[0], e(0, 3));
        assert!(dec.residual_weight.abs() < 1e-15);
        assert!(dec.w.is_none());
    }

    #[test]
    fn gamma_one_puts_everything_in_w() {
        let x = SpectraIterate::from_components(3, vec![(0.5, e(0, 3)), (0.5, e(1, 3))]).unwrap();
        let y = DenseMatrix::diag(&[0.2, 0.3, 0.5]);
        let dec = locality_decomposition(&x, &y, 0.7, 1.0).unwrap();
        assert!(dec.b.iter().all(|&b| b == 0.0));
        assert_eq!(dec.residual_weight, 1.0);
        assert!(dec.w.unwrap().sub(&y).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn precondition_violation_is_reported() {
        let x = SpectraIterate::rank_one(&e(0, 2)).unwrap();
        let y = SpectraIterate::rank_one(&e(1, 2)).unwrap().materialize().unwrap();
        assert!(matches!(
            locality_decomposition(&x, &y, 0.5, 0.1),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn schedules_meet_precondition() {
        let (t1, g1) = tau_gamma_distance_schedule(0.01, 2);
        assert!(g1 * t1 >= (1.0 - g1) * 0.01 - 1e-15);
        let (t2, g2) = tau_gamma_lambda_min_schedule(0.01, 0.2);
        assert_eq!(t2, 0.2);
        assert!((g2 - 0.05).abs() < 1e-15);
        assert_eq!(tau_gamma_lambda_min_schedule(0.5, 0.2).1, 1.0);
    }
}
