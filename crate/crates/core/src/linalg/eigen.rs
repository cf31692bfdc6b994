//! Dense symmetric eigendecomposition by cyclic Jacobi rotations.
//!
//! O(d^3) per sweep; intended for oracles and tests only. Inputs larger than
//! the configured cap are refused rather than silently slow.

use super::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Largest dimension the dense routines accept by default.
pub const DEFAULT_ORACLE_CAP: usize = 500;

const SYMMETRY_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: DenseMatrix,
}

impl SymmetricEigen {
    pub fn vector(&self, j: usize) -> Vec<f64> {
        self.vectors.column(j)
    }

    /// `V diag(values) V^T`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let n = self.values.len();
        let mut m = DenseMatrix::zeros(n, n);
        for (j, &lambda) in self.values.iter().enumerate() {
            m.add_outer(lambda, &self.vector(j));
        }
        m
    }
}

pub fn dense_eigendecomposition(m: &DenseMatrix) -> Result<SymmetricEigen> {
    dense_eigendecomposition_capped(m, DEFAULT_ORACLE_CAP)
}

pub fn dense_eigendecomposition_capped(m: &DenseMatrix, cap: usize) -> Result<SymmetricEigen> {
    if !m.is_square() {
        return Err(Error::InvalidArgument(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n > cap {
        return Err(Error::OracleCap { dim: n, cap });
    }
    let scale = m.max_abs().max(1.0);
    if !m.is_symmetric(SYMMETRY_TOL * scale) {
        return Err(Error::InvalidArgument(
            "eigendecomposition input is not symmetric".into(),
        ));
    }

    let mut a = m.symmetrized();
    let mut v = DenseMatrix::identity(n);
    let total = a.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)] * a[(p, q)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymmetricEigen { values, vectors })
}

// A <- J^T A J, V <- V J with J the (p, q) plane rotation.
fn rotate(a: &mut DenseMatrix, v: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Singular values of a rectangular matrix, largest first, as the
/// non-negative eigenvalues of the symmetric embedding `[[0, Z], [Z^T, 0]]`.
/// Unlike the eigenvalues of `Z^T Z`, these stay accurate to roundoff
/// relative to `||Z||` for (near-)zero singular values.
pub fn singular_values(z: &DenseMatrix) -> Result<Vec<f64>> {
    let (m, n) = (z.rows(), z.cols());
    let mut emb = DenseMatrix::zeros(m + n, m + n);
    for i in 0..m {
        for j in 0..n {
            emb[(i, m + j)] = z[(i, j)];
            emb[(m + j, i)] = z[(i, j)];
        }
    }
    let eig = dense_eigendecomposition(&emb)?;
    Ok(eig.values.iter().take(m.min(n)).map(|l| l.max(0.0)).collect())
}

pub fn nuclear_norm(z: &DenseMatrix) -> Result<f64> {
    Ok(singular_values(z)?.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_symmetric(n: usize, seed: u64) -> DenseMatrix {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let a = DenseMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        a.symmetrized()
    }

    #[test]
    fn diagonal_input() {
        let eig = dense_eigendecomposition(&DenseMatrix::diag(&[1.0, 3.0])).unwrap();
        assert_eq!(eig.values, vec![3.0, 1.0]);
        assert!((eig.vector(0)[1].abs() - 1.0).abs() < 1e-15);
        assert!((eig.vector(1)[0].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn swap_matrix() {
        let m = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let eig = dense_eigendecomposition(&m).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-14);
        assert!((eig.values[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_reconstruction_and_orthonormality() {
        for seed in 0..3 {
            let m = random_symmetric(20, seed);
            let eig = dense_eigendecomposition(&m).unwrap();
            let err = eig.reconstruct().sub(&m).unwrap().frobenius_norm() / m.frobenius_norm();
            assert!(err <= 1e-8, "reconstruction error {err}");
            let vtv = eig.vectors.transpose().matmul(&eig.vectors).unwrap();
            let orth = vtv.sub(&DenseMatrix::identity(20)).unwrap().max_abs();
            assert!(orth <= 1e-8);
            let tr: f64 = eig.values.iter().sum();
            assert!((tr - m.trace()).abs() <= 1e-8);
            assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn rejects_asymmetric_and_oversized() {
        let m = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(
            dense_eigendecomposition(&m),
            Err(Error::InvalidArgument(_))
        ));
        let big = DenseMatrix::zeros(4, 4);
        assert!(matches!(
            dense_eigendecomposition_capped(&big, 3),
            Err(Error::OracleCap { dim: 4, cap: 3 })
        ));
    }

    #[test]
    fn nuclear_norm_of_rank_one() {
        let z = DenseMatrix::from_rows(&[vec![3.0, 4.0], vec![0.0, 0.0]]).unwrap();
        assert!((nuclear_norm(&z).unwrap() - 5.0).abs() < 1e-12);
    }
}
