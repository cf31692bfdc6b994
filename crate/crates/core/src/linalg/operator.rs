use std::sync::Arc;

use super::dense::{dot, norm, DenseMatrix};
use crate::error::{check_dim, Error, Result};

const UNIT_TOL: f64 = 1e-10;

/// `coefficient * u u^T` with `u` a unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneTerm {
    pub coefficient: f64,
    pub direction: Arc<[f64]>,
}

impl RankOneTerm {
    pub fn new(coefficient: f64, direction: impl Into<Arc<[f64]>>) -> Self {
        Self {
            coefficient,
            direction: direction.into(),
        }
    }
}

/// Symmetric linear map `S + sum_j c_j u_j u_j^T` where `S` is sparse.
///
/// The sparse part is given as upper-triangle triplets `(row, col, value)`
/// with `row <= col`; an off-diagonal triplet stands for both `(row, col)`
/// and `(col, row)`. Lower-triangle triplets are accepted and mirrored.
/// Internally the full symmetric pattern is kept in CSR form so `apply`
/// costs `O(nnz + d * rank_one_terms)`.
#[derive(Debug, Clone)]
pub struct SymmetricOperator {
    dim: usize,
    upper: Vec<(usize, usize, f64)>,
    rank_one: Vec<RankOneTerm>,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SymmetricOperator {
    pub fn new(
        dim: usize,
        triplets: Vec<(usize, usize, f64)>,
        rank_one: Vec<RankOneTerm>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("operator dimension must be positive".into()));
        }
        let mut upper = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(Error::InvalidArgument(format!(
                    "triplet ({r}, {c}) out of range for dimension {dim}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite value at ({r}, {c})")));
            }
            upper.push((r.min(c), r.max(c), v));
        }
        upper.sort_by_key(|&(r, c, _)| (r, c));
        if let Some(w) = upper.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::InvalidArgument(format!(
                "duplicate triplet at ({}, {})",
                w[0].0, w[0].1
            )));
        }
        for term in &rank_one {
            check_dim(dim, term.direction.len())?;
            let n = norm(&term.direction);
            if (n - 1.0).abs() > UNIT_TOL {
                return Err(Error::InvalidArgument(format!(
                    "rank-one direction has norm {n}, expected 1"
                )));
            }
            if !term.coefficient.is_finite() {
                return Err(Error::InvalidArgument("non-finite rank-one coefficient".into()));
            }
        }

        let mut counts = vec![0usize; dim];
        for &(r, c, _) in &upper {
            counts[r] += 1;
            if r != c {
                counts[c] += 1;
            }
        }
        let mut row_ptr = Vec::with_capacity(dim + 1);
        row_ptr.push(0);
        for c in &counts {
            row_ptr.push(row_ptr.last().unwrap() + c);
        }
        let nnz = *row_ptr.last().unwrap();
        let mut col_idx = vec![0; nnz];
        let mut values = vec![0.0; nnz];
        let mut fill = row_ptr[..dim].to_vec();
        for &(r, c, v) in &upper {
            col_idx[fill[r]] = c;
            values[fill[r]] = v;
            fill[r] += 1;
            if r != c {
                col_idx[fill[c]] = r;
                values[fill[c]] = v;
                fill[c] += 1;
            }
        }

        Ok(Self {
            dim,
            upper,
            rank_one,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::new(dim, Vec::new(), Vec::new())
    }

    /// Upper-triangle triplets of a dense symmetric matrix (exact zeros skipped).
    pub fn from_dense(m: &DenseMatrix) -> Result<Self> {
        if !m.is_symmetric(1e-12 * m.max_abs().max(1.0)) {
            return Err(Error::InvalidArgument("operator source matrix is not symmetric".into()));
        }
        let n = m.rows();
        let mut triplets = Vec::new();
        for r in 0..n {
            for c in r..n {
                let v = 0.5 * (m[(r, c)] + m[(c, r)]);
                if v != 0.0 {
                    triplets.push((r, c, v));
                }
            }
        }
        Self::new(n, triplets, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Upper-triangle triplets, sorted by `(row, col)`.
    pub fn triplets(&self) -> &[(usize, usize, f64)] {
        &self.upper
    }

    pub fn rank_one_terms(&self) -> &[RankOneTerm] {
        &self.rank_one
    }

    /// Stored entries of the full symmetric sparse part (off-diagonal
    /// triplets count twice).
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, v.len())?;
        let mut out = vec![0.0; self.dim];
        self.apply_into(v, &mut out);
        Ok(out)
    }

    /// Unchecked `out = A v`; both slices must have length `dim`.
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        for (r, o) in out.iter_mut().enumerate() {
            let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
            *o = self.col_idx[lo..hi]
                .iter()
                .zip(&self.values[lo..hi])
                .map(|(&c, &a)| a * v[c])
                .sum();
        }
        for term in &self.rank_one {
            let s = term.coefficient * dot(&term.direction, v);
            if s != 0.0 {
                for (o, u) in out.iter_mut().zip(term.direction.iter()) {
                    *o += s * u;
                }
            }
        }
    }

    /// `x^T A x` without allocating the product.
    pub fn quad_form(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        let mut acc = 0.0;
        for &(r, c, v) in &self.upper {
            if r == c {
                acc += v * x[r] * x[r];
            } else {
                acc += 2.0 * v * x[r] * x[c];
            }
        }
        for term in &self.rank_one {
            let p = dot(&term.direction, x);
            acc += term.coefficient * p * p;
        }
        Ok(acc)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.upper {
            m[(r, c)] += v;
            if r != c {
                m[(c, r)] += v;
            }
        }
        for term in &self.rank_one {
            m.add_outer(term.coefficient, &term.direction);
        }
        m
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            upper: self.upper.iter().map(|&(r, c, v)| (r, c, s * v)).collect(),
            rank_one: self
                .rank_one
                .iter()
                .map(|t| RankOneTerm {
                    coefficient: s * t.coefficient,
                    direction: Arc::clone(&t.direction),
                })
                .collect(),
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self.values.iter().map(|v| s * v).collect(),
        }
    }

    pub fn negated(&self) -> Self {
        self.scaled(-1.0)
    }

    /// `self + coefficient * u u^T`.
    pub fn with_rank_one(&self, coefficient: f64, direction: impl Into<Arc<[f64]>>) -> Result<Self> {
        let term = RankOneTerm::new(coefficient, direction);
        check_dim(self.dim, term.direction.len())?;
        let n = norm(&term.direction);
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidArgument(format!(
                "rank-one direction has norm {n}, expected 1"
            )));
        }
        let mut out = self.clone();
        out.rank_one.push(term);
        Ok(out)
    }

    /// Upper bound on the spectral radius: the largest Gershgorin row sum of
    /// the sparse part plus `sum_j |c_j|`.
    pub fn spectral_bound(&self) -> f64 {
        let sparse = (0..self.dim)
            .map(|r| {
                self.values[self.row_ptr[r]..self.row_ptr[r + 1]]
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        sparse + self.rank_one.iter().map(|t| t.coefficient.abs()).sum::<f64>()
    }
}
