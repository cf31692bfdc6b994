//! Dense helpers, sparse-plus-rank-one symmetric operators and the
//! approximate leading-eigenvector solver.

mod dense;
mod eigen;
mod ev;
mod operator;

pub use dense::{axpy, dot, norm, DenseMatrix};
pub use eigen::{
    dense_eigendecomposition, dense_eigendecomposition_capped, nuclear_norm, singular_values,
    SymmetricEigen, DEFAULT_ORACLE_CAP,
};
pub use ev::{
    approx_leading_ev, default_ev_max_iters, lanczos_budget, random_unit, EvResult, BUDGET_DELTA,
    MAX_DEFAULT_BUDGET, RESTART_DIM,
};
pub use operator::{RankOneTerm, SymmetricOperator};
