//! Projection-free optimization over the spectrahedron.
//!
//! The spectrahedron is the set of symmetric positive semidefinite `d x d`
//! matrices with unit trace. Every solver here keeps its iterate as an explicit
//! convex combination of rank-one matrices and only ever needs approximate
//! leading eigenvectors, never a full decomposition:
//!
//! - [`solvers::run_cg`]: classical conditional gradient (Frank-Wolfe).
//! - [`solvers::run_ror_cg`]: randomized rank-one-regularized conditional
//!   gradient, which moves mass away from one sampled component per iteration.
//! - [`solvers::run_away_cg`]: conditional gradient with away steps.
//!
//! The [`oracle`] module holds dense, decomposition-based reference routines
//! (exact projection, projected gradient, locality decompositions) used to
//! check the solvers at desk scale.

pub mod domain;
pub mod error;
pub mod linalg;
pub mod objectives;
pub mod oracle;
pub mod solvers;

pub use domain::{Component, SpectraIterate};
pub use error::{Error, Result};
pub use linalg::{DenseMatrix, EvResult, SymmetricOperator};
pub use objectives::{LiftedMatComp, MatCompDataset, Objective, ObjectiveParams, QuadraticObjective};
pub use solvers::{RunTrace, SolverConfig, TraceRecord};
