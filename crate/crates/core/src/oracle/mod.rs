//! Dense, decomposition-based reference routines. Everything here costs
//! `O(d^3)` and refuses dimensions above the oracle cap.

mod locality;

pub use locality::{
    locality_decomposition, tau_gamma_distance_schedule, tau_gamma_lambda_min_schedule,
    LocalityDecomposition, PRECONDITION_SLACK,
};

use std::time::Instant;

use crate::domain::{SpectraIterate, REMOVAL_THRESHOLD};
use crate::error::{Error, Result};
use crate::linalg::{dense_eigendecomposition, DenseMatrix};
use crate::objectives::Objective;
use crate::solvers::{RunTrace, TraceRecord};

/// Euclidean projection onto the probability simplex (sort and threshold).
pub fn simplex_projection(w: &[f64]) -> Result<Vec<f64>> {
    if w.is_empty() {
        return Err(Error::InvalidArgument("cannot project an empty vector".into()));
    }
    if w.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("simplex projection needs finite entries".into()));
    }
    let mut sorted = w.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut tau = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if u - candidate > 0.0 {
            tau = candidate;
        }
    }
    Ok(w.iter().map(|x| (x - tau).max(0.0)).collect())
}

/// Frobenius-nearest point of the spectrahedron: eigendecompose, project
/// the spectrum onto the simplex, recombine.
pub fn exact_projection_spectrahedron(m: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(projection_eigenform(m)?.0)
}

// The projection together with its eigen-form `(lambda_i, v_i)`, positive
// eigenvalues only.
fn projection_eigenform(m: &DenseMatrix) -> Result<(DenseMatrix, Vec<(f64, Vec<f64>)>)> {
    let eig = dense_eigendecomposition(m)?;
    let p = simplex_projection(&eig.values)?;
    let n = m.rows();
    let mut out = DenseMatrix::zeros(n, n);
    let mut parts = Vec::new();
    for (j, &lambda) in p.iter().enumerate() {
        if lambda > 0.0 {
            let v = eig.vector(j);
            out.add_outer(lambda, &v);
            parts.push((lambda, v));
        }
    }
    Ok((out, parts))
}

fn iterate_from_parts(dim: usize, parts: Vec<(f64, Vec<f64>)>) -> Result<SpectraIterate> {
    let kept: Vec<(f64, Vec<f64>)> = parts.into_iter().filter(|(w, _)| *w > REMOVAL_THRESHOLD).collect();
    let sum: f64 = kept.iter().map(|(w, _)| w).sum();
    let parts = kept
        .into_iter()
        .map(|(w, v)| {
            let n = crate::linalg::norm(&v);
            (w / sum, v.into_iter().map(|x| x / n).collect())
        })
        .collect();
    SpectraIterate::from_components(dim, parts)
}

/// Projected gradient descent `X <- Proj(X - s grad f(X))` from `X_0 = I / d`.
///
/// The default step is `1 / L` with `L` the objective's certified smoothness
/// constant. Records carry the Frank-Wolfe gap computed exactly from the
/// smallest eigenvalue of the gradient; `eta` holds the step size and the
/// eigenvector columns are zero.
pub fn run_projected_gradient(
    obj: &dyn Objective,
    steps: usize,
    step_size: Option<f64>,
) -> Result<RunTrace> {
    let start = Instant::now();
    let d = obj.dim();
    let s = step_size.unwrap_or(1.0 / obj.smoothness_certificate());
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {s}")));
    }
    let mut x = DenseMatrix::identity(d).scale(1.0 / d as f64);
    let mut parts: Vec<(f64, Vec<f64>)> = (0..d)
        .map(|i| {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            (1.0 / d as f64, e)
        })
        .collect();
    let mut records = Vec::with_capacity(steps);
    let mut value = obj.value_dense(&x)?;
    for t in 1..=steps {
        let g = obj.gradient_dense(&x)?;
        let (next, next_parts) = projection_eigenform(&x.sub(&g.scale(s))?)?;
        x = next;
        parts = next_parts;
        value = obj.value_dense(&x)?;
        let g = obj.gradient_dense(&x)?;
        let lambda_min = *dense_eigendecomposition(&g)?.values.last().unwrap_or(&0.0);
        let gap = x.frobenius_inner(&g)? - lambda_min;
        records.push(TraceRecord {
            iter: t,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
            objective: value,
            fw_gap: gap,
            k: parts.len(),
            eta: s,
            eta_tilde: s,
            xi: 0.0,
            ev_iters: 0,
            ev_converged: true,
        });
    }
    Ok(RunTrace {
        records,
        final_iterate: iterate_from_parts(d, parts)?,
        final_value: value,
        ev_nonconverged: 0,
    })
}

/// Runs projected gradient until successive iterates differ by at most
/// `tol` in Frobenius norm, or `max_steps` is reached. Returns the final
/// dense iterate and its value.
pub fn reference_optimum(
    obj: &dyn Objective,
    max_steps: usize,
    tol: f64,
) -> Result<(DenseMatrix, f64, usize)> {
    let d = obj.dim();
    let s = 1.0 / obj.smoothness_certificate();
    let mut x = DenseMatrix::identity(d).scale(1.0 / d as f64);
    for k in 1..=max_steps {
        let g = obj.gradient_dense(&x)?;
        let next = exact_projection_spectrahedron(&x.sub(&g.scale(s))?)?;
        let moved = next.sub(&x)?.frobenius_norm();
        x = next;
        if moved <= tol {
            let v = obj.value_dense(&x)?;
            return Ok((x, v, k));
        }
    }
    let v = obj.value_dense(&x)?;
    Ok((x, v, max_steps))
}
