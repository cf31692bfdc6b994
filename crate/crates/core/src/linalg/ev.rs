//! Approximate leading eigenvector: given a symmetric `A` and `xi > 0`, find a
//! unit `v` with `v^T A v >= lambda_max(A) - xi`.
//!
//! Lanczos with full reorthogonalization and explicit restarts, run on the
//! shifted operator `A + sigma I` where `sigma` bounds the spectral radius.
//! The Ritz problem is solved on the tridiagonal by Sturm bisection plus
//! inverse iteration, so each step costs `O(j)` on top of the mat-vec.

use rand::Rng;
use rand_distr::StandardNormal;

use super::dense::{axpy, dot, norm};
use super::operator::SymmetricOperator;
use crate::error::{Error, Result};

/// Krylov basis size before an explicit restart from the current Ritz vector.
pub const RESTART_DIM: usize = 96;

/// Failure probability used when sizing the default iteration budget.
pub const BUDGET_DELTA: f64 = 1e-3;

/// Hard ceiling on the default budget.
pub const MAX_DEFAULT_BUDGET: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct EvResult {
    /// Unit vector.
    pub vector: Vec<f64>,
    /// `v^T A v` for the unshifted operator.
    pub rayleigh: f64,
    /// Operator applications spent.
    pub iterations_used: usize,
    /// `false` when the iteration cap was hit before the stopping test passed.
    pub converged: bool,
}

/// Lanczos iteration count after which the `xi` guarantee holds with
/// probability `1 - delta` for an operator whose shifted spectrum lies in
/// `[0, 2 sigma]`: `ceil((1 + ln(d / delta)) * sqrt(2 sigma / xi))`.
pub fn lanczos_budget(sigma: f64, xi: f64, dim: usize, delta: f64) -> usize {
    if sigma <= 0.0 {
        return 1;
    }
    let log_term = 1.0 + ((dim.max(2) as f64) / delta).ln();
    let b = log_term * (2.0 * sigma / xi).sqrt();
    if b.is_finite() {
        (b.ceil() as usize).max(1)
    } else {
        usize::MAX
    }
}

/// Default operator-application cap for `approx_leading_ev`: the Lanczos
/// budget, never less than `dim + 1` (exact in exact arithmetic), clamped to
/// [`MAX_DEFAULT_BUDGET`].
pub fn default_ev_max_iters(op: &SymmetricOperator, xi: f64) -> usize {
    lanczos_budget(op.spectral_bound(), xi, op.dim(), BUDGET_DELTA)
        .max(op.dim() + 1)
        .min(MAX_DEFAULT_BUDGET.max(op.dim() + 1))
}

/// Stops when successive Ritz values differ by less than `xi / 4` and the
/// Ritz residual `||A v - theta v||` is at most `xi`, or when the Krylov
/// space becomes invariant. Running out of `max_iters` returns the current
/// Ritz vector with `converged = false`.
pub fn approx_leading_ev<R: Rng + ?Sized>(
    op: &SymmetricOperator,
    xi: f64,
    rng: &mut R,
    max_iters: usize,
) -> Result<EvResult> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::InvalidArgument(format!("xi must be positive, got {xi}")));
    }
    if max_iters == 0 {
        return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
    }
    let start = random_unit(op.dim(), rng);
    Ok(lanczos_top(op, start, xi, max_iters))
}

pub fn random_unit<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-150 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn lanczos_top(op: &SymmetricOperator, start: Vec<f64>, xi: f64, max_iters: usize) -> EvResult {
    let d = op.dim();
    let sigma = op.spectral_bound();
    let m = RESTART_DIM.min(d);
    let invariant_tol = 1e-13 * sigma;

    let mut start = start;
    let mut matvecs = 0usize;
    let mut prev_ritz: Option<f64> = None;
    let mut w = vec![0.0; d];

    loop {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(std::mem::take(&mut start));
        let mut alpha: Vec<f64> = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);

        for j in 0..m {
            op.apply_into(&basis[j], &mut w);
            axpy(sigma, &basis[j], &mut w);
            matvecs += 1;

            let a = dot(&basis[j], &w);
            axpy(-a, &basis[j], &mut w);
            if j > 0 {
                axpy(-beta[j - 1], &basis[j - 1], &mut w);
            }
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &w);
                    axpy(-c, q, &mut w);
                }
            }
            let b = norm(&w);
            alpha.push(a);

            let (theta, s) = tridiagonal_top_eigenpair(&alpha, &beta);
            let residual = b * s[j].abs();
            let invariant = b <= invariant_tol || j + 1 == d;
            let settled = prev_ritz.is_some_and(|p| (theta - p).abs() < 0.25 * xi);
            prev_ritz = Some(theta);
            let converged = invariant || (settled && residual <= xi);

            if converged || matvecs >= max_iters || j + 1 == m {
                let ritz = ritz_vector(&basis, &s, d);
                if converged || matvecs >= max_iters {
                    let rayleigh = op.quad_form(&ritz).unwrap_or(f64::NAN);
                    return EvResult {
                        vector: ritz,
                        rayleigh,
                        iterations_used: matvecs,
                        converged,
                    };
                }
                start = ritz;
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
    }
}

fn ritz_vector(basis: &[Vec<f64>], s: &[f64], d: usize) -> Vec<f64> {
    let mut y = vec![0.0; d];
    for (q, &sk) in basis.iter().zip(s) {
        axpy(sk, q, &mut y);
    }
    let n = norm(&y);
    if n > 0.0 {
        y.iter_mut().for_each(|x| *x /= n);
        y
    } else {
        basis[0].clone()
    }
}

/// Largest eigenvalue and its unit eigenvector for the symmetric tridiagonal
/// with diagonal `alpha` and off-diagonal `beta` (`beta.len() + 1 == alpha.len()`).
pub(crate) fn tridiagonal_top_eigenpair(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let n = alpha.len();
    debug_assert_eq!(beta.len() + 1, n);
    if n == 1 {
        return (alpha[0], vec![1.0]);
    }
    let theta = largest_eigenvalue_bisection(alpha, beta);
    (theta, inverse_iteration(alpha, beta, theta))
}

// Number of eigenvalues strictly less than x (Sturm sequence via LDL^T pivots).
fn count_below(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = alpha[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..alpha.len() {
        let qq = if q == 0.0 { f64::EPSILON * (beta[i - 1].abs() + 1e-300) } else { q };
        q = alpha[i] - x - beta[i - 1] * beta[i - 1] / qq;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn largest_eigenvalue_bisection(alpha: &[f64], beta: &[f64]) -> f64 {
    let n = alpha.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { beta[i - 1].abs() } else { 0.0 } + if i + 1 < n { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    let span = hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * span {
            break;
        }
        if count_below(alpha, beta, mid) == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn inverse_iteration(alpha: &[f64], beta: &[f64], theta: f64) -> Vec<f64> {
    let n = alpha.len();
    let scale = alpha
        .iter()
        .chain(beta)
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let lu = TridiagonalLu::factor(alpha, beta, theta, f64::EPSILON * scale);
    let mut y: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * (i as f64).sin()).collect();
    for _ in 0..3 {
        lu.solve(&mut y);
        let nrm = norm(&y);
        if !(nrm.is_finite() && nrm > 0.0) {
            break;
        }
        y.iter_mut().for_each(|x| *x /= nrm);
    }
    y
}

/// LU with partial pivoting of `T - theta I` for symmetric tridiagonal `T`.
struct TridiagonalLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    fn factor(alpha: &[f64], beta: &[f64], theta: f64, tiny: f64) -> Self {
        let n = alpha.len();
        let mut d: Vec<f64> = alpha.iter().map(|a| a - theta).collect();
        let mut dl = beta.to_vec();
        let mut du = beta.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        Self { dl, d, du, du2, swapped }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n >= 2 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}
