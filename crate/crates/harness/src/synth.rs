//! Synthetic instances.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Normal, StandardNormal};
use spectra_cg::linalg::{nuclear_norm, DenseMatrix};
use spectra_cg::{MatCompDataset, QuadraticObjective, SpectraIterate};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub d1: usize,
    pub d2: usize,
    pub rank: usize,
    pub n: usize,
    pub noise: f64,
}

impl std::str::FromStr for SynthSpec {
    type Err = HarnessError;

    /// `d1,d2,rank,n,noise`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || HarnessError::Config(format!("synthetic spec {s:?} is not d1,d2,rank,n,noise"));
        if parts.len() != 5 {
            return Err(bad());
        }
        let int = |p: &str| p.parse::<usize>().map_err(|_| bad());
        Ok(Self {
            d1: int(parts[0])?,
            d2: int(parts[1])?,
            rank: int(parts[2])?,
            n: int(parts[3])?,
            noise: parts[4].parse().map_err(|_| bad())?,
        })
    }
}

/// Low-rank matrix completion instance: `Z* = A B^T` with standard normal
/// factors rescaled so that `||Z*||_* = theta_target`, and `n` distinct
/// uniformly chosen entries observed with additive `N(0, noise^2)` noise.
/// The dataset carries radius `theta_target`.
pub fn synth_matcomp<R: Rng + ?Sized>(
    spec: &SynthSpec,
    theta_target: f64,
    rng: &mut R,
) -> Result<(MatCompDataset, DenseMatrix)> {
    let SynthSpec { d1, d2, rank, n, noise } = *spec;
    if d1 == 0 || d2 == 0 {
        return Err(HarnessError::Config("synthetic dimensions must be positive".into()));
    }
    if rank == 0 || rank > d1.min(d2) {
        return Err(HarnessError::Config(format!("rank {rank} must lie in [1, min(d1, d2)]")));
    }
    if n > d1 * d2 {
        return Err(HarnessError::Config(format!("cannot observe {n} distinct entries of a {d1}x{d2} matrix")));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(HarnessError::Config(format!("noise level must be non-negative, got {noise}")));
    }
    if !(theta_target > 0.0 && theta_target.is_finite()) {
        return Err(HarnessError::Config(format!("theta must be positive, got {theta_target}")));
    }
    let a = DenseMatrix::from_fn(d1, rank, |_, _| rng.sample(StandardNormal));
    let b = DenseMatrix::from_fn(d2, rank, |_, _| rng.sample(StandardNormal));
    let raw = DenseMatrix::from_fn(d1, d2, |i, j| (0..rank).map(|k| a[(i, k)] * b[(j, k)]).sum());
    let nn = nuclear_norm(&raw)?;
    let truth = raw.scale(theta_target / nn);

    let noise_dist = Normal::new(0.0, noise).map_err(|e| HarnessError::Config(e.to_string()))?;
    let mut picks = index::sample(rng, d1 * d2, n).into_vec();
    picks.sort_unstable();
    let obs = picks
        .into_iter()
        .map(|k| {
            let (i, j) = (k / d2, k % d2);
            let eps = if noise > 0.0 { rng.sample(noise_dist) } else { 0.0 };
            (i, j, truth[(i, j)] + eps)
        })
        .collect();
    Ok((MatCompDataset::new(d1, d2, obs, theta_target)?, truth))
}

/// `f(X) = 1/2 ||X - M||_F^2` with `M = sum_j w_j u_j u_j^T`, orthonormal
/// random `u_j`, `w_rank = lambda_min` and the remaining weight split evenly.
/// Rank and `lambda_min` are attached as hints.
pub fn quadratic_instance<R: Rng + ?Sized>(
    dim: usize,
    rank: usize,
    lambda_min: f64,
    rng: &mut R,
) -> Result<QuadraticObjective> {
    if rank == 0 || rank > dim {
        return Err(HarnessError::Config(format!("rank {rank} must lie in [1, {dim}]")));
    }
    let weights: Vec<f64> = if rank == 1 {
        vec![1.0]
    } else {
        if !(lambda_min > 0.0 && lambda_min * rank as f64 <= 1.0) {
            return Err(HarnessError::Config(format!(
                "lambda_min {lambda_min} must lie in (0, 1/rank] for rank {rank}"
            )));
        }
        let rest = (1.0 - lambda_min) / (rank - 1) as f64;
        (0..rank).map(|j| if j + 1 == rank { lambda_min } else { rest }).collect()
    };
    let lmin = weights.iter().copied().fold(f64::INFINITY, f64::min);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(rank);
    while basis.len() < rank {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for q in &basis {
                let s = spectra_cg::linalg::dot(q, &v);
                spectra_cg::linalg::axpy(-s, q, &mut v);
            }
        }
        let n = spectra_cg::linalg::norm(&v);
        if n > 1e-8 {
            basis.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    let m = SpectraIterate::from_components(dim, weights.into_iter().zip(basis).collect())?;
    Ok(QuadraticObjective::new(m)?.with_hints(Some(rank), Some(lmin))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parse_spec() {
        let s: SynthSpec = "20, 15,2,100,0.1".parse().unwrap();
        assert_eq!(s, SynthSpec { d1: 20, d2: 15, rank: 2, n: 100, noise: 0.1 });
        assert!("1,2,3".parse::<SynthSpec>().is_err());
        assert!("1,2,x,4,0".parse::<SynthSpec>().is_err());
    }

    #[test]
    fn too_many_samples() {
        let spec = SynthSpec { d1: 2, d2: 2, rank: 1, n: 5, noise: 0.0 };
        assert!(synth_matcomp(&spec, 1.0, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn noiseless_entries_match_truth() {
        let spec = SynthSpec { d1: 6, d2: 5, rank: 2, n: 12, noise: 0.0 };
        let (ds, z) = synth_matcomp(&spec, 3.0, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(ds.len(), 12);
        for &(i, j, r) in &ds.observations {
            assert_eq!(r, z[(i, j)]);
        }
        assert!((nuclear_norm(&z).unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn quadratic_weights() {
        let f = quadratic_instance(10, 3, 0.1, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let mut w = f.target().weights();
        w.sort_by(f64::total_cmp);
        assert!((w[0] - 0.1).abs() < 1e-15 && (w[2] - 0.45).abs() < 1e-15);
        assert!(quadratic_instance(4, 5, 0.1, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
    }
}
