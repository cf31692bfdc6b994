#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use spectra_cg::linalg::{dense_eigendecomposition, random_unit, DenseMatrix, RankOneTerm, SymmetricOperator};
use spectra_cg::objectives::{LiftedMatComp, MatCompDataset, QuadraticObjective};
use spectra_cg::SpectraIterate;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn e(i: usize, d: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[i] = 1.0;
    v
}

pub fn orthonormal(d: usize, r: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(r);
    while out.len() < r {
        let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for q in &out {
                let s: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(x, qi)| *x -= s * qi);
            }
        }
        let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            out.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    out
}

/// `M = sum_j w_j u_j u_j^T` with orthonormal `u_j`; `lambda_min` on the last
/// direction and the rest split evenly.
pub fn quadratic_instance(d: usize, rank: usize, lambda_min: f64, seed: u64) -> QuadraticObjective {
    let mut r = rng(seed);
    let us = orthonormal(d, rank, &mut r);
    let weights: Vec<f64> = if rank == 1 {
        vec![1.0]
    } else {
        let rest = (1.0 - lambda_min) / (rank - 1) as f64;
        (0..rank).map(|j| if j + 1 == rank { lambda_min } else { rest }).collect()
    };
    let lmin = weights.iter().cloned().fold(f64::INFINITY, f64::min);
    let m = SpectraIterate::from_components(d, weights.into_iter().zip(us).collect()).unwrap();
    QuadraticObjective::new(m).unwrap().with_hints(Some(rank), Some(lmin)).unwrap()
}

pub fn random_iterate(d: usize, k: usize, rng: &mut ChaCha8Rng) -> SpectraIterate {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    let parts = raw.iter().map(|w| (w / s, random_unit(d, rng))).collect();
    SpectraIterate::from_components(d, parts).unwrap()
}

pub fn random_symmetric_unit(d: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let a = DenseMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal)).symmetrized();
    let n = a.frobenius_norm();
    a.scale(1.0 / n)
}

pub fn random_matcomp(d1: usize, d2: usize, n: usize, theta: f64, seed: u64) -> LiftedMatComp {
    let mut r = rng(seed);
    let idx = rand::seq::index::sample(&mut r, d1 * d2, n);
    let obs = idx
        .iter()
        .map(|k| (k / d2, k % d2, r.random_range(1.0..5.0)))
        .collect();
    LiftedMatComp::new(MatCompDataset::new(d1, d2, obs, theta).unwrap()).unwrap()
}

/// Random sparse symmetric operator with optional rank-one terms.
pub fn random_operator(d: usize, density: f64, rank_one: usize, rng: &mut ChaCha8Rng) -> SymmetricOperator {
    let mut trip = Vec::new();
    for r in 0..d {
        for c in r..d {
            if rng.random::<f64>() < density {
                trip.push((r, c, rng.random_range(-1.0..1.0)));
            }
        }
    }
    let terms = (0..rank_one)
        .map(|_| RankOneTerm::new(rng.random_range(-2.0..2.0), random_unit(d, rng)))
        .collect();
    SymmetricOperator::new(d, trip, terms).unwrap()
}

pub fn lambda_max(op: &SymmetricOperator) -> f64 {
    dense_eigendecomposition(&op.to_dense()).unwrap().values[0]
}

pub fn min_eigenvalue(m: &DenseMatrix) -> f64 {
    *dense_eigendecomposition(m).unwrap().values.last().unwrap()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
