//! Points of the spectrahedron kept as explicit convex combinations
//! `X = sum_i a_i x_i x_i^T` of unit rank-one matrices.

use std::sync::Arc;

use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, norm, DenseMatrix, SymmetricOperator, DEFAULT_ORACLE_CAP};

/// Weights at or below this are treated as zero and their component dropped.
pub const REMOVAL_THRESHOLD: f64 = 1e-12;

/// Weights are renormalized by their exact sum after this many updates.
pub const RENORMALIZE_EVERY: u64 = 1000;

pub const WEIGHT_SUM_TOL: f64 = 1e-9;
pub const UNIT_TOL: f64 = 1e-10;

/// Largest `cos_tol` accepted by [`SpectraIterate::compact`].
pub const MAX_COMPACTION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub vector: Arc<[f64]>,
}

/// Value-semantic iterate; every update returns a new iterate and component
/// vectors are shared between them.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectraIterate {
    dim: usize,
    components: Vec<Component>,
    updates: u64,
}

/// Effective step for a sampled weight `a`: `eta / 2` if `a >= eta`, else `a`.
pub fn eta_tilde(a: f64, eta: f64) -> f64 {
    if a >= eta {
        eta / 2.0
    } else {
        a
    }
}

/// Largest feasible away step for a component of weight `a < 1`.
pub fn max_away_step(a: f64) -> f64 {
    if a >= 1.0 {
        0.0
    } else {
        a / (1.0 - a)
    }
}

fn normalized(v: &[f64]) -> Result<Arc<[f64]>> {
    let n = norm(v);
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::InvalidArgument("cannot normalize a zero or non-finite vector".into()));
    }
    Ok(v.iter().map(|x| x / n).collect())
}

fn check_unit(v: &[f64]) -> Result<()> {
    let n = norm(v);
    if (n - 1.0).abs() > UNIT_TOL {
        return Err(Error::InvalidArgument(format!("vector has norm {n}, expected 1")));
    }
    Ok(())
}

impl SpectraIterate {
    /// `v v^T / ||v||^2`.
    pub fn rank_one(v: &[f64]) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        Ok(Self {
            dim: v.len(),
            components: vec![Component {
                weight: 1.0,
                vector: normalized(v)?,
            }],
            updates: 0,
        })
    }

    /// Builds an iterate from `(weight, unit vector)` pairs, validating every
    /// invariant.
    pub fn from_components(dim: usize, parts: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        let components = parts
            .into_iter()
            .map(|(weight, v)| Component {
                weight,
                vector: v.into(),
            })
            .collect();
        let it = Self {
            dim,
            components,
            updates: 0,
        };
        it.check_invariants()?;
        Ok(it)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.weight).collect()
    }

    pub fn min_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).fold(f64::INFINITY, f64::min)
    }

    pub fn check_invariants(&self) -> Result<()> {
        if self.dim == 0 || self.components.is_empty() {
            return Err(Error::InvalidArgument("iterate must have at least one component".into()));
        }
        let mut sum = 0.0;
        for (i, c) in self.components.iter().enumerate() {
            check_dim(self.dim, c.vector.len())?;
            if !(c.weight > 0.0 && c.weight.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "component {i} has non-positive weight {}",
                    c.weight
                )));
            }
            check_unit(&c.vector)?;
            sum += c.weight;
        }
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidArgument(format!("weights sum to {sum}, expected 1")));
        }
        Ok(())
    }

    pub fn materialize(&self) -> Result<DenseMatrix> {
        if self.dim > DEFAULT_ORACLE_CAP {
            return Err(Error::OracleCap {
                dim: self.dim,
                cap: DEFAULT_ORACLE_CAP,
            });
        }
        let mut m = DenseMatrix::zeros(self.dim, self.dim);
        for c in &self.components {
            m.add_outer(c.weight, &c.vector);
        }
        Ok(m)
    }

    /// `X . A = sum_i a_i x_i^T A x_i`.
    pub fn inner_with(&self, op: &SymmetricOperator) -> Result<f64> {
        check_dim(self.dim, op.dim())?;
        let mut acc = 0.0;
        for c in &self.components {
            acc += c.weight * op.quad_form(&c.vector)?;
        }
        Ok(acc)
    }

    /// Index drawn with probability proportional to the weights.
    pub fn sample_component<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total: f64 = self.components.iter().map(|c| c.weight).sum();
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        for (i, c) in self.components.iter().enumerate() {
            acc += c.weight;
            if u < acc {
                return i;
            }
        }
        self.components.len() - 1
    }

    /// `argmax_i x_i^T G x_i`, lowest index on ties.
    pub fn greedy_component(&self, grad: &SymmetricOperator) -> Result<usize> {
        check_dim(self.dim, grad.dim())?;
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (i, c) in self.components.iter().enumerate() {
            let q = grad.quad_form(&c.vector)?;
            if q > best_val {
                best = i;
                best_val = q;
            }
        }
        Ok(best)
    }

    /// `X + step (v v^T - x_i x_i^T)` with `step <= a_i`.
    pub fn apply_rank_one_step(&self, i: usize, v: &[f64], step: f64) -> Result<Self> {
        let a = self.weight_at(i)?;
        check_dim(self.dim, v.len())?;
        check_unit(v)?;
        if !(step >= 0.0) || step > a {
            return Err(Error::ContractViolation(format!(
                "rank-one step {step} exceeds the sampled weight {a}"
            )));
        }
        if step <= REMOVAL_THRESHOLD {
            return Ok(self.clone());
        }
        let mut components = self.components.clone();
        let residual = a - step;
        let mut new_weight = step;
        if residual <= REMOVAL_THRESHOLD {
            new_weight += residual;
            components.remove(i);
        } else {
            components[i].weight = residual;
        }
        components.push(Component {
            weight: new_weight,
            vector: v.into(),
        });
        Ok(self.next(components))
    }

    /// `(1 - eta) X + eta v v^T`.
    pub fn cg_global_step(&self, v: &[f64], eta: f64) -> Result<Self> {
        check_dim(self.dim, v.len())?;
        check_unit(v)?;
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidArgument(format!("global step {eta} outside [0, 1]")));
        }
        if eta == 0.0 {
            return Ok(self.clone());
        }
        let keep = 1.0 - eta;
        let mut components: Vec<Component> = Vec::with_capacity(self.components.len() + 1);
        let mut dropped = 0.0;
        for c in &self.components {
            let w = c.weight * keep;
            if w > REMOVAL_THRESHOLD {
                components.push(Component {
                    weight: w,
                    vector: Arc::clone(&c.vector),
                });
            } else {
                dropped += w;
            }
        }
        components.push(Component {
            weight: eta + dropped,
            vector: v.into(),
        });
        Ok(self.next(components))
    }

    /// `(1 + eta) X - eta x_i x_i^T`, for `eta <= a_i / (1 - a_i)`.
    pub fn apply_away_step(&self, i: usize, eta: f64) -> Result<Self> {
        let a = self.weight_at(i)?;
        if self.components.len() < 2 {
            return Err(Error::ContractViolation(
                "away step needs at least two components".into(),
            ));
        }
        let cap = max_away_step(a);
        if !(eta >= 0.0) || eta > cap {
            return Err(Error::ContractViolation(format!(
                "away step {eta} exceeds the feasible cap {cap}"
            )));
        }
        if eta == 0.0 {
            return Ok(self.clone());
        }
        let grow = 1.0 + eta;
        let mut components = Vec::with_capacity(self.components.len());
        for (j, c) in self.components.iter().enumerate() {
            let w = if j == i { a * grow - eta } else { c.weight * grow };
            if w > REMOVAL_THRESHOLD {
                components.push(Component {
                    weight: w,
                    vector: Arc::clone(&c.vector),
                });
            }
        }
        let sum: f64 = components.iter().map(|c| c.weight).sum();
        for c in &mut components {
            c.weight /= sum;
        }
        Ok(self.next(components))
    }

    /// Merges components whose directions satisfy `|x_i . x_j| >= 1 - cos_tol`,
    /// summing weights and keeping the direction of the heavier one.
    pub fn compact(&self, cos_tol: f64) -> Result<Self> {
        if !(0.0..=MAX_COMPACTION_TOL).contains(&cos_tol) {
            return Err(Error::InvalidArgument(format!(
                "compaction tolerance {cos_tol} outside [0, {MAX_COMPACTION_TOL}]"
            )));
        }
        let mut merged: Vec<Component> = Vec::with_capacity(self.components.len());
        for c in &self.components {
            let hit = merged
                .iter()
                .position(|m| dot(&m.vector, &c.vector).abs() >= 1.0 - cos_tol);
            match hit {
                Some(j) => {
                    let m = &mut merged[j];
                    if c.weight > m.weight {
                        m.vector = Arc::clone(&c.vector);
                    }
                    m.weight += c.weight;
                }
                None => merged.push(c.clone()),
            }
        }
        Ok(Self {
            dim: self.dim,
            components: merged,
            updates: self.updates,
        })
    }

    fn weight_at(&self, i: usize) -> Result<f64> {
        self.components
            .get(i)
            .map(|c| c.weight)
            .ok_or_else(|| Error::InvalidArgument(format!("component index {i} out of range")))
    }

    fn next(&self, mut components: Vec<Component>) -> Self {
        let updates = self.updates + 1;
        if updates % RENORMALIZE_EVERY == 0 {
            let sum: f64 = components.iter().map(|c| c.weight).sum();
            for c in &mut components {
                c.weight /= sum;
            }
        }
        Self {
            dim: self.dim,
            components,
            updates,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense_eigendecomposition;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn e(i: usize, d: usize) -> Vec<f64> {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        v
    }

    fn random_unit(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        crate::linalg::random_unit(d, rng)
    }

    fn random_iterate(d: usize, k: usize, rng: &mut ChaCha8Rng) -> SpectraIterate {
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
        let s: f64 = raw.iter().sum();
        let parts = raw.iter().map(|w| (w / s, random_unit(d, rng))).collect();
        SpectraIterate::from_components(d, parts).unwrap()
    }

    fn max_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
        a.sub(b).unwrap().max_abs()
    }

    #[test]
    fn materialize_examples() {
        let one = SpectraIterate::rank_one(&e(0, 2)).unwrap();
        assert_eq!(one.materialize().unwrap(), DenseMatrix::diag(&[1.0, 0.0]));
        let two = SpectraIterate::from_components(2, vec![(0.5, e(0, 2)), (0.5, e(1, 2))]).unwrap();
        assert_eq!(two.materialize().unwrap(), DenseMatrix::diag(&[0.5, 0.5]));
    }

    #[test]
    fn materialized_random_iterate_is_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let it = random_iterate(8, 5, &mut rng);
        let m = it.materialize().unwrap();
        assert!((m.trace() - 1.0).abs() <= 1e-9);
        let eig = dense_eigendecomposition(&m).unwrap();
        assert!(*eig.values.last().unwrap() >= -1e-10);
    }

    #[test]
    fn invalid_components_rejected() {
        assert!(SpectraIterate::from_components(2, vec![(0.5, e(0, 2))]).is_err());
        assert!(SpectraIterate::from_components(2, vec![(1.0, vec![1.0, 1.0])]).is_err());
        assert!(SpectraIterate::from_components(2, vec![(1.5, e(0, 2)), (-0.5, e(1, 2))]).is_err());
        assert!(SpectraIterate::rank_one(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn sampling_single_component() {
        let it = SpectraIterate::rank_one(&e(0, 3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!((0..100).all(|_| it.sample_component(&mut rng) == 0));
    }

    #[test]
    fn sampling_frequencies() {
        let it = SpectraIterate::from_components(2, vec![(0.5, e(0, 2)), (0.5, e(1, 2))]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let hits = (0..10_000).filter(|_| it.sample_component(&mut rng) == 0).count();
        let freq = hits as f64 / 10_000.0;
        assert!((0.47..=0.53).contains(&freq), "{freq}");

        let small = 1e-3;
        let it = SpectraIterate::from_components(2, vec![(1.0 - small, e(0, 2)), (small, e(1, 2))])
            .unwrap();
        let n = 200_000;
        let hits = (0..n).filter(|_| it.sample_component(&mut rng) == 1).count() as f64;
        let sd = (n as f64 * small * (1.0 - small)).sqrt();
        assert!((hits - n as f64 * small).abs() <= 3.0 * sd, "{hits}");
    }

    #[test]
    fn greedy_examples() {
        let it = SpectraIterate::from_components(2, vec![(0.5, e(0, 2)), (0.5, e(1, 2))]).unwrap();
        let g = SymmetricOperator::new(2, vec![(0, 0, 1.0), (1, 1, 2.0)], vec![]).unwrap();
        assert_eq!(it.greedy_component(&g).unwrap(), 1);
        let zero = SymmetricOperator::zero(2).unwrap();
        assert_eq!(it.greedy_component(&zero).unwrap(), 0);
    }

    #[test]
    fn greedy_matches_dense_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = 10;
        let it = random_iterate(d, 6, &mut rng);
        let g = DenseMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0)).symmetrized();
        let op = SymmetricOperator::from_dense(&g).unwrap();
        let best = it
            .components()
            .iter()
            .map(|c| g.quad_form(&c.vector).unwrap())
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (i, q)| if q > b.1 { (i, q) } else { b });
        assert_eq!(it.greedy_component(&op).unwrap(), best.0);
    }

    #[test]
    fn eta_tilde_rule() {
        assert_eq!(eta_tilde(0.5, 0.4), 0.2);
        assert_eq!(eta_tilde(0.1, 0.4), 0.1);
        assert_eq!(eta_tilde(0.3, 0.3), 0.15);
    }

    #[test]
    fn rank_one_step_examples() {
        let it = SpectraIterate::rank_one(&e(0, 2)).unwrap();
        let half = it.apply_rank_one_step(0, &e(1, 2), 0.5).unwrap();
        assert_eq!(half.weights(), vec![0.5, 0.5]);
        assert_eq!(&*half.components()[1].vector, &e(1, 2)[..]);

        let full = it.apply_rank_one_step(0, &e(1, 2), 1.0).unwrap();
        assert_eq!(full.len(), 1);
        assert_eq!(full.weights(), vec![1.0]);
        assert_eq!(&*full.components()[0].vector, &e(1, 2)[..]);

        assert!(matches!(
            half.apply_rank_one_step(0, &e(1, 2), 0.6),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn global_step_examples() {
        let it = SpectraIterate::rank_one(&e(0, 2)).unwrap();
        assert_eq!(it.cg_global_step(&e(1, 2), 0.5).unwrap().weights(), vec![0.5, 0.5]);
        let all = it.cg_global_step(&e(1, 2), 1.0).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(&*all.components()[0].vector, &e(1, 2)[..]);
        assert_eq!(it.cg_global_step(&e(1, 2), 0.0).unwrap(), it);
    }

    #[test]
    fn away_step_examples() {
        let it = SpectraIterate::from_components(2, vec![(0.5, e(0, 2)), (0.5, e(1, 2))]).unwrap();
        let out = it.apply_away_step(1, 1.0).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out.weights(), vec![1.0]);
        assert_eq!(&*out.components()[0].vector, &e(0, 2)[..]);
        assert_eq!(it.apply_away_step(1, 0.0).unwrap(), it);
        assert!(matches!(it.apply_away_step(1, 1.5), Err(Error::ContractViolation(_))));
        let single = SpectraIterate::rank_one(&e(0, 2)).unwrap();
        assert!(single.apply_away_step(0, 0.0).is_err());
    }

    #[test]
    fn compaction_examples() {
        let dup = SpectraIterate::from_components(2, vec![(0.3, e(0, 2)), (0.7, e(0, 2))]).unwrap();
        let c = dup.compact(1e-6).unwrap();
        assert_eq!(c.len(), 1);
        assert!((c.weights()[0] - 1.0).abs() < 1e-15);

        let orth = SpectraIterate::from_components(2, vec![(0.3, e(0, 2)), (0.7, e(1, 2))]).unwrap();
        assert_eq!(orth.compact(1e-6).unwrap(), orth);

        let angle: f64 = 1e-8;
        let near = vec![angle.cos(), angle.sin()];
        let it = SpectraIterate::from_components(2, vec![(0.4, e(0, 2)), (0.6, near)]).unwrap();
        let c = it.compact(1e-6).unwrap();
        assert_eq!(c.len(), 1);
        let moved = it.materialize().unwrap().sub(&c.materialize().unwrap()).unwrap();
        assert!(moved.frobenius_norm() <= 4.0 * 1e-6);
        assert!(it.compact(2e-6).is_err());
    }

    #[test]
    fn observation_weight_bound_over_long_runs() {
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = 6;
            let mut it = SpectraIterate::rank_one(&random_unit(d, &mut rng)).unwrap();
            for t in 1..=200u32 {
                let eta = 18.0 / (t as f64 + 8.0);
                let i = it.sample_component(&mut rng);
                let step = eta_tilde(it.components()[i].weight, eta);
                it = it.apply_rank_one_step(i, &random_unit(d, &mut rng), step).unwrap();
                assert!(it.min_weight() >= eta / 2.0, "t={t}");
                it.check_invariants().unwrap();
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn rank_one_step_matches_dense(seed in any::<u64>(), d in 2usize..12, k in 1usize..6, frac in 0.0f64..=1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let it = random_iterate(d, k, &mut rng);
            let i = rng.random_range(0..it.len());
            let x = it.components()[i].vector.clone();
            let step = frac * it.components()[i].weight;
            let v = random_unit(d, &mut rng);
            let after = it.apply_rank_one_step(i, &v, step).unwrap();
            after.check_invariants().unwrap();
            prop_assert!(after.len() <= it.len() + 1);
            let mut expect = it.materialize().unwrap();
            if step > REMOVAL_THRESHOLD {
                expect.add_outer(step, &v);
                expect.add_outer(-step, &x);
            }
            prop_assert!(max_diff(&expect, &after.materialize().unwrap()) <= 1e-12);
        }

        #[test]
        fn global_step_matches_dense(seed in any::<u64>(), d in 1usize..12, k in 1usize..6, eta in 0.0f64..=1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let it = random_iterate(d, k, &mut rng);
            let v = random_unit(d, &mut rng);
            let after = it.cg_global_step(&v, eta).unwrap();
            after.check_invariants().unwrap();
            prop_assert!(after.len() <= it.len() + 1);
            let mut expect = it.materialize().unwrap().scale(1.0 - eta);
            expect.add_outer(eta, &v);
            prop_assert!(max_diff(&expect, &after.materialize().unwrap()) <= 1e-12);
        }

        #[test]
        fn away_step_matches_dense(seed in any::<u64>(), d in 2usize..12, k in 2usize..6, frac in 0.0f64..=1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let it = random_iterate(d, k, &mut rng);
            let i = rng.random_range(0..it.len());
            let x = it.components()[i].vector.clone();
            let eta = frac * max_away_step(it.components()[i].weight);
            let after = it.apply_away_step(i, eta).unwrap();
            after.check_invariants().unwrap();
            let mut expect = it.materialize().unwrap().scale(1.0 + eta);
            expect.add_outer(-eta, &x);
            prop_assert!(max_diff(&expect, &after.materialize().unwrap()) <= 1e-12);
        }

        // Merging two unit directions at |cos| >= 1 - tol moves the matrix by
        // at most w_light * ||x x^T - y y^T||_F = w_light * sqrt(2 (1 - cos^2)).
        #[test]
        fn compaction_perturbation_bounded(seed in any::<u64>(), d in 2usize..8, tol_exp in -12.0f64..-6.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let tol = 10f64.powf(tol_exp);
            let x = random_unit(d, &mut rng);
            let p = random_unit(d, &mut rng);
            let along = dot(&p, &x);
            let mut perp: Vec<f64> = p.iter().zip(&x).map(|(pi, xi)| pi - along * xi).collect();
            let pn = norm(&perp);
            perp.iter_mut().for_each(|v| *v /= pn);
            let angle = (1.0 - 0.5 * tol).acos();
            let y: Vec<f64> = x.iter().zip(&perp).map(|(a, b)| angle.cos() * a + angle.sin() * b).collect();
            let w = rng.random_range(0.05..0.95);
            let it = SpectraIterate::from_components(d, vec![(w, x), (1.0 - w, y)]).unwrap();
            let c = it.compact(tol).unwrap();
            c.check_invariants().unwrap();
            prop_assert_eq!(c.len(), 1);
            let moved = it.materialize().unwrap().sub(&c.materialize().unwrap()).unwrap().frobenius_norm();
            let light = w.min(1.0 - w);
            prop_assert!(moved <= light * (2.0 * tol).sqrt() * 1.0001 + 1e-15);
        }
    }
}
