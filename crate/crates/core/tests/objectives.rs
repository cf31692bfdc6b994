mod common;

use common::*;
use rand::Rng;
use spectra_cg::linalg::{nuclear_norm, DenseMatrix};
use spectra_cg::objectives::{
    extract_z, matcomp_value, strong_convexity_gap_bound, LiftedMatComp, MatCompDataset, Objective,
};
use spectra_cg::SpectraIterate;

const FD_STEP: f64 = 1e-5;

/// Central differences of the value along random symmetric unit directions
/// against `G . D`, evaluated at a random feasible point.
fn check_gradient(f: &dyn Objective, seed: u64) {
    let mut r = rng(seed);
    let d = f.dim();
    let x = random_iterate(d, 4, &mut r);
    let (value, grad) = f.value_grad(&x).unwrap();
    let xd = x.materialize().unwrap();
    assert!((value - f.value_dense(&xd).unwrap()).abs() <= 1e-12 * value.abs().max(1.0));
    let g = grad.to_dense();
    let gd = f.gradient_dense(&xd).unwrap();
    assert!(g.sub(&gd).unwrap().max_abs() <= 1e-12 * gd.max_abs().max(1.0));
    for _ in 0..20 {
        let dir = random_symmetric_unit(d, &mut r);
        let plus = f.value_dense(&xd.add(&dir.scale(FD_STEP)).unwrap()).unwrap();
        let minus = f.value_dense(&xd.sub(&dir.scale(FD_STEP)).unwrap()).unwrap();
        let fd = (plus - minus) / (2.0 * FD_STEP);
        let an = g.frobenius_inner(&dir).unwrap();
        let rel = (fd - an).abs() / an.abs().max(fd.abs()).max(1e-300);
        assert!(rel <= 1e-5, "fd {fd} vs analytic {an} (rel {rel})");
    }
}

#[test]
fn quadratic_gradient_matches_finite_differences() {
    check_gradient(&quadratic_instance(8, 3, 0.1, 1), 2);
    // More components than the dimension exercises the dense path.
    let f = quadratic_instance(3, 2, 0.4, 3);
    let mut r = rng(4);
    let x = random_iterate(3, 6, &mut r);
    let (v, g) = f.value_grad(&x).unwrap();
    let xd = x.materialize().unwrap();
    assert!((v - f.value_dense(&xd).unwrap()).abs() <= 1e-14);
    assert!(g.to_dense().sub(&f.gradient_dense(&xd).unwrap()).unwrap().max_abs() <= 1e-14);
}

#[test]
fn lifted_gradient_matches_finite_differences() {
    check_gradient(&random_matcomp(4, 3, 6, 2.0, 5), 6);
    check_gradient(&random_matcomp(5, 6, 20, 7.0, 7), 8);
}

#[test]
fn lifted_value_equals_direct_evaluation() {
    let f = random_matcomp(4, 3, 6, 3.0, 9);
    let mut r = rng(10);
    for _ in 0..20 {
        let x = random_iterate(7, 5, &mut r);
        let z = extract_z(&x, 4, 3, 3.0).unwrap();
        let z_obs: Vec<f64> = f.data().observations.iter().map(|&(i, j, _)| z[(i, j)]).collect();
        let direct = matcomp_value(f.data(), &z_obs).unwrap();
        let lifted = f.value(&x).unwrap();
        assert!((direct - lifted).abs() <= 1e-12 * direct.max(1.0));
        let (_, g) = f.value_grad(&x).unwrap();
        assert_eq!(g.nnz(), 2 * f.data().len());
    }
}

#[test]
fn matcomp_value_matches_dense_evaluation() {
    let ds = MatCompDataset::new(3, 4, vec![(0, 1, 2.0), (2, 3, -1.0), (1, 0, 0.5)], 1.0).unwrap();
    let mut r = rng(11);
    let z = DenseMatrix::from_fn(3, 4, |_, _| r.random_range(-2.0..2.0));
    let mut brute = 0.0;
    for i in 0..3 {
        for j in 0..4 {
            if let Some(&(_, _, rating)) = ds.observations.iter().find(|o| o.0 == i && o.1 == j) {
                brute += 0.5 * (z[(i, j)] - rating).powi(2);
            }
        }
    }
    let z_obs: Vec<f64> = ds.observations.iter().map(|&(i, j, _)| z[(i, j)]).collect();
    assert!((matcomp_value(&ds, &z_obs).unwrap() - brute).abs() < 1e-14);
}

#[test]
fn extracted_matrix_is_in_the_nuclear_ball() {
    let mut r = rng(12);
    for _ in 0..20 {
        let x = random_iterate(9, 6, &mut r);
        let z = extract_z(&x, 5, 4, 3.0).unwrap();
        assert!(nuclear_norm(&z).unwrap() <= 3.0 + 1e-9);
    }
}

#[test]
fn value_does_not_depend_on_the_decomposition() {
    // Same matrix written with two different decompositions.
    let s = 0.5f64.sqrt();
    let a = SpectraIterate::from_components(2, vec![(0.5, e(0, 2)), (0.5, e(1, 2))]).unwrap();
    let b = SpectraIterate::from_components(2, vec![(0.5, vec![s, s]), (0.5, vec![s, -s])]).unwrap();
    let mc = LiftedMatComp::new(MatCompDataset::new(1, 1, vec![(0, 0, 1.0)], 2.0).unwrap()).unwrap();
    assert!((mc.value(&a).unwrap() - mc.value(&b).unwrap()).abs() < 1e-15);
    let q = quadratic_instance(2, 1, 1.0, 13);
    assert!((q.value(&a).unwrap() - q.value(&b).unwrap()).abs() < 1e-15);
}

fn check_convex_and_smooth(f: &dyn Objective, seed: u64) {
    let mut r = rng(seed);
    let d = f.dim();
    let beta = f.smoothness_certificate();
    for _ in 0..30 {
        let x = random_iterate(d, 3, &mut r).materialize().unwrap();
        let y = random_iterate(d, 3, &mut r).materialize().unwrap();
        let lam: f64 = r.random();
        let mid = x.scale(lam).add(&y.scale(1.0 - lam)).unwrap();
        let fx = f.value_dense(&x).unwrap();
        let fy = f.value_dense(&y).unwrap();
        assert!(f.value_dense(&mid).unwrap() <= lam * fx + (1.0 - lam) * fy + 1e-10);
        let diff = y.sub(&x).unwrap();
        let lin = fx + diff.frobenius_inner(&f.gradient_dense(&x).unwrap()).unwrap();
        let bound = lin + 0.5 * beta * diff.frobenius_norm().powi(2);
        assert!(fy <= bound + 1e-10 * bound.abs().max(1.0));
    }
}

#[test]
fn convexity_and_smoothness_certificates() {
    check_convex_and_smooth(&quadratic_instance(6, 2, 0.3, 14), 15);
    check_convex_and_smooth(&random_matcomp(3, 4, 7, 5.0, 16), 17);
}

#[test]
fn distance_bound_dominates_true_distance() {
    let f = quadratic_instance(8, 3, 0.2, 18);
    let m = f.target().materialize().unwrap();
    let mut r = rng(19);
    for _ in 0..20 {
        let x = random_iterate(8, 3, &mut r);
        let gap = f.value(&x).unwrap();
        let bound = strong_convexity_gap_bound(gap, 1.0).unwrap();
        let dist = x.materialize().unwrap().sub(&m).unwrap().frobenius_norm();
        assert!(bound >= dist - 1e-12);
    }
}
