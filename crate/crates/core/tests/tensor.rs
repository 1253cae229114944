mod common;

use common::{c, dense_exp, dense_kronecker_sum, matvec, real_dist, rel_dist};
use degensemi_core::grid::{Grid1D, TensorGrid};
use degensemi_core::linalg::{real_parts, sup_norm};
use degensemi_core::operator1d::{assemble_1d, Generator, GradientWeight};
use degensemi_core::tensor::{
    directional_weighted_gradient, tensor_resolvent, tensor_semigroup, TensorOperator,
};
use degensemi_core::verify::sector::minkowski_defect;
use degensemi_core::C64;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn operator(sizes: &[usize], drifts: &[f64]) -> TensorOperator {
    let factors = sizes
        .iter()
        .zip(drifts)
        .enumerate()
        .map(|(i, (&n, &b))| {
            let g = Grid1D::graded(1.0, n, 2.0).unwrap();
            assemble_1d(&g, move |x| 1.0 + 0.3 * (i as f64 + 1.0) * x, b).unwrap()
        })
        .collect();
    TensorOperator::kronecker(factors).unwrap()
}

fn factor_dense(topr: &TensorOperator) -> Vec<DMatrix<f64>> {
    topr.factors().unwrap().iter().map(|f| f.matrix().to_dense()).collect()
}

fn random(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

#[test]
fn materialized_matrix_matches_kronecker_sum() {
    let a = operator(&[5, 7, 4], &[0.4, 0.0, 1.2]);
    let reference = dense_kronecker_sum(&factor_dense(&a));
    let m = a.matrix();
    let mut rng = ChaCha8Rng::seed_from_u64(0xF001);
    let n = a.size();
    for k in 0..100 {
        // Half the samples on the stencil, half anywhere.
        let row = rng.gen_range(0..n);
        let col = if k % 2 == 0 {
            let cols: Vec<usize> = m.row(row).map(|(j, _)| j).collect();
            cols[rng.gen_range(0..cols.len())]
        } else {
            rng.gen_range(0..n)
        };
        assert_eq!(m.get(row, col), a.kronecker_entry(row, col).unwrap());
        assert!((m.get(row, col) - reference[(row, col)]).abs() <= 1e-12 * reference[(row, col)].abs().max(1.0));
    }
    assert!(sup_norm(&a.apply(&vec![1.0; n])) < 1e-12);
}

#[test]
fn split_semigroup_matches_dense_exponential() {
    for (sizes, drifts) in [(vec![6, 6], vec![0.5, 0.0]), (vec![8, 8, 8], vec![0.2, 0.7, 0.0])] {
        let a = operator(&sizes, &drifts);
        let full = dense_kronecker_sum(&factor_dense(&a));
        let u0 = random(a.size(), 5);
        for t in [0.01, 0.2, 1.0] {
            let split = tensor_semigroup(&a, t, &u0).unwrap();
            let dense = matvec(&dense_exp(&full, t), &u0);
            let err = real_dist(&split, &dense);
            assert!(err <= 1e-10, "{sizes:?} t = {t}: {err:.2e}");
        }
    }
}

#[test]
fn separable_data_evolve_separately() {
    let a = operator(&[6, 6], &[0.3, 0.9]);
    let x = a.grid().axis(0).nodes().to_vec();
    let f: Vec<f64> = x.iter().map(|v| (3.0 * v).cos()).collect();
    let u0: Vec<f64> = a.grid().sample(|p| (3.0 * p[0]).cos() * (3.0 * p[1]).cos());
    let t = 0.3;
    let fs = factor_dense(&a);
    let t1 = matvec(&dense_exp(&fs[0], t), &f);
    let t2 = matvec(&dense_exp(&fs[1], t), &f);
    let v = tensor_semigroup(&a, t, &u0).unwrap();
    for k in 0..a.size() {
        let m = a.grid().multi(k);
        assert!((v[k] - t1[m[0]] * t2[m[1]]).abs() < 1e-10);
    }
}

#[test]
fn semigroup_trivial_cases() {
    let a = operator(&[9, 7], &[0.0, 1.0]);
    let u0 = random(a.size(), 1);
    assert_eq!(tensor_semigroup(&a, 0.0, &u0).unwrap(), u0);
    let v = tensor_semigroup(&a, 2.5, &vec![1.0; a.size()]).unwrap();
    assert!(v.iter().all(|x| (x - 1.0).abs() < 1e-12));
    assert!(tensor_semigroup(&a, 1.0, &[1.0; 5]).is_err());
}

#[test]
fn resolvent_of_constants_and_positivity() {
    let a = operator(&[10, 12], &[0.6, 0.2]);
    let n = a.size();
    let v = tensor_resolvent(&a, C64::new(5.0, 0.0), &c(&vec![1.0; n])).unwrap();
    assert!(v.iter().all(|z| (z - 0.2).norm() < 1e-12));
    let f: Vec<f64> = random(n, 2).iter().map(|x| x.abs()).collect();
    for lambda in [0.5, 5.0, 50.0] {
        let v = real_parts(&tensor_resolvent(&a, C64::new(lambda, 0.0), &c(&f)).unwrap());
        assert!(v.iter().all(|&x| x >= -1e-12));
    }
}

#[test]
fn resolvent_matches_laplace_quadrature() {
    // ∫₀^∞ e^{−λt} T(t) f dt on 200 log-spaced nodes, trapezoidal in log t,
    // with T(t) the dense exponential of the full Kronecker sum.
    let a = operator(&[8, 8], &[0.5, 0.0]);
    let full = dense_kronecker_sum(&factor_dense(&a));
    let f = a.grid().sample(|p| (2.0 * p[0]).cos() + p[1] * p[1]);
    let lambda = 2.0;
    let (s0, s1) = ((1e-8f64).ln(), (40.0 / lambda as f64).ln());
    let m = 200;
    let ds = (s1 - s0) / (m - 1) as f64;
    let mut acc = f.iter().map(|x| x * 1e-8).collect::<Vec<f64>>();
    for k in 0..m {
        let t = (s0 + ds * k as f64).exp();
        let w = if k == 0 || k == m - 1 { 0.5 } else { 1.0 } * ds * t * (-lambda * t).exp();
        let tf = matvec(&dense_exp(&full, t), &f);
        for (a, v) in acc.iter_mut().zip(tf) {
            *a += w * v;
        }
    }
    let r = tensor_resolvent(&a, C64::new(lambda, 0.0), &c(&f)).unwrap();
    let err = rel_dist(&r, &c(&acc));
    assert!(err <= 2e-3, "Laplace quadrature distance {err:.2e}");
}

#[test]
fn axis_permutation_commutes() {
    let a = operator(&[7, 9], &[0.4, 1.1]);
    let f = a.factors().unwrap();
    let swapped = TensorOperator::kronecker(vec![f[1].clone(), f[0].clone()]).unwrap();
    let u0 = random(a.size(), 9);
    let swap = |u: &[f64], from: &TensorGrid, to: &TensorGrid| -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        for (k, &v) in u.iter().enumerate() {
            let m = from.multi(k);
            out[to.flat(&[m[1], m[0]])] = v;
        }
        out
    };
    let v = tensor_semigroup(&a, 0.4, &u0).unwrap();
    let w = tensor_semigroup(&swapped, 0.4, &swap(&u0, a.grid(), swapped.grid())).unwrap();
    assert!(real_dist(&swap(&v, a.grid(), swapped.grid()), &w) <= 1e-13);
}

#[test]
fn spectrum_is_the_minkowski_sum() {
    assert!(minkowski_defect(&operator(&[6, 6], &[0.5, 0.0])).unwrap() <= 1e-8);
    assert!(minkowski_defect(&operator(&[6, 5, 4], &[0.1, 0.0, 0.8])).unwrap() <= 1e-8);
}

#[test]
fn directional_gradient_examples() {
    let g = Grid1D::uniform(1.0, 11).unwrap();
    let grid = TensorGrid::new(vec![g.clone(), g]).unwrap();
    let w = directional_weighted_gradient(&vec![2.0; 121], &grid, 0, GradientWeight::SqrtX);
    assert_eq!(w.sup, 0.0);
    let u = grid.sample(|p| p[0]);
    let w = directional_weighted_gradient(&u, &grid, 0, GradientWeight::SqrtX);
    assert!((w.sup - 0.95f64.sqrt()).abs() < 1e-12);
    assert_eq!(directional_weighted_gradient(&u, &grid, 1, GradientWeight::SqrtX).sup, 0.0);
}

fn scaled_gradient(a: &TensorOperator, u0: &[f64], t: f64) -> f64 {
    let v = tensor_semigroup(a, t, u0).unwrap();
    (0..a.dim())
        .map(|i| directional_weighted_gradient(&v, a.grid(), i, GradientWeight::SqrtX).sup)
        .fold(0.0, f64::max)
        * t.sqrt()
        / sup_norm(u0)
}

#[test]
fn gradient_bound_fitted_coarse_holds_fine() {
    let ts: Vec<f64> = (0..13).map(|k| 1e-4 * 10f64.powf(k as f64 / 3.0)).collect();
    let coarse = operator(&[12, 12], &[0.5, 0.0]);
    let k = (0..10)
        .flat_map(|s| {
            let u0 = random(coarse.size(), 100 + s);
            ts.iter().map(move |&t| (u0.clone(), t)).collect::<Vec<_>>()
        })
        .map(|(u0, t)| scaled_gradient(&coarse, &u0, t))
        .fold(0.0, f64::max);
    let fine = operator(&[20, 20], &[0.5, 0.0]);
    for s in 0..20 {
        let u0 = random(fine.size(), 200 + s);
        let v = scaled_gradient(&fine, &u0, 0.05);
        assert!(v <= 1.25 * k, "probe {s}: {v} against fitted {k}");
        // No growth as t → 0.
        let small = ts.iter().filter(|&&t| t < 1e-2).map(|&t| scaled_gradient(&fine, &u0, t));
        for q in small {
            assert!(q <= 1.25 * k, "probe {s}: {q} against fitted {k}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn constants_under_any_shift(re in 0.05f64..50.0, im in -50.0f64..50.0, cst in -3.0f64..3.0) {
        let a = operator(&[6, 5, 4], &[0.2, 0.0, 0.9]);
        let lambda = C64::new(re, im);
        let v = tensor_resolvent(&a, lambda, &c(&vec![cst; a.size()])).unwrap();
        let expect = C64::new(cst, 0.0) / lambda;
        for z in v {
            prop_assert!((z - expect).norm() <= 1e-12 * (1.0 + expect.norm()));
        }
    }
}
