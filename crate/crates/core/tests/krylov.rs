mod common;

use common::*;
use krylov_defect::krylov::{krylov_decompose_until, lanczos_until};
use krylov_defect::prelude::*;
use nalgebra::DMatrix;
use rand::Rng;

fn random_hermitian(n: usize, seed: u64) -> DMatrix<C64> {
    let mut r = rng(seed);
    let a = DMatrix::from_fn(n, n, |_, _| c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)));
    (&a + a.adjoint()) * c(0.5, 0.0)
}

#[test]
fn arnoldi_on_hermitian_input_is_tridiagonal() {
    let a = random_hermitian(100, 1);
    let op = LinearOperator::from_dense(a, Structure::Hermitian).unwrap();
    let v = random_vector(100, &mut rng(2));
    let dec = arnoldi(&op, &v, 30, &OrthPolicy::full()).unwrap();
    let h = dec.h();
    let limit = 1e-10 * op.norm2_estimate();
    for j in 0..30usize {
        for i in 0..j.saturating_sub(1) {
            assert!(h[(i, j)].norm() <= limit, "H[{i},{j}] = {}", h[(i, j)]);
        }
    }
}

#[test]
fn lanczos_agrees_with_arnoldi() {
    let a = random_hermitian(80, 3);
    let op = LinearOperator::from_dense(a, Structure::Hermitian).unwrap();
    let v = random_vector(80, &mut rng(4));
    let l = lanczos(&op, &v, 25, &OrthPolicy::full()).unwrap();
    let ar = arnoldi(&op, &v, 25, &OrthPolicy::full()).unwrap();
    assert!((l.h() - ar.h()).norm() <= 1e-10);
    assert!((l.h_next() - ar.h_next()).abs() <= 1e-10);
}

#[test]
fn ritz_values_stay_in_the_spectral_interval() {
    let n = 300;
    let op = build_laplacian_1d(n).unwrap();
    let lo = -4.0 * (std::f64::consts::PI * n as f64 / (2.0 * (n as f64 + 1.0))).sin().powi(2);
    let hi = -4.0 * (std::f64::consts::PI / (2.0 * (n as f64 + 1.0))).sin().powi(2);
    let slack = 1e-8 * 4.0;
    for seed in 0..5 {
        let v = random_vector(n, &mut rng(seed));
        for (op, rotate) in [(op.clone(), false), (op.scaled(c(0.0, 1.0)).unwrap(), true)] {
            let dec = krylov_decompose(&op, &v, 40, &OrthPolicy::full()).unwrap();
            for z in dec.ritz_values().unwrap() {
                // i B has Ritz values i * (Ritz values of B).
                let x = if rotate { z.im } else { z.re };
                let other = if rotate { z.re } else { z.im };
                assert!(x >= lo - slack && x <= hi + slack, "{z}");
                assert!(other.abs() <= slack, "{z}");
            }
        }
    }
}

#[test]
fn skew_path_is_a_valid_decomposition_of_a() {
    let (b, v) = build_schrodinger_double_well(200).unwrap();
    let op = b.scaled(c(0.0, -1.0)).unwrap();
    let dec = krylov_decompose(&op, &v, 30, &OrthPolicy::full()).unwrap();
    assert!(decomposition_residual(&dec, &op).unwrap() <= 1e-10 * op.norm2_estimate());
    assert!(orthogonality_level(&dec) <= 1e-12);
    for z in dec.ritz_values().unwrap() {
        assert_eq!(z.re, 0.0);
    }
}

#[test]
fn stronger_orthogonalization_keeps_the_basis_more_orthogonal() {
    // Non-normal operator, long recurrence: single-pass MGS drifts.
    let op = build_convection_diffusion_2d(30, 300.0).unwrap();
    let mean_log = |scheme: OrthScheme| {
        let policy = OrthPolicy { scheme, ..OrthPolicy::default() };
        (0..20u64)
            .map(|s| {
                let v = random_vector(op.n(), &mut rng(100 + s));
                let dec = arnoldi(&op, &v, 60, &policy).unwrap();
                let res = decomposition_residual(&dec, &op).unwrap();
                assert!(res <= 1e-12 * op.norm2_estimate(), "{scheme:?}: residual {res:e}");
                orthogonality_level(&dec).log10()
            })
            .sum::<f64>()
            / 20.0
    };
    let (a, b, cc) = (mean_log(OrthScheme::Mgs), mean_log(OrthScheme::MgsReorth), mean_log(OrthScheme::FullReorth));
    assert!(a >= b && b >= cc, "mean log10 levels {a} {b} {cc}");
}

#[test]
fn invalid_inputs_are_rejected() {
    let op = build_laplacian_1d(10).unwrap();
    let zero = vec![c(0.0, 0.0); 10];
    assert!(matches!(arnoldi(&op, &zero, 3, &OrthPolicy::default()), Err(Error::ZeroStartVector)));
    assert!(matches!(arnoldi(&op, &zero[..5], 3, &OrthPolicy::default()), Err(Error::DimensionMismatch { .. })));
    let general = build_convection_diffusion_2d(4, 10.0).unwrap();
    let v = vec![c(1.0, 0.0); 16];
    assert!(matches!(lanczos(&general, &v, 3, &OrthPolicy::default()), Err(Error::WrongStructure { .. })));
}

#[test]
fn invariant_start_vector_breaks_down_early() {
    let n = 50;
    let op = build_laplacian_1d(n).unwrap();
    let s = (2.0 / (n as f64 + 1.0)).sqrt();
    let v: Vec<C64> =
        (1..=n).map(|k| c(s * (3.0 * k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).sin(), 0.0)).collect();
    let dec = lanczos_until(&op, &v, 10, &OrthPolicy::full(), |_, _, _| false).unwrap();
    assert_eq!(dec.m(), 1);
    assert!(dec.breakdown());
    let stopped =
        krylov_decompose_until(&op, &random_vector(n, &mut rng(9)), 10, &OrthPolicy::full(), |k, _, _| k == 4).unwrap();
    assert_eq!(stopped.m(), 4);
}
