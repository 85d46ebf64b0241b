//! Krylov approximation of `exp(tA)v` and `phi_p(tA)v` with defect-based
//! a-posteriori error bounds.
//!
//! The crate is organised bottom-up:
//!
//! * [`linops`]: sparse/dense operators, test-problem generators, Matrix Market
//!   input and the reference oracles used to measure true errors.
//! * [`krylov`]: Arnoldi and Lanczos decompositions with diagnostics.
//! * [`dense`]: small dense kernels (matrix exponential, phi actions through an
//!   augmented Hessenberg matrix, divided differences, Ritz values).
//! * [`estimators`]: the scalar defect, the defect integral, the computable
//!   error bounds and estimates and the two accuracy criteria.
//! * [`asymptotics`]: power sums, the `rho_k` recursion and the effective order
//!   of divided differences of the exponential.
//! * [`stepper`]: step-size selection `t(m)`, substepping propagation and the
//!   lucky-breakdown stopping rule.
//! * [`bench`]: the experiment harness behind the `krylov-defect` binary.
//!
//! ```
//! use krylov_defect::prelude::*;
//!
//! let op = laplacian_1d(200).unwrap();
//! let v = vec![C64::new(1.0, 0.0); 200];
//! let dec = krylov_decompose(&op, &v, 12, &OrthPolicy::full()).unwrap();
//! let zeta = bound_real_part(&dec, 0, 0.5).unwrap();
//! assert!(zeta.is_proven_bound);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod bench;
pub mod dense;
pub mod error;
pub mod estimators;
pub mod krylov;
pub mod linops;
pub(crate) mod quadrature;
pub mod stepper;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub mod prelude {
    pub use crate::asymptotics::{
        alpha_coeffs, asymptotic_defect_norm, avg_var_stats, effective_order_exact, kappa, power_sums, rho_coeffs,
        AsymptoticExpansion, PowerSums,
    };
    pub use crate::dense::{
        corner_phi, divided_differences_exp, expm, phi_action, ritz_values, AugmentedHessenberg, NodeSet, ScaledComplex,
    };
    pub use crate::estimators::{
        accuracy_criterion_1, accuracy_criterion_2, bound_exact_real, bound_factorial, bound_real_part, defect,
        defect_integral_quadrature, est_effective_order, est_generalized_residual, estimate, rho12_from_traces,
        DefectEvaluation, ErrorEstimate, EstimatorKind,
    };
    pub use crate::krylov::{
        arnoldi, decomposition_residual, krylov_decompose, lanczos, orthogonality_level, KrylovDecomposition,
        OrthPolicy, OrthScheme,
    };
    pub use crate::linops::{
        build_convection_diffusion_2d, build_laplacian_1d, build_schrodinger_double_well, dense_reference_phi,
        laplacian_1d, load_matrix_market, reference_phi_action, CsrMatrix, LinearOperator, Structure,
    };
    pub use crate::stepper::{lucky_breakdown_check, propagate, solve_t_of_m, PropagationReport, StepControl};
    pub use crate::{Error, Result, C64};
}

/// Natural log of `n!`, accumulated as a sum of logs.
pub(crate) fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

pub(crate) fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn dot(x: &[C64], y: &[C64]) -> C64 {
    // <x, y> = x^* y
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}
