//! Small dense kernels on the Krylov-sized matrices.

mod divdiff;
mod expm;
mod phi;
mod ritz;

pub use divdiff::{divided_differences_exp, NodeSet, ScaledComplex};
pub use expm::{cmatmul, expm, expm_action_graded};
pub use phi::{corner_phi, phi_action, AugmentedHessenberg};
pub use ritz::{ritz_values, ritz_values_hermitian_tridiagonal};
