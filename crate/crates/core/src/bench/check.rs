use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{true_error, Oracle};
use crate::asymptotics::avg_var_stats;
use crate::dense::{corner_phi, divided_differences_exp, phi_action, NodeSet};
use crate::estimators::EstimatorKind;
use crate::estimators::{bound_factorial, bound_real_part, factorial_xi_max, rho12_from_traces};
use crate::krylov::{krylov_decompose, krylov_decompose_until, KrylovDecomposition, OrthPolicy};
use crate::linops::{build_laplacian_1d, build_schrodinger_double_well};
use crate::stepper::{lucky_breakdown_check, solve_t_of_m, StepControl};
use crate::{Result, C64};

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Upper Hessenberg with complex entries in the unit box and real
/// subdiagonal in `[0.1, 1]`.
pub fn random_hessenberg(m: usize, rng: &mut impl Rng) -> DMatrix<C64> {
    DMatrix::from_fn(m, m, |i, j| {
        if i == j + 1 {
            C64::new(rng.random_range(0.1..1.0), 0.0)
        } else if i <= j {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

fn corner_identity() -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let m = rng.random_range(2..=8);
        let h = random_hessenberg(m, &mut rng);
        let dec = KrylovDecomposition::from_hessenberg(h.clone(), 1.0, 1.0)?;
        for t in [0.1, 1.0, 10.0] {
            let c = corner_phi(&h, 0, t, 1.0)?;
            let dd = divided_differences_exp(&NodeSet::new(dec.ritz_values()?, 0)?, t)?;
            let via = dd.mantissa * (dd.log_scale + dec.log_gamma()).exp();
            worst = worst.max(rel(via, c));
        }
    }
    Ok(CheckOutcome {
        name: "corner entries equal gamma times divided differences",
        passed: worst < 1e-8,
        detail: format!("max rel {worst:.2e}"),
    })
}

fn augmentation_identity() -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let m = rng.random_range(2..=8);
        let h = random_hessenberg(m, &mut rng);
        for p in 1..=3 {
            for t in [0.1, 1.0, 10.0] {
                let top = phi_action(&h, p, t, 1.0)?[m - 1] * t.powi(p as i32);
                worst = worst.max(rel(corner_phi(&h, p, t, 1.0)?, top));
            }
        }
    }
    Ok(CheckOutcome {
        name: "augmented exponential reproduces phi_p",
        passed: worst < 1e-10,
        detail: format!("max rel {worst:.2e}"),
    })
}

fn traces() -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let m = rng.random_range(2..=8);
        let p = rng.random_range(0..=2);
        let h = random_hessenberg(m, &mut rng);
        let dec = KrylovDecomposition::from_hessenberg(h.clone(), 1.0, 1.0)?;
        let (r1, r2) = rho12_from_traces(&h, p);
        let (avg, vx, ve) = avg_var_stats(&NodeSet::new(dec.ritz_values()?, p)?);
        worst = worst.max((r1 - avg).abs()).max((r2 - (vx - ve) / ((m + p) as f64 + 1.0)).abs());
    }
    Ok(CheckOutcome {
        name: "trace formulas match Ritz statistics",
        passed: worst < 1e-12,
        detail: format!("max abs {worst:.2e}"),
    })
}

fn soundness() -> Result<CheckOutcome> {
    let op = build_laplacian_1d(120)?;
    let v = vec![C64::new(1.0, 0.0); 120];
    let oracle = Oracle::new(&op);
    let mut violations = 0;
    let mut cases = 0;
    for m in [5, 10] {
        let dec = krylov_decompose(&op, &v, m, &OrthPolicy::full())?;
        for p in 0..=1 {
            let ctrl = StepControl::new(1e-8, EstimatorKind::BoundRealPart, m, 1.0, p)?;
            let t = solve_t_of_m(&dec, &ctrl)?.t;
            let e = true_error(&oracle, &dec, &v, p, t)?;
            let z = bound_real_part(&dec, p, t)?.value;
            cases += 1;
            if e.norm > z + e.floor {
                violations += 1;
            }
        }
    }
    Ok(CheckOutcome {
        name: "true error below the real-part bound",
        passed: violations == 0,
        detail: format!("{violations} of {cases} violated"),
    })
}

fn skew_coincidence() -> Result<CheckOutcome> {
    let (b, v) = build_schrodinger_double_well(64)?;
    let op = b.scaled(C64::new(0.0, -1.0))?;
    let dec = krylov_decompose(&op, &v, 12, &OrthPolicy::full())?;
    let t = 1e-3;
    let a = bound_real_part(&dec, 0, t)?.ln_value;
    let f = bound_factorial(&dec, 0, t, factorial_xi_max(&dec, 0)?)?.ln_value;
    let gap = (a - f).exp_m1().abs();
    Ok(CheckOutcome {
        name: "skew-Hermitian bounds coincide",
        passed: gap < 1e-12,
        detail: format!("rel gap {gap:.2e}"),
    })
}

fn lucky() -> Result<CheckOutcome> {
    let n = 40;
    let op = build_laplacian_1d(n)?;
    let psi = |j: usize| super::laplacian_mode(n, j);
    let mut v: Vec<C64> = psi(3).iter().zip(psi(7)).map(|(a, b)| a + b).collect();
    v.iter_mut().zip(psi(20)).for_each(|(a, b)| *a += b * 1e-13);
    let tol = 1e-8;
    let dec = krylov_decompose_until(&op, &v, 20, &OrthPolicy::full(), |_, b, h| lucky_breakdown_check(b, h, 0, tol))?;
    let triggered = lucky_breakdown_check(dec.beta(), dec.h_next(), 0, tol);
    let e = true_error(&Oracle::new(&op), &dec, &v, 0, 5.0)?;
    Ok(CheckOutcome {
        name: "lucky breakdown stops early within tolerance",
        passed: triggered && dec.m() <= 3 && e.norm / 5.0 <= tol,
        detail: format!("m = {}, error per unit step {:.2e}", dec.m(), e.norm / 5.0),
    })
}

/// Fast invariant checks behind the `check` command.
pub fn run_checks() -> Result<Vec<CheckOutcome>> {
    Ok(vec![corner_identity()?, augmentation_identity()?, traces()?, soundness()?, skew_coincidence()?, lucky()?])
}
