//! The scalar defect `delta_(p,m)(t) = beta e_m^* t^p phi_p(tH) e_1`, the
//! defect integral
//!
//! ```text
//! L_(p,m)(t) = h_(m+1,m) / t^p * int_0^t |delta_(p,m)(s)| ds
//! ```
//!
//! and the computable quantities `zeta(t)` compared against `t * tol`.
//!
//! For `mu_2(A) <= 0` the error `phi_p(tA)v - beta V phi_p(tH) e_1` is bounded
//! in norm by `L`, so the first three bounds and the quadrature of `L` are
//! proven upper bounds; the two estimates are not.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::asymptotics::avg_var_stats;
use crate::dense::{divided_differences_exp, AugmentedHessenberg, NodeSet, ScaledComplex};
use crate::krylov::KrylovDecomposition;
use crate::quadrature::integrate;
use crate::{ln_factorial, Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EstimatorKind {
    #[serde(rename = "real-part-bound")]
    BoundRealPart,
    #[serde(rename = "real-spectrum-bound")]
    BoundExactReal,
    #[serde(rename = "factorial-bound")]
    BoundFactorial,
    #[serde(rename = "gen-residual")]
    EstGeneralizedResidual,
    #[serde(rename = "eff-order")]
    EstEffectiveOrder,
    #[serde(rename = "quadrature")]
    QuadratureOracle,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 6] = [
        Self::BoundRealPart,
        Self::BoundExactReal,
        Self::BoundFactorial,
        Self::EstGeneralizedResidual,
        Self::EstEffectiveOrder,
        Self::QuadratureOracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::BoundRealPart => "real-part-bound",
            Self::BoundExactReal => "real-spectrum-bound",
            Self::BoundFactorial => "factorial-bound",
            Self::EstGeneralizedResidual => "gen-residual",
            Self::EstEffectiveOrder => "eff-order",
            Self::QuadratureOracle => "quadrature",
        }
    }

    pub fn is_proven_bound(self) -> bool {
        !matches!(self, Self::EstGeneralizedResidual | Self::EstEffectiveOrder)
    }

    /// Next estimator to try when this one is unavailable.
    pub fn fallback(self) -> Option<Self> {
        match self {
            Self::EstEffectiveOrder => Some(Self::EstGeneralizedResidual),
            Self::EstGeneralizedResidual => Some(Self::BoundFactorial),
            Self::BoundExactReal => Some(Self::BoundRealPart),
            Self::BoundRealPart | Self::QuadratureOracle => Some(Self::BoundFactorial),
            Self::BoundFactorial => None,
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown estimator '{s}'")))
    }
}

/// A value `zeta` together with how it was obtained. `ln_value` is
/// authoritative; `value` may underflow to zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub kind: EstimatorKind,
    pub value: f64,
    pub ln_value: f64,
    pub is_proven_bound: bool,
    pub t: f64,
    pub p: usize,
    pub m: usize,
}

impl ErrorEstimate {
    fn from_ln(kind: EstimatorKind, ln_value: f64, t: f64, p: usize, m: usize) -> Self {
        Self { kind, value: ln_value.exp(), ln_value, is_proven_bound: kind.is_proven_bound(), t, p, m }
    }
}

fn check_t(t: f64, strict: bool) -> Result<()> {
    if !t.is_finite() || t < 0.0 || (strict && t == 0.0) {
        return Err(Error::InvalidArgument(format!("invalid t = {t}")));
    }
    Ok(())
}

/// `beta exp(t H~) e_1` for the `(m + p)` augmented Hessenberg matrix.
/// Entry `m - 1 + j` is `beta t^j e_m^* phi_j(tH) e_1`.
fn augmented_column(dec: &KrylovDecomposition, p: usize, t: f64) -> Result<Vec<C64>> {
    let aug = AugmentedHessenberg::new(dec.h(), p)?;
    let col = aug.exp_first_column(t)?;
    Ok(col.into_iter().map(|z| z * dec.beta()).collect())
}

/// `delta_(p,m)(t)`.
pub fn defect(dec: &KrylovDecomposition, p: usize, t: f64) -> Result<C64> {
    check_t(t, false)?;
    Ok(augmented_column(dec, p, t)?[dec.m() + p - 1])
}

/// `delta` evaluated two ways: as a corner entry of `exp(tH~)` and as
/// `beta gamma exp_t[lambda, 0_p]`.
#[derive(Clone, Debug)]
pub struct DefectEvaluation {
    pub p: usize,
    pub t: f64,
    pub ritz: Vec<C64>,
    pub value: C64,
    pub divided_difference: ScaledComplex,
    ln_beta_gamma: f64,
}

impl DefectEvaluation {
    pub fn new(dec: &KrylovDecomposition, p: usize, t: f64) -> Result<Self> {
        let value = defect(dec, p, t)?;
        let ritz = dec.ritz_values()?;
        let ns = NodeSet::new(ritz.clone(), p)?;
        let divided_difference = divided_differences_exp(&ns, t)?;
        Ok(Self { p, t, ritz, value, divided_difference, ln_beta_gamma: dec.beta().ln() + dec.log_gamma() })
    }

    pub fn xi(&self) -> Vec<f64> {
        self.ritz.iter().map(|z| z.re).collect()
    }
    pub fn eta(&self) -> Vec<f64> {
        self.ritz.iter().map(|z| z.im).collect()
    }

    /// `ln |beta gamma exp_t[lambda, 0_p]|`.
    pub fn ln_abs_from_nodes(&self) -> f64 {
        self.ln_beta_gamma + self.divided_difference.ln_abs()
    }

    /// Relative gap between the two magnitudes.
    pub fn formulation_gap(&self) -> f64 {
        let a = self.value.norm().ln();
        let b = self.ln_abs_from_nodes();
        (a - b).exp_m1().abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOutcome {
    /// Estimate of `L_(p,m)(t)`.
    pub value: f64,
    pub error: f64,
    pub converged: bool,
    pub evaluations: usize,
}

/// `L_(p,m)(t)` by adaptive Gauss-Kronrod with relative tolerance `qtol`.
pub fn defect_integral_quadrature(dec: &KrylovDecomposition, p: usize, t: f64, qtol: f64) -> Result<QuadratureOutcome> {
    check_t(t, true)?;
    if !(qtol > 0.0) {
        return Err(Error::InvalidArgument(format!("qtol must be > 0, got {qtol}")));
    }
    let m = dec.m();
    let aug = AugmentedHessenberg::new(dec.h(), p)?;
    let beta = dec.beta();
    let r = integrate(|s| Ok(aug.exp_first_column(s)?[m + p - 1].norm() * beta), 0.0, t, qtol, 0.0)?;
    let scale = dec.h_next() / t.powi(p as i32);
    Ok(QuadratureOutcome {
        value: r.value * scale,
        error: r.error * scale,
        converged: r.converged,
        evaluations: r.evaluations,
    })
}

fn ln_prefactor(dec: &KrylovDecomposition) -> f64 {
    dec.beta().ln() + dec.h_next().ln() + dec.log_gamma()
}

/// `zeta = beta h gamma t^-p exp_t[xi_1..xi_m, 0_(p+1)]`: the defect
/// integral with every Ritz value replaced by its real part.
pub fn bound_real_part(dec: &KrylovDecomposition, p: usize, t: f64) -> Result<ErrorEstimate> {
    check_t(t, false)?;
    let m = dec.m();
    let kind = EstimatorKind::BoundRealPart;
    if t == 0.0 || dec.h_next() == 0.0 {
        return Ok(ErrorEstimate::from_ln(kind, f64::NEG_INFINITY, t, p, m));
    }
    let ns = NodeSet::new(dec.ritz_values()?, p + 1)?.real_parts();
    let dd = divided_differences_exp(&ns, t)?;
    let ln = ln_prefactor(dec) - p as f64 * t.ln() + dd.ln_abs();
    Ok(ErrorEstimate::from_ln(kind, ln, t, p, m))
}

/// Relative size of the imaginary parts tolerated as a real spectrum.
pub const REAL_SPECTRUM_TOL: f64 = 1e-10;

/// `zeta = h t^-p |beta t^(p+1) e_m^* phi_(p+1)(tH) e_1|`, exact for a real
/// spectrum because `delta` then keeps its sign.
pub fn bound_exact_real(dec: &KrylovDecomposition, p: usize, t: f64) -> Result<ErrorEstimate> {
    check_t(t, false)?;
    let m = dec.m();
    let ritz = dec.ritz_values()?;
    let radius = ritz.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let max_imag = ritz.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if max_imag > REAL_SPECTRUM_TOL * radius {
        return Err(Error::SpectrumNotReal { max_imag });
    }
    let kind = EstimatorKind::BoundExactReal;
    if t == 0.0 || dec.h_next() == 0.0 {
        return Ok(ErrorEstimate::from_ln(kind, f64::NEG_INFINITY, t, p, m));
    }
    let c = augmented_column(dec, p + 1, t)?[m + p];
    let ln = dec.h_next().ln() - p as f64 * t.ln() + c.norm().ln();
    Ok(ErrorEstimate::from_ln(kind, ln, t, p, m))
}

/// `zeta = beta h gamma t^m e^(t xi_max) / (m+p)!`, evaluated in logs.
/// For `p >= 1` the padding zeros force `xi_max = 0`.
///
/// Only `xi_max = 0` is a proven bound. With `xi_max < 0` the factor
/// `e^(t xi_max)` undercuts `int_0^t s^(m-1) e^(s xi_max) ds`, and the value
/// can fall below the defect integral; such estimates are flagged as unproven.
pub fn bound_factorial(dec: &KrylovDecomposition, p: usize, t: f64, xi_max: f64) -> Result<ErrorEstimate> {
    check_t(t, false)?;
    if xi_max > 0.0 {
        return Err(Error::PositiveXiMax(xi_max));
    }
    if p >= 1 && xi_max != 0.0 {
        return Err(Error::InvalidArgument("xi_max must be 0 for p >= 1".into()));
    }
    let m = dec.m();
    let kind = EstimatorKind::BoundFactorial;
    if t == 0.0 || dec.h_next() == 0.0 {
        return Ok(ErrorEstimate::from_ln(kind, f64::NEG_INFINITY, t, p, m));
    }
    let ln = ln_prefactor(dec) + m as f64 * t.ln() + t * xi_max - ln_factorial(m + p);
    let mut z = ErrorEstimate::from_ln(kind, ln, t, p, m);
    z.is_proven_bound = xi_max == 0.0;
    Ok(z)
}

/// The `xi_max` used for [`bound_factorial`]: always 0, the only value for
/// which it is a bound. Fails with [`Error::PositiveXiMax`] when a Ritz value
/// has positive real part, since then no factorial bound applies.
pub fn factorial_xi_max(dec: &KrylovDecomposition, _p: usize) -> Result<f64> {
    let r = dec.ritz_values()?;
    let xi = r.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    if xi > 1e-10 * r.iter().map(|z| z.norm()).fold(0.0, f64::max) {
        return Err(Error::PositiveXiMax(xi));
    }
    Ok(0.0)
}

/// `zeta = h t^(1-p) |delta(t)|`, the right-endpoint rectangle rule for `L`.
pub fn est_generalized_residual(dec: &KrylovDecomposition, p: usize, t: f64) -> Result<ErrorEstimate> {
    check_t(t, true)?;
    let d = defect(dec, p, t)?;
    let ln = dec.h_next().ln() + (1.0 - p as f64) * t.ln() + d.norm().ln();
    Ok(ErrorEstimate::from_ln(EstimatorKind::EstGeneralizedResidual, ln, t, p, dec.m()))
}

/// Computable effective order `rho(t) = t d/dt ln |delta(t)|` from the same
/// augmented exponential that yields `delta`.
pub fn effective_order_rho(dec: &KrylovDecomposition, p: usize, t: f64) -> Result<f64> {
    check_t(t, true)?;
    let col = augmented_column(dec, p, t)?;
    rho_from_column(dec, p, t, &col)
}

/// `a / b` without forming `|b|^2`, which underflows for the tiny trailing
/// entries of the propagator.
fn quotient(a: C64, b: C64) -> C64 {
    let s = b.norm();
    (a / s) / (b / s)
}

fn rho_from_column(dec: &KrylovDecomposition, p: usize, t: f64, col: &[C64]) -> Result<f64> {
    let m = dec.m();
    let last = col[m + p - 1];
    if last == C64::new(0.0, 0.0) || !last.is_finite() {
        return Err(Error::EstimatorUnavailable("vanishing last entry of the Krylov propagator".into()));
    }
    if p == 0 {
        let h = dec.h();
        let mut num = h[(m - 1, m - 1)] * last;
        if m >= 2 {
            num += h[(m - 1, m - 2)] * col[m - 2];
        }
        Ok(t * quotient(num, last).re)
    } else {
        // d/dt (t^p phi_p(tH)) = t^(p-1) phi_(p-1)(tH)
        Ok(t * quotient(col[m + p - 2], last).re)
    }
}

/// `zeta = h t^(1-p) |delta(t)| / (rho(t) + 1)`.
pub fn est_effective_order(dec: &KrylovDecomposition, p: usize, t: f64) -> Result<ErrorEstimate> {
    check_t(t, true)?;
    let m = dec.m();
    let col = augmented_column(dec, p, t)?;
    let rho = rho_from_column(dec, p, t, &col)?;
    if !(rho + 1.0 > 0.0) {
        return Err(Error::EstimatorUnavailable(format!("effective order {rho} <= -1")));
    }
    let d = col[m + p - 1];
    let ln = dec.h_next().ln() + (1.0 - p as f64) * t.ln() + d.norm().ln() - (rho + 1.0).ln();
    Ok(ErrorEstimate::from_ln(EstimatorKind::EstEffectiveOrder, ln, t, p, m))
}

/// `var_p(eta) (m+p) t^2 / (2 (m+p+1) (m+p+2))`.
pub fn accuracy_criterion_1(dec: &KrylovDecomposition, p: usize, t: f64) -> Result<f64> {
    let ns = NodeSet::new(dec.ritz_values()?, p)?;
    let (_, _, var_eta) = avg_var_stats(&ns);
    let mp = (dec.m() + p) as f64;
    Ok(var_eta * mp * t * t / (2.0 * (mp + 1.0) * (mp + 2.0)))
}

/// `|rho_1 (m+p) t/(m+p+1) + (rho_1^2 + rho_2)(m+p) t^2/(2(m+p+2))|`.
pub fn accuracy_criterion_2(dec: &KrylovDecomposition, p: usize, t: f64) -> f64 {
    let (r1, r2) = rho12_from_traces(dec.h(), p);
    let mp = (dec.m() + p) as f64;
    (r1 * mp * t / (mp + 1.0) + (r1 * r1 + r2) * mp * t * t / (2.0 * (mp + 2.0))).abs()
}

/// `rho_1`, `rho_2` from `S_1 = tr H` and `S_2 = tr H^2` (Hessenberg form,
/// so `S_2` needs only the diagonal and the two neighbouring bands).
pub fn rho12_from_traces(h: &nalgebra::DMatrix<C64>, p: usize) -> (f64, f64) {
    let m = h.nrows();
    let mut s1 = C64::new(0.0, 0.0);
    let mut s2 = C64::new(0.0, 0.0);
    for j in 0..m {
        s1 += h[(j, j)];
        s2 += h[(j, j)] * h[(j, j)];
        if j + 1 < m {
            s2 += 2.0 * h[(j + 1, j)] * h[(j, j + 1)];
        }
    }
    let mm = (m + p) as f64;
    let rho1 = s1.re / mm;
    let rho2 = (s1.im * s1.im - s1.re * s1.re) / (mm * mm) + (s1 * s1 + s2).re / (mm * (mm + 1.0));
    (rho1, rho2)
}

/// Dispatches on `kind`. The quadrature kind integrates with tolerance `qtol`.
pub fn estimate(kind: EstimatorKind, dec: &KrylovDecomposition, p: usize, t: f64, qtol: f64) -> Result<ErrorEstimate> {
    match kind {
        EstimatorKind::BoundRealPart => bound_real_part(dec, p, t),
        EstimatorKind::BoundExactReal => bound_exact_real(dec, p, t),
        EstimatorKind::BoundFactorial => bound_factorial(dec, p, t, factorial_xi_max(dec, p)?),
        EstimatorKind::EstGeneralizedResidual => est_generalized_residual(dec, p, t),
        EstimatorKind::EstEffectiveOrder => est_effective_order(dec, p, t),
        EstimatorKind::QuadratureOracle => {
            if t == 0.0 {
                return Ok(ErrorEstimate::from_ln(kind, f64::NEG_INFINITY, t, p, dec.m()));
            }
            let q = defect_integral_quadrature(dec, p, t, qtol)?;
            Ok(ErrorEstimate::from_ln(kind, q.value.ln(), t, p, dec.m()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn negative_xi_max_undercuts_the_defect_integral() {
        // m = 1, lambda = -1, t = 1: L = beta h (1 - e^-1), while
        // beta h t e^(t xi) = beta h e^-1.
        let dec =
            KrylovDecomposition::from_hessenberg(DMatrix::from_element(1, 1, C64::new(-1.0, 0.0)), 1.0, 1.0).unwrap();
        let exact = bound_exact_real(&dec, 0, 1.0).unwrap().value;
        assert!((exact - (1.0 - (-1.0f64).exp())).abs() < 1e-14);
        let refined = bound_factorial(&dec, 0, 1.0, -1.0).unwrap();
        assert!(refined.value < exact && !refined.is_proven_bound);
        let proven = bound_factorial(&dec, 0, 1.0, factorial_xi_max(&dec, 0).unwrap()).unwrap();
        assert!(proven.value >= exact && proven.is_proven_bound);
    }

    fn small() -> KrylovDecomposition {
        let h = DMatrix::from_row_slice(
            3,
            3,
            &[
                C64::new(-1.0, 0.0),
                C64::new(0.3, 0.1),
                C64::new(0.0, 0.2),
                C64::new(0.7, 0.0),
                C64::new(-2.0, 0.5),
                C64::new(0.1, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.4, 0.0),
                C64::new(-0.5, -0.3),
            ],
        );
        KrylovDecomposition::from_hessenberg(h, 2.0, 0.3).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for k in EstimatorKind::ALL {
            assert_eq!(k.name().parse::<EstimatorKind>().unwrap(), k);
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{}\"", k.name()));
        }
    }

    #[test]
    fn defect_basics() {
        let dec = small();
        assert_eq!(defect(&dec, 0, 0.0).unwrap(), C64::new(0.0, 0.0));
        let one =
            KrylovDecomposition::from_hessenberg(DMatrix::from_element(1, 1, C64::new(-0.5, 2.0)), 3.0, 0.1).unwrap();
        let d = defect(&one, 0, 0.8).unwrap();
        assert!((d - 3.0 * (C64::new(-0.5, 2.0) * 0.8).exp()).norm() < 1e-14);
    }

    #[test]
    fn two_formulations_agree() {
        let dec = small();
        for p in 0..3 {
            for t in [0.05, 0.7, 3.0] {
                let ev = DefectEvaluation::new(&dec, p, t).unwrap();
                assert!(ev.formulation_gap() < 1e-10, "p={p} t={t} gap={}", ev.formulation_gap());
            }
        }
    }

    #[test]
    fn ordering_of_bounds() {
        let dec = small();
        for p in 0..3 {
            let t = 0.9;
            let q = defect_integral_quadrature(&dec, p, t, 1e-8).unwrap().value;
            let rp = bound_real_part(&dec, p, t).unwrap().value;
            let fb = bound_factorial(&dec, p, t, factorial_xi_max(&dec, p).unwrap()).unwrap().value;
            assert!(q <= rp * (1.0 + 1e-8) && rp <= fb * (1.0 + 1e-12), "p={p} {q} {rp} {fb}");
        }
    }

    #[test]
    fn factorial_rejects_positive_xi() {
        assert!(matches!(bound_factorial(&small(), 0, 1.0, 0.5), Err(Error::PositiveXiMax(_))));
    }

    #[test]
    fn traces_on_diagonal() {
        let h =
            DMatrix::from_fn(3, 3, |i, j| if i == j { C64::new(-(i as f64) - 1.0, 0.5) } else { C64::new(0.0, 0.0) });
        let (r1, _) = rho12_from_traces(&h, 0);
        assert!((r1 + 2.0).abs() < 1e-15);
    }
}
