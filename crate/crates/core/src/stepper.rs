//! Step-size selection and substepping propagation of `phi_p(TA)v`.

use serde::{Deserialize, Serialize};

use crate::dense::phi_action;
use crate::estimators::{estimate, EstimatorKind};
use crate::krylov::{krylov_decompose_until, KrylovDecomposition, OrthPolicy};
use crate::linops::LinearOperator;
use crate::{ln_factorial, norm2, Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    /// Target error per unit step.
    pub tol: f64,
    pub estimator: EstimatorKind,
    pub m_max: usize,
    pub t_final: f64,
    pub p: usize,
    #[serde(default)]
    pub policy: OrthPolicy,
    /// Relative tolerance of the quadrature estimator.
    #[serde(default = "default_qtol")]
    pub qtol: f64,
}

fn default_qtol() -> f64 {
    1e-3
}

impl StepControl {
    pub fn new(tol: f64, estimator: EstimatorKind, m_max: usize, t_final: f64, p: usize) -> Result<Self> {
        let c = Self { tol, estimator, m_max, t_final, p, policy: OrthPolicy::default(), qtol: default_qtol() };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::Config { field: "tol".into(), msg: "must be positive and finite".into() });
        }
        if self.m_max == 0 {
            return Err(Error::Config { field: "m_max".into(), msg: "must be positive".into() });
        }
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return Err(Error::Config { field: "t_final".into(), msg: "must be positive and finite".into() });
        }
        if !(self.qtol > 0.0) {
            return Err(Error::Config { field: "qtol".into(), msg: "must be positive".into() });
        }
        Ok(())
    }
}

/// True when `beta h / (p+1)! <= tol`. For a dissipative operator this
/// bounds the error per unit step for every `t`, so the current dimension
/// can be used for the whole remaining interval.
pub fn lucky_breakdown_check(beta: f64, h_next: f64, p: usize, tol: f64) -> bool {
    if h_next == 0.0 {
        return true;
    }
    beta.ln() + h_next.ln() - ln_factorial(p + 1) <= tol.ln()
}

/// Result of solving `zeta(t) = t tol`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    /// Largest bracketed `t` with `zeta(t) <= t tol`.
    pub t: f64,
    /// `zeta(s) < s tol` again somewhere in `(t, 10 t]`.
    pub second_crossing: bool,
}

const DESCEND_LIMIT: f64 = 1e-12;
const ASCEND_LIMIT: f64 = 1e12;
const BISECT_RTOL: f64 = 1e-6;

/// Solves `ln zeta(t) = ln t + ln tol` for the first crossing from below,
/// starting at `t0`, by geometric bracketing and bisection in `ln t`.
pub fn solve_crossing(mut ln_zeta: impl FnMut(f64) -> Result<f64>, tol: f64, t0: f64) -> Result<Crossing> {
    let ln_tol = tol.ln();
    let mut g = |t: f64| -> Result<f64> { Ok(ln_zeta(t)? - t.ln() - ln_tol) };
    let (mut lo, mut hi);
    if g(t0)? >= 0.0 {
        let mut t = t0;
        loop {
            t *= 0.25;
            if t < DESCEND_LIMIT * t0 {
                return Err(Error::NoCrossing { lo: t, hi: t0 });
            }
            if g(t)? < 0.0 {
                break;
            }
        }
        lo = t;
        hi = 4.0 * t;
    } else {
        let mut t = t0;
        loop {
            t *= 2.0;
            if t > ASCEND_LIMIT * t0 {
                return Err(Error::NoCrossing { lo: t0, hi: t });
            }
            if g(t)? >= 0.0 {
                break;
            }
        }
        lo = 0.5 * t;
        hi = t;
    }
    while hi / lo > 1.0 + BISECT_RTOL {
        let mid = (lo * hi).sqrt();
        if g(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut second_crossing = false;
    for f in [1.5, 2.0, 3.0, 5.0, 7.0, 10.0] {
        if matches!(g(lo * f), Ok(v) if v < 0.0) {
            second_crossing = true;
            break;
        }
    }
    Ok(Crossing { t: lo, second_crossing })
}

fn hessenberg_scale(dec: &KrylovDecomposition) -> f64 {
    dec.h().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `t(m)` for the estimator in `ctrl`. No fallback is attempted here.
pub fn solve_t_of_m(dec: &KrylovDecomposition, ctrl: &StepControl) -> Result<Crossing> {
    if dec.h_next() == 0.0 {
        return Err(Error::NoCrossing { lo: 0.0, hi: f64::INFINITY });
    }
    let s = hessenberg_scale(dec);
    let t0 = if s > 0.0 { 1.0 / s } else { 1.0 };
    solve_crossing(|t| Ok(estimate(ctrl.estimator, dec, ctrl.p, t, ctrl.qtol)?.ln_value), ctrl.tol, t0)
}

fn recoverable(e: &Error) -> bool {
    matches!(e, Error::EstimatorUnavailable(_) | Error::SpectrumNotReal { .. } | Error::NoCrossing { .. })
}

/// `t(m)` with the fallback ladder: on an unavailable estimator the next
/// kind of [`EstimatorKind::fallback`] is tried.
pub fn solve_t_of_m_with_fallback(dec: &KrylovDecomposition, ctrl: &StepControl) -> Result<(Crossing, EstimatorKind)> {
    let mut kind = ctrl.estimator;
    loop {
        let c = StepControl { estimator: kind, ..*ctrl };
        match solve_t_of_m(dec, &c) {
            Ok(x) => return Ok((x, kind)),
            Err(e) if recoverable(&e) && dec.h_next() > 0.0 => match kind.fallback() {
                Some(k) => kind = k,
                None => return Err(e),
            },
            Err(e) => return Err(e),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t_start: f64,
    pub tau: f64,
    pub m: usize,
    /// Estimated local error of the substep, comparable with `tau * tol`
    /// (scaled by `t_final^p` when `p >= 1`).
    pub zeta: f64,
    pub estimator: EstimatorKind,
    pub fallback_used: bool,
    pub lucky: bool,
    pub second_crossing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationReport {
    pub t_final: f64,
    pub p: usize,
    pub tol: f64,
    pub steps: Vec<StepRecord>,
    pub matvecs: usize,
    /// Approximation of `phi_p(t_final A) v`.
    pub result: Vec<C64>,
}

impl PropagationReport {
    pub fn total_time(&self) -> f64 {
        self.steps.iter().map(|s| s.tau).sum()
    }
}

const MAX_SUBSTEPS: usize = 100_000;

fn log_sum_exp(v: &[f64]) -> f64 {
    let mx = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY {
        return mx;
    }
    mx + v.iter().map(|x| (x - mx).exp()).sum::<f64>().ln()
}

struct Piece<'a> {
    dec: &'a KrylovDecomposition,
    order: usize,
    ln_weight: f64,
    weight_power: usize,
}

/// Combined `ln zeta` of `sum_i c_i tau^(k_i) zeta_(k_i)(tau)`, one estimator
/// kind for all pieces. Lucky pieces contribute their a-priori bound.
fn combined_ln_zeta(pieces: &[Piece<'_>], kind: EstimatorKind, tau: f64, qtol: f64) -> Result<f64> {
    let mut terms = Vec::with_capacity(pieces.len());
    for pc in pieces {
        let z = if pc.dec.h_next() == 0.0 {
            f64::NEG_INFINITY
        } else {
            estimate(kind, pc.dec, pc.order, tau, qtol)?.ln_value
        };
        terms.push(pc.ln_weight + pc.weight_power as f64 * tau.ln() + z);
    }
    Ok(log_sum_exp(&terms))
}

/// Propagates `w(t) = t^p phi_p(tA) v` to `t_final` in substeps and returns
/// `w(t_final) / t_final^p`.
///
/// Each substep uses `e^(tau A)` on the current state (a fresh Krylov space)
/// and, for `p >= 1`, the terms `tau^(k+1) phi_(k+1)(tau A) v` from one
/// Krylov space of `v` built once. The step `tau` solves
/// `zeta_total(tau) = tau tol t_final^p`, so the error of the returned
/// `phi_p` value is at most `t_final * tol` when `mu_2(A) <= 0`.
pub fn propagate(op: &LinearOperator, v: &[C64], ctrl: &StepControl) -> Result<PropagationReport> {
    ctrl.validate()?;
    if v.len() != op.n() {
        return Err(Error::DimensionMismatch { expected: op.n(), got: v.len() });
    }
    let mu2 = op.mu2_estimate();
    if mu2 > 1e-10 * op.norm2_estimate().max(1.0) {
        return Err(Error::NotDissipative(mu2));
    }
    let big_t = ctrl.t_final;
    let p = ctrl.p;
    let tol_w = ctrl.tol * big_t.powi(p as i32);
    let n = op.n();
    let mut matvecs = 0;
    let mut steps = Vec::new();

    if norm2(v) == 0.0 {
        return Ok(PropagationReport {
            t_final: big_t,
            p,
            tol: ctrl.tol,
            steps,
            matvecs,
            result: vec![C64::new(0.0, 0.0); n],
        });
    }

    let dec_v = if p >= 1 {
        let d =
            krylov_decompose_until(op, v, ctrl.m_max, &ctrl.policy, |_, b, h| lucky_breakdown_check(b, h, 1, tol_w))?;
        matvecs += d.matvecs();
        Some(d)
    } else {
        None
    };

    let mut w: Vec<C64> = if p == 0 { v.to_vec() } else { vec![C64::new(0.0, 0.0); n] };
    let mut t_c = 0.0;
    while t_c < big_t {
        if steps.len() >= MAX_SUBSTEPS {
            return Err(Error::NotConverged);
        }
        let rem = big_t - t_c;
        let dec_w = if norm2(&w) > 0.0 {
            let d = krylov_decompose_until(op, &w, ctrl.m_max, &ctrl.policy, |_, b, h| {
                lucky_breakdown_check(b, h, 0, tol_w)
            })?;
            matvecs += d.matvecs();
            Some(d)
        } else {
            None
        };

        let mut pieces = Vec::new();
        let mut lucky = true;
        if let Some(d) = &dec_w {
            lucky &= lucky_breakdown_check(d.beta(), d.h_next(), 0, tol_w);
            pieces.push(Piece { dec: d, order: 0, ln_weight: 0.0, weight_power: 0 });
        }
        if let Some(d) = &dec_v {
            lucky &= lucky_breakdown_check(d.beta(), d.h_next(), 1, tol_w);
            for k in 0..p {
                let j = p - 1 - k;
                // weight t_c^j / j!
                let lw = match j {
                    0 => 0.0,
                    _ if t_c == 0.0 => continue,
                    _ => j as f64 * t_c.ln() - ln_factorial(j),
                };
                pieces.push(Piece { dec: d, order: k + 1, ln_weight: lw, weight_power: k + 1 });
            }
        }

        let (tau, zeta, used, second) = if lucky {
            let z =
                combined_ln_zeta(&pieces, EstimatorKind::BoundFactorial, rem, ctrl.qtol).unwrap_or(f64::NEG_INFINITY);
            (rem, z.exp(), EstimatorKind::BoundFactorial, false)
        } else {
            let scale = pieces.iter().map(|pc| hessenberg_scale(pc.dec)).fold(0.0, f64::max);
            let t0 = if scale > 0.0 { (1.0 / scale).min(rem) } else { rem };
            let mut kind = ctrl.estimator;
            loop {
                let r = solve_crossing(|tau| combined_ln_zeta(&pieces, kind, tau, ctrl.qtol), tol_w, t0);
                match r {
                    Ok(c) => {
                        let tau = c.t.min(rem);
                        let z = combined_ln_zeta(&pieces, kind, tau, ctrl.qtol)?.exp();
                        break (tau, z, kind, c.second_crossing);
                    }
                    Err(e) if recoverable(&e) => match kind.fallback() {
                        Some(k) => kind = k,
                        None => return Err(e),
                    },
                    Err(e) => return Err(e),
                }
            }
        };

        let mut next = vec![C64::new(0.0, 0.0); n];
        if let Some(d) = &dec_w {
            let y = phi_action(d.h(), 0, tau, d.beta())?;
            next = d.combine(&y)?;
        }
        if let Some(d) = &dec_v {
            for k in 0..p {
                let j = p - 1 - k;
                let c = t_c.powi(j as i32) / ln_factorial(j).exp() * tau.powi(k as i32 + 1);
                if c == 0.0 {
                    continue;
                }
                let y = phi_action(d.h(), k + 1, tau, d.beta())?;
                let u = d.combine(&y)?;
                next.iter_mut().zip(&u).for_each(|(a, b)| *a += b * c);
            }
        }
        w = next;
        let last = tau >= rem;
        steps.push(StepRecord {
            t_start: t_c,
            tau,
            m: pieces.iter().map(|pc| pc.dec.m()).max().unwrap_or(0),
            zeta,
            estimator: used,
            fallback_used: used != ctrl.estimator && !lucky,
            lucky,
            second_crossing: second,
        });
        t_c = if last { big_t } else { t_c + tau };
    }
    let s = big_t.powi(p as i32);
    let result = w.into_iter().map(|z| z / s).collect();
    Ok(PropagationReport { t_final: big_t, p, tol: ctrl.tol, steps, matvecs, result })
}
