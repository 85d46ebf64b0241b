//! Small-`t` behaviour of `|exp_t[lambda_1, .., lambda_M]|`.
//!
//! With `f(t) = |exp_t[...]|` and `M` the total node count (padding zeros
//! included),
//!
//! ```text
//! f(t) = t^(M-1)/(M-1)! * exp(rho_1 t + rho_2 t^2/2 + ...)
//! ```
//!
//! and the effective order `t f'(t)/f(t)` starts at `M - 1`.

use serde::{Deserialize, Serialize};

use crate::dense::{divided_differences_exp, NodeSet, ScaledComplex};
use crate::{ln_factorial, Error, Result, C64};

/// `S_l = sum_j lambda_j^l` for `l = 0..=L`; `S_0 = M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerSums {
    pub sums: Vec<C64>,
}

/// Coefficients `rho_1..rho_K` of the truncated expansion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticExpansion {
    pub total_nodes: usize,
    pub rho: Vec<f64>,
}

impl AsymptoticExpansion {
    /// `ln` of the truncated expansion of `f(t)`.
    pub fn ln_value(&self, t: f64) -> f64 {
        let m1 = self.total_nodes - 1;
        let series: f64 = self.rho.iter().enumerate().map(|(i, r)| r * t.powi(i as i32 + 1) / (i + 1) as f64).sum();
        m1 as f64 * t.ln() - ln_factorial(m1) + series
    }

    pub fn value(&self, t: f64) -> f64 {
        self.ln_value(t).exp()
    }

    /// Truncated `t f'(t)/f(t) = M - 1 + sum_k rho_k t^k`.
    pub fn effective_order(&self, t: f64) -> f64 {
        (self.total_nodes - 1) as f64 + self.rho.iter().enumerate().map(|(i, r)| r * t.powi(i as i32 + 1)).sum::<f64>()
    }
}

pub fn power_sums(ns: &NodeSet, l: usize) -> PowerSums {
    let mut sums = vec![C64::new(0.0, 0.0); l + 1];
    sums[0] = C64::new(ns.len() as f64, 0.0);
    for z in &ns.nodes {
        let mut pw = C64::new(1.0, 0.0);
        for s in sums.iter_mut().skip(1) {
            pw *= z;
            *s += pw;
        }
    }
    PowerSums { sums }
}

/// `kappa_0..kappa_K`: `kappa_k` is the divided difference of `z^(M-1+k)`
/// over all nodes, read from the last entry of `Theta^(M-1+k) e_1` with
/// `Theta` the lower bidiagonal node matrix.
fn kappas(ns: &NodeSet, kmax: usize) -> Vec<C64> {
    let nodes: Vec<C64> = ns.all().collect();
    let m = nodes.len();
    let mut y = vec![C64::new(0.0, 0.0); m];
    y[0] = C64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(kmax + 1);
    for step in 0..m + kmax {
        if step >= m - 1 {
            out.push(y[m - 1]);
        }
        for i in (0..m).rev() {
            let below = if i > 0 { y[i - 1] } else { C64::new(0.0, 0.0) };
            y[i] = nodes[i] * y[i] + below;
        }
    }
    out.truncate(kmax + 1);
    out
}

pub fn kappa(ns: &NodeSet, k: usize) -> C64 {
    kappas(ns, k)[k]
}

/// `c_k = kappa_k / prod_(i=1..k) (M-1+i)`, so that
/// `exp_t[...] = t^(M-1)/(M-1)! * sum_k c_k t^k`.
fn scaled_kappas(ns: &NodeSet, kmax: usize) -> Vec<C64> {
    let m1 = ns.len() as f64 - 1.0;
    let mut denom = 1.0;
    kappas(ns, kmax)
        .into_iter()
        .enumerate()
        .map(|(k, kap)| {
            if k > 0 {
                denom *= m1 + k as f64;
            }
            kap / denom
        })
        .collect()
}

/// `alpha_0..alpha_K`, the coefficients of `|sum_k c_k t^k|^2`; `alpha_0 = 1`.
pub fn alpha_coeffs(ns: &NodeSet, kmax: usize) -> Vec<f64> {
    let c = scaled_kappas(ns, kmax);
    (0..=kmax).map(|k| (0..=k).map(|j| (c[j] * c[k - j].conj()).re).sum()).collect()
}

/// `rho_k = k alpha_k / 2 - sum_(l=1..k-1) alpha_l rho_(k-l)`, from matching
/// coefficients in `2 A(t) R(t) = A'(t)`.
pub fn rho_coeffs(ns: &NodeSet, kmax: usize) -> AsymptoticExpansion {
    let alpha = alpha_coeffs(ns, kmax);
    let mut rho = vec![0.0; kmax + 1];
    for k in 1..=kmax {
        let mut r = k as f64 * alpha[k] / 2.0;
        for l in 1..k {
            r -= alpha[l] * rho[k - l];
        }
        rho[k] = r;
    }
    AsymptoticExpansion { total_nodes: ns.len(), rho: rho[1..].to_vec() }
}

pub fn asymptotic_defect_norm(ns: &NodeSet, t: f64, kmax: usize) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("t must be > 0, got {t}")));
    }
    Ok(rho_coeffs(ns, kmax).value(t))
}

/// `(avg_p(xi), var_p(xi), var_p(eta))` where the padding zeros count as
/// nodes: `avg = sum xi / M`, `var = (sum (xi - avg)^2 + p avg^2) / M`.
pub fn avg_var_stats(ns: &NodeSet) -> (f64, f64, f64) {
    let m = ns.len() as f64;
    let p = ns.pad as f64;
    let stats = |vals: &[f64]| {
        let avg = vals.iter().sum::<f64>() / m;
        let var = (vals.iter().map(|x| (x - avg).powi(2)).sum::<f64>() + p * avg * avg) / m;
        (avg, var)
    };
    let xi: Vec<f64> = ns.nodes.iter().map(|z| z.re).collect();
    let eta: Vec<f64> = ns.nodes.iter().map(|z| z.im).collect();
    let (ax, vx) = stats(&xi);
    let (_, ve) = stats(&eta);
    (ax, vx, ve)
}

fn ratio(a: &ScaledComplex, b: &ScaledComplex) -> C64 {
    a.mantissa / b.mantissa * (a.log_scale - b.log_scale).exp()
}

/// `t f'(t)/f(t)` from two divided differences, using
/// `d/dt exp_t[l_1..l_M] = l_M exp_t[l_1..l_M] + exp_t[l_1..l_(M-1)]`.
pub fn effective_order_exact(ns: &NodeSet, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("t must be > 0, got {t}")));
    }
    let f = divided_differences_exp(ns, t)?;
    if ns.len() == 1 {
        return Ok(t * ns.nodes[0].re);
    }
    let (shorter, last) = if ns.pad > 0 {
        (NodeSet { nodes: ns.nodes.clone(), pad: ns.pad - 1 }, C64::new(0.0, 0.0))
    } else {
        let mut nodes = ns.nodes.clone();
        let last = nodes.pop().expect("len >= 2");
        (NodeSet { nodes, pad: 0 }, last)
    };
    let g = divided_differences_exp(&shorter, t)?;
    if f.mantissa == C64::new(0.0, 0.0) {
        return Err(Error::EstimatorUnavailable("divided difference vanishes".into()));
    }
    Ok(t * (last + ratio(&g, &f)).re)
}
