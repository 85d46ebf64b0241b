use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Nodes `lambda_1..lambda_m` followed by `pad` zeros, as used for
/// `exp_t[lambda_1, .., lambda_m, 0_pad]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSet {
    pub nodes: Vec<C64>,
    pub pad: usize,
}

impl NodeSet {
    pub fn new(nodes: Vec<C64>, pad: usize) -> Result<Self> {
        if nodes.is_empty() && pad == 0 {
            return Err(Error::InvalidArgument("node set must be nonempty".into()));
        }
        if nodes.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { nodes, pad })
    }

    pub fn real(nodes: &[f64], pad: usize) -> Result<Self> {
        Self::new(nodes.iter().map(|&x| C64::new(x, 0.0)).collect(), pad)
    }

    /// Total count `m + p`.
    pub fn len(&self) -> usize {
        self.nodes.len() + self.pad
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All nodes including the zero padding.
    pub fn all(&self) -> impl Iterator<Item = C64> + '_ {
        self.nodes.iter().cloned().chain(std::iter::repeat_n(C64::new(0.0, 0.0), self.pad))
    }

    /// Same nodes with the imaginary parts dropped.
    pub fn real_parts(&self) -> Self {
        Self { nodes: self.nodes.iter().map(|z| C64::new(z.re, 0.0)).collect(), pad: self.pad }
    }
}

/// `mantissa * exp(log_scale)`; keeps tiny divided differences representable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledComplex {
    pub mantissa: C64,
    pub log_scale: f64,
}

impl ScaledComplex {
    pub fn value(&self) -> C64 {
        if self.mantissa == C64::new(0.0, 0.0) {
            return self.mantissa;
        }
        self.mantissa * self.log_scale.exp()
    }

    /// `ln |value|`, `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        self.mantissa.norm().ln() + self.log_scale
    }

    pub fn abs(&self) -> f64 {
        self.ln_abs().exp()
    }
}

/// `exp_t[nodes]`, the divided difference of `z -> e^(tz)`, confluent nodes
/// allowed.
///
/// With `mu = t lambda - s`, `s` the largest real part, `exp_t[lambda] =
/// e^s t^(k-1) exp_1[mu]`. The full table `exp_1[mu_j..mu_i]` is formed for
/// `mu / 2^r` by a Taylor series of the bidiagonal matrix
/// `diag(mu) + subdiag(1)` and then squared `r` times in its triangular form.
pub fn divided_differences_exp(ns: &NodeSet, t: f64) -> Result<ScaledComplex> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("t must be finite and >= 0, got {t}")));
    }
    let k = ns.len();
    if k == 0 {
        return Err(Error::InvalidArgument("node set must be nonempty".into()));
    }
    if t == 0.0 {
        let m = if k == 1 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        return Ok(ScaledComplex { mantissa: m, log_scale: 0.0 });
    }
    let mu: Vec<C64> = ns.all().map(|z| z * t).collect();
    let shift = mu.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let mu: Vec<C64> = mu.into_iter().map(|z| z - shift).collect();
    let table = exp1_table(&mu)?;
    Ok(ScaledComplex { mantissa: table[(k - 1, 0)], log_scale: shift + (k as f64 - 1.0) * t.ln() })
}

const TABLE_STEP_NORM: f64 = 0.5;
const TABLE_EXTRA_TERMS: usize = 40;

/// Lower triangular `D` with `D[i, j] = exp_1[mu_j, .., mu_i]`.
fn exp1_table(mu: &[C64]) -> Result<DMatrix<C64>> {
    let k = mu.len();
    let big = mu.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let r = if big > TABLE_STEP_NORM { (big / TABLE_STEP_NORM).log2().ceil() as i32 } else { 0 };
    if r > 2000 {
        return Err(Error::Overflow { norm: big });
    }
    let nu: Vec<C64> = mu.iter().map(|z| z * 2f64.powi(-r)).collect();
    let mut d = DMatrix::zeros(k, k);
    let mut term = vec![C64::new(0.0, 0.0); k];
    let mut next = vec![C64::new(0.0, 0.0); k];
    for j in 0..k {
        term.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        term[j] = C64::new(1.0, 0.0);
        d[(j, j)] = term[j];
        for n in 1..(k - j) + TABLE_EXTRA_TERMS {
            for i in j..k {
                let below = if i > j { term[i - 1] } else { C64::new(0.0, 0.0) };
                next[i] = (nu[i] * term[i] + below) / n as f64;
            }
            std::mem::swap(&mut term, &mut next);
            for i in j..k {
                d[(i, j)] += term[i];
            }
        }
    }
    for _ in 0..r {
        let mut sq = DMatrix::zeros(k, k);
        for j in 0..k {
            for i in j..k {
                let mut acc = C64::new(0.0, 0.0);
                for l in j..=i {
                    acc += d[(i, l)] * d[(l, j)];
                }
                sq[(i, j)] = acc * 2f64.powi(-((i - j) as i32));
            }
        }
        d = sq;
    }
    if d.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(d)
}
