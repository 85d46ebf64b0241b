use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::estimators::EstimatorKind;
use crate::krylov::{OrthPolicy, OrthScheme};
use crate::linops::{
    build_convection_diffusion_2d, build_laplacian_1d, build_schrodinger_double_well, load_matrix_market,
    LinearOperator, Structure,
};
use crate::{norm2, Error, Result, C64};

/// Largest dimension for which true errors are measured.
pub const TRUE_ERROR_LIMIT: usize = 2500;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case")]
pub enum ProblemSpec {
    /// `A = B = tridiag(1,-2,1)`, or `A = iB` with `skew = true`.
    Laplacian1d {
        n: usize,
        #[serde(default)]
        skew: bool,
    },
    Convdiff2d {
        #[serde(rename = "N")]
        big_n: usize,
        nu: f64,
    },
    /// `A = -iB` for the double-well Hamiltonian.
    SchrodingerDw {
        n: usize,
    },
    MatrixMarket {
        path: PathBuf,
        structure: Structure,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StartVector {
    Ones,
    Random,
    /// Double-well wavepacket; only valid for that preset.
    Wavepacket,
    /// `sum_j c_j psi_j` over the eigenvectors of `tridiag(1,-2,1)`, ordered by
    /// increasing `|lambda_j|`: `c_j = low_weight` for the first `low`
    /// modes, `high_weight` for the last `high`, 1 otherwise.
    LaplacianModes {
        low: usize,
        low_weight: f64,
        high: usize,
        high_weight: f64,
    },
}

impl StartVector {
    /// The three starting vectors of the free Schroedinger defect study.
    pub fn case(name: &str) -> Result<Self> {
        match name {
            "a" => Ok(Self::Random),
            "b" => Ok(Self::LaplacianModes { low: 25, low_weight: 1e6, high: 0, high_weight: 1.0 }),
            "c" => Ok(Self::LaplacianModes { low: 20, low_weight: 1e5, high: 20, high_weight: 1e5 }),
            other => Err(Error::InvalidArgument(format!("unknown start case '{other}', expected a, b or c"))),
        }
    }
}

fn default_orth() -> OrthScheme {
    OrthScheme::FullReorth
}
fn default_true_error() -> bool {
    true
}
fn default_qtol() -> f64 {
    1e-3
}
fn default_seed() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub estimators: Vec<EstimatorKind>,
    pub tol: f64,
    pub m_grid: Vec<usize>,
    #[serde(default)]
    pub p: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub start: Option<StartVector>,
    #[serde(default = "default_orth")]
    pub orth: OrthScheme,
    #[serde(default = "default_true_error")]
    pub true_error: bool,
    #[serde(default = "default_qtol")]
    pub qtol: f64,
}

fn cfg_err(field: &str, msg: impl Into<String>) -> Error {
    Error::Config { field: field.into(), msg: msg.into() }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| cfg_err("<file>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| cfg_err("<file>", e.to_string()))
    }

    pub fn policy(&self) -> OrthPolicy {
        OrthPolicy { scheme: self.orth, ..OrthPolicy::default() }
    }

    pub fn dimension(&self) -> Option<usize> {
        match &self.problem {
            ProblemSpec::Laplacian1d { n, .. } | ProblemSpec::SchrodingerDw { n } => Some(*n),
            ProblemSpec::Convdiff2d { big_n, .. } => Some(big_n * big_n),
            ProblemSpec::MatrixMarket { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_grid.is_empty() {
            return Err(cfg_err("m_grid", "must not be empty"));
        }
        if self.m_grid[0] == 0 || self.m_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(cfg_err("m_grid", "must be positive and strictly increasing"));
        }
        if self.estimators.is_empty() {
            return Err(cfg_err("estimators", "must not be empty"));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(cfg_err("tol", "must be positive and finite"));
        }
        if !(self.qtol > 0.0) {
            return Err(cfg_err("qtol", "must be positive"));
        }
        match &self.problem {
            ProblemSpec::Laplacian1d { n, .. } if *n < 2 => return Err(cfg_err("problem.n", "must be >= 2")),
            ProblemSpec::Convdiff2d { big_n, nu } => {
                if *big_n < 2 {
                    return Err(cfg_err("problem.N", "must be >= 2"));
                }
                if !nu.is_finite() {
                    return Err(cfg_err("problem.nu", "must be finite"));
                }
            }
            ProblemSpec::SchrodingerDw { n } if *n < 4 => return Err(cfg_err("problem.n", "must be >= 4")),
            _ => {}
        }
        if let Some(n) = self.dimension() {
            if self.true_error && n > TRUE_ERROR_LIMIT {
                return Err(cfg_err("true_error", format!("n = {n} exceeds the oracle limit {TRUE_ERROR_LIMIT}")));
            }
            if *self.m_grid.last().unwrap() > n {
                return Err(cfg_err("m_grid", format!("largest m exceeds n = {n}")));
            }
        }
        match (&self.start, &self.problem) {
            (Some(StartVector::Wavepacket), p) if !matches!(p, ProblemSpec::SchrodingerDw { .. }) => {
                return Err(cfg_err("start", "wavepacket needs the schrodinger-dw preset"));
            }
            (Some(StartVector::LaplacianModes { .. }), p) if !matches!(p, ProblemSpec::Laplacian1d { .. }) => {
                return Err(cfg_err("start", "laplacian-modes needs the laplacian1d preset"));
            }
            _ => {}
        }
        Ok(())
    }
}

/// Operator and starting vector of an experiment.
#[derive(Clone, Debug)]
pub struct Problem {
    pub op: LinearOperator,
    pub v: Vec<C64>,
}

/// Eigenvector `j` (1-based, increasing `|lambda|`) of `tridiag(1,-2,1)`.
pub fn laplacian_mode(n: usize, j: usize) -> Vec<C64> {
    let s = (2.0 / (n as f64 + 1.0)).sqrt();
    (1..=n).map(|k| C64::new(s * (j as f64 * k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).sin(), 0.0)).collect()
}

fn random_real(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| C64::new(rng.random::<f64>() * 2.0 - 1.0, 0.0)).collect()
}

pub fn build_problem(cfg: &ExperimentConfig) -> Result<Problem> {
    cfg.validate()?;
    let (op, packet) = match &cfg.problem {
        ProblemSpec::Laplacian1d { n, skew } => {
            let b = build_laplacian_1d(*n)?;
            (if *skew { b.scaled(C64::new(0.0, 1.0))? } else { b }, None)
        }
        ProblemSpec::Convdiff2d { big_n, nu } => (build_convection_diffusion_2d(*big_n, *nu)?, None),
        ProblemSpec::SchrodingerDw { n } => {
            let (b, v0) = build_schrodinger_double_well(*n)?;
            (b.scaled(C64::new(0.0, -1.0))?, Some(v0))
        }
        ProblemSpec::MatrixMarket { path, structure } => {
            (LinearOperator::new(load_matrix_market(path)?, *structure)?, None)
        }
    };
    let n = op.n();
    if *cfg.m_grid.last().unwrap() > n {
        return Err(cfg_err("m_grid", format!("largest m exceeds n = {n}")));
    }
    let start = cfg.start.clone().unwrap_or(if packet.is_some() { StartVector::Wavepacket } else { StartVector::Ones });
    let mut v = match start {
        StartVector::Ones => vec![C64::new(1.0, 0.0); n],
        StartVector::Random => random_real(n, cfg.seed),
        StartVector::Wavepacket => {
            packet.ok_or_else(|| cfg_err("start", "wavepacket needs the schrodinger-dw preset"))?
        }
        StartVector::LaplacianModes { low, low_weight, high, high_weight } => {
            let mut v = vec![C64::new(0.0, 0.0); n];
            for j in 1..=n {
                let c = if j <= low {
                    low_weight
                } else if j + high > n {
                    high_weight
                } else {
                    1.0
                };
                for (x, y) in v.iter_mut().zip(laplacian_mode(n, j)) {
                    *x += y * c;
                }
            }
            v
        }
    };
    let nv = norm2(&v);
    if nv == 0.0 {
        return Err(Error::ZeroStartVector);
    }
    v.iter_mut().for_each(|z| *z /= nv);
    Ok(Problem { op, v })
}
