//! Experiment harness: configuration, result tables, defect traces and a
//! self-check, shared by the `krylov-defect` binary and the examples.

mod check;
mod config;
mod trace;

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dense::phi_action;
use crate::estimators::{accuracy_criterion_1, accuracy_criterion_2, estimate, EstimatorKind};
use crate::krylov::{krylov_decompose, KrylovDecomposition};
use crate::linops::{dense_reference_phi, reference_phi_action, LinearOperator};
use crate::stepper::{solve_t_of_m, StepControl};
use crate::{norm2, Error, Result, C64};

pub use check::{random_hessenberg, run_checks, CheckOutcome};
pub use config::{
    build_problem, laplacian_mode, ExperimentConfig, Problem, ProblemSpec, StartVector, TRUE_ERROR_LIMIT,
};
pub use trace::{defect_trace, emit_defect_trace, read_trace, write_trace, TraceRow, TRACE_HEADER};

/// First line of every results file.
pub const RESULTS_HEADER: &str = "# krylov-defect results v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub m: usize,
    pub estimator: EstimatorKind,
    /// `t(m)`; NaN when the estimator was unavailable.
    pub t_m: f64,
    pub zeta: f64,
    pub ln_zeta: f64,
    /// `||l(t(m))||_2 / t(m)`.
    pub error_per_unit_step: Option<f64>,
    pub ac_est1: f64,
    pub ac_est2: f64,
    pub matvecs: usize,
    pub wall_ms: f64,
    pub proven_bound: bool,
    pub second_crossing: bool,
    /// For proven bounds with a measured error: `error <= tol t(m)` up to
    /// the measurement floor.
    pub bound_holds: Option<bool>,
    pub status: String,
}

/// Dense oracle below this dimension, matrix-free Taylor oracle above.
pub const DENSE_ORACLE_LIMIT: usize = 200;

/// Reference evaluation of `phi_p(tA)x` with the route chosen by size.
pub struct Oracle {
    op: LinearOperator,
    dense: Option<DMatrix<C64>>,
}

impl Oracle {
    pub fn new(op: &LinearOperator) -> Self {
        let dense = (op.n() <= DENSE_ORACLE_LIMIT).then(|| op.to_dense());
        Self { op: op.clone(), dense }
    }

    pub fn phi(&self, x: &[C64], t: f64, p: usize) -> Result<Vec<C64>> {
        match &self.dense {
            Some(a) => dense_reference_phi(a, x, t, p),
            None => reference_phi_action(&self.op, x, t, p),
        }
    }
}

/// Measured error of the Krylov approximation of `phi_p(tA)v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrueError {
    pub norm: f64,
    /// Rounding level of the measurement; differences below it are noise.
    pub floor: f64,
}

/// `||phi_p(tA)v - beta V phi_p(tH) e_1||_2`, evaluated as
/// `t ||phi_(p+1)(tA) A v - V H beta phi_(p+1)(tH) e_1||_2` so that the
/// exactly cancelling constant term `v/p!` does not limit the accuracy.
pub fn true_error(oracle: &Oracle, dec: &KrylovDecomposition, v: &[C64], p: usize, t: f64) -> Result<TrueError> {
    if t == 0.0 {
        return Ok(TrueError { norm: 0.0, floor: 0.0 });
    }
    let m = dec.m();
    let y = phi_action(dec.h(), p + 1, t, dec.beta())?;
    let hy: Vec<C64> = (0..m).map(|i| (0..m).map(|j| dec.h()[(i, j)] * y[j]).sum()).collect();
    let approx = dec.combine(&hy)?;
    let av = oracle.op.matvec(v)?;
    let exact = oracle.phi(&av, t, p + 1)?;
    let diff: Vec<C64> = approx.iter().zip(&exact).map(|(a, b)| a - b).collect();
    let scale = norm2(&approx).max(norm2(&exact));
    let steps = (t * oracle.op.norm2_estimate()).max(1.0);
    Ok(TrueError { norm: t * norm2(&diff), floor: 64.0 * f64::EPSILON * t * scale * steps })
}

fn unavailable_row(m: usize, kind: EstimatorKind, matvecs: usize, e: &Error) -> ResultRow {
    ResultRow {
        m,
        estimator: kind,
        t_m: f64::NAN,
        zeta: f64::NAN,
        ln_zeta: f64::NAN,
        error_per_unit_step: None,
        ac_est1: f64::NAN,
        ac_est2: f64::NAN,
        matvecs,
        wall_ms: 0.0,
        proven_bound: kind.is_proven_bound(),
        second_crossing: false,
        bound_holds: None,
        status: format!("unavailable: {e}"),
    }
}

/// One row per `(m, estimator)`: the decomposition is built once per `m`,
/// `t(m)` solved per estimator, and the true error measured when requested.
/// Rows are sorted by `m`, then estimator name.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let problem = build_problem(cfg)?;
    if cfg.true_error && problem.op.n() > TRUE_ERROR_LIMIT {
        return Err(Error::GuardExceeded { n: problem.op.n(), limit: TRUE_ERROR_LIMIT });
    }
    let oracle = cfg.true_error.then(|| Oracle::new(&problem.op));
    let policy = cfg.policy();
    let mut rows = Vec::new();
    for &m in &cfg.m_grid {
        let dec = krylov_decompose(&problem.op, &problem.v, m, &policy)?;
        for &kind in &cfg.estimators {
            let start = Instant::now();
            let ctrl =
                StepControl { tol: cfg.tol, estimator: kind, m_max: m, t_final: 1.0, p: cfg.p, policy, qtol: cfg.qtol };
            let crossing = match solve_t_of_m(&dec, &ctrl) {
                Ok(c) => c,
                Err(
                    e @ (Error::EstimatorUnavailable(_) | Error::SpectrumNotReal { .. } | Error::NoCrossing { .. }),
                ) => {
                    rows.push(unavailable_row(dec.m(), kind, dec.matvecs(), &e));
                    continue;
                }
                Err(e) => return Err(e),
            };
            let t = crossing.t;
            let z = estimate(kind, &dec, cfg.p, t, cfg.qtol)?;
            let err = match &oracle {
                Some(o) => Some(true_error(o, &dec, &problem.v, cfg.p, t)?),
                None => None,
            };
            let bound_holds = match (kind.is_proven_bound(), err) {
                (true, Some(e)) => Some(e.norm <= cfg.tol * t + e.floor),
                _ => None,
            };
            rows.push(ResultRow {
                m: dec.m(),
                estimator: kind,
                t_m: t,
                zeta: z.value,
                ln_zeta: z.ln_value,
                error_per_unit_step: err.map(|e| e.norm / t),
                ac_est1: accuracy_criterion_1(&dec, cfg.p, t)?,
                ac_est2: accuracy_criterion_2(&dec, cfg.p, t),
                matvecs: dec.matvecs(),
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
                proven_bound: kind.is_proven_bound(),
                second_crossing: crossing.second_crossing,
                bound_holds,
                status: if dec.breakdown() { "breakdown".into() } else { "ok".into() },
            });
        }
    }
    rows.sort_by(|a, b| a.m.cmp(&b.m).then(a.estimator.name().cmp(b.estimator.name())));
    Ok(rows)
}

/// Writes the versioned header line followed by CSV rows.
pub fn write_rows(rows: &[ResultRow], out: impl Write) -> Result<()> {
    let mut out = out;
    writeln!(out, "{RESULTS_HEADER}")?;
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_rows_file(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<()> {
    write_rows(rows, std::io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn read_rows(input: impl std::io::Read) -> Result<Vec<ResultRow>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<Vec<ResultRow>, _>>()?)
}

/// All measured proven-bound rows hold.
pub fn rows_pass(rows: &[ResultRow]) -> bool {
    rows.iter().all(|r| r.bound_holds != Some(false))
}

/// Smallest `m` whose row for `kind` has `ac.est.2 > threshold`.
pub fn ac2_crossing(rows: &[ResultRow], kind: EstimatorKind, threshold: f64) -> Option<usize> {
    rows.iter().filter(|r| r.estimator == kind && r.ac_est2 > threshold).map(|r| r.m).min()
}

/// Smallest `m` whose row for `kind` has `ac.est.1 > threshold`.
pub fn ac1_crossing(rows: &[ResultRow], kind: EstimatorKind, threshold: f64) -> Option<usize> {
    rows.iter().filter(|r| r.estimator == kind && r.ac_est1 > threshold).map(|r| r.m).min()
}
