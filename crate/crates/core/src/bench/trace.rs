use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{build_problem, ExperimentConfig};
use crate::asymptotics::rho_coeffs;
use crate::dense::NodeSet;
use crate::estimators::{defect, effective_order_rho};
use crate::krylov::krylov_decompose;
use crate::{Error, Result};

pub const TRACE_HEADER: &str = "# krylov-defect defect-trace v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub defect_abs: f64,
    /// `beta gamma t^(M-1)/(M-1)! exp(rho_1 t + rho_2 t^2/2)`.
    pub asymptotic_k2: f64,
    pub effective_order: Option<f64>,
}

/// `|delta_(p,m)(t)|` with its two-term small-`t` model on `t_grid`.
pub fn defect_trace(cfg: &ExperimentConfig, m: usize, t_grid: &[f64]) -> Result<Vec<TraceRow>> {
    if t_grid.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(Error::Config { field: "t_grid".into(), msg: "entries must be positive and finite".into() });
    }
    let mut cfg = cfg.clone();
    cfg.m_grid = vec![m];
    cfg.true_error = false;
    let problem = build_problem(&cfg)?;
    let dec = krylov_decompose(&problem.op, &problem.v, m, &cfg.policy())?;
    let p = cfg.p;
    let expansion = rho_coeffs(&NodeSet::new(dec.ritz_values()?, p)?, 2);
    let ln_bg = dec.beta().ln() + dec.log_gamma();
    t_grid
        .iter()
        .map(|&t| {
            Ok(TraceRow {
                t,
                defect_abs: defect(&dec, p, t)?.norm(),
                asymptotic_k2: (ln_bg + expansion.ln_value(t)).exp(),
                effective_order: effective_order_rho(&dec, p, t).ok(),
            })
        })
        .collect()
}

pub fn write_trace(rows: &[TraceRow], out: impl Write) -> Result<()> {
    let mut out = out;
    writeln!(out, "{TRACE_HEADER}")?;
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace(input: impl std::io::Read) -> Result<Vec<TraceRow>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<Vec<TraceRow>, _>>()?)
}

/// [`defect_trace`] written to `path`.
pub fn emit_defect_trace(
    cfg: &ExperimentConfig,
    m: usize,
    t_grid: &[f64],
    path: impl AsRef<Path>,
) -> Result<Vec<TraceRow>> {
    let rows = defect_trace(cfg, m, t_grid)?;
    write_trace(&rows, std::io::BufWriter::new(std::fs::File::create(path)?))?;
    Ok(rows)
}
