use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use krylov_defect::bench::{
    build_problem, defect_trace, rows_pass, run_checks, write_rows, write_trace, ExperimentConfig, ProblemSpec,
    StartVector,
};
use krylov_defect::prelude::*;

#[derive(Parser)]
#[command(name = "krylov-defect", version, about = "Krylov phi-function actions with defect-based error bounds")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Clone, Copy, ValueEnum)]
enum Orth {
    Mgs,
    #[value(name = "mgs+")]
    MgsPlus,
    Full,
}

impl From<Orth> for OrthScheme {
    fn from(o: Orth) -> Self {
        match o {
            Orth::Mgs => OrthScheme::Mgs,
            Orth::MgsPlus => OrthScheme::MgsReorth,
            Orth::Full => OrthScheme::FullReorth,
        }
    }
}

#[derive(clap::Args)]
struct Overrides {
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    orth: Option<Orth>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(t) = self.tol {
            cfg.tol = t;
        }
        if let Some(p) = self.p {
            cfg.p = p;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = self.orth {
            cfg.orth = o.into();
        }
    }
}

#[derive(Subcommand)]
enum Verb {
    /// Sweep the m grid of a config file and write the results CSV.
    Run {
        config: PathBuf,
        #[command(flatten)]
        ov: Overrides,
        /// Comma-separated, replaces the config's m grid.
        #[arg(long, value_delimiter = ',')]
        m: Option<Vec<usize>>,
        /// Comma-separated estimator names.
        #[arg(long, value_delimiter = ',')]
        estimator: Option<Vec<EstimatorKind>>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        no_true_error: bool,
    },
    /// Write |delta(t)| and its two-term model over a log-spaced t grid.
    DefectTrace {
        /// Problem config; without it the skew Laplacian of size `--n` is used.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Starting vector case for the skew Laplacian.
        #[arg(long, default_value = "a")]
        case: String,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        m: usize,
        #[command(flatten)]
        ov: Overrides,
        #[arg(long, default_value_t = 1e-3)]
        t_min: f64,
        #[arg(long, default_value_t = 10.0)]
        t_max: f64,
        #[arg(long, default_value_t = 41)]
        points: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Adaptive substepping to t_final; prints a JSON report.
    Propagate {
        config: PathBuf,
        #[command(flatten)]
        ov: Overrides,
        #[arg(long, default_value = "real-part-bound")]
        estimator: EstimatorKind,
        #[arg(long, default_value_t = 30)]
        m: usize,
        #[arg(long)]
        t_final: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Fast invariant checks; exit code 1 on any failure.
    Check,
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo) || points == 0 {
        return Err(Error::InvalidArgument("need 0 < t-min <= t-max and points >= 1".into()));
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi / lo).ln() / (points - 1) as f64;
    Ok((0..points).map(|k| lo * (step * k as f64).exp()).collect())
}

fn execute(verb: Verb) -> Result<bool> {
    match verb {
        Verb::Run { config, ov, m, estimator, output, no_true_error } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            ov.apply(&mut cfg);
            if let Some(m) = m {
                cfg.m_grid = m;
            }
            if let Some(e) = estimator {
                cfg.estimators = e;
            }
            if no_true_error {
                cfg.true_error = false;
            }
            if output.is_some() {
                cfg.output = output;
            }
            cfg.validate()?;
            let rows = krylov_defect::bench::run_experiment(&cfg)?;
            write_rows(&rows, sink(&cfg.output)?)?;
            Ok(rows_pass(&rows))
        }
        Verb::DefectTrace { config, case, n, m, ov, t_min, t_max, points, output } => {
            let mut cfg = match config {
                Some(path) => ExperimentConfig::load(path)?,
                None => ExperimentConfig {
                    problem: ProblemSpec::Laplacian1d { n, skew: true },
                    estimators: vec![EstimatorKind::EstGeneralizedResidual],
                    tol: 1e-8,
                    m_grid: vec![m],
                    p: 0,
                    output: None,
                    seed: 1,
                    start: Some(StartVector::case(&case)?),
                    orth: OrthScheme::FullReorth,
                    true_error: false,
                    qtol: 1e-3,
                },
            };
            ov.apply(&mut cfg);
            let rows = defect_trace(&cfg, m, &log_grid(t_min, t_max, points)?)?;
            write_trace(&rows, sink(&output)?)?;
            Ok(true)
        }
        Verb::Propagate { config, ov, estimator, m, t_final, output } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            ov.apply(&mut cfg);
            let problem = build_problem(&cfg)?;
            let mut ctrl = StepControl::new(cfg.tol, estimator, m, t_final, cfg.p)?;
            ctrl.policy = cfg.policy();
            ctrl.qtol = cfg.qtol;
            let report = propagate(&problem.op, &problem.v, &ctrl)?;
            let mut out = sink(&output)?;
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
            Ok(true)
        }
        Verb::Check => {
            let outcomes = run_checks()?;
            for c in &outcomes {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(outcomes.iter().all(|c| c.passed))
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse().verb) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
