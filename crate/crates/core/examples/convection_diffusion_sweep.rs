//! Step sizes t(m) on the convection-diffusion operator, built from an in-memory config.
use krylov_defect::bench::{ac2_crossing, run_experiment, write_rows, ExperimentConfig};
use krylov_defect::prelude::*;

const CONFIG: &str = r#"
tol = 1e-8
m_grid = [5, 10, 15, 20]
estimators = ["real-part-bound", "gen-residual", "eff-order"]
[problem]
preset = "convdiff2d"
N = 20
nu = 100.0
"#;

fn main() -> Result<()> {
    let cfg = ExperimentConfig::from_toml_str(CONFIG)?;
    let rows = run_experiment(&cfg)?;
    write_rows(&rows, std::io::stdout())?;
    match ac2_crossing(&rows, EstimatorKind::BoundRealPart, 0.1) {
        Some(m) => eprintln!("ac.est.2 exceeds 0.1 from m = {m}"),
        None => eprintln!("ac.est.2 stays below 0.1"),
    }
    Ok(())
}
