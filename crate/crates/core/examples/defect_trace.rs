//! |delta(t)| for the three starting-vector cases of the skew Laplacian.
use krylov_defect::bench::{defect_trace, ExperimentConfig, ProblemSpec, StartVector};
use krylov_defect::prelude::*;

fn main() -> Result<()> {
    let grid: Vec<f64> = (0..9).map(|k| 10f64.powf(-3.0 + 0.5 * k as f64)).collect();
    for case in ["a", "b", "c"] {
        let cfg = ExperimentConfig {
            problem: ProblemSpec::Laplacian1d { n: 200, skew: true },
            estimators: vec![EstimatorKind::BoundRealPart],
            tol: 1e-8,
            m_grid: vec![10],
            p: 0,
            output: None,
            seed: 7,
            start: Some(StartVector::case(case)?),
            orth: OrthScheme::FullReorth,
            true_error: false,
            qtol: 1e-3,
        };
        println!("case ({case})");
        for row in defect_trace(&cfg, 10, &grid)? {
            println!("  t = {:.2e}  |delta| = {:.4e}  K=2 model = {:.4e}", row.t, row.defect_abs, row.asymptotic_k2);
        }
    }
    Ok(())
}
