//! Adaptive substepping of phi_1(tA)v with several estimators.
use krylov_defect::prelude::*;

fn main() -> Result<()> {
    let op = build_convection_diffusion_2d(20, 100.0)?;
    let v: Vec<C64> = vec![C64::new(1.0 / (op.n() as f64).sqrt(), 0.0); op.n()];
    let (t_final, p, tol) = (0.05, 1, 1e-8);
    let reference = reference_phi_action(&op, &v, t_final, p)?;
    for kind in [EstimatorKind::BoundRealPart, EstimatorKind::EstGeneralizedResidual, EstimatorKind::EstEffectiveOrder]
    {
        let report = propagate(&op, &v, &StepControl::new(tol, kind, 20, t_final, p)?)?;
        let err = report.result.iter().zip(&reference).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        println!(
            "{:<16} steps {:>4}  matvecs {:>5}  error {err:.3e}  (target {:.1e})",
            kind.name(),
            report.steps.len(),
            report.matvecs,
            tol * t_final
        );
    }
    Ok(())
}
