//! One PASS/FAIL line per acceptance criterion.
//!
//! Run with `cargo test --release --test acceptance -- --nocapture` to see
//! the lines; the test fails if any criterion fails.

mod common;

use std::time::Instant;

use common::*;
use krylov_defect::bench::{ac2_crossing, run_experiment, ExperimentConfig, ProblemSpec};
use krylov_defect::estimators::{effective_order_rho, factorial_xi_max};
use krylov_defect::krylov::krylov_decompose_until;
use krylov_defect::prelude::*;
use rand::Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn real_part_t(dec: &KrylovDecomposition, p: usize, tol: f64) -> f64 {
    let ctrl = StepControl::new(tol, EstimatorKind::BoundRealPart, dec.m(), 1.0, p).unwrap();
    solve_t_of_m(dec, &ctrl).unwrap().t
}

fn corner_identity() -> Outcome {
    let mut r = rng(101);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let m = r.random_range(2..=8);
        let h = random_hessenberg(m, &mut r);
        let dec = KrylovDecomposition::from_hessenberg(h.clone(), 1.0, 1.0).unwrap();
        let ns = NodeSet::new(dec.ritz_values().unwrap(), 0).unwrap();
        let mut e1 = vec![c(0.0, 0.0); m];
        e1[0] = c(1.0, 0.0);
        for t in [0.1, 1.0, 10.0] {
            let exact = taylor_exp_action(&h, &e1, t)[m - 1];
            let dd = divided_differences_exp(&ns, t).unwrap();
            let via = dd.mantissa * (dd.log_scale + dec.log_gamma()).exp();
            worst = worst.max((via - exact).norm() / exact.norm());
        }
    }
    outcome(worst <= 1e-8, format!("max relative deviation {worst:.2e} (limit 1e-8)"))
}

fn augmentation_identity() -> Outcome {
    let mut r = rng(101);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let m = r.random_range(2..=8);
        let h = random_hessenberg(m, &mut r);
        for p in 1..=3 {
            let aug = lower_left_augmented(&h, p);
            let mut e1 = vec![c(0.0, 0.0); m + p];
            e1[0] = c(1.0, 0.0);
            for t in [0.1, 1.0, 10.0] {
                let exact = taylor_exp_action(&aug, &e1, t)[m + p - 1];
                let lhs = phi_action(&h, p, t, 1.0).unwrap()[m - 1] * t.powi(p as i32);
                let corner = corner_phi(&h, p, t, 1.0).unwrap();
                worst = worst.max((lhs - exact).norm() / exact.norm()).max((corner - exact).norm() / exact.norm());
            }
        }
    }
    outcome(worst <= 1e-10, format!("max relative deviation {worst:.2e} (limit 1e-10)"))
}

fn real_spectrum_exactness() -> Outcome {
    let qtol = 1e-6;
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for fx in [laplacian(400, 3), laplacian(1000, 4)] {
        for m in [5, 10, 20] {
            let dec = krylov_decompose(&fx.op, &fx.v, m, &OrthPolicy::full()).unwrap();
            for p in 0..=1 {
                let tm = real_part_t(&dec, p, 1e-8);
                for t in [0.25 * tm, tm, 4.0 * tm] {
                    let exact = bound_exact_real(&dec, p, t).unwrap().value;
                    let quad = defect_integral_quadrature(&dec, p, t, qtol).unwrap().value;
                    worst = worst.max((exact - quad).abs() / (2.0 * qtol * quad));
                    cases += 1;
                }
            }
        }
    }
    outcome(worst <= 1.0, format!("{cases} cases, max |exact - L| / (2 qtol L) = {worst:.3}"))
}

fn bound_soundness() -> Outcome {
    let fixtures =
        vec![convdiff(50, 0.0), convdiff(50, 100.0), convdiff(50, 500.0), laplacian(1000, 5), schrodinger(400)];
    let mut checks = 0;
    let mut violations = Vec::new();
    let mut tightest: f64 = 0.0;
    for fx in &fixtures {
        for m in [5, 10, 20, 30, 40] {
            let dec = krylov_decompose(&fx.op, &fx.v, m, &OrthPolicy::full()).unwrap();
            for p in 0..=2 {
                let tm = real_part_t(&dec, p, 1e-8);
                for t in [0.25 * tm, 0.5 * tm, tm] {
                    let (err, floor) = true_error(&fx.op, &dec, &fx.v, p, t);
                    let mut bounds = vec![bound_real_part(&dec, p, t).unwrap()];
                    if let Ok(b) = bound_exact_real(&dec, p, t) {
                        bounds.push(b);
                    }
                    if let Ok(b) = factorial_xi_max(&dec, p).and_then(|x| bound_factorial(&dec, p, t, x)) {
                        bounds.push(b);
                    }
                    for b in bounds {
                        checks += 1;
                        if err > 10.0 * floor {
                            tightest = tightest.max(err / b.value);
                        }
                        if err > b.value + floor {
                            violations.push(format!(
                                "{} m={m} p={p} t={t:.3e} {}: {err:.3e} > {:.3e}",
                                fx.name,
                                b.kind.name(),
                                b.value
                            ));
                        }
                    }
                }
            }
        }
    }
    let detail =
        format!("{checks} comparisons, {} violations, max error/bound above the floor {tightest:.6}", violations.len());
    for v in &violations {
        println!("    {v}");
    }
    outcome(violations.is_empty(), detail)
}

fn skew_coincidence() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for fx in [schrodinger(400), schrodinger(200)] {
        for m in [10, 20, 30, 40, 50] {
            let dec = krylov_decompose(&fx.op, &fx.v, m, &OrthPolicy::full()).unwrap();
            for p in 0..=2 {
                let tm = real_part_t(&dec, p, 1e-8);
                let xi = factorial_xi_max(&dec, p).unwrap();
                for t in [0.25 * tm, tm, 4.0 * tm] {
                    let a = bound_real_part(&dec, p, t).unwrap().ln_value;
                    let f = bound_factorial(&dec, p, t, xi).unwrap().ln_value;
                    worst = worst.max((a - f).exp_m1().abs());
                    cases += 1;
                }
            }
        }
    }
    outcome(worst <= 1e-12, format!("{cases} cases, max relative gap {worst:.2e} (limit 1e-12)"))
}

fn asymptotic_order() -> Outcome {
    let mut r = rng(202);
    let grid = log_grid(1e-3, 1e-1, 9);
    let mut slopes = Vec::new();
    for _ in 0..50 {
        let k = r.random_range(3..=8);
        let pad = r.random_range(0..=2);
        let nodes: Vec<C64> = (0..k).map(|_| c(r.random_range(-2.0..-0.1), r.random_range(-2.0..2.0))).collect();
        let ns = NodeSet::new(nodes.clone(), pad).unwrap();
        let mut all = nodes;
        all.extend(std::iter::repeat_n(c(0.0, 0.0), pad));
        let expansion = rho_coeffs(&ns, 2);
        let rel: Vec<f64> = grid
            .iter()
            .map(|&t| {
                let exact = divdiff_series(&all, t, 60).norm();
                (expansion.value(t) - exact).abs() / exact
            })
            .collect();
        slopes.push(loglog_slope(&grid, &rel));
    }
    let lo = slopes.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    outcome(lo >= 2.7 && hi <= 3.3, format!("50 node sets, slopes in [{lo:.3}, {hi:.3}] (need [2.7, 3.3])"))
}

fn trace_formulas() -> Outcome {
    let mut r = rng(303);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let m = r.random_range(2..=8);
        let p = r.random_range(0..=3);
        let h = random_hessenberg(m, &mut r);
        let dec = KrylovDecomposition::from_hessenberg(h.clone(), 1.0, 1.0).unwrap();
        let ritz = dec.ritz_values().unwrap();
        // Eigenvalue side computed here from the Ritz values.
        let total = (m + p) as f64;
        let mean = |f: &dyn Fn(C64) -> f64| ritz.iter().map(|z| f(*z)).sum::<f64>() / total;
        let avg_xi = mean(&|z| z.re);
        let avg_eta = mean(&|z| z.im);
        let var_xi = (ritz.iter().map(|z| (z.re - avg_xi).powi(2)).sum::<f64>() + p as f64 * avg_xi * avg_xi) / total;
        let var_eta =
            (ritz.iter().map(|z| (z.im - avg_eta).powi(2)).sum::<f64>() + p as f64 * avg_eta * avg_eta) / total;
        let rho2 = (var_xi - var_eta) / (total + 1.0);
        let (t1, t2) = rho12_from_traces(&h, p);
        worst = worst.max((t1 - avg_xi).abs()).max((t2 - rho2).abs());
    }
    outcome(worst <= 1e-12, format!("200 matrices, max deviation {worst:.2e} (limit 1e-12)"))
}

fn effective_order_limits() -> Outcome {
    let fixtures = vec![laplacian(400, 6), convdiff(20, 100.0), convdiff(20, 0.0)];
    let mut worst_limit: f64 = 0.0;
    let mut not_decreasing = Vec::new();
    let mut cases = 0;
    for fx in &fixtures {
        for m in [5, 10, 20] {
            let dec = krylov_decompose(&fx.op, &fx.v, m, &OrthPolicy::full()).unwrap();
            let hn = dec.h().norm();
            for p in 0..=2 {
                cases += 1;
                let target = (m + p - 1) as f64;
                worst_limit = worst_limit.max((effective_order_rho(&dec, p, 1e-6 / hn).unwrap() - target).abs());
                let rhos: Vec<f64> = log_grid(1e-4 / hn, 1e-1 / hn, 8)
                    .iter()
                    .map(|&t| effective_order_rho(&dec, p, t).unwrap())
                    .collect();
                if rhos.windows(2).any(|w| w[1] >= w[0]) {
                    not_decreasing.push(format!("{} m={m} p={p}", fx.name));
                }
            }
        }
    }
    for s in &not_decreasing {
        println!("    not decreasing near 0: {s}");
    }
    outcome(
        worst_limit <= 1e-3 && not_decreasing.is_empty(),
        format!(
            "{cases} cases, max |rho(1e-6/||H||) - (m+p-1)| = {worst_limit:.2e}, {} non-decreasing",
            not_decreasing.len()
        ),
    )
}

fn sandwich() -> Outcome {
    let fixtures = vec![laplacian(400, 7), laplacian(1000, 8), convdiff(20, 0.0)];
    let mut cases = 0;
    let mut flagged = 0;
    let mut unflagged_violations = Vec::new();
    for fx in &fixtures {
        for m in [5, 10, 20] {
            let dec = krylov_decompose(&fx.op, &fx.v, m, &OrthPolicy::full()).unwrap();
            for p in 0..=2 {
                let tm = real_part_t(&dec, p, 1e-8);
                for t in [0.25 * tm, tm, 4.0 * tm] {
                    cases += 1;
                    let rhos: Vec<f64> =
                        log_grid(1e-6 * t, t, 60).iter().map(|&s| effective_order_rho(&dec, p, s).unwrap()).collect();
                    let monotone = rhos.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs());
                    let gen = est_generalized_residual(&dec, p, t).unwrap().value;
                    let rho = *rhos.last().unwrap();
                    let l = defect_integral_quadrature(&dec, p, t, 1e-10).unwrap().value;
                    let slack = 1e-8 * l;
                    let ok = gen / (m + p) as f64 <= l + slack && l <= gen / (rho + 1.0) + slack && rho >= 0.0;
                    if !monotone {
                        flagged += 1;
                        println!(
                            "    flagged (rho not monotone): {} m={m} p={p} t={t:.3e}, inequality holds: {ok}",
                            fx.name
                        );
                    } else if !ok {
                        unflagged_violations.push(format!("{} m={m} p={p} t={t:.3e}", fx.name));
                    }
                }
            }
        }
    }
    for v in &unflagged_violations {
        println!("    violation with monotone rho: {v}");
    }
    outcome(
        unflagged_violations.is_empty(),
        format!(
            "{cases} cases, {flagged} flagged non-monotone, {} violations under monotone rho",
            unflagged_violations.len()
        ),
    )
}

fn lucky_breakdown() -> Outcome {
    let n = 60;
    let tol = 1e-8;
    let lap = build_laplacian_1d(n).unwrap();
    let skew = lap.scaled(c(0.0, 1.0)).unwrap();
    let mode = |j: usize| -> Vec<C64> {
        let s = (2.0 / (n as f64 + 1.0)).sqrt();
        (0..n)
            .map(|i| c(s * (std::f64::consts::PI * (i + 1) as f64 * j as f64 / (n as f64 + 1.0)).sin(), 0.0))
            .collect()
    };
    let mut r = rng(404);
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for case in 0..20 {
        let op = if case % 2 == 0 { &lap } else { &skew };
        let k = r.random_range(1..=3);
        let mut v = vec![c(0.0, 0.0); n];
        let mut picked = Vec::new();
        for _ in 0..k {
            let w = c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
            // Clustered modes make the invariant subspace ill-conditioned: the
            // 1e-12 noise is amplified by (||A|| / gap)^k and h never gets small.
            let j = loop {
                let j = r.random_range(1..=n);
                if picked.iter().all(|&q: &usize| q.abs_diff(j) >= 8) {
                    break j;
                }
            };
            picked.push(j);
            for (a, b) in v.iter_mut().zip(mode(j)) {
                *a += w * b;
            }
        }
        let noise = random_vector(n, &mut r);
        let s = norm(&v);
        let v: Vec<C64> = v.iter().zip(&noise).map(|(a, e)| a / s + e * 1e-12).collect();
        let p = case % 3;
        let dec =
            krylov_decompose_until(op, &v, 30, &OrthPolicy::full(), |_, b, h| lucky_breakdown_check(b, h, p, tol))
                .unwrap();
        let triggered = lucky_breakdown_check(dec.beta(), dec.h_next(), p, tol);
        let mut case_worst: f64 = 0.0;
        for t in [0.5, 5.0, 50.0] {
            let (err, floor) = true_error(op, &dec, &v, p, t);
            case_worst = case_worst.max((err - floor).max(0.0) / t);
        }
        worst = worst.max(case_worst);
        if !triggered || case_worst > tol {
            failures.push(format!(
                "case {case} modes {picked:?}: triggered {triggered} at m={}, error/t {case_worst:.2e}",
                dec.m()
            ));
        }
    }
    for f in &failures {
        println!("    {f}");
    }
    outcome(failures.is_empty(), format!("20 cases, max error per unit step {worst:.2e} (limit 1e-8)"))
}

fn desk_rerun() -> Outcome {
    let start = Instant::now();
    let tol = 1e-8;
    let mut lines = Vec::new();
    let mut passed = true;
    for nu in [100.0, 500.0] {
        let cfg = ExperimentConfig {
            problem: ProblemSpec::Convdiff2d { big_n: 50, nu },
            estimators: vec![
                EstimatorKind::BoundRealPart,
                EstimatorKind::BoundFactorial,
                EstimatorKind::EstGeneralizedResidual,
                EstimatorKind::EstEffectiveOrder,
            ],
            tol,
            m_grid: (1..=8).map(|k| 5 * k).collect(),
            p: 0,
            output: None,
            seed: 1,
            start: None,
            orth: OrthScheme::FullReorth,
            true_error: false,
            qtol: 1e-3,
        };
        let rows = run_experiment(&cfg).unwrap();
        let fx = convdiff(50, nu);
        let mut worst: f64 = 0.0;
        let mut order_violations = 0;
        for &m in &cfg.m_grid {
            let dec = krylov_decompose(&fx.op, &fx.v, m, &OrthPolicy::full()).unwrap();
            for row in rows.iter().filter(|r| r.m == m) {
                if row.status != "ok" {
                    continue;
                }
                if row.proven_bound {
                    let (err, floor) = true_error(&fx.op, &dec, &fx.v, 0, row.t_m);
                    let per_step = (err - floor).max(0.0) / row.t_m;
                    worst = worst.max(per_step);
                    if per_step > tol {
                        passed = false;
                    }
                }
                let eff = est_effective_order(&dec, 0, row.t_m).unwrap().value;
                let gen = est_generalized_residual(&dec, 0, row.t_m).unwrap().value;
                if eff > gen {
                    order_violations += 1;
                }
            }
        }
        let crossing = ac2_crossing(&rows, EstimatorKind::BoundRealPart, 0.1);
        let rerun = run_experiment(&cfg).unwrap();
        let stable = ac2_crossing(&rerun, EstimatorKind::BoundRealPart, 0.1) == crossing
            && rerun.iter().zip(&rows).all(|(a, b)| a.t_m.to_bits() == b.t_m.to_bits());
        passed &= order_violations == 0 && stable;
        lines.push(format!(
            "nu={nu}: max proven error/t {worst:.3e}, eff>gen in {order_violations} rows, ac.est.2 crossing m={crossing:?} stable={stable}"
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    passed &= secs < 300.0;
    outcome(passed, format!("{}; {secs:.1} s", lines.join("; ")))
}

fn defect_order() -> Outcome {
    let mut r = rng(505);
    let lap = laplacian(200, 9);
    let fixtures = vec![
        Fixture {
            name: "skew laplacian n=200".into(),
            op: lap.op.scaled(c(0.0, 1.0)).unwrap(),
            v: random_vector(200, &mut r),
        },
        lap,
        Fixture {
            name: "convdiff N=20 nu=100".into(),
            op: build_convection_diffusion_2d(20, 100.0).unwrap(),
            v: random_vector(400, &mut r),
        },
    ];
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for fx in &fixtures {
        for m in [10, 20] {
            let dec = krylov_decompose(&fx.op, &fx.v, m, &OrthPolicy::full()).unwrap();
            let hn = dec.h().norm();
            for p in 0..=2 {
                let grid = log_grid(1e-3 / hn, 1e-1 / hn, 12);
                let d: Vec<f64> = grid.iter().map(|&t| defect(&dec, p, t).unwrap().norm()).collect();
                worst = worst.max((loglog_slope(&grid, &d) - (m + p - 1) as f64).abs());
                cases += 1;
            }
        }
    }
    outcome(worst <= 0.2, format!("{cases} cases, max |slope - (m+p-1)| = {worst:.2e} (limit 0.2)"))
}

#[test]
fn acceptance_criteria() {
    let criteria: Vec<Criterion> = vec![
        ("1 corner identity", corner_identity),
        ("2 augmentation identity", augmentation_identity),
        ("3 real-spectrum exactness", real_spectrum_exactness),
        ("4 bound soundness", bound_soundness),
        ("5 skew-Hermitian coincidence", skew_coincidence),
        ("6 asymptotic expansion order", asymptotic_order),
        ("7 trace-formula equivalence", trace_formulas),
        ("8 effective-order limits", effective_order_limits),
        ("9 sandwich inequality", sandwich),
        ("10 lucky-breakdown guarantee", lucky_breakdown),
        ("11 desk-scale convection-diffusion rerun", desk_rerun),
        ("12 defect small-t order", defect_order),
    ];
    // Keeps the first line clear of the harness's `test ... ` prefix.
    println!();
    let mut failed = Vec::new();
    for (name, f) in criteria {
        let t0 = Instant::now();
        let o = f();
        println!(
            "{} {name}: {} [{:.1} s]",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail,
            t0.elapsed().as_secs_f64()
        );
        if !o.passed {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
