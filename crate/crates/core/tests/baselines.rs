use proptest::prelude::*;
use slo_core::problems::{generate_planted_tensor, AnalyticKind, AnalyticProblem};
use slo_core::{bpg_subproblem, gd_fixed, run_bpg, BpgConfig, Budgets, Termination, Vector};

/// Root of `L‖g‖^{n−2}ρ^{n−1} + Lρ = 1` by plain bisection on [0, 1/L].
fn reference_root(g_norm: f64, l: f64, n: i32) -> f64 {
    let q = |rho: f64| l * g_norm.powi(n - 2) * rho.powi(n - 1) + l * rho - 1.0;
    let (mut lo, mut hi) = (0.0, 1.0 / l);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if q(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn quartic_kernel_root_matches_reference() {
    let g = Vector::new(vec![0.6, 0.8]).unwrap();
    let rho = bpg_subproblem(&g, 1.0, 4, 1e-16).unwrap();
    assert!((rho - 0.6823278).abs() <= 1e-6);
    assert!((rho - reference_root(1.0, 1.0, 4)).abs() <= 1e-12);
}

#[test]
fn quartic_kernel_root_has_small_residual() {
    let g = Vector::new(vec![2.0]).unwrap();
    let rho = bpg_subproblem(&g, 1.0, 4, 1e-16).unwrap();
    // p′(ρ) = −4 + 16ρ³ + 4ρ, p″(ρ) = 48ρ² + 4.
    let residual = -4.0 + 16.0 * rho.powi(3) + 4.0 * rho;
    let slope = 48.0 * rho * rho + 4.0;
    assert!(
        residual.abs() <= slope * 4.0 * f64::EPSILON * rho,
        "{residual}"
    );
}

#[test]
fn bpg_decreases_quartic_monotonically() {
    let f = AnalyticProblem::new(AnalyticKind::Quartic, 3);
    let mut cfg = BpgConfig::new(4, 1.0);
    cfg.max_iters = 300;
    let x0 = Vector::new(vec![1.0, -2.0, 0.5]).unwrap();
    let run = run_bpg(&f, &x0, &cfg, &Budgets::default()).unwrap();
    assert_eq!(run.termination, Termination::IterationBudget);
    let fs: Vec<f64> = run.trace.records.iter().map(|r| r.f_value).collect();
    assert!(fs.windows(2).all(|w| w[1] <= w[0]));
    assert!(fs.last().unwrap() < &(0.01 * fs[0]));
}

#[test]
fn bpg_decreases_small_tensor_monotonically() {
    let planted = generate_planted_tensor(2, 3, 1, 0.5, 1.5, 4).unwrap();
    let f = &planted.problem;
    let mut cfg = BpgConfig::new(6, f.bpg_relative_l());
    cfg.max_iters = 500;
    let x0 = Vector::new(vec![0.3, 0.1]).unwrap();
    let run = run_bpg(f, &x0, &cfg, &Budgets::default()).unwrap();
    let fs: Vec<f64> = run.trace.records.iter().map(|r| r.f_value).collect();
    assert_eq!(fs.len(), 501);
    assert!(
        fs.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)),
        "BPG increased f"
    );
    assert!(fs[500] < fs[0]);
}

#[test]
fn bpg_rejects_bad_config() {
    let f = AnalyticProblem::new(AnalyticKind::Quartic, 1);
    let x0 = Vector::new(vec![1.0]).unwrap();
    assert!(run_bpg(&f, &x0, &BpgConfig::new(1, 1.0), &Budgets::default()).is_err());
    assert!(run_bpg(&f, &x0, &BpgConfig::new(4, 0.0), &Budgets::default()).is_err());
    assert!(gd_fixed(&f, &x0, -1.0, &Budgets::default(), 0.0).is_err());
}

#[test]
fn gd_respects_eval_budget() {
    let f = AnalyticProblem::new(AnalyticKind::Quadratic, 2);
    let budgets = Budgets {
        max_grad_evals: 25,
        ..Budgets::default()
    };
    let run = gd_fixed(
        &f,
        &Vector::new(vec![1.0, 1.0]).unwrap(),
        0.01,
        &budgets,
        0.0,
    )
    .unwrap();
    assert_eq!(
        (run.termination, run.grad_evals),
        (Termination::EvalBudget, 25)
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn subproblem_root_matches_reference(g in prop::collection::vec(-5.0f64..5.0, 3), l in 0.01f64..20.0, n in 2u32..9) {
        let g = Vector::new(g).unwrap();
        prop_assume!(g.norm() > 1e-6);
        let rho = bpg_subproblem(&g, l, n, 1e-16).unwrap();
        let want = reference_root(g.norm(), l, n as i32);
        prop_assert!(rho > 0.0);
        prop_assert!((rho - want).abs() <= 1e-12 * want, "{rho} vs {want}");
    }

    #[test]
    fn gd_contracts_quadratic(x in prop::collection::vec(-10.0f64..10.0, 3), step in 0.01f64..1.99) {
        let f = AnalyticProblem::new(AnalyticKind::Quadratic, 3);
        let budgets = Budgets { max_iters: 20, ..Budgets::default() };
        let run = gd_fixed(&f, &Vector::new(x).unwrap(), step, &budgets, 0.0).unwrap();
        let ratio = (1.0 - step).abs();
        for w in run.trace.records.windows(2) {
            prop_assert!(w[1].grad_norm <= ratio * w[0].grad_norm * (1.0 + 1e-12) + 1e-300);
        }
    }
}
