use proptest::prelude::*;
use slo_core::lipschitz::{sampled_l1, sampled_l2};
use slo_core::problems::{AnalyticKind, AnalyticProblem};
use slo_core::{estimate_l1, estimate_l2, EstimateMethod, Evaluator, Vector};

fn point(v: &[f64]) -> Vector {
    Vector::from_slice(v).unwrap()
}

#[test]
fn quadratic_ratios_are_exactly_one() {
    let f = AnalyticProblem::new(AnalyticKind::Quadratic, 3);
    let ev = Evaluator::new(&f);
    let est = sampled_l1(&ev, &point(&[1.0, 2.0, -1.0]), 0.7, 100, 3).unwrap();
    assert_eq!(est.value, 1.0);
    assert_eq!(
        est.method,
        EstimateMethod::Sampled {
            n_samples: 100,
            seed: 3
        }
    );
    assert_eq!(ev.grad_evals(), 101);
}

#[test]
fn linear_ratios_are_floored() {
    let f = AnalyticProblem::new(AnalyticKind::Linear(4.0), 2);
    let ev = Evaluator::new(&f);
    assert_eq!(
        sampled_l1(&ev, &point(&[0.0, 0.0]), 5.0, 30, 0)
            .unwrap()
            .value,
        1.0
    );
    assert_eq!(
        sampled_l2(&ev, &point(&[0.0, 0.0]), 5.0, 30, 0)
            .unwrap()
            .value,
        1.0
    );
}

#[test]
fn quartic_sampled_gradient_constant_lies_below_hessian_bound() {
    // On the unit ball the Hessian ‖x‖²I + 2xxᵀ has norm at most 3.
    let f = AnalyticProblem::new(AnalyticKind::Quartic, 2);
    let ev = Evaluator::new(&f);
    let est = sampled_l1(&ev, &point(&[0.0, 0.0]), 1.0, 2000, 42).unwrap();
    assert!((1.5..=3.0).contains(&est.value), "{}", est.value);
}

#[test]
fn quartic_sampled_hessian_constant_lies_below_third_derivative_bound() {
    // In one dimension the Hessian is 3x², whose slope on [−1, 1] is at most 6.
    let f = AnalyticProblem::new(AnalyticKind::Quartic, 1);
    let ev = Evaluator::new(&f);
    let est = sampled_l2(&ev, &point(&[0.0]), 1.0, 2000, 42).unwrap();
    assert!(est.value <= 6.0 + 1e-2, "{}", est.value);
    assert!(est.value > 3.0);
    let quad = AnalyticProblem::new(AnalyticKind::Quadratic, 2);
    let ev = Evaluator::new(&quad);
    assert_eq!(
        sampled_l2(&ev, &point(&[0.3, 0.1]), 1.0, 50, 1)
            .unwrap()
            .value,
        1.0
    );
}

#[test]
fn analytic_path_on_quartic() {
    let f = AnalyticProblem::new(AnalyticKind::Quartic, 3);
    let ev = Evaluator::new(&f);
    let est = estimate_l2(&ev, &point(&[0.0, 0.0, 0.0]), 2.0, 10, 0).unwrap();
    assert_eq!((est.value, est.method), (12.0, EstimateMethod::Analytic));
    let off = estimate_l1(&ev, &point(&[3.0, 0.0, 4.0]), 1.0, 10, 0).unwrap();
    assert_eq!(off.value, 108.0);
}

#[test]
fn all_degenerate_pairs_are_an_error() {
    let f = AnalyticProblem::new(AnalyticKind::Quartic, 1);
    let ev = Evaluator::new(&f);
    assert!(sampled_l1(&ev, &point(&[0.0]), 1e-13, 10, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn analytic_estimates_grow_with_radius(c in prop::collection::vec(-2.0f64..2.0, 2), r1 in 0.01f64..3.0, dr in 0.0f64..3.0) {
        let f = AnalyticProblem::new(AnalyticKind::Quartic, 2);
        let ev = Evaluator::new(&f);
        let c = Vector::new(c).unwrap();
        for order in [1, 2] {
            let est = |r| if order == 1 { estimate_l1(&ev, &c, r, 10, 0) } else { estimate_l2(&ev, &c, r, 10, 0) };
            let (a, b) = (est(r1).unwrap(), est(r1 + dr).unwrap());
            prop_assert!(a.value <= b.value);
            prop_assert!(a.value >= 1.0);
        }
    }

    #[test]
    fn sampled_estimates_never_exceed_analytic(c in prop::collection::vec(-1.5f64..1.5, 3), r in 0.05f64..2.0, seed in 0u64..10_000) {
        let f = AnalyticProblem::new(AnalyticKind::Quartic, 3);
        let ev = Evaluator::new(&f);
        let c = Vector::new(c).unwrap();
        let s1 = sampled_l1(&ev, &c, r, 40, seed).unwrap().value;
        let a1 = estimate_l1(&ev, &c, r, 40, seed).unwrap().value;
        prop_assert!(s1 <= a1 * (1.0 + 1e-12));
        let s2 = sampled_l2(&ev, &c, r, 40, seed).unwrap().value;
        let a2 = estimate_l2(&ev, &c, r, 40, seed).unwrap().value;
        prop_assert!(s2 <= a2 * (1.0 + 1e-6));
    }

    #[test]
    fn sampling_is_deterministic(c in prop::collection::vec(-1.0f64..1.0, 2), r in 0.1f64..2.0, seed: u64) {
        let f = AnalyticProblem::new(AnalyticKind::Quartic, 2);
        let ev = Evaluator::new(&f);
        let c = Vector::new(c).unwrap();
        prop_assert_eq!(sampled_l1(&ev, &c, r, 20, seed).unwrap(), sampled_l1(&ev, &c, r, 20, seed).unwrap());
        prop_assert_eq!(sampled_l2(&ev, &c, r, 20, seed).unwrap(), sampled_l2(&ev, &c, r, 20, seed).unwrap());
    }
}
