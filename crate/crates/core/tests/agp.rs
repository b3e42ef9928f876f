use proptest::prelude::*;
use slo_core::agp::UpgPayload;
use slo_core::problems::{AnalyticKind, AnalyticProblem};
use slo_core::{
    a_agp, agp_upg, certify_progress, find_nc_pair, AgpRegion, AugmentedOracle, Evaluator,
    FnObjective, Objective, UpgOutcome, Vector,
};

fn v1(x: f64) -> Vector {
    Vector::new(vec![x]).unwrap()
}

fn vs(xs: &[f64]) -> Vec<Vector> {
    xs.iter().map(|&x| v1(x)).collect()
}

/// `(c/2)‖x‖²` in `dim` dimensions.
fn scaled_quadratic(dim: usize, c: f64) -> impl Objective {
    FnObjective::new(
        dim,
        move |x: &[f64]| 0.5 * c * x.iter().map(|v| v * v).sum::<f64>(),
        move |x: &[f64]| x.iter().map(|v| c * v).collect(),
    )
}

fn line_region(r: f64) -> AgpRegion {
    AgpRegion::new(v1(0.0), r).unwrap()
}

/// Strict NC inequality checked with a fresh evaluation.
fn nc_holds(f: &dyn Objective, u: &Vector, v: &Vector, alpha: f64) -> bool {
    let diff = u.sub(v);
    let g = Vector::new(f.gradient(v)).unwrap();
    f.value(u) < f.value(v) + g.dot(&diff) + 0.5 * alpha * diff.norm_sq()
}

#[test]
fn nc_scan_on_convex_quadratic_finds_nothing() {
    let f = scaled_quadratic(1, 1.0);
    let ev = Evaluator::new(&f);
    let out = find_nc_pair(&ev, &vs(&[1.0, 0.5]), &vs(&[1.0, 0.5]), &v1(0.0), 0.5).unwrap();
    assert_eq!(out, None);
}

#[test]
fn nc_scan_on_concave_quadratic_returns_first_violation() {
    let f = scaled_quadratic(1, -1.0);
    let ev = Evaluator::new(&f);
    let out = find_nc_pair(&ev, &vs(&[0.0]), &vs(&[0.0]), &v1(1.0), 0.5).unwrap();
    assert_eq!(out, Some((v1(1.0), v1(0.0))));
    let out = find_nc_pair(&ev, &vs(&[0.0, 0.2]), &vs(&[0.0, 0.2]), &v1(1.0), 0.5).unwrap();
    assert_eq!(out, Some((v1(1.0), v1(0.0))));
    assert!(find_nc_pair(&ev, &vs(&[0.0, 0.2]), &vs(&[0.0]), &v1(1.0), 0.5).is_err());
}

#[test]
fn certificate_reports_increase_with_start_point() {
    let f = scaled_quadratic(1, 2.0);
    let ev = Evaluator::new(&f);
    let cert = certify_progress(
        &ev,
        &line_region(5.0),
        &v1(1.0),
        &v1(2f64.sqrt()),
        4.0,
        1.0,
        4.0,
        1,
    )
    .unwrap();
    let w = cert.witness.unwrap();
    assert_eq!(w.point, v1(1.0));
    assert!(!w.on_boundary);
    assert_eq!(cert.psi, None);
}

#[test]
fn certificate_projects_gradient_point_that_leaves_region() {
    let f = FnObjective::new(1, |x: &[f64]| -3.0 * x[0], |_: &[f64]| vec![-3.0]);
    let ev = Evaluator::new(&f);
    let cert =
        certify_progress(&ev, &line_region(1.0), &v1(0.0), &v1(0.9), 1.0, 1.0, 1.0, 1).unwrap();
    let w = cert.witness.unwrap();
    assert_eq!(w.point, v1(1.0));
    assert!(w.on_boundary);
}

#[test]
fn certificate_is_silent_at_the_minimizer() {
    let f = scaled_quadratic(1, 1.0);
    let ev = Evaluator::new(&f);
    for l1_hat in [1.0, 3.0, 50.0] {
        let cert = certify_progress(
            &ev,
            &line_region(2.0),
            &v1(1.0),
            &v1(0.0),
            l1_hat,
            0.5,
            l1_hat / 0.5,
            1,
        )
        .unwrap();
        assert_eq!(cert.witness, None);
        // ψ = f̂(1) − f̂(0) + (α/2)·1 = 0.75.
        assert_eq!(cert.psi, Some(0.75));
    }
    assert!(
        certify_progress(&ev, &line_region(2.0), &v1(1.0), &v1(0.0), 1.0, 0.5, 2.0, 0).is_err()
    );
}

#[test]
fn upg_stops_immediately_at_minimizer() {
    let f = scaled_quadratic(2, 1.0);
    let ev = Evaluator::new(&f);
    let region = AgpRegion::new(Vector::zeros(2), 1.0).unwrap();
    let out = agp_upg(&ev, &region, &Vector::zeros(2), 1e-6, 2.0, 0.5).unwrap();
    assert_eq!((out.flag, out.iterations), (5, 1));
    assert_eq!(out.point(), Some(&Vector::zeros(2)));
}

#[test]
fn upg_on_steep_slope_exits_region_at_boundary() {
    let alpha = 0.2;
    let f = FnObjective::new(
        1,
        move |x: &[f64]| -10.0 * x[0] + 0.5 * alpha * x[0] * x[0],
        move |x: &[f64]| vec![-10.0 + alpha * x[0]],
    );
    let ev = Evaluator::new(&f);
    let region = line_region(1.0);
    // From 0 the first step lands inside at 10/10.2; the certificate's
    // gradient point 1.94 then leaves the region and is projected.
    let out = agp_upg(&ev, &region, &v1(0.0), 1e-6, 10.0 + alpha, alpha).unwrap();
    assert_eq!((out.flag, out.iterations), (3, 1));
    assert_eq!(out.point(), Some(&v1(1.0)));
    // From 0.5 the first step already overshoots, and f̂ went down.
    let out = agp_upg(&ev, &region, &v1(0.5), 1e-6, 10.0 + alpha, alpha).unwrap();
    assert_eq!((out.flag, out.iterations), (1, 1));
    assert_eq!(out.point(), Some(&v1(1.0)));
}

#[test]
fn upg_on_concave_function() {
    let base = scaled_quadratic(1, -1.0);
    let alpha = 0.2;
    // f̂ = −x²/2 + 0.2x² = −0.3x².
    let aug = AugmentedOracle::new(&base, v1(0.0), alpha);
    let ev = Evaluator::new(&aug);
    let region = line_region(1.0);
    let l1_hat = 1.0 + 2.0 * alpha;
    // Accelerated steps reach the boundary before the rate test fires.
    let out = agp_upg(&ev, &region, &v1(0.1), 1e-6, l1_hat, alpha).unwrap();
    assert_eq!(out.flag, 1);
    let p = out.point().unwrap();
    assert!(aug.value(p) <= aug.value(&v1(0.1)));
    // Closer to the maximizer the gradient stays too small for the rate.
    let out = agp_upg(&ev, &region, &v1(0.01), 1e-6, l1_hat, alpha).unwrap();
    assert_eq!(out.flag, 4);
    let (u, v) = out.nc_pair().unwrap();
    assert!(nc_holds(&aug, u, v, alpha));
    assert_history_below_start(&aug, &out);
}

fn assert_history_below_start(f_hat: &dyn Objective, out: &UpgOutcome) {
    if let UpgPayload::NcPair { y_history, .. } = &out.payload {
        let f0 = f_hat.value(&y_history[0]);
        for y in &y_history[..y_history.len() - 1] {
            assert!(f_hat.value(y) <= f0);
        }
    }
}

#[test]
fn upg_rejects_bad_inputs() {
    let f = scaled_quadratic(1, 1.0);
    let ev = Evaluator::new(&f);
    assert!(agp_upg(&ev, &line_region(1.0), &v1(1.0), 1e-6, 2.0, 0.5).is_err());
    assert!(agp_upg(&ev, &line_region(1.0), &v1(0.0), 1e-6, 0.4, 0.5).is_err());
    assert!(AgpRegion::new(v1(0.0), 0.0).is_err());
}

#[test]
fn accelerated_step_at_minimizer_returns_it() {
    let f = scaled_quadratic(2, 1.0);
    let ev = Evaluator::new(&f);
    let z = Vector::zeros(2);
    let out = a_agp(&ev, &z, 1.0, 1.0, &z, 1.0, 1e-4).unwrap();
    assert_eq!((out.flag, &out.point), (5, &z));
    assert!(ev.grad_evals() > 0);
}

#[test]
fn accelerated_step_on_concave_function_descends() {
    let f = scaled_quadratic(1, -1.0);
    let ev = Evaluator::new(&f);
    let (xbar, eps) = (v1(0.1), 1e-4);
    let out = a_agp(&ev, &xbar, 1.0, 1.0, &v1(0.0), 1.0, eps).unwrap();
    assert!((out.agp_alpha - 0.2).abs() < 1e-15);
    assert!(
        f.value(&out.point) <= f.value(&xbar) - 1.25e-4,
        "flag {} point {:?}",
        out.flag,
        out.point
    );
    assert!(out.point.norm() <= 1.0);
    if let Some((u, v)) = &out.nc_pair {
        let aug = AugmentedOracle::new(&f, xbar.clone(), out.agp_alpha);
        assert!(nc_holds(&aug, u, v, out.agp_alpha));
    }
}

#[test]
fn accelerated_step_rejects_small_radius_and_constants() {
    let f = scaled_quadratic(1, 1.0);
    let ev = Evaluator::new(&f);
    assert!(a_agp(&ev, &v1(0.0), 1.0, 1.0, &v1(0.0), 0.5, 1e-4).is_err());
    assert!(a_agp(&ev, &v1(0.0), 0.5, 1.0, &v1(0.0), 1.0, 1e-4).is_err());
}

/// Saddle `½x² − ½y²` plus a quartic so it is bounded below.
fn saddle() -> impl Objective {
    FnObjective::new(
        2,
        |x: &[f64]| 0.5 * x[0] * x[0] - 0.5 * x[1] * x[1] + 0.25 * x[1].powi(4),
        |x: &[f64]| vec![x[0], -x[1] + x[1].powi(3)],
    )
}

#[test]
fn accelerated_step_escapes_saddle() {
    let f = saddle();
    let ev = Evaluator::new(&f);
    let xbar = Vector::new(vec![0.05, 1e-3]).unwrap();
    let eps = 1e-6;
    // On B(xbar, 3) the Hessian diagonal −1 + 3y² varies by at most 6·3.1 per unit.
    let (l1, l2) = (1.0 + 3.0 * 3.1f64.powi(2), 6.0 * 3.1);
    let out = a_agp(&ev, &xbar, l1, l2, &xbar, 1.0, eps).unwrap();
    let drop = f.value(&xbar) - f.value(&out.point);
    let step = out.point.dist(&xbar);
    assert!(drop >= l2.sqrt() / 24.0 * eps.powf(0.25) * step * step - 1e-10);
    assert!(out.point.dist(&xbar) <= 1.0 + 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn convex_quadratics_never_yield_nc_pairs(
        dim in 1usize..5,
        frac in 0.0f64..1.0,
        alpha in 0.05f64..1.0,
        ratio in 1.0f64..50.0,
        start in prop::collection::vec(-0.6f64..0.6, 4),
        center in prop::collection::vec(-0.3f64..0.3, 4),
    ) {
        let l1_hat = alpha * ratio;
        let c = alpha + frac * (l1_hat - alpha);
        let f = scaled_quadratic(dim, c);
        let ev = Evaluator::new(&f);
        let region = AgpRegion::new(Vector::from_slice(&center[..dim]).unwrap(), 1.0).unwrap();
        let y0 = Vector::from_slice(&start[..dim]).unwrap().add(&region.center);
        let out = agp_upg(&ev, &region, &y0, 1e-10, l1_hat, alpha).unwrap();
        prop_assert!(matches!(out.flag, 1 | 3 | 5), "flag {}", out.flag);
        prop_assert!(out.iterations as f64 <= out.iteration_bound + 1.0,
            "t={} bound={}", out.iterations, out.iteration_bound);
        for entry in &out.trace {
            prop_assert!(entry.dist_y <= region.inner_radius * (1.0 + 1e-12));
        }
    }

    #[test]
    fn indefinite_quadratics_give_strict_pairs(
        a in -2.0f64..2.0,
        b in -2.0f64..-0.3,
        start in prop::collection::vec(-0.5f64..0.5, 2),
    ) {
        // f̂ = ½(a x² + b y²) + α‖·‖², with α small enough that y stays concave.
        let alpha = 0.1;
        let base = FnObjective::new(
            2,
            move |x: &[f64]| 0.5 * (a * x[0] * x[0] + b * x[1] * x[1]),
            move |x: &[f64]| vec![a * x[0], b * x[1]],
        );
        let y0 = Vector::new(start).unwrap();
        let aug = AugmentedOracle::new(&base, y0.clone(), alpha);
        let ev = Evaluator::new(&aug);
        let region = AgpRegion::new(Vector::zeros(2), 1.0).unwrap();
        let l1_hat = 2.0 + 2.0 * alpha;
        let out = agp_upg(&ev, &region, &y0, 1e-10, l1_hat, alpha).unwrap();
        if let Some((u, v)) = out.nc_pair() {
            prop_assert!(nc_holds(&aug, u, v, alpha));
        }
        assert_history_below_start(&aug, &out);
        for entry in &out.trace {
            prop_assert!(entry.dist_y <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn accelerated_outputs_stay_in_epoch_ball(
        anchor in prop::collection::vec(-1.0f64..1.0, 3),
        offset in prop::collection::vec(-0.2f64..0.2, 3),
        eps_exp in 5.0f64..8.0,
    ) {
        let anchor = Vector::new(anchor).unwrap();
        let f = AnalyticProblem::new(AnalyticKind::Quartic, 3);
        let ev = Evaluator::new(&f);
        let eps = 10f64.powf(-eps_exp);
        let radius = 0.8;
        let xbar = anchor.add(&Vector::new(offset).unwrap());
        let l1 = f.growth1(anchor.norm() + 3.0 * radius).unwrap();
        let l2 = f.growth2(anchor.norm() + 3.0 * radius).unwrap();
        let out = a_agp(&ev, &xbar, l1, l2, &anchor, radius, eps).unwrap();
        prop_assert!(out.point.dist(&anchor) <= radius + 1e-12);
        let step = out.point.dist(&xbar);
        let drop = f.value(&xbar) - f.value(&out.point);
        prop_assert!(drop >= l2.sqrt() / 24.0 * eps.powf(0.25) * step * step - 1e-10);
    }
}
