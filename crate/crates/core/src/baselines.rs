//! Comparison methods: fixed-step gradient descent and Bregman proximal
//! gradient with the kernel `h(x) = ‖x‖ⁿ/n + ‖x‖²/2`.

use std::time::Instant;

use crate::error::{Result, SloError};
use crate::oracle::{Evaluator, Objective};
use crate::trace::{IterationRecord, RunResult, RunTrace, Termination};
use crate::vector::Vector;

/// Growth in `f` over the start value that counts as divergence.
pub const DIVERGENCE_RISE: f64 = 1e12;

/// Cap on the doublings of the subproblem's expanding phase.
const MAX_DOUBLINGS: usize = 1000;

/// Resource limits shared by the baselines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budgets {
    pub max_grad_evals: u64,
    pub max_iters: usize,
    pub time_budget_s: Option<f64>,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            max_grad_evals: 1_000_000,
            max_iters: 1_000_000,
            time_budget_s: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpgConfig {
    /// Degree `n ≥ 2` of the kernel's leading term.
    pub poly_degree_n: u32,
    /// Relative-smoothness constant `L` (`Lh ± f` convex).
    pub l_relative: f64,
    /// Bracket width at which the subproblem search stops.
    pub eps0: f64,
    pub max_iters: usize,
    pub stop_grad_tol: f64,
}

impl BpgConfig {
    pub fn new(poly_degree_n: u32, l_relative: f64) -> Self {
        Self {
            poly_degree_n,
            l_relative,
            eps0: 1e-16,
            max_iters: 1_000_000,
            stop_grad_tol: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.poly_degree_n < 2 {
            return Err(SloError::InvalidConfig(format!(
                "kernel degree must be at least 2, got {}",
                self.poly_degree_n
            )));
        }
        if !(self.l_relative > 0.0 && self.l_relative.is_finite()) {
            return Err(SloError::InvalidConfig(format!(
                "relative smoothness constant must be positive, got {}",
                self.l_relative
            )));
        }
        if !(self.eps0 > 0.0) {
            return Err(SloError::InvalidConfig(format!(
                "eps0 must be positive, got {}",
                self.eps0
            )));
        }
        Ok(())
    }
}

/// `p′(ρ)/‖g‖² = −1 + L‖g‖^{n−2}ρ^{n−1} + Lρ`.
fn scaled_derivative(rho: f64, g_norm: f64, l: f64, n: u32) -> f64 {
    -1.0 + l * g_norm.powi(n as i32 - 2) * rho.powi(n as i32 - 1) + l * rho
}

/// Positive root of `p′(ρ) = −‖g‖² + L‖g‖ⁿρ^{n−1} + L‖g‖²ρ` by doubling from
/// `ρ = 1` and then bisecting to bracket width `eps0`; returns the midpoint of
/// the final bracket.
pub fn bpg_subproblem(g: &Vector, l_relative: f64, n: u32, eps0: f64) -> Result<f64> {
    let gn = g.norm();
    if !(gn > 0.0) {
        return Err(SloError::Contract(
            "subproblem needs a nonzero vector".into(),
        ));
    }
    if n < 2 || !(l_relative > 0.0) || !(eps0 > 0.0) {
        return Err(SloError::Contract(format!(
            "bad subproblem parameters n={n}, L={l_relative}, eps0={eps0}"
        )));
    }
    let q = |rho: f64| scaled_derivative(rho, gn, l_relative, n);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut doublings = 0;
    while q(hi) < 0.0 {
        doublings += 1;
        if doublings > MAX_DOUBLINGS || !hi.is_finite() {
            return Err(SloError::Contract(
                "subproblem bracket expansion overflowed".into(),
            ));
        }
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > eps0 {
        let mid = 0.5 * (lo + hi);
        // Below one ulp of the bracket the midpoint stops moving.
        if mid <= lo || mid >= hi {
            break;
        }
        if q(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `∇h(x) = (‖x‖^{n−2} + 1)·x`.
pub fn kernel_gradient(x: &Vector, n: u32) -> Vector {
    x.scale(x.norm().powi(n as i32 - 2) + 1.0)
}

/// Bregman step from a known gradient: `−ρ·(∇f(x) − L∇h(x))`, or `0` when
/// that vector vanishes.
pub fn bpg_step_from_gradient(x: &Vector, grad: &Vector, config: &BpgConfig) -> Result<Vector> {
    let g = grad.add_scaled(
        -config.l_relative,
        &kernel_gradient(x, config.poly_degree_n),
    );
    if g.iter().all(|v| *v == 0.0) {
        return Ok(Vector::zeros(x.dim()));
    }
    let rho = bpg_subproblem(&g, config.l_relative, config.poly_degree_n, config.eps0)?;
    Ok(g.scale(-rho))
}

pub fn bpg_step(ev: &Evaluator<'_>, x: &Vector, config: &BpgConfig) -> Result<Vector> {
    config.validate()?;
    let grad = ev.gradient(x)?;
    bpg_step_from_gradient(x, &grad, config)
}

/// Shared iteration driver: evaluates, records, checks stopping rules and
/// asks `step` for the next point.
fn iterate<F>(
    objective: &dyn Objective,
    x0: &Vector,
    budgets: &Budgets,
    stop_grad_tol: f64,
    max_iters: usize,
    mut step: F,
) -> Result<RunResult>
where
    F: FnMut(&Vector, &Vector) -> Result<Vector>,
{
    if x0.dim() != objective.dim() {
        return Err(SloError::DimensionMismatch {
            expected: objective.dim(),
            found: x0.dim(),
        });
    }
    let ev = Evaluator::new(objective);
    let start = Instant::now();
    let mut trace = RunTrace::default();
    let mut x = x0.clone();
    let (mut f, mut g) = ev.value_and_gradient(&x)?;
    let f0 = f;
    let mut prev: Option<Vector> = None;
    let mut iter = 0;
    let termination = loop {
        let gn = g.norm();
        trace.records.push(IterationRecord {
            epoch: 1,
            iter,
            f_value: f,
            grad_norm: gn,
            dist_from_anchor: x.dist(x0),
            step_norm: prev.as_ref().map_or(0.0, |p| p.dist(&x)),
            closes_epoch: false,
            cum_grad_evals: ev.grad_evals(),
            elapsed_s: start.elapsed().as_secs_f64(),
        });
        if f > f0 + DIVERGENCE_RISE {
            break Termination::Diverged;
        }
        if gn <= stop_grad_tol {
            break Termination::GradientTolerance;
        }
        if ev.grad_evals() >= budgets.max_grad_evals {
            break Termination::EvalBudget;
        }
        if iter >= max_iters.min(budgets.max_iters) {
            break Termination::IterationBudget;
        }
        if budgets
            .time_budget_s
            .is_some_and(|t| start.elapsed().as_secs_f64() >= t)
        {
            break Termination::TimeBudget;
        }
        let next = step(&x, &g)?;
        if !next.is_finite() {
            break Termination::Diverged;
        }
        match ev.value_and_gradient(&next) {
            Ok((fv, gv)) => {
                prev = Some(std::mem::replace(&mut x, next));
                (f, g) = (fv, gv);
                iter += 1;
            }
            Err(SloError::NonFinite { .. }) => break Termination::Diverged,
            Err(e) => return Err(e),
        }
    };
    Ok(RunResult {
        final_grad_norm: g.norm(),
        final_value: f,
        final_point: x,
        termination,
        trace,
        epochs_completed: 0,
        grad_evals: ev.grad_evals(),
        value_evals: ev.value_evals(),
    })
}

/// Gradient descent `x ← x − step·∇f(x)`. Stops at `‖∇f‖ ≤ stop_grad_tol`, on a
/// budget, or with [`Termination::Diverged`] when an iterate is non-finite or
/// `f` rises more than [`DIVERGENCE_RISE`] above its start value.
pub fn gd_fixed(
    objective: &dyn Objective,
    x0: &Vector,
    step: f64,
    budgets: &Budgets,
    stop_grad_tol: f64,
) -> Result<RunResult> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(SloError::InvalidConfig(format!(
            "step must be positive, got {step}"
        )));
    }
    iterate(objective, x0, budgets, stop_grad_tol, usize::MAX, |x, g| {
        Ok(x.add_scaled(-step, g))
    })
}

/// Iterates [`bpg_step`] until `‖∇f‖ ≤ config.stop_grad_tol` or a budget runs out.
pub fn run_bpg(
    objective: &dyn Objective,
    x0: &Vector,
    config: &BpgConfig,
    budgets: &Budgets,
) -> Result<RunResult> {
    config.validate()?;
    iterate(
        objective,
        x0,
        budgets,
        config.stop_grad_tol,
        config.max_iters,
        |x, g| bpg_step_from_gradient(x, g, config),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{AnalyticKind, AnalyticProblem};

    fn v(x: f64) -> Vector {
        Vector::new(vec![x]).unwrap()
    }

    #[test]
    fn quadratic_kernel_root() {
        for l in [0.5, 1.0, 3.0] {
            let rho = bpg_subproblem(&v(2.0), l, 2, 1e-16).unwrap();
            assert!((rho - 0.5 / l).abs() <= 1e-15);
        }
    }

    #[test]
    fn quartic_step_example() {
        let q = AnalyticProblem::new(AnalyticKind::Quartic, 1);
        let ev = Evaluator::new(&q);
        let x1 = bpg_step(&ev, &v(1.0), &BpgConfig::new(4, 1.0)).unwrap();
        assert!((x1[0] - 0.6823278).abs() < 1e-6);
        assert!(q.value(&x1) < 0.25);
    }

    #[test]
    fn zero_composite_gradient_returns_origin() {
        let q = AnalyticProblem::new(AnalyticKind::Quartic, 2);
        let ev = Evaluator::new(&q);
        let out = bpg_step(&ev, &Vector::zeros(2), &BpgConfig::new(4, 1.0)).unwrap();
        assert_eq!(out, Vector::zeros(2));
        assert!(bpg_subproblem(&Vector::zeros(2), 1.0, 4, 1e-16).is_err());
    }

    #[test]
    fn gd_examples() {
        let q = AnalyticProblem::new(AnalyticKind::Quadratic, 1);
        let run = gd_fixed(&q, &v(1.0), 1.0, &Budgets::default(), 1e-12).unwrap();
        assert_eq!(run.final_point, v(0.0));
        assert_eq!(run.trace.records.len(), 2);

        let run = gd_fixed(&q, &v(1.0), 2.5, &Budgets::default(), 1e-12).unwrap();
        assert_eq!(run.termination, Termination::Diverged);

        let quartic = AnalyticProblem::new(AnalyticKind::Quartic, 1);
        let run = gd_fixed(&quartic, &v(2.0), 1.0, &Budgets::default(), 1e-12).unwrap();
        assert_eq!(run.termination, Termination::Diverged);
        assert_eq!(run.trace.records[1].f_value, 0.25 * 6f64.powi(4));
        assert_eq!(run.trace.records[2].f_value, 0.25 * 210f64.powi(4));
    }
}
