//! The epoch loop: each epoch fixes an anchor `x₀`, obtains local constants
//! for a ball around it, and iterates a subroutine until the gradient is
//! small or an iterate lands in the margin shell `‖x − x₀‖ ∈ [D − d, D]`,
//! which becomes the next anchor.

use std::time::Instant;

use crate::agp::a_agp;
use crate::config::{LipschitzSettings, SloConfig, Subroutine};
use crate::error::{Result, SloError};
use crate::lipschitz::{estimate_l1, estimate_l2, sampled_l1, sampled_l2, LipschitzEstimate};
use crate::oracle::{Evaluator, Objective};
use crate::sampling::{derive_seed, STREAM_LIPSCHITZ};
use crate::subroutines::{gp_step, ls_step, ng_step, LsParams};
use crate::trace::{
    AgpCallRecord, EpochSummary, IterationRecord, RunResult, RunTrace, Termination,
};
use crate::vector::Vector;

/// Absolute slack of the distance tests.
pub const DIST_SLACK: f64 = 1e-12;

/// State of the epoch in progress.
#[derive(Debug, Clone)]
pub struct EpochState {
    pub tau: usize,
    pub anchor_x0: Vector,
    pub l1: Option<LipschitzEstimate>,
    pub l2: Option<LipschitzEstimate>,
    pub k: usize,
}

fn estimate(
    ev: &Evaluator<'_>,
    order: u8,
    center: &Vector,
    radius: f64,
    settings: &LipschitzSettings,
    seed: u64,
) -> Result<LipschitzEstimate> {
    let n = settings.n_samples;
    match (order, settings.prefer_analytic) {
        (1, true) => estimate_l1(ev, center, radius, n, seed),
        (1, false) => sampled_l1(ev, center, radius, n, seed),
        (_, true) => estimate_l2(ev, center, radius, n, seed),
        (_, false) => sampled_l2(ev, center, radius, n, seed),
    }
}

/// Radius of the ball the epoch constants must cover.
fn estimation_radius(cfg: &SloConfig) -> f64 {
    match cfg.subroutine {
        Subroutine::Accelerated => 3.0 * cfg.radius_d,
        _ => cfg.radius_d,
    }
}

fn lipschitz_seed(base: u64, tau: usize, order: u8) -> u64 {
    derive_seed(
        derive_seed(base, STREAM_LIPSCHITZ),
        2 * tau as u64 + order as u64,
    )
}

struct Recorder<'a> {
    ev: &'a Evaluator<'a>,
    start: Instant,
    trace: RunTrace,
    record_points: bool,
}

impl Recorder<'_> {
    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        epoch: usize,
        iter: usize,
        x: &Vector,
        f: f64,
        gn: f64,
        dist: f64,
        step: f64,
        closes: bool,
    ) {
        self.trace.records.push(IterationRecord {
            epoch,
            iter,
            f_value: f,
            grad_norm: gn,
            dist_from_anchor: dist,
            step_norm: step,
            closes_epoch: closes,
            cum_grad_evals: self.ev.grad_evals(),
            elapsed_s: self.start.elapsed().as_secs_f64(),
        });
        if self.record_points {
            self.trace.points.push(x.clone());
        }
    }
}

/// Runs the epoch loop from `x_start`.
///
/// Budget exhaustion ends the run with the matching [`Termination`]; oracle
/// failures and subroutine contract breaches are errors.
pub fn run_slo(
    objective: &dyn Objective,
    x_start: &Vector,
    config: &SloConfig,
) -> Result<RunResult> {
    config.validate()?;
    if x_start.dim() != objective.dim() {
        return Err(SloError::DimensionMismatch {
            expected: objective.dim(),
            found: x_start.dim(),
        });
    }
    let ev = Evaluator::new(objective);
    let mut rec = Recorder {
        ev: &ev,
        start: Instant::now(),
        trace: RunTrace::default(),
        record_points: config.record_points,
    };
    let sqrt_eps = config.sqrt_epsilon();
    let (d_big, d_small) = (config.radius_d, config.margin_d);
    let ls_params = LsParams {
        sigma: config.ls_sigma,
        theta: config.ls_theta,
        delta_bar: config.ls_delta_bar,
        max_backtracks: config.ls_max_backtracks,
        ls_alpha: config.ls_alpha,
    };

    let mut x = x_start.clone();
    let (mut f, mut g) = ev.value_and_gradient(&x)?;
    rec.push(1, 0, &x, f, g.norm(), 0.0, 0.0, false);
    let mut epochs_completed = 0;
    let mut tau = 1;

    let termination = 'epochs: loop {
        let mut state = EpochState {
            tau,
            anchor_x0: x.clone(),
            l1: None,
            l2: None,
            k: 0,
        };
        let anchor_f = f;
        let first_record = rec.trace.records.len() - 1;
        let epoch_index = rec.trace.epochs.len();
        let mut estimated = false;

        loop {
            let gn = g.norm();
            if gn < sqrt_eps {
                break 'epochs Termination::GradientTolerance;
            }
            if ev.grad_evals() >= config.max_total_grad_evals {
                break 'epochs Termination::EvalBudget;
            }
            if config
                .time_budget_s
                .is_some_and(|t| rec.start.elapsed().as_secs_f64() >= t)
            {
                break 'epochs Termination::TimeBudget;
            }

            if !estimated {
                if tau > config.max_epochs {
                    break 'epochs Termination::EpochBudget;
                }
                let radius = estimation_radius(config);
                if config.subroutine.needs_l1() {
                    let seed = lipschitz_seed(config.seed, tau, 1);
                    state.l1 = Some(estimate(
                        &ev,
                        1,
                        &state.anchor_x0,
                        radius,
                        &config.lipschitz,
                        seed,
                    )?);
                }
                if config.subroutine.needs_l2() {
                    let seed = lipschitz_seed(config.seed, tau, 2);
                    state.l2 = Some(estimate(
                        &ev,
                        2,
                        &state.anchor_x0,
                        radius,
                        &config.lipschitz,
                        seed,
                    )?);
                }
                let safety = config.lipschitz.safety_factor;
                rec.trace.epochs.push(EpochSummary {
                    tau,
                    anchor_f,
                    l1: state.l1.as_ref().map(|e| e.effective(safety)),
                    l2: state.l2.as_ref().map(|e| e.effective(safety)),
                    first_record,
                    iterations: 0,
                    closed: false,
                });
                if config.record_points {
                    rec.trace.anchors.push(state.anchor_x0.clone());
                }
                estimated = true;
            }

            let summary = &rec.trace.epochs[epoch_index];
            let (l1, l2) = (summary.l1, summary.l2);
            let anchor = &state.anchor_x0;
            let x_new = match config.subroutine {
                Subroutine::GradientProjection => {
                    let l1 = l1.expect("estimated above");
                    gp_step(&x, &g, anchor, 1.0 / l1, d_big)?
                }
                Subroutine::NormalizedGradient => {
                    ng_step(&x, &g, l1.expect("estimated above"), d_small)?
                }
                Subroutine::LineSearch => {
                    let dir = g.scale(-1.0);
                    ls_step(&ev, &x, f, &g, &dir, &ls_params)?.point
                }
                Subroutine::Accelerated => {
                    let before = ev.grad_evals();
                    let out = a_agp(
                        &ev,
                        &x,
                        l1.expect("estimated above"),
                        l2.expect("estimated above"),
                        anchor,
                        d_big,
                        config.epsilon,
                    )?;
                    rec.trace.agp_calls.push(AgpCallRecord {
                        epoch: tau,
                        iter: state.k,
                        flag: out.flag,
                        upg_iterations: out.upg_iterations,
                        iteration_bound: Some(out.iteration_bound),
                        grad_evals: ev.grad_evals() - before,
                    });
                    out.point
                }
            };

            let dist = x_new.dist(anchor);
            if dist > d_big + DIST_SLACK {
                return Err(SloError::Contract(format!(
                    "{} step left the epoch ball: distance {dist} > {d_big}",
                    config.subroutine.name()
                )));
            }
            let step = x_new.dist(&x);
            let closes =
                config.subroutine == Subroutine::LineSearch || dist >= d_big - d_small - DIST_SLACK;
            (f, g) = ev.value_and_gradient(&x_new)?;
            x = x_new;
            state.k += 1;
            rec.push(tau, state.k, &x, f, g.norm(), dist, step, closes);
            rec.trace.epochs[epoch_index].iterations = state.k;
            if closes {
                rec.trace.epochs[epoch_index].closed = true;
                epochs_completed += 1;
                tau += 1;
                continue 'epochs;
            }
        }
    };

    Ok(RunResult {
        final_grad_norm: g.norm(),
        final_value: f,
        final_point: x,
        termination,
        trace: rec.trace,
        epochs_completed,
        grad_evals: ev.grad_evals(),
        value_evals: ev.value_evals(),
    })
}

/// Guaranteed objective drop of one completed epoch for the configured
/// subroutine. For the line search an epoch is one step, so the floor scales
/// with that step's length.
pub fn epoch_descent_floor(config: &SloConfig, step_norm: f64) -> f64 {
    let se = config.sqrt_epsilon();
    match config.subroutine {
        Subroutine::GradientProjection | Subroutine::NormalizedGradient => {
            se * config.radius_d / 4.0
        }
        Subroutine::Accelerated => se * config.radius_d / 32.0,
        Subroutine::LineSearch => config.ls_sigma * config.ls_alpha * se * step_norm,
    }
}

/// For every closed epoch, `f(x₀^τ) − f(x₀^{τ+1})` minus its guaranteed floor.
pub fn check_epoch_descent(trace: &RunTrace, config: &SloConfig) -> Result<Vec<f64>> {
    let mut margins = Vec::new();
    for ep in trace.epochs.iter().filter(|e| e.closed) {
        let closing = trace
            .records
            .get(ep.first_record + ep.iterations)
            .filter(|r| ep.iterations > 0 && r.epoch == ep.tau && r.closes_epoch)
            .ok_or_else(|| {
                SloError::Contract(format!("closed epoch {} has no closing record", ep.tau))
            })?;
        let drop = ep.anchor_f - closing.f_value;
        margins.push(drop - epoch_descent_floor(config, closing.step_norm));
    }
    Ok(margins)
}

/// Upper bound on the number of epochs before the gradient falls below
/// `√ε`, given the objective gap `f(x_start) − f_low`. `None` for the line
/// search, whose epochs have no fixed length.
pub fn epoch_bound(config: &SloConfig, f_gap: f64) -> Option<f64> {
    let unit = config.sqrt_epsilon() * config.radius_d;
    match config.subroutine {
        Subroutine::GradientProjection | Subroutine::NormalizedGradient => {
            Some((4.0 * f_gap / unit).ceil() + 1.0)
        }
        Subroutine::Accelerated => Some((32.0 * f_gap / unit).ceil() + 1.0),
        Subroutine::LineSearch => None,
    }
}
