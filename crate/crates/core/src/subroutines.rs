//! Gradient projection, normalized gradient and Armijo line-search steps.
//!
//! Each `a_*` function evaluates the gradient itself. The `*_step` variants
//! take a gradient the caller already has, which is how the SLO loop uses them.

use crate::error::{Result, SloError};
use crate::oracle::Evaluator;
use crate::vector::Vector;

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SloError::Contract(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

/// Projected gradient step `Proj_{B(center, r)}(x − η·g)`.
pub fn gp_step(x: &Vector, grad: &Vector, center: &Vector, eta: f64, r: f64) -> Result<Vector> {
    check_positive("eta", eta)?;
    check_positive("radius", r)?;
    let dist = x.dist(center);
    if dist > r + 1e-12 * r.max(1.0) {
        return Err(SloError::Contract(format!(
            "gradient projection start is outside its ball: {dist} > {r}"
        )));
    }
    Ok(x.add_scaled(-eta, grad).project_to_ball(center, r))
}

pub fn a_gp(ev: &Evaluator<'_>, x: &Vector, center: &Vector, eta: f64, r: f64) -> Result<Vector> {
    let g = ev.gradient(x)?;
    gp_step(x, &g, center, eta, r)
}

/// Normalized gradient step: `x − g/L` when `‖g‖ ≤ L·d`, otherwise a step of
/// length `d` along `−g`.
pub fn ng_step(x: &Vector, grad: &Vector, l1: f64, d: f64) -> Result<Vector> {
    check_positive("l1", l1)?;
    check_positive("margin", d)?;
    let gn = grad.norm();
    if gn <= l1 * d {
        Ok(x.add_scaled(-1.0 / l1, grad))
    } else {
        Ok(x.add_scaled(-d / gn, grad))
    }
}

pub fn a_ng(ev: &Evaluator<'_>, x: &Vector, l1: f64, d: f64) -> Result<Vector> {
    let g = ev.gradient(x)?;
    ng_step(x, &g, l1, d)
}

/// Armijo search parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsParams {
    pub sigma: f64,
    pub theta: f64,
    /// Cap on the step length `‖δ·d‖`.
    pub delta_bar: f64,
    pub max_backtracks: usize,
    /// Gradient-related constant: the direction must satisfy
    /// `⟨∇f, d⟩ ≤ −ls_alpha·‖∇f‖·‖d‖`.
    pub ls_alpha: f64,
}

impl LsParams {
    pub fn new(sigma: f64, theta: f64, delta_bar: f64) -> Self {
        Self {
            sigma,
            theta,
            delta_bar,
            max_backtracks: 200,
            ls_alpha: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(SloError::Contract(format!(
                    "{name} must lie in (0,1), got {v}"
                )))
            }
        };
        unit("sigma", self.sigma)?;
        unit("theta", self.theta)?;
        check_positive("delta_bar", self.delta_bar)?;
        if !(self.ls_alpha > 0.0 && self.ls_alpha <= 1.0) {
            return Err(SloError::Contract(format!(
                "ls_alpha must lie in (0,1], got {}",
                self.ls_alpha
            )));
        }
        Ok(())
    }
}

/// An accepted line-search step, with the quantities the acceptance test used.
#[derive(Debug, Clone, PartialEq)]
pub struct LsOutcome {
    pub point: Vector,
    pub delta: f64,
    pub backtracks: usize,
    pub f_start: f64,
    pub f_new: f64,
    /// `⟨∇f(x), d⟩`.
    pub slope: f64,
}

impl LsOutcome {
    /// Re-evaluates the acceptance inequality with the same arithmetic.
    pub fn armijo_holds(&self, sigma: f64) -> bool {
        self.f_new <= self.f_start + sigma * self.delta * self.slope
    }
}

/// Backtracking from `δ = δ̄/‖d‖` by factors of `θ` until
/// `f(x + δd) ≤ f(x) + σδ⟨g, d⟩`.
pub fn ls_step(
    ev: &Evaluator<'_>,
    x: &Vector,
    f_x: f64,
    grad: &Vector,
    direction: &Vector,
    params: &LsParams,
) -> Result<LsOutcome> {
    params.validate()?;
    let dn = direction.norm();
    if !(dn > 0.0) {
        return Err(SloError::Contract("line-search direction is zero".into()));
    }
    let slope = grad.dot(direction);
    let scale = grad.norm() * dn;
    let bound = -params.ls_alpha * scale;
    // Slack for the rounding error of the inner product itself.
    if slope > bound + 8.0 * f64::EPSILON * scale {
        return Err(SloError::NotGradientRelated { slope, bound });
    }
    let mut delta = params.delta_bar / dn;
    // The quotient can round up so that δ‖d‖ exceeds δ̄ by an ulp.
    while delta * dn > params.delta_bar {
        delta = delta.next_down();
    }
    for backtracks in 0..=params.max_backtracks {
        let trial = x.add_scaled(delta, direction);
        let f_new = ev.value(&trial)?;
        if f_new <= f_x + params.sigma * delta * slope {
            return Ok(LsOutcome {
                point: trial,
                delta,
                backtracks,
                f_start: f_x,
                f_new,
                slope,
            });
        }
        if backtracks < params.max_backtracks {
            delta *= params.theta;
        }
    }
    Err(SloError::BacktrackLimit {
        backtracks: params.max_backtracks,
        last_delta: delta,
    })
}

pub fn a_ls(
    ev: &Evaluator<'_>,
    x: &Vector,
    direction: &Vector,
    params: &LsParams,
) -> Result<LsOutcome> {
    let (f_x, g) = ev.value_and_gradient(x)?;
    ls_step(ev, x, f_x, &g, direction, params)
}
