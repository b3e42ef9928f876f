use crate::error::{Result, SloError};

/// The per-iteration update used inside each epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subroutine {
    /// Gradient step projected onto the epoch ball.
    GradientProjection,
    /// Gradient step, normalized to length `margin_d` when the gradient is large.
    NormalizedGradient,
    /// Armijo backtracking along `−∇f` with the adaptive step cap.
    LineSearch,
    /// Accelerated gradient projection with negative-curvature exploitation.
    Accelerated,
}

impl Subroutine {
    pub fn needs_l1(self) -> bool {
        !matches!(self, Subroutine::LineSearch)
    }

    pub fn needs_l2(self) -> bool {
        matches!(self, Subroutine::Accelerated)
    }

    pub fn name(self) -> &'static str {
        match self {
            Subroutine::GradientProjection => "pgd",
            Subroutine::NormalizedGradient => "ngd",
            Subroutine::LineSearch => "ls",
            Subroutine::Accelerated => "agp",
        }
    }
}

/// How per-epoch Lipschitz constants are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzSettings {
    /// Points sampled per estimate when no analytic growth function is used.
    pub n_samples: usize,
    /// Multiplier applied to sampled estimates before a solver uses them.
    pub safety_factor: f64,
    /// Use the oracle's growth functions when it has them.
    pub prefer_analytic: bool,
}

impl Default for LipschitzSettings {
    fn default() -> Self {
        Self {
            n_samples: 50,
            safety_factor: 1.5,
            prefer_analytic: true,
        }
    }
}

/// Configuration of one SLO run.
///
/// `epsilon` is the squared-gradient tolerance: a run stops at the first
/// iterate with `‖∇f‖ < √epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct SloConfig {
    pub epsilon: f64,
    pub radius_d: f64,
    pub margin_d: f64,
    pub subroutine: Subroutine,
    pub ls_sigma: f64,
    pub ls_theta: f64,
    pub ls_delta_bar: f64,
    /// Gradient-related constant of the line-search direction test.
    pub ls_alpha: f64,
    pub ls_max_backtracks: usize,
    pub max_epochs: usize,
    pub max_total_grad_evals: u64,
    pub time_budget_s: Option<f64>,
    pub seed: u64,
    pub lipschitz: LipschitzSettings,
    /// Keep every iterate in the trace (memory grows with the run).
    pub record_points: bool,
}

const REL_TOL: f64 = 1e-12;

fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn approx_ge(a: f64, b: f64) -> bool {
    a >= b - REL_TOL * b.abs()
}

impl SloConfig {
    fn base(subroutine: Subroutine, epsilon: f64, radius_d: f64, margin_d: f64) -> Self {
        Self {
            epsilon,
            radius_d,
            margin_d,
            subroutine,
            ls_sigma: 0.9,
            ls_theta: 0.5,
            ls_delta_bar: radius_d,
            ls_alpha: 1.0,
            ls_max_backtracks: 200,
            max_epochs: 1_000_000,
            max_total_grad_evals: 1_000_000,
            time_budget_s: None,
            seed: 0,
            lipschitz: LipschitzSettings::default(),
            record_points: false,
        }
    }

    /// Gradient projection: `margin_d = 0`, requires `radius_d ≥ √ε/2`.
    pub fn gradient_projection(epsilon: f64, radius_d: f64) -> Result<Self> {
        let cfg = Self::base(Subroutine::GradientProjection, epsilon, radius_d, 0.0);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Normalized gradient: requires `margin_d ≥ √ε` and `radius_d ≥ √ε/2 + 2·margin_d`.
    pub fn normalized_gradient(epsilon: f64, radius_d: f64, margin_d: f64) -> Result<Self> {
        let cfg = Self::base(Subroutine::NormalizedGradient, epsilon, radius_d, margin_d);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Line search: `radius_d = margin_d = delta_bar`, requires `delta_bar > √ε`.
    pub fn line_search(epsilon: f64, delta_bar: f64) -> Result<Self> {
        let cfg = Self::base(Subroutine::LineSearch, epsilon, delta_bar, delta_bar);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Accelerated projection: `margin_d = 2ε^{1/4}`, requires `radius_d ≥ 6ε^{1/4}`.
    pub fn accelerated(epsilon: f64, radius_d: f64) -> Result<Self> {
        let margin = 2.0 * epsilon.powf(0.25);
        let cfg = Self::base(Subroutine::Accelerated, epsilon, radius_d, margin);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_grad_evals(mut self, n: u64) -> Self {
        self.max_total_grad_evals = n;
        self
    }

    pub fn with_max_epochs(mut self, n: usize) -> Self {
        self.max_epochs = n;
        self
    }

    pub fn with_time_budget(mut self, seconds: Option<f64>) -> Self {
        self.time_budget_s = seconds;
        self
    }

    pub fn with_lipschitz(mut self, settings: LipschitzSettings) -> Self {
        self.lipschitz = settings;
        self
    }

    pub fn with_record_points(mut self, on: bool) -> Self {
        self.record_points = on;
        self
    }

    /// Sets `σ` and `θ` of the Armijo search.
    pub fn with_armijo(mut self, sigma: f64, theta: f64) -> Self {
        self.ls_sigma = sigma;
        self.ls_theta = theta;
        self
    }

    pub fn sqrt_epsilon(&self) -> f64 {
        self.epsilon.sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SloError::InvalidConfig(msg));
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.radius_d > 0.0 && self.radius_d.is_finite()) {
            return bad(format!("radius_d must be positive, got {}", self.radius_d));
        }
        if !(self.margin_d >= 0.0 && self.margin_d.is_finite()) {
            return bad(format!(
                "margin_d must be nonnegative, got {}",
                self.margin_d
            ));
        }
        if self.max_epochs == 0 || self.max_total_grad_evals == 0 {
            return bad("budgets must be positive".into());
        }
        if let Some(t) = self.time_budget_s {
            if !(t > 0.0) {
                return bad(format!("time budget must be positive, got {t}"));
            }
        }
        let lip = &self.lipschitz;
        if lip.n_samples < 2 {
            return bad("lipschitz.n_samples must be at least 2".into());
        }
        if !(lip.safety_factor >= 1.0 && lip.safety_factor.is_finite()) {
            return bad(format!(
                "safety factor must be >= 1, got {}",
                lip.safety_factor
            ));
        }

        let se = self.sqrt_epsilon();
        let (d_big, d_small) = (self.radius_d, self.margin_d);
        match self.subroutine {
            Subroutine::GradientProjection => {
                if d_small != 0.0 {
                    return bad(format!(
                        "gradient projection requires margin 0, got {d_small}"
                    ));
                }
                if !approx_ge(d_big, se / 2.0) {
                    return bad(format!(
                        "gradient projection requires D >= sqrt(eps)/2 = {}",
                        se / 2.0
                    ));
                }
            }
            Subroutine::NormalizedGradient => {
                if !approx_ge(d_small, se) {
                    return bad(format!(
                        "normalized gradient requires margin >= sqrt(eps) = {se}"
                    ));
                }
                if !approx_ge(d_big, se / 2.0 + 2.0 * d_small) {
                    return bad(format!(
                        "normalized gradient requires D >= sqrt(eps)/2 + 2 margin = {}",
                        se / 2.0 + 2.0 * d_small
                    ));
                }
            }
            Subroutine::LineSearch => {
                let db = self.ls_delta_bar;
                if !(approx_eq(d_big, db) && approx_eq(d_small, db)) {
                    return bad(format!(
                        "line search requires D = margin = delta_bar, got {d_big}, {d_small}, {db}"
                    ));
                }
                if !(db > se) {
                    return bad(format!("line search requires delta_bar > sqrt(eps) = {se}"));
                }
                if !(self.ls_sigma > 0.0 && self.ls_sigma < 1.0) {
                    return bad(format!("sigma must lie in (0,1), got {}", self.ls_sigma));
                }
                if !(self.ls_theta > 0.0 && self.ls_theta < 1.0) {
                    return bad(format!("theta must lie in (0,1), got {}", self.ls_theta));
                }
                if !(self.ls_alpha > 0.0 && self.ls_alpha <= 1.0) {
                    return bad(format!("ls_alpha must lie in (0,1], got {}", self.ls_alpha));
                }
            }
            Subroutine::Accelerated => {
                let q = self.epsilon.powf(0.25);
                if !approx_eq(d_small, 2.0 * q) {
                    return bad(format!(
                        "accelerated projection requires margin = 2 eps^(1/4) = {}",
                        2.0 * q
                    ));
                }
                if !approx_ge(d_big, 6.0 * q) {
                    return bad(format!(
                        "accelerated projection requires D >= 6 eps^(1/4) = {}",
                        6.0 * q
                    ));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_subroutine_invariants() {
        let eps = 1e-4;
        assert!(SloConfig::gradient_projection(eps, 0.005).is_ok());
        assert!(SloConfig::gradient_projection(eps, 0.004).is_err());

        let d = eps.sqrt();
        assert!(SloConfig::normalized_gradient(eps, d / 2.0 + 2.0 * d, d).is_ok());
        assert!(SloConfig::normalized_gradient(eps, 0.1, 0.5 * d).is_err());
        assert!(SloConfig::normalized_gradient(eps, 2.0 * d, d).is_err());

        assert!(SloConfig::line_search(eps, 0.02).is_ok());
        assert!(SloConfig::line_search(eps, 0.01).is_err());

        assert!(SloConfig::accelerated(eps, 0.6).is_ok());
        assert!(SloConfig::accelerated(eps, 0.59).is_err());
    }

    #[test]
    fn mutated_configs_are_rechecked() {
        let mut cfg = SloConfig::gradient_projection(1e-6, 1.0).unwrap();
        cfg.margin_d = 0.1;
        assert!(cfg.validate().is_err());

        let mut ls = SloConfig::line_search(1e-6, 1.0).unwrap();
        ls.radius_d = 2.0;
        assert!(ls.validate().is_err());

        let ls = SloConfig::line_search(1e-6, 1.0)
            .unwrap()
            .with_armijo(1.0, 0.5);
        assert!(ls.validate().is_err());
    }
}
