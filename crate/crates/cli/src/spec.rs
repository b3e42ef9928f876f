//! Experiment description: a flat `key = value` file plus command-line overrides.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

/// Problem family and its shape parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    /// Planted symmetric tensor of order `k` and rank `m` in dimension `d`,
    /// component scales drawn from `[scale_low, scale_high]`.
    Tensor {
        d: usize,
        k: usize,
        m: usize,
        scale_low: f64,
        scale_high: f64,
    },
    /// Linear autoencoder; `widths` starts and ends with the feature count.
    Autoencoder {
        widths: Vec<usize>,
        samples: usize,
        data: Option<PathBuf>,
    },
    /// Linear network fitted to labels produced by planted weights.
    Supervised { widths: Vec<usize>, samples: usize },
    /// `¼‖x‖⁴` in `dim` dimensions.
    Quartic { dim: usize },
}

impl ProblemSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemSpec::Tensor { .. } => "tensor",
            ProblemSpec::Autoencoder { .. } => "autoencoder",
            ProblemSpec::Supervised { .. } => "supervised",
            ProblemSpec::Quartic { .. } => "quartic",
        }
    }

    fn default_for(name: &str) -> Option<Self> {
        Some(match name {
            "tensor" => ProblemSpec::Tensor {
                d: 4,
                k: 3,
                m: 2,
                scale_low: 0.5,
                scale_high: 2.0,
            },
            "autoencoder" => ProblemSpec::Autoencoder {
                widths: vec![8, 4, 8],
                samples: 100,
                data: None,
            },
            "supervised" => ProblemSpec::Supervised {
                widths: vec![5, 4, 3, 1],
                samples: 50,
            },
            "quartic" => ProblemSpec::Quartic { dim: 2 },
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Gd,
    Bpg,
    Pgd,
    Ngd,
    Ls,
    Agp,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Gd,
        Method::Bpg,
        Method::Pgd,
        Method::Ngd,
        Method::Ls,
        Method::Agp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Gd => "gd",
            Method::Bpg => "bpg",
            Method::Pgd => "pgd",
            Method::Ngd => "ngd",
            Method::Ls => "ls",
            Method::Agp => "agp",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, SpecError> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                SpecError::new(format!(
                    "unknown method `{s}` (expected one of gd, bpg, pgd, ngd, ls, agp)"
                ))
            })
    }
}

/// How local constants are obtained for pgd, ngd and agp.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LipschitzMode {
    /// Always estimate by sampling the ball.
    Sampled,
    /// Use the problem's closed-form bounds, sampling only where it has none.
    Analytic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecError(pub String);

impl SpecError {
    pub fn new(msg: impl Into<String>) -> Self {
        SpecError(msg.into())
    }
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for SpecError {}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub problem: ProblemSpec,
    pub methods: Vec<Method>,
    pub rounds: usize,
    pub seed: u64,
    /// Entrywise `Unif[0, init_scale]` starting points.
    pub init_scale: f64,
    pub epsilon: f64,
    pub radius: f64,
    /// NGD margin; defaults to `radius/4`.
    pub margin: Option<f64>,
    /// Line-search step cap; defaults to `radius`.
    pub delta_bar: Option<f64>,
    pub budget_evals: Option<u64>,
    pub budget_seconds: Option<f64>,
    pub gd_step: f64,
    /// Relative-smoothness constant for bpg; required for network problems.
    pub bpg_l: Option<f64>,
    pub lipschitz: LipschitzMode,
    pub lipschitz_samples: usize,
    pub output_dir: Option<PathBuf>,
    pub svg: bool,
}

/// Gradient-evaluation budget used when neither budget is given.
pub const DEFAULT_EVAL_BUDGET: u64 = 100_000;

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            problem: ProblemSpec::default_for("tensor").expect("known problem"),
            methods: Method::ALL.to_vec(),
            rounds: 1,
            seed: 0,
            init_scale: 0.1,
            epsilon: 1e-12,
            radius: 1.0,
            margin: None,
            delta_bar: None,
            budget_evals: None,
            budget_seconds: None,
            gd_step: 1e-3,
            bpg_l: None,
            lipschitz: LipschitzMode::Analytic,
            lipschitz_samples: 50,
            output_dir: None,
            svg: false,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, SpecError> {
    value
        .parse()
        .map_err(|_| SpecError::new(format!("cannot parse `{value}` for key `{key}`")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, SpecError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

impl ExperimentSpec {
    /// Parses a config file: one `key = value` per line, `#` starts a comment.
    pub fn from_config(text: &str) -> Result<Self, SpecError> {
        let mut spec = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                SpecError::new(format!("line {}: expected key = value", lineno + 1))
            })?;
            spec.set(key.trim(), value.trim())
                .map_err(|e| SpecError::new(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(spec)
    }

    /// Sets one key. `problem` resets the shape parameters to that problem's
    /// defaults, so it should come before shape keys.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), SpecError> {
        let key = key.replace('-', "_");
        match key.as_str() {
            "problem" => {
                if value != self.problem.name() {
                    self.problem = ProblemSpec::default_for(value).ok_or_else(|| {
                        SpecError::new(format!(
                            "unknown problem `{value}` (expected tensor, autoencoder, supervised or quartic)"
                        ))
                    })?;
                }
            }
            "methods" | "method" => self.methods = parse_list(&key, value)?,
            "rounds" => self.rounds = parse(&key, value)?,
            "seed" => self.seed = parse(&key, value)?,
            "init_scale" => self.init_scale = parse(&key, value)?,
            "epsilon" => self.epsilon = parse(&key, value)?,
            "radius" => self.radius = parse(&key, value)?,
            "margin" => self.margin = Some(parse(&key, value)?),
            "delta_bar" => self.delta_bar = Some(parse(&key, value)?),
            "budget_evals" => self.budget_evals = Some(parse(&key, value)?),
            "budget_seconds" => self.budget_seconds = Some(parse(&key, value)?),
            "gd_step" => self.gd_step = parse(&key, value)?,
            "bpg_l" => self.bpg_l = Some(parse(&key, value)?),
            "lipschitz" => {
                self.lipschitz = match value {
                    "sampled" => LipschitzMode::Sampled,
                    "analytic" => LipschitzMode::Analytic,
                    _ => {
                        return Err(SpecError::new(format!(
                            "lipschitz must be sampled or analytic, got `{value}`"
                        )))
                    }
                }
            }
            "lipschitz_samples" => self.lipschitz_samples = parse(&key, value)?,
            "out" | "output_dir" => self.output_dir = Some(PathBuf::from(value)),
            "svg" => self.svg = parse(&key, value)?,
            _ => self.set_shape(&key, value)?,
        }
        Ok(())
    }

    fn set_shape(&mut self, key: &str, value: &str) -> Result<(), SpecError> {
        let name = self.problem.name();
        let unknown = || SpecError::new(format!("key `{key}` does not apply to problem `{name}`"));
        match &mut self.problem {
            ProblemSpec::Tensor {
                d,
                k,
                m,
                scale_low,
                scale_high,
            } => match key {
                "d" | "tensor_d" => *d = parse(key, value)?,
                "k" | "tensor_k" => *k = parse(key, value)?,
                "m" | "tensor_m" => *m = parse(key, value)?,
                "scale_low" => *scale_low = parse(key, value)?,
                "scale_high" => *scale_high = parse(key, value)?,
                _ => return Err(unknown()),
            },
            ProblemSpec::Autoencoder {
                widths,
                samples,
                data,
            } => match key {
                "widths" => *widths = parse_list(key, value)?,
                "samples" => *samples = parse(key, value)?,
                "data" => *data = Some(PathBuf::from(value)),
                _ => return Err(unknown()),
            },
            ProblemSpec::Supervised { widths, samples } => match key {
                "widths" => *widths = parse_list(key, value)?,
                "samples" => *samples = parse(key, value)?,
                _ => return Err(unknown()),
            },
            ProblemSpec::Quartic { dim } => match key {
                "dim" => *dim = parse(key, value)?,
                _ => return Err(unknown()),
            },
        }
        Ok(())
    }

    pub fn margin(&self) -> f64 {
        self.margin.unwrap_or(self.radius / 4.0)
    }

    pub fn delta_bar(&self) -> f64 {
        self.delta_bar.unwrap_or(self.radius)
    }

    /// Gradient budget per run; the default applies only when no budget is set.
    pub fn eval_budget(&self) -> u64 {
        match (self.budget_evals, self.budget_seconds) {
            (Some(n), _) => n,
            (None, Some(_)) => u64::MAX,
            (None, None) => DEFAULT_EVAL_BUDGET,
        }
    }

    /// Structural checks that need no problem instance.
    pub fn validate(&self) -> Result<(), SpecError> {
        if self.rounds == 0 {
            return Err(SpecError::new("rounds must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(SpecError::new("no methods selected"));
        }
        let mut seen = self.methods.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.methods.len() {
            return Err(SpecError::new("a method is listed twice"));
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return Err(SpecError::new(format!(
                "init_scale must be >= 0, got {}",
                self.init_scale
            )));
        }
        if !(self.gd_step > 0.0 && self.gd_step.is_finite()) {
            return Err(SpecError::new(format!(
                "gd_step must be positive, got {}",
                self.gd_step
            )));
        }
        if self.budget_evals == Some(0) {
            return Err(SpecError::new("budget_evals must be positive"));
        }
        if let Some(t) = self.budget_seconds {
            if !(t > 0.0 && t.is_finite()) {
                return Err(SpecError::new(format!(
                    "budget_seconds must be positive, got {t}"
                )));
            }
        }
        match &self.problem {
            ProblemSpec::Tensor {
                d,
                k,
                m,
                scale_low,
                scale_high,
            } => {
                if *k < 3 || k % 2 == 0 {
                    return Err(SpecError::new(format!(
                        "tensor order must be odd and >= 3, got {k}"
                    )));
                }
                if *m == 0 || m > d {
                    return Err(SpecError::new(format!(
                        "tensor rank must lie in 1..=d, got m={m}, d={d}"
                    )));
                }
                if !(0.0 < *scale_low && scale_low <= scale_high) {
                    return Err(SpecError::new(
                        "component scales need 0 < scale_low <= scale_high",
                    ));
                }
            }
            ProblemSpec::Autoencoder {
                widths, samples, ..
            } => {
                if widths.len() < 2 || widths.first() != widths.last() {
                    return Err(SpecError::new(
                        "autoencoder widths must start and end with the feature count",
                    ));
                }
                if *samples == 0 {
                    return Err(SpecError::new("samples must be positive"));
                }
            }
            ProblemSpec::Supervised { widths, samples } => {
                if widths.len() < 2 || widths.contains(&0) || *samples == 0 {
                    return Err(SpecError::new(
                        "supervised net needs at least two positive widths and samples",
                    ));
                }
            }
            ProblemSpec::Quartic { dim } => {
                if *dim == 0 {
                    return Err(SpecError::new("quartic dimension must be positive"));
                }
            }
        }
        let is_net = matches!(
            self.problem,
            ProblemSpec::Autoencoder { .. } | ProblemSpec::Supervised { .. }
        );
        if is_net && self.methods.contains(&Method::Bpg) && self.bpg_l.is_none() {
            return Err(SpecError::new(
                "bpg on a network problem needs bpg_l (no closed-form constant is known)",
            ));
        }
        Ok(())
    }
}
