//! Runs every (round, method) pair of an experiment and writes trace CSVs.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use slo_core::problems::{
    generate_planted_labels, generate_planted_tensor, read_csv_matrix, synthetic_data,
    uniform_weights, AnalyticKind, AnalyticProblem, LinearNetProblem, NetMode, SymTensorProblem,
};
use slo_core::sampling::{rng_for, uniform_init, STREAM_INIT};
use slo_core::{
    gd_fixed, run_bpg, run_slo, BpgConfig, Budgets, LipschitzSettings, Objective, RunResult,
    SloConfig, SloError, Vector,
};

use crate::report::{self, Summary};
use crate::spec::{ExperimentSpec, LipschitzMode, Method, ProblemSpec, SpecError};

/// Exact header of every trace CSV.
pub const TRACE_HEADER: &str =
    "round,epoch,iter,grad_evals,elapsed_s,f_value,grad_norm,dist_from_anchor";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{0}")]
    Spec(#[from] SpecError),
    #[error("{0}")]
    Core(#[from] SloError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Schema { path: PathBuf, msg: String },
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Spec(_) => "invalid_spec",
            HarnessError::Core(_) => "solver",
            HarnessError::Io { .. } => "io",
            HarnessError::Schema { .. } => "schema",
        }
    }
}

/// A built problem instance.
pub enum Instance {
    Tensor(SymTensorProblem),
    Net(LinearNetProblem),
    Quartic(AnalyticProblem),
}

impl Instance {
    pub fn build(spec: &ExperimentSpec) -> Result<Self, HarnessError> {
        let seed = spec.seed;
        Ok(match &spec.problem {
            ProblemSpec::Tensor {
                d,
                k,
                m,
                scale_low,
                scale_high,
            } => Instance::Tensor(
                generate_planted_tensor(*d, *k, *m, *scale_low, *scale_high, seed)?.problem,
            ),
            ProblemSpec::Autoencoder {
                widths,
                samples,
                data,
            } => {
                let x = match data {
                    Some(path) => {
                        let file = fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
                        read_csv_matrix(file)?
                    }
                    None => synthetic_data(widths[0], *samples, seed),
                };
                Instance::Net(LinearNetProblem::new(
                    x,
                    None,
                    widths.clone(),
                    NetMode::Autoencoder,
                )?)
            }
            ProblemSpec::Supervised { widths, samples } => {
                let x = synthetic_data(widths[0], *samples, seed);
                let (y, _) = generate_planted_labels(widths, &x, seed)?;
                Instance::Net(LinearNetProblem::new(
                    x,
                    Some(y),
                    widths.clone(),
                    NetMode::Supervised,
                )?)
            }
            ProblemSpec::Quartic { dim } => {
                Instance::Quartic(AnalyticProblem::new(AnalyticKind::Quartic, *dim))
            }
        })
    }

    pub fn objective(&self) -> &dyn Objective {
        match self {
            Instance::Tensor(p) => p,
            Instance::Net(p) => p,
            Instance::Quartic(p) => p,
        }
    }

    /// Optimal value when the construction fixes it.
    pub fn known_optimum(&self) -> Option<f64> {
        match self {
            Instance::Tensor(_) | Instance::Quartic(_) => Some(0.0),
            Instance::Net(p) => match p.mode() {
                NetMode::Supervised => Some(0.0),
                NetMode::Autoencoder => None,
            },
        }
    }

    /// Kernel degree and relative-smoothness constant for BPG.
    fn bpg_config(&self, spec: &ExperimentSpec) -> Result<BpgConfig, HarnessError> {
        let (n, default_l) = match self {
            Instance::Tensor(p) => (2 * p.order_k() as u32, Some(p.bpg_relative_l())),
            Instance::Quartic(_) => (4, Some(1.0)),
            Instance::Net(p) => (2 * (p.widths().len() - 1) as u32, None),
        };
        let l = spec
            .bpg_l
            .or(default_l)
            .ok_or_else(|| SpecError::new("bpg on a network problem needs bpg_l"))?;
        let mut cfg = BpgConfig::new(n.max(2), l);
        cfg.stop_grad_tol = spec.epsilon.sqrt();
        cfg.max_iters = usize::MAX;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The shared starting point of round `round`.
    pub fn initial_point(&self, spec: &ExperimentSpec, round: usize) -> Vector {
        let mut rng = rng_for(spec.seed.wrapping_add(round as u64), STREAM_INIT);
        match self {
            Instance::Net(p) => uniform_weights(&mut rng, p.widths(), spec.init_scale),
            _ => uniform_init(&mut rng, self.objective().dim(), spec.init_scale),
        }
    }
}

/// Solver settings for one method, fixed before any run starts.
#[derive(Debug, Clone)]
pub enum MethodPlan {
    Gd { step: f64, tol: f64 },
    Bpg(BpgConfig),
    Slo(SloConfig),
}

impl MethodPlan {
    pub fn build(
        method: Method,
        spec: &ExperimentSpec,
        instance: &Instance,
    ) -> Result<Self, HarnessError> {
        let eps = spec.epsilon;
        let slo = match method {
            Method::Gd => {
                return Ok(MethodPlan::Gd {
                    step: spec.gd_step,
                    tol: eps.sqrt(),
                })
            }
            Method::Bpg => return Ok(MethodPlan::Bpg(instance.bpg_config(spec)?)),
            Method::Pgd => SloConfig::gradient_projection(eps, spec.radius)?,
            Method::Ngd => SloConfig::normalized_gradient(eps, spec.radius, spec.margin())?,
            Method::Ls => SloConfig::line_search(eps, spec.delta_bar())?,
            Method::Agp => SloConfig::accelerated(eps, spec.radius)?,
        };
        let lipschitz = LipschitzSettings {
            n_samples: spec.lipschitz_samples,
            prefer_analytic: spec.lipschitz == LipschitzMode::Analytic,
            ..LipschitzSettings::default()
        };
        let cfg = slo
            .with_lipschitz(lipschitz)
            .with_max_grad_evals(spec.eval_budget())
            .with_time_budget(spec.budget_seconds);
        cfg.validate()?;
        Ok(MethodPlan::Slo(cfg))
    }

    fn run(
        &self,
        f: &dyn Objective,
        x0: &Vector,
        spec: &ExperimentSpec,
        round: usize,
    ) -> slo_core::Result<RunResult> {
        let budgets = Budgets {
            max_grad_evals: spec.eval_budget(),
            max_iters: usize::MAX,
            time_budget_s: spec.budget_seconds,
        };
        match self {
            MethodPlan::Gd { step, tol } => gd_fixed(f, x0, *step, &budgets, *tol),
            MethodPlan::Bpg(cfg) => run_bpg(f, x0, cfg, &budgets),
            MethodPlan::Slo(cfg) => run_slo(
                f,
                x0,
                &cfg.clone().with_seed(spec.seed.wrapping_add(round as u64)),
            ),
        }
    }
}

/// Outcome of one (round, method) run.
#[derive(Debug)]
pub struct RunOutcome {
    pub round: usize,
    pub method: Method,
    pub result: Result<RunResult, String>,
}

/// Everything an experiment produced.
#[derive(Debug)]
pub struct ExperimentOutput {
    pub runs: Vec<RunOutcome>,
    pub summary: Summary,
    /// Trace CSVs in (method, round) order.
    pub trace_files: Vec<PathBuf>,
}

/// Validates the spec, builds every method plan, then runs all rounds.
/// Individual run failures are recorded, not propagated.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput, HarnessError> {
    spec.validate()?;
    let instance = Instance::build(spec)?;
    let plans = spec
        .methods
        .iter()
        .map(|&m| MethodPlan::build(m, spec, &instance).map(|p| (m, p)))
        .collect::<Result<Vec<_>, _>>()?;
    let starts: Vec<Vector> = (0..spec.rounds)
        .map(|r| instance.initial_point(spec, r))
        .collect();

    let jobs: Vec<(usize, usize)> = (0..plans.len())
        .flat_map(|m| (0..spec.rounds).map(move |r| (m, r)))
        .collect();
    let f = instance.objective();
    let runs: Vec<RunOutcome> = jobs
        .par_iter()
        .map(|&(m, r)| {
            let (method, plan) = &plans[m];
            RunOutcome {
                round: r,
                method: *method,
                result: plan.run(f, &starts[r], spec, r).map_err(|e| e.to_string()),
            }
        })
        .collect();

    let summary = report::summarize_runs(&runs, spec.rounds, instance.known_optimum());
    let mut trace_files = Vec::new();
    if let Some(dir) = &spec.output_dir {
        let traces = dir.join("traces");
        fs::create_dir_all(&traces).map_err(|e| HarnessError::io(&traces, e))?;
        for run in &runs {
            if let Ok(res) = &run.result {
                let path = traces.join(trace_file_name(run.method, run.round));
                write_trace(&path, run.round, res)?;
                trace_files.push(path);
            }
        }
        report::write_summary(dir, &summary)?;
        if spec.svg {
            for (method, _) in &plans {
                if let Some(RunOutcome {
                    result: Ok(res), ..
                }) = runs.iter().find(|o| o.method == *method && o.round == 0)
                {
                    let path = dir.join(format!("{method}.svg"));
                    let svg = report::svg_chart(&format!("{method}, round 0"), res);
                    fs::write(&path, svg).map_err(|e| HarnessError::io(&path, e))?;
                }
            }
        }
    }
    Ok(ExperimentOutput {
        runs,
        summary,
        trace_files,
    })
}

pub fn trace_file_name(method: Method, round: usize) -> String {
    format!("{method}_r{round}.csv")
}

/// Shortest round-trip scientific notation, stable across platforms.
pub fn fmt_float(v: f64) -> String {
    format!("{v:e}")
}

pub fn write_trace(path: &Path, round: usize, result: &RunResult) -> Result<(), HarnessError> {
    let file = fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io = |e| HarnessError::io(path, e);
    writeln!(out, "{TRACE_HEADER}").map_err(io)?;
    for rec in &result.trace.records {
        writeln!(
            out,
            "{round},{},{},{},{},{},{},{}",
            rec.epoch,
            rec.iter,
            rec.cum_grad_evals,
            fmt_float(rec.elapsed_s),
            fmt_float(rec.f_value),
            fmt_float(rec.grad_norm),
            fmt_float(rec.dist_from_anchor)
        )
        .map_err(io)?;
    }
    out.flush().map_err(io)
}
