use crate::vector::Vector;

/// One recorded iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub epoch: usize,
    pub iter: usize,
    pub f_value: f64,
    pub grad_norm: f64,
    /// `‖x − x₀‖` for the anchor of the current epoch (the start point for baselines).
    pub dist_from_anchor: f64,
    /// `‖x_k − x_{k−1}‖`; zero for the first record.
    pub step_norm: f64,
    /// True when this iterate entered the margin shell and closed its epoch.
    pub closes_epoch: bool,
    pub cum_grad_evals: u64,
    pub elapsed_s: f64,
}

/// Per-epoch bookkeeping of an SLO run.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochSummary {
    pub tau: usize,
    pub anchor_f: f64,
    /// Effective gradient constant used by the subroutine (safety factor applied).
    pub l1: Option<f64>,
    /// Effective Hessian constant used by the subroutine.
    pub l2: Option<f64>,
    /// Index into [`RunTrace::records`] of the anchor; the epoch's own
    /// iterates follow it.
    pub first_record: usize,
    pub iterations: usize,
    pub closed: bool,
}

/// Diagnostics of one accelerated-subroutine call.
#[derive(Debug, Clone, PartialEq)]
pub struct AgpCallRecord {
    pub epoch: usize,
    pub iter: usize,
    pub flag: u8,
    pub upg_iterations: usize,
    /// Iteration bound `1 + max{0, √κ·log(2L̂₁ψ/ε̂)}`, when a potential was computed.
    pub iteration_bound: Option<f64>,
    pub grad_evals: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
    pub epochs: Vec<EpochSummary>,
    pub agp_calls: Vec<AgpCallRecord>,
    /// Every iterate, parallel to `records`, when point recording is enabled.
    pub points: Vec<Vector>,
    /// Epoch anchors, parallel to `epochs`, when point recording is enabled.
    pub anchors: Vec<Vector>,
}

impl RunTrace {
    pub fn min_grad_norm(&self) -> Option<f64> {
        self.records.iter().map(|r| r.grad_norm).reduce(f64::min)
    }

    pub fn min_f_value(&self) -> Option<f64> {
        self.records.iter().map(|r| r.f_value).reduce(f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    GradientTolerance,
    EpochBudget,
    EvalBudget,
    TimeBudget,
    IterationBudget,
    /// Baseline iterates blew up (non-finite or exploding objective).
    Diverged,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::GradientTolerance => "gradient_tolerance",
            Termination::EpochBudget => "epoch_budget",
            Termination::EvalBudget => "eval_budget",
            Termination::TimeBudget => "time_budget",
            Termination::IterationBudget => "iteration_budget",
            Termination::Diverged => "diverged",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub final_point: Vector,
    pub final_value: f64,
    pub final_grad_norm: f64,
    pub termination: Termination,
    pub trace: RunTrace,
    /// Epochs closed by a margin landing.
    pub epochs_completed: usize,
    pub grad_evals: u64,
    pub value_evals: u64,
}
