//! Sequential local optimization for smooth non-convex objectives whose
//! gradients are only locally Lipschitz.
//!
//! A run is split into epochs. Each epoch works inside a ball of radius `D`
//! around its anchor, where local Lipschitz constants are valid, and ends when
//! an iterate reaches the ball's outer margin. Four per-iteration subroutines
//! are provided (gradient projection, normalized gradient, Armijo line search
//! and an accelerated method with negative-curvature steps), along with
//! gradient descent and Bregman proximal gradient baselines and a set of
//! benchmark objectives.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agp;
pub mod baselines;
pub mod config;
pub mod error;
pub mod lipschitz;
pub mod oracle;
pub mod problems;
pub mod sampling;
pub mod slo;
pub mod subroutines;
pub mod trace;
pub mod vector;

pub use agp::{
    a_agp, agp_upg, certify_progress, find_nc_pair, AgpOutput, AgpRegion, AugmentedOracle,
    UpgOutcome,
};
pub use baselines::{bpg_step, bpg_subproblem, gd_fixed, run_bpg, BpgConfig, Budgets};
pub use config::{LipschitzSettings, SloConfig, Subroutine};
pub use error::{Result, SloError};
pub use lipschitz::{estimate_l1, estimate_l2, EstimateMethod, LipschitzEstimate};
pub use oracle::{finite_diff_gradient, Evaluator, FnObjective, Objective};
pub use slo::{check_epoch_descent, epoch_bound, run_slo};
pub use subroutines::{a_gp, a_ls, a_ng, LsOutcome, LsParams};
pub use trace::{AgpCallRecord, EpochSummary, IterationRecord, RunResult, RunTrace, Termination};
pub use vector::Vector;
