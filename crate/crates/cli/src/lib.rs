//! Experiment harness: describe an experiment, run every method on shared
//! starting points, and tabulate best/average results over rounds.

pub mod report;
pub mod runner;
pub mod spec;

pub use report::{summarize, summary_csv, summary_table, MethodRow, Summary};
pub use runner::{
    run_experiment, ExperimentOutput, HarnessError, Instance, RunOutcome, TRACE_HEADER,
};
pub use spec::{ExperimentSpec, LipschitzMode, Method, ProblemSpec, SpecError};
