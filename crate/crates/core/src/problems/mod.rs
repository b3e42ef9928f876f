//! Bundled objective oracles.

mod analytic;
mod linear_net;
mod tensor;

pub use analytic::{AnalyticKind, AnalyticProblem};
pub use linear_net::{
    generate_planted_labels, read_csv_matrix, synthetic_data, uniform_weights, LinearNetProblem,
    NetMode,
};
pub use tensor::{
    generate_planted_tensor, tensor_from_components, tensor_from_components_capped, PlantedTensor,
    SymTensor, SymTensorProblem, DEFAULT_ENTRY_CAP,
};
