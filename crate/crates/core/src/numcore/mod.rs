//! Dense tensors, a define-by-run autodiff graph, Adam, and finite-difference checks.

mod adam;
mod error;
pub mod gradcheck;
mod graph;
pub mod ops;
mod params;
mod real;
mod tensor;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use error::{NumError, NumResult};
pub use gradcheck::{finite_diff_coords, finite_diff_gradient, max_relative_error, relative_error};
pub use graph::{Graph, NodeId};
pub use ops::{linear_forward, lstm_cell_forward, sigmoid, softmax, LstmWeights};
pub use params::ParamStore;
pub use real::{Precision, Real};
pub use tensor::Tensor;
