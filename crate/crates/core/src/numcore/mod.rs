//! Dense tensors, a small reverse-mode gradient graph and the RAdam optimizer.

mod finite_diff;
mod graph;
mod radam;
mod real;
mod tensor;

pub use finite_diff::{finite_diff_gradient, finite_diff_partials};
pub use graph::{Gradients, Graph, LinearMap, NodeId};
pub use radam::{radam_step, RAdamHyper, RAdamState, StepKind, RHO_THRESHOLD};
pub use real::{Precision, Real};
pub use tensor::{gemm_into, matmul, Tensor};

#[derive(Debug, thiserror::Error)]
pub enum NumError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite value at node {node} ({op}) during {pass}")]
    NonFinite {
        node: usize,
        op: &'static str,
        pass: &'static str,
    },
    #[error("input `{0}` is not bound")]
    UnboundInput(String),
    #[error("backward called before forward")]
    BackwardBeforeForward,
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
