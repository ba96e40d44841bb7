//! Sketch-size estimation from an intrinsic-dimension estimate of the
//! model's output manifold and the distortion observed between full and
//! sketched training losses.

mod estimate;
mod lpca;

pub use estimate::{epsilon_from_losses, estimate, estimated_sample_factor, DimEstimate};
pub use lpca::{lpca_dimension, lpca_from_cloud, LpcaOptions, DEFAULT_THRESHOLD};

use crate::model::ModelError;

#[derive(Debug, thiserror::Error)]
pub enum DimError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("sketch loss {sketch} is below full loss {full}")]
    NegativeDistortion { full: f64, sketch: f64 },
    #[error("point cloud has no variance")]
    Degenerate,
    #[error(transparent)]
    Model(#[from] ModelError),
}
