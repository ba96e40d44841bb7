//! The compressor network: a time-conditioned hypernetwork emitting the
//! weights of a residual sine INR over `(x, t)`.

mod artifact;
mod compressor;
mod layout;
mod siren;

pub use artifact::{artifact_precision, artifact_size, read_model, write_model, MODEL_MAGIC, MODEL_VERSION};
pub use compressor::{
    compression_rate, hyper_init, target_init, CompressorModel, ModelSpec, COORDS_INPUT, HYPER_INPUT,
};
pub use layout::{LayerSlots, ParamTemplate, Segment, SirenLayout};
pub use siren::{build_siren, init_siren};

use crate::numcore::NumError;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("malformed model artifact: {0}")]
    Format(String),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
