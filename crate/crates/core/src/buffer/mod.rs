//! Bounded replay memory for in-situ training: a FIFO of full snapshots and
//! a FIFO of sketched snapshots stored with the seed of their operator.

mod persist;
mod replay;

pub use persist::{read_buffer, write_buffer, BUFFER_MAGIC, BUFFER_VERSION};
pub use replay::{BufferShape, FullRecord, ReplayBuffer, SizeReport, SketchRecord};

use crate::numcore::NumError;
use crate::sketch::SketchError;

#[derive(Debug, thiserror::Error)]
pub enum BufferError {
    #[error("full queue capacity must be >= 1")]
    ZeroCapacity,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("malformed buffer file: {0}")]
    Format(String),
    #[error(transparent)]
    Sketch(#[from] SketchError),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
