//! Snapshot datasets: synthetic generators, the binary dataset file and a
//! single-pass stream abstraction.

mod dataset;
mod format;
mod generators;
mod stream;

pub use dataset::{DatasetMeta, MeshDataset};
pub use format::{file_size, parse_dataset, read_dataset, write_dataset, DATASET_MAGIC, DATASET_VERSION, HEADER_BYTES};
pub use generators::{branch3d_points, gen_branch3d, gen_pulse2d, Branch3d, Pulse2d};
pub use stream::{DatasetStream, SnapshotStream};

use crate::numcore::NumError;

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invalid generator arguments: {0}")]
    Generator(String),
    #[error("file truncated at byte {offset} while reading {what} (needed {needed} bytes)")]
    Truncated { offset: usize, needed: usize, what: String },
    #[error("bad magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported dataset version {0}")]
    Version(u16),
    #[error("{0} trailing bytes after the last snapshot")]
    TrailingBytes(usize),
    #[error("snapshot stream already exhausted")]
    StreamExhausted,
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
