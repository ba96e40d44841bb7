//! Losses, metrics and the offline and in-situ training loops.

mod config;
mod loss;
mod metrics;
mod report;
mod train;

pub use config::{sketch_rows, Mode, TrainConfig};
pub use loss::{loss_ideal, loss_insitu, FullTarget, LossValue, SketchTarget};
pub use metrics::{format_db, loss_frame, psnr, rfe};
pub use report::{CycleRecord, Metrics, Summary, TestPoint, TrainReport};
pub use train::{
    evaluate, insitu_sketch_seed, metrics_for, offline_sketch_seed, reconstruct, train, train_insitu,
    train_insitu_observed, train_offline,
};

use crate::buffer::BufferError;
use crate::model::ModelError;
use crate::numcore::NumError;
use crate::sketch::SketchError;

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("channel {channel} of the data has zero norm")]
    ZeroNorm { channel: usize },
    #[error("PSNR undefined: reconstruction peak of channel {channel} is not positive")]
    PsnrUndefined { channel: usize },
    #[error("training diverged at {} cycle {cycle}", snapshot_t.map_or("offline step".to_string(), |t| format!("snapshot {t}")))]
    Diverged {
        snapshot_t: Option<usize>,
        cycle: usize,
        report: Box<TrainReport>,
    },
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sketch(#[from] SketchError),
    #[error(transparent)]
    Buffer(#[from] BufferError),
    #[error(transparent)]
    Data(#[from] crate::dataio::DataError),
}
