use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::TrainError;
use crate::model::ModelSpec;
use crate::numcore::Precision;
use crate::sketch::SketchKind;

/// The six training modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// All snapshots available, full targets.
    #[serde(rename = "offline-baseline")]
    OfflineBaseline,
    /// All snapshots available, each replaced by a fixed subsampling sketch.
    #[serde(rename = "offline-subsample")]
    OfflineSubsample,
    /// All snapshots available, each replaced by a fixed FJLT sketch.
    #[serde(rename = "offline-fjlt")]
    OfflineFjlt,
    /// Single pass with a full-snapshot buffer only.
    #[serde(rename = "insitu-baseline")]
    InSituBaseline,
    #[serde(rename = "insitu-subsample")]
    InSituSubsample,
    #[serde(rename = "insitu-fjlt")]
    InSituFjlt,
}

impl Mode {
    pub const ALL: [Mode; 6] = [
        Mode::OfflineBaseline,
        Mode::OfflineSubsample,
        Mode::OfflineFjlt,
        Mode::InSituBaseline,
        Mode::InSituSubsample,
        Mode::InSituFjlt,
    ];

    pub fn is_offline(self) -> bool {
        matches!(self, Mode::OfflineBaseline | Mode::OfflineSubsample | Mode::OfflineFjlt)
    }

    pub fn sketch_kind(self) -> Option<SketchKind> {
        match self {
            Mode::OfflineSubsample | Mode::InSituSubsample => Some(SketchKind::Subsample),
            Mode::OfflineFjlt | Mode::InSituFjlt => Some(SketchKind::Fjlt),
            Mode::OfflineBaseline | Mode::InSituBaseline => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::OfflineBaseline => "offline-baseline",
            Mode::OfflineSubsample => "offline-subsample",
            Mode::OfflineFjlt => "offline-fjlt",
            Mode::InSituBaseline => "insitu-baseline",
            Mode::InSituSubsample => "insitu-subsample",
            Mode::InSituFjlt => "insitu-fjlt",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = TrainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.to_ascii_lowercase();
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| TrainError::Config(format!("unknown mode `{s}`")))
    }
}

/// Sketch rows for a sample factor `100 k / n`: `round(sf / 100 * n)`, at least 1.
pub fn sketch_rows(sample_factor: f64, n: usize) -> usize {
    ((sample_factor / 100.0 * n as f64).round() as usize).clamp(1, n.max(1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub mode: Mode,
    pub lr: f64,
    /// Weight of the sketched loss term.
    pub lambda: f64,
    pub batch_full: usize,
    pub batch_sketch: usize,
    pub cycles_per_snapshot: usize,
    /// `100 k / n`.
    pub sample_factor: f64,
    pub full_capacity: usize,
    /// `None` keeps every sketch (`T - 1` records).
    pub sketch_capacity: Option<usize>,
    pub master_seed: u64,
    pub precision: Precision,
    pub model: ModelSpec,
    /// Snapshots per offline step; `None` uses `batch_full + batch_sketch`.
    pub offline_batch: Option<usize>,
    /// Offline optimizer steps; `None` matches the in-situ budget `T * cycles`.
    pub offline_steps: Option<usize>,
    /// Evaluate the held-out test error every this many arrivals (0 = never).
    pub test_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            mode: Mode::InSituFjlt,
            lr: 1e-4,
            lambda: 1.0,
            batch_full: 1,
            batch_sketch: 32,
            cycles_per_snapshot: 300,
            sample_factor: 5.0,
            full_capacity: 1,
            sketch_capacity: None,
            master_seed: 0,
            precision: Precision::F32,
            model: ModelSpec::default(),
            offline_batch: None,
            offline_steps: None,
            test_every: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let fail = |msg: String| Err(TrainError::Config(msg));
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return fail(format!("lambda must be positive, got {}", self.lambda));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return fail(format!("learning rate must be positive, got {}", self.lr));
        }
        if !(self.sample_factor > 0.0 && self.sample_factor <= 100.0) {
            return fail(format!("sample factor must lie in (0, 100], got {}", self.sample_factor));
        }
        if self.batch_full == 0 || self.batch_sketch == 0 {
            return fail("batch sizes must be >= 1".into());
        }
        if self.full_capacity == 0 {
            return fail("full buffer capacity must be >= 1".into());
        }
        if self.offline_batch == Some(0) {
            return fail("offline batch must be >= 1".into());
        }
        Ok(())
    }

    pub fn sketch_rows(&self, n: usize) -> usize {
        sketch_rows(self.sample_factor, n)
    }

    pub fn offline_batch(&self) -> usize {
        self.offline_batch.unwrap_or(self.batch_full + self.batch_sketch)
    }

    pub fn offline_steps(&self, time_count: usize) -> usize {
        self.offline_steps.unwrap_or(time_count * self.cycles_per_snapshot)
    }

    pub fn sketch_capacity(&self, time_count: usize) -> usize {
        match self.mode {
            Mode::InSituBaseline => 0,
            _ => self.sketch_capacity.unwrap_or(time_count.saturating_sub(1)),
        }
    }
}
