use serde::{Deserialize, Serialize};

use super::DataError;
use crate::numcore::{Real, Tensor};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub name: String,
    pub dt: f64,
    /// Free-form generator parameters, echoed into reports.
    pub generator: serde_json::Value,
}

/// Snapshots `U_t` (each `n x c`) of a field over a fixed mesh `X` (`n x d`).
#[derive(Debug, Clone, PartialEq)]
pub struct MeshDataset<T> {
    coords: Tensor<T>,
    snapshots: Vec<Tensor<T>>,
    channels: usize,
    pub meta: DatasetMeta,
}

impl<T: Real> MeshDataset<T> {
    pub fn new(coords: Tensor<T>, snapshots: Vec<Tensor<T>>, channels: usize, meta: DatasetMeta) -> Result<Self, DataError> {
        if coords.shape().len() != 2 || coords.rows() == 0 || coords.cols() == 0 {
            return Err(DataError::Shape(format!("coordinates must be n x d, got {:?}", coords.shape())));
        }
        if channels == 0 {
            return Err(DataError::Shape("channel count must be >= 1".into()));
        }
        let n = coords.rows();
        for (t, u) in snapshots.iter().enumerate() {
            if u.shape() != [n, channels] {
                return Err(DataError::Shape(format!(
                    "snapshot {t} has shape {:?}, expected [{n}, {channels}]",
                    u.shape()
                )));
            }
        }
        Ok(Self {
            coords,
            snapshots,
            channels,
            meta,
        })
    }

    pub fn coords(&self) -> &Tensor<T> {
        &self.coords
    }

    pub fn snapshots(&self) -> &[Tensor<T>] {
        &self.snapshots
    }

    pub fn snapshot(&self, t: usize) -> &Tensor<T> {
        &self.snapshots[t]
    }

    pub fn nodes(&self) -> usize {
        self.coords.rows()
    }

    pub fn spatial_dim(&self) -> usize {
        self.coords.cols()
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn time_count(&self) -> usize {
        self.snapshots.len()
    }

    /// Number of stored values, `n * d + T * n * c`.
    pub fn value_count(&self) -> usize {
        self.nodes() * self.spatial_dim() + self.time_count() * self.nodes() * self.channels
    }

    /// Subset of snapshots in the given order.
    pub fn select_times(&self, times: &[usize]) -> Result<Self, DataError> {
        let mut snapshots = Vec::with_capacity(times.len());
        for &t in times {
            let u = self
                .snapshots
                .get(t)
                .ok_or_else(|| DataError::Shape(format!("time {t} out of range ({} snapshots)", self.time_count())))?;
            snapshots.push(u.clone());
        }
        Self::new(self.coords.clone(), snapshots, self.channels, self.meta.clone())
    }

    pub fn cast<U: Real>(&self) -> MeshDataset<U> {
        MeshDataset {
            coords: self.coords.cast(),
            snapshots: self.snapshots.iter().map(Tensor::cast).collect(),
            channels: self.channels,
            meta: self.meta.clone(),
        }
    }
}
