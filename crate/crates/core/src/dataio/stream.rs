use super::{DataError, MeshDataset};
use crate::numcore::{Real, Tensor};

/// Single-pass source of snapshots over a fixed mesh.
///
/// Yields `(t, U_t)` in increasing `t`, then `Ok(None)` exactly once; any
/// further call fails with [`DataError::StreamExhausted`].
pub trait SnapshotStream<T> {
    fn coords(&self) -> &Tensor<T>;
    fn channels(&self) -> usize;
    /// Total number of snapshots the stream will deliver.
    fn len(&self) -> usize;
    fn next_snapshot(&mut self) -> Result<Option<(usize, Tensor<T>)>, DataError>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Replays an in-memory dataset as a stream.
#[derive(Debug)]
pub struct DatasetStream<'a, T> {
    dataset: &'a MeshDataset<T>,
    next: usize,
    finished: bool,
}

impl<'a, T: Real> DatasetStream<'a, T> {
    pub fn new(dataset: &'a MeshDataset<T>) -> Self {
        Self {
            dataset,
            next: 0,
            finished: false,
        }
    }
}

impl<T: Real> SnapshotStream<T> for DatasetStream<'_, T> {
    fn coords(&self) -> &Tensor<T> {
        self.dataset.coords()
    }

    fn channels(&self) -> usize {
        self.dataset.channels()
    }

    fn len(&self) -> usize {
        self.dataset.time_count()
    }

    fn next_snapshot(&mut self) -> Result<Option<(usize, Tensor<T>)>, DataError> {
        if self.finished {
            return Err(DataError::StreamExhausted);
        }
        if self.next == self.dataset.time_count() {
            self.finished = true;
            return Ok(None);
        }
        let t = self.next;
        self.next += 1;
        Ok(Some((t, self.dataset.snapshot(t).clone())))
    }
}
