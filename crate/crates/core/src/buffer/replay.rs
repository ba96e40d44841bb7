use std::collections::VecDeque;

use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;

use super::BufferError;
use crate::numcore::{Real, Tensor};
use crate::sketch::{SketchKind, SketchOperator};

#[derive(Debug, Clone, PartialEq)]
pub struct FullRecord<T> {
    pub t: usize,
    pub u: Tensor<T>,
}

/// A stored product `S_t U_t` together with what is needed to rebuild `S_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchRecord<T> {
    pub t: usize,
    pub seed: u64,
    pub k: usize,
    pub su: Tensor<T>,
}

/// Static dimensions shared by all records of a buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BufferShape {
    pub n: usize,
    pub c: usize,
    pub k: usize,
    pub kind: SketchKind,
    pub full_capacity: usize,
    pub sketch_capacity: usize,
}

impl BufferShape {
    /// `(T_f n + T_s k) c`.
    pub fn value_bound(&self) -> usize {
        (self.full_capacity * self.n + self.sketch_capacity * self.k) * self.c
    }
}

/// Bytes held by each part of the buffer (32-bit values, 64-bit seeds).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SizeReport {
    pub full_bytes: usize,
    pub sketch_bytes: usize,
    pub seed_bytes: usize,
}

impl SizeReport {
    pub fn total(&self) -> usize {
        self.full_bytes + self.sketch_bytes + self.seed_bytes
    }
}

#[derive(Debug, Clone)]
pub struct ReplayBuffer<T> {
    shape: BufferShape,
    full: VecDeque<FullRecord<T>>,
    sketches: VecDeque<SketchRecord<T>>,
}

impl<T: Real> ReplayBuffer<T> {
    /// A sketch capacity of zero disables the sketch queue.
    pub fn new(shape: BufferShape) -> Result<Self, BufferError> {
        if shape.full_capacity == 0 {
            return Err(BufferError::ZeroCapacity);
        }
        if shape.n == 0 || shape.c == 0 {
            return Err(BufferError::Shape(format!("n={} c={} must be positive", shape.n, shape.c)));
        }
        if shape.sketch_capacity > 0 && (shape.k == 0 || shape.k > shape.n) {
            return Err(BufferError::Shape(format!("sketch rows k={} outside 1..={}", shape.k, shape.n)));
        }
        Ok(Self {
            shape,
            full: VecDeque::with_capacity(shape.full_capacity),
            sketches: VecDeque::with_capacity(shape.sketch_capacity),
        })
    }

    pub fn shape(&self) -> &BufferShape {
        &self.shape
    }

    pub fn full_records(&self) -> impl ExactSizeIterator<Item = &FullRecord<T>> {
        self.full.iter()
    }

    pub fn sketch_records(&self) -> impl ExactSizeIterator<Item = &SketchRecord<T>> {
        self.sketches.iter()
    }

    pub fn full_len(&self) -> usize {
        self.full.len()
    }

    pub fn sketch_len(&self) -> usize {
        self.sketches.len()
    }

    pub fn push_full(&mut self, record: FullRecord<T>) -> Result<Option<FullRecord<T>>, BufferError> {
        let want = [self.shape.n, self.shape.c];
        if record.u.shape() != want {
            return Err(BufferError::Shape(format!("full snapshot {:?}, expected {want:?}", record.u.shape())));
        }
        let evicted = if self.full.len() == self.shape.full_capacity {
            self.full.pop_front()
        } else {
            None
        };
        self.full.push_back(record);
        Ok(evicted)
    }

    /// With a zero-capacity sketch queue the record is handed straight back.
    pub fn push_sketch(&mut self, record: SketchRecord<T>) -> Result<Option<SketchRecord<T>>, BufferError> {
        let want = [self.shape.k, self.shape.c];
        if record.k != self.shape.k || record.su.shape() != want {
            return Err(BufferError::Shape(format!(
                "sketch record k={} shape {:?}, expected {want:?}",
                record.k,
                record.su.shape()
            )));
        }
        if self.shape.sketch_capacity == 0 {
            return Ok(Some(record));
        }
        let evicted = if self.sketches.len() == self.shape.sketch_capacity {
            self.sketches.pop_front()
        } else {
            None
        };
        self.sketches.push_back(record);
        Ok(evicted)
    }

    /// Uniform draw without replacement of `min(b, len)` records, in draw order.
    pub fn sample_full_batch<R: Rng + ?Sized>(&self, b: usize, rng: &mut R) -> Vec<&FullRecord<T>> {
        draw(&self.full, b, rng)
    }

    pub fn sample_sketch_batch<R: Rng + ?Sized>(&self, b: usize, rng: &mut R) -> Vec<&SketchRecord<T>> {
        draw(&self.sketches, b, rng)
    }

    /// Rebuilds the operator that produced a stored record.
    pub fn operator(&self, record: &SketchRecord<T>) -> Result<SketchOperator, BufferError> {
        Ok(SketchOperator::new(self.shape.kind, self.shape.n, record.k, record.seed)?)
    }

    /// Number of field values currently held (seeds excluded).
    pub fn stored_values(&self) -> usize {
        self.full.iter().map(|r| r.u.len()).sum::<usize>() + self.sketches.iter().map(|r| r.su.len()).sum::<usize>()
    }

    pub fn size_report(&self) -> SizeReport {
        let full_values: usize = self.full.iter().map(|r| r.u.len()).sum();
        let sketch_values: usize = self.sketches.iter().map(|r| r.su.len()).sum();
        SizeReport {
            full_bytes: 4 * full_values,
            sketch_bytes: 4 * sketch_values,
            seed_bytes: 8 * self.sketches.len(),
        }
    }

    pub(super) fn from_parts(
        shape: BufferShape,
        full: Vec<FullRecord<T>>,
        sketches: Vec<SketchRecord<T>>,
    ) -> Result<Self, BufferError> {
        let mut buf = Self::new(shape)?;
        if full.len() > shape.full_capacity || sketches.len() > shape.sketch_capacity {
            return Err(BufferError::Format("more records than capacity".into()));
        }
        for r in full {
            buf.push_full(r)?;
        }
        for r in sketches {
            buf.push_sketch(r)?;
        }
        Ok(buf)
    }
}

fn draw<'a, X, R: Rng + ?Sized>(queue: &'a VecDeque<X>, b: usize, rng: &mut R) -> Vec<&'a X> {
    let len = queue.len();
    let amount = b.min(len);
    if amount == 0 {
        return Vec::new();
    }
    sample(rng, len, amount).into_iter().map(|i| &queue[i]).collect()
}
