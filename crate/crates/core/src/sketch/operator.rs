use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::dct::{dct2_inplace, dct3_inplace};
use super::{rng_from_seed, SketchError};
use crate::numcore::{LinearMap, NumError, Real, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SketchKind {
    /// Uniform row sampling without replacement, unscaled.
    Subsample,
    /// Random signs, orthonormal DCT, scaled row sampling.
    Fjlt,
    /// Dense `k x n` matrix with `N(0, 1/k)` entries.
    Gaussian,
}

impl SketchKind {
    pub fn tag(self) -> u8 {
        match self {
            SketchKind::Subsample => 1,
            SketchKind::Fjlt => 2,
            SketchKind::Gaussian => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            1 => Some(SketchKind::Subsample),
            2 => Some(SketchKind::Fjlt),
            3 => Some(SketchKind::Gaussian),
            _ => None,
        }
    }
}

impl fmt::Display for SketchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SketchKind::Subsample => "subsample",
            SketchKind::Fjlt => "fjlt",
            SketchKind::Gaussian => "gaussian",
        })
    }
}

impl FromStr for SketchKind {
    type Err = SketchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "subsample" => Ok(SketchKind::Subsample),
            "fjlt" => Ok(SketchKind::Fjlt),
            "gaussian" => Ok(SketchKind::Gaussian),
            other => Err(SketchError::UnknownKind(other.to_string())),
        }
    }
}

/// A linear map `R^{n x c} -> R^{k x c}`, rebuilt bit-identically from
/// `(kind, n, k, seed)`. The same map is applied to every channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchOperator {
    kind: SketchKind,
    n: usize,
    k: usize,
    seed: u64,
    /// Sorted ascending; empty for the Gaussian kind.
    indices: Vec<usize>,
    /// Rademacher signs, FJLT only.
    signs: Vec<f64>,
    /// Row-major `k x n`, Gaussian only.
    matrix: Vec<f64>,
}

impl SketchOperator {
    pub fn new(kind: SketchKind, n: usize, k: usize, seed: u64) -> Result<Self, SketchError> {
        if k == 0 || k > n {
            return Err(SketchError::InvalidSize { n, k });
        }
        let mut rng = rng_from_seed(seed);
        let mut signs = Vec::new();
        let mut matrix = Vec::new();
        let mut indices = Vec::new();
        match kind {
            SketchKind::Subsample => {
                indices = rand::seq::index::sample(&mut rng, n, k).into_vec();
            }
            SketchKind::Fjlt => {
                signs = (0..n)
                    .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                    .collect();
                indices = rand::seq::index::sample(&mut rng, n, k).into_vec();
            }
            SketchKind::Gaussian => {
                let s = 1.0 / (k as f64).sqrt();
                matrix = (0..k * n)
                    .map(|_| rng.sample::<f64, _>(StandardNormal) * s)
                    .collect();
            }
        }
        indices.sort_unstable();
        Ok(Self {
            kind,
            n,
            k,
            seed,
            indices,
            signs,
            matrix,
        })
    }

    pub fn kind(&self) -> SketchKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Sampled row indices (ascending).
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    fn fjlt_scale(&self) -> f64 {
        (self.n as f64 / self.k as f64).sqrt()
    }

    /// Sketches every column of an `n x c` field.
    pub fn apply<T: Real>(&self, u: &Tensor<T>) -> Result<Tensor<T>, SketchError> {
        if u.rows() != self.n {
            return Err(SketchError::RowMismatch {
                expected: self.n,
                got: u.rows(),
            });
        }
        let c = u.cols();
        let out = match self.kind {
            SketchKind::Subsample => u.select_rows(&self.indices)?,
            SketchKind::Fjlt => {
                let scale = self.fjlt_scale();
                let mut out = vec![T::zero(); self.k * c];
                let mut col = vec![0.0; self.n];
                for j in 0..c {
                    for (i, v) in col.iter_mut().enumerate() {
                        *v = u.data()[i * c + j].as_f64() * self.signs[i];
                    }
                    dct2_inplace(&mut col);
                    for (r, &i) in self.indices.iter().enumerate() {
                        out[r * c + j] = T::from_f64(scale * col[i]);
                    }
                }
                Tensor::matrix(self.k, c, out)?
            }
            SketchKind::Gaussian => {
                let mut out = vec![T::zero(); self.k * c];
                for r in 0..self.k {
                    let g = &self.matrix[r * self.n..(r + 1) * self.n];
                    for j in 0..c {
                        let acc: f64 = g
                            .iter()
                            .enumerate()
                            .map(|(i, &gi)| gi * u.data()[i * c + j].as_f64())
                            .sum();
                        out[r * c + j] = T::from_f64(acc);
                    }
                }
                Tensor::matrix(self.k, c, out)?
            }
        };
        Ok(out)
    }

    /// Adjoint map `R^{k x c} -> R^{n x c}`.
    pub fn apply_transpose<T: Real>(&self, y: &Tensor<T>) -> Result<Tensor<T>, SketchError> {
        if y.rows() != self.k {
            return Err(SketchError::RowMismatch {
                expected: self.k,
                got: y.rows(),
            });
        }
        let c = y.cols();
        let mut out = vec![T::zero(); self.n * c];
        match self.kind {
            SketchKind::Subsample => {
                for (r, &i) in self.indices.iter().enumerate() {
                    out[i * c..(i + 1) * c].copy_from_slice(y.row(r));
                }
            }
            SketchKind::Fjlt => {
                let scale = self.fjlt_scale();
                let mut col = vec![0.0; self.n];
                for j in 0..c {
                    col.iter_mut().for_each(|v| *v = 0.0);
                    for (r, &i) in self.indices.iter().enumerate() {
                        col[i] = scale * y.data()[r * c + j].as_f64();
                    }
                    dct3_inplace(&mut col);
                    for (i, &v) in col.iter().enumerate() {
                        out[i * c + j] = T::from_f64(v * self.signs[i]);
                    }
                }
            }
            SketchKind::Gaussian => {
                for i in 0..self.n {
                    for j in 0..c {
                        let acc: f64 = (0..self.k)
                            .map(|r| self.matrix[r * self.n + i] * y.data()[r * c + j].as_f64())
                            .sum();
                        out[i * c + j] = T::from_f64(acc);
                    }
                }
            }
        }
        Ok(Tensor::matrix(self.n, c, out)?)
    }
}

impl<T: Real> LinearMap<T> for SketchOperator {
    fn apply(&self, x: &Tensor<T>) -> Result<Tensor<T>, NumError> {
        SketchOperator::apply(self, x).map_err(|e| NumError::ShapeMismatch(e.to_string()))
    }

    fn apply_transpose(&self, y: &Tensor<T>) -> Result<Tensor<T>, NumError> {
        SketchOperator::apply_transpose(self, y).map_err(|e| NumError::ShapeMismatch(e.to_string()))
    }
}
