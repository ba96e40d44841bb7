//! Seed-reconstructible linear sketches of `n x c` fields.
//!
//! Three kinds are provided: plain row subsampling, the fast
//! Johnson-Lindenstrauss transform (signs, orthonormal DCT-II, scaled
//! subsampling), and a dense Gaussian reference. Sketches are stored as their
//! seed only; [`SketchOperator::new`] regenerates the exact same map.
//!
//! ```
//! use inc_core::numcore::Tensor;
//! use inc_core::sketch::{SketchKind, SketchOperator};
//!
//! let u = Tensor::<f64>::matrix(8, 1, (0..8).map(f64::from).collect()).unwrap();
//! let s = SketchOperator::new(SketchKind::Fjlt, 8, 3, 17).unwrap();
//! let su = s.apply(&u).unwrap();
//! assert_eq!(su.shape(), &[3, 1]);
//!
//! // only the seed needs to be kept
//! let again = SketchOperator::new(SketchKind::Fjlt, 8, 3, s.seed()).unwrap();
//! assert_eq!(again.apply(&u).unwrap(), su);
//! ```

mod dct;
mod operator;
mod seed;

pub use dct::{dct2_inplace, dct3_inplace, dct_orthonormal, idct_orthonormal};
pub use operator::{SketchKind, SketchOperator};
pub use seed::{derive_seed, rng_from_seed, stream};

use crate::numcore::NumError;

#[derive(Debug, thiserror::Error)]
pub enum SketchError {
    #[error("sketch size k={k} must satisfy 1 <= k <= n={n}")]
    InvalidSize { n: usize, k: usize },
    #[error("expected {expected} rows, got {got}")]
    RowMismatch { expected: usize, got: usize },
    #[error("unknown sketch kind `{0}`")]
    UnknownKind(String),
    #[error(transparent)]
    Num(#[from] NumError),
}
