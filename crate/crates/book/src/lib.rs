//! Runs the code listings of the guide in `book/src` as doc-tests.
//!
//! One module per chapter, so a failing listing names its chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/sketching.md")]
pub mod sketching {}
#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}
#[doc = include_str!("../../../book/src/training.md")]
pub mod training {}
#[doc = include_str!("../../../book/src/buffer.md")]
pub mod buffer {}
#[doc = include_str!("../../../book/src/metrics.md")]
pub mod metrics {}
#[doc = include_str!("../../../book/src/sample_factor.md")]
pub mod sample_factor {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
