//! Numerical core for multimodal cellphone price-class prediction.
//!
//! Everything in this crate is pure computation over in-memory values: dense
//! tensors, layers with analytic backward passes, the RMSProp trainer, the
//! tabular normalization rules, the five model builders, shallow classifiers,
//! evaluation metrics and PCA. File formats, CSV ingestion, image decoding and
//! the command line live in the companion `pricefuse` crate.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
#![allow(
    clippy::needless_range_loop,
    clippy::neg_cmp_op_on_partial_ord,
    clippy::too_many_arguments
)]

extern crate alloc;

pub mod classifiers;
pub mod error;
pub mod metrics;
pub mod models;
pub mod nn;
pub mod prep;
pub mod rng;
pub mod scalar;
pub mod split;
pub mod synth;
pub mod tensor;

pub use error::{Error, Result};
pub use rng::Rng;
pub use scalar::Real;
pub use tensor::Tensor;

/// Number of price classes.
pub const NUM_CLASSES: usize = 4;
