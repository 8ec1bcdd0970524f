//! The five price-class architectures and fused-embedding extraction.
//!
//! Every model is a [`ModelGraph`]: a tabular branch, an optional image
//! branch, one concatenation point, and a head ending in a 4-way softmax.

mod builders;
mod graph;

pub use builders::*;
pub use graph::*;
