//! Cellphone spec normalization: raw string fields to a fixed-width numeric
//! feature vector plus a 4-way price class.

mod encoder;
mod parse;
mod record;

pub use encoder::*;
pub use parse::*;
pub use record::*;
