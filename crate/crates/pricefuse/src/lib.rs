//! Files, datasets and commands around [`pricefuse_core`].
//!
//! The `pricefuse` binary is a thin clap front end over [`commands`].

pub mod checkpoint;
pub mod classifier_store;
pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod images;
pub mod ingest;
pub mod io;
pub mod manifest;
pub mod report;

pub use error::{Error, Result};
