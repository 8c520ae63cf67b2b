//! Application layer for `mogp-core`: campaign persistence, CSV formats,
//! the benchmark harness, the `mogp` CLI and the HTTP service.

mod error;

pub mod benchmark;
pub mod cli;
pub mod export;
pub mod persist;
#[cfg(feature = "service")]
pub mod service;

pub use error::{Error, Result};
