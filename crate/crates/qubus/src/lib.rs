//! Exact spectra, phase estimation and file formats on top of `qubus-core`.

pub mod cli;
pub mod error;
pub mod io;
pub mod pea;
pub mod spectrum;

pub use error::{Error, Result};
pub use qubus_core as core;
