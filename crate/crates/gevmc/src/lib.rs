//! File formats, the simulation-study harness and the command-line front
//! end built on `gevmc-core`.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod io;
pub mod manifest;

pub use error::{AppError, Result};
