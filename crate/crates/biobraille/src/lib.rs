//! IO layer of the biobraille test bench: the on-disk event format,
//! experiment configuration, result persistence, the append-only archive,
//! and the CLI command implementations.
//!
//! All algorithms live in `biobraille-core`; this crate only moves data
//! between files and those pure functions, and is careful to keep every
//! emitted table byte-stable for a given configuration.

pub mod aer;
pub mod archive;
pub mod commands;
pub mod config;
pub mod persist;

pub use aer::{read_aer, write_aer, AerError};
pub use archive::ResultArchive;
pub use config::{validate_config, ExperimentConfig};
