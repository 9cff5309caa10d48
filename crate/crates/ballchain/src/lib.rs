//! File formats, report envelopes, the command-line front end and the built-in
//! acceptance suite for `ballchain-core`.

pub mod cli;
pub mod formats;
pub mod report;
pub mod suite;

/// Version string written into every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
