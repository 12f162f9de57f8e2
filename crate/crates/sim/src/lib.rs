//! File formats, configuration and orchestration around `majorana-core`.
//!
//! A run is described by one TOML file (see [`config`]), executed on one of
//! three backends (see [`runner`]) and written as a JSON result plus an
//! optional CSV spectrum trace (see [`results`]).

pub mod config;
pub mod error;
pub mod results;
pub mod runner;

pub use config::RunConfig;
pub use error::SimError;
pub use results::{compare, CompareReport, RunResult};
pub use runner::{execute, validate, Oracle, RunOutput};
