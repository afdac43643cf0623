//! Configuration, report formatting and commands behind the `frontal-lab` binary.

pub mod config;
pub mod error;
pub mod format;
pub mod run;

pub use config::{Output, RunConfig};
pub use error::{CliError, CliResult};
pub use run::{eval, execute, run, verify, Artifacts};
