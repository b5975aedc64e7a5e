//! Library side of the `tomolab` command: argument model, figure and table
//! reproduction, CSV output and run manifests.

pub mod app;
pub mod error;
pub mod fiducials;
pub mod output;
pub mod pom;
pub mod reproduce;

pub use error::{CliError, CliResult, ExitKind};
