//! Scenario files, the builtin library and the task runner behind the
//! `cdglue` binary.

pub mod builtins;
pub mod error;
pub mod report;
pub mod run;
pub mod scenario;

pub use error::CliError;
pub use report::{Report, Status};
pub use run::{prepare, run};
pub use scenario::Scenario;

/// `builtin:<name>` or a file path.
pub fn load(source: &str) -> Result<Scenario, CliError> {
    match source.strip_prefix("builtin:") {
        Some(name) => builtins::scenario(name),
        None => Scenario::load(std::path::Path::new(source)),
    }
}
