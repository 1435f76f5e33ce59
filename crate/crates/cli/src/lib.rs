//! Job files, dispatch and run records for the `frobenius-lab` binary.

pub mod job;
pub mod run;

pub use job::{Command, JobSpec};
pub use run::{run, CliError, RunRecord};
