//! Library side of the `gasfc` binary: experiment configs, run directories
//! and the subcommand implementations.

pub mod commands;
pub mod config;
pub mod run;

pub use config::ExperimentConfig;
pub use run::{cmd_evaluate, cmd_run};

use gasfc_core::ErrorKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub fn exit_code(kind: ErrorKind) -> i32 {
    match kind {
        ErrorKind::Usage => EXIT_USAGE,
        ErrorKind::Data => EXIT_DATA,
        ErrorKind::Numerical => EXIT_NUMERICAL,
    }
}
