//! Library side of the `polyaug` command. Every subcommand is a plain
//! function here; `main.rs` only parses flags and maps errors to exit codes.

pub mod apply;
pub mod bench;
mod error;
pub mod evaluate;
pub mod modality;

pub use error::{CliError, Result};
pub use modality::{Datum, Envs, Kind};
