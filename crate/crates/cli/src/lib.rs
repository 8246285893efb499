//! Command-line driver for `hsikit`: run configuration, run directories and
//! the `run`, `compare`, `bench`, `convert`, `inspect` and `synth`
//! subcommands.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 numerical failure.

pub mod bench;
pub mod cli;
pub mod compare;
pub mod config;
pub mod convert;
pub mod error;
pub mod inspect;
pub mod record;
pub mod run;
pub mod synth;

pub use cli::{main_with_args, Cli};
pub use config::RunConfig;
pub use error::{exit_code, CliError};
pub use record::RunRecord;
