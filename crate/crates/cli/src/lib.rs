//! Library side of the `pdcshape` command-line tool: TOML configuration,
//! plain-text matrix and table formats, and the subcommand implementations.

pub mod commands;
pub mod config;
pub mod error;
pub mod matrix;
pub mod table;

pub use commands::{
    cmd_g2, cmd_jsa, cmd_pipeline, cmd_scan_ck, cmd_scan_decorrelate, Context, G2Mode,
};
pub use config::{Experiment, ExperimentConfig};
pub use error::{CliError, CliResult};
pub use matrix::MatrixFile;
