//! Batch front end for the backstepping kernel solver and closed-loop
//! simulator: config parsing, pipeline orchestration, and CSV/report
//! artifacts. All numerics live in `backstep-core`.

pub mod commands;
pub mod config;
pub mod descriptor_text;
pub mod output;

pub use commands::{cmd_all, cmd_simulate, cmd_solve_kernel, cmd_validate, CliError, Options};
