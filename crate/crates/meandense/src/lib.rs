//! Command-line companion to `meandense-core`: scenario configs, a rayon
//! executor, CSV/JSON artifacts and the `meandense` sub-commands.

pub mod config;
pub mod error;
pub mod exec;
pub mod output;
pub mod run;

pub use config::{parse_config, ScenarioConfig};
pub use error::CliError;
pub use exec::RayonExecutor;
pub use run::{run, Command, RunSummary};
