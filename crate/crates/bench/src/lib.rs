//! Experiment harness for the ART simulator: configuration files, parameter
//! grids, CSV results, plot data and the brute-force self-test.

pub mod config;
pub mod grid;
pub mod oracle;
pub mod report;
pub mod table;

pub use config::{parse_config, ConfigError};
pub use grid::{run_grid, GridOutcome, GridSpec};
pub use report::{report, ReportError};
pub use table::{CsvOut, COLUMNS};
