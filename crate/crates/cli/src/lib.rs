//! File formats, configuration and the verification runner behind the
//! `schur-dilation` command-line tool.

pub mod config;
pub mod descriptor;
pub mod gen;
pub mod parallel;
pub mod report;
pub mod suites;

pub use config::{ConfigError, RunConfig, Suite};
pub use report::Record;
pub use suites::Checks;
