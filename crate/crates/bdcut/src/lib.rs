//! File formats, reports, the experiment runner and the `bdcut` command
//! line on top of `bdcut-core`.

pub mod cli;
pub mod experiment;
pub mod format;
pub mod solve;
pub mod verify;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
