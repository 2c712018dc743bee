//! File formats, the timed benchmark runner and the command-line front end
//! for the crown counting pipeline in `crowncount-core`.

pub mod cli;
pub mod config;
pub mod io;
pub mod model;
pub mod runner;
pub mod tables;

mod error;

pub use crowncount_core as core;
pub use error::{Error, Result};
