//! Command-line front end: configuration, pipeline stages and figures.

pub mod config;
pub mod pipeline;
pub mod svg;

pub use config::{ConfigArgs, FileConfig, OmMode, RunConfig};
