//! File formats, plots and the command-line interface for `elastica-core`.

pub mod cli;
pub mod config;
pub mod io;
pub mod svg;
