//! Command-line front end: configuration, reports, rendering, commands.

pub mod config;
pub mod error;
pub mod report;
pub mod run;
pub mod svg;
