//! Command-line front end: config ingestion, single-run and sweep execution,
//! CSV emission. The binary is `tiercache`; see [`app::Cli`] for the surface.

pub mod app;
pub mod config;
pub mod output;
