//! Config parsing and scenario execution behind the `tauspace` binary.

pub mod config;
pub mod runner;
