//! Command-line front end and file formats for the KS lab.
//!
//! The numerics live in `kslab-core`; this crate reads configurations,
//! writes run directories, runs sweeps on worker threads and drives the
//! `kslab` binary.

pub mod cli;
pub mod config;
pub mod output;
pub mod sweep;
