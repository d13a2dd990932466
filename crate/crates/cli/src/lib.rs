//! Experiment harness behind the `rae` command-line tool.
//!
//! Every experiment takes a typed configuration (buildable from a
//! [`config::KvConfig`]), returns its results in memory, and can write them
//! as CSV/JSON files plus a [`manifest::Manifest`] into an output directory.
//! Outputs depend only on the configuration, so reruns are byte-identical.

pub mod config;
pub mod experiments;
pub mod manifest;
pub mod output;

pub use config::KvConfig;
