//! Library half of the kinlab command-line driver: run configuration,
//! persistence (CSV / JSON manifests), and the acceptance suite shared by
//! the `audit` subcommand and the `acceptance` integration test.

pub mod config;
pub mod persist;
pub mod suite;
