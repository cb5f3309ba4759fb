//! Library surface of the `nclp` binary: experiment configuration, the
//! per-check trial semantics, the deterministic runner, and the
//! generation/construction subcommands.
//!
//! The binary is a thin argument layer over these modules; integration
//! and acceptance tests drive them directly.

pub mod checks;
pub mod config;
pub mod generate;
pub mod runner;
