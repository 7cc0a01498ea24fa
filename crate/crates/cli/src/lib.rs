//! Subcommand implementations of `lorentz-bg`.

pub mod compare;
pub mod config;
pub mod eval;
pub mod model;
pub mod selftest;
pub mod simulate;
pub mod tabulate;
