//! Library surface of the experiment harness (the `omg` binary is a thin
//! wrapper); exposed so integration tests can drive runs in-process.

pub mod config;
pub mod output;
pub mod runner;
