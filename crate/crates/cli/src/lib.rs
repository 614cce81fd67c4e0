//! Library half of the benchmark driver: configuration, the bench runner
//! and the verification suites.  The binary in `main.rs` is a thin shell
//! over these so integration tests can drive everything in-process.

pub mod config;
pub mod runner;
pub mod verify;

pub use config::{BenchConfig, ProblemSource};
pub use runner::run_bench;
