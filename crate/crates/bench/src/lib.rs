//! Experiment harness for the `scws-core` sketches: bias curves, hashing
//! throughput, pool-size sweeps and k-NN precision, all emitting CSV.

pub mod bias;
pub mod error;
pub mod knn;
pub mod output;
pub mod sweep;
pub mod synthetic;
pub mod throughput;

pub use error::{BenchError, Result};
