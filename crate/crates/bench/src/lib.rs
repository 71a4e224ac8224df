//! Workload generators for the evaluation benchmarks.

pub mod synth;
