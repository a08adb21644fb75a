//! Criterion benchmarks for the core kernels; see `benches/kernels.rs`.
//!
//! Run them with `cargo bench -p singlab-bench`.
