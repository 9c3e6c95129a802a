//! Shared setup for the criterion benchmarks; see benches/kernels.rs.
