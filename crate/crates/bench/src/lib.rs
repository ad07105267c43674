//! Benchmarks for the covario kernels live in `benches/`.
