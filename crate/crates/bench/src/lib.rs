//! Criterion benchmarks for the qcycle kernels live in `benches/`.
