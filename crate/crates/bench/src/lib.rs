//! Criterion benchmarks for the rotation and sampling pipeline live in `benches/`.
