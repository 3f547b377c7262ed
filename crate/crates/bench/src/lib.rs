//! Criterion benchmarks for reltraj live in `benches/`.
