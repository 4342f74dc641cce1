//! Criterion benchmarks for the evobench engines live in `benches/`.
