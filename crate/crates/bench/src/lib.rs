//! Criterion benchmarks for `xlearn-core`; see `benches/`.
