//! Criterion benchmarks for `mto-core`; see `benches/`.
