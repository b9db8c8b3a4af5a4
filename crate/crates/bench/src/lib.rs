//! Criterion benchmarks for `orthokalman`; see `benches/`.
