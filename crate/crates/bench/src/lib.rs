//! Criterion benchmarks for clusterkit; see `benches/`.
