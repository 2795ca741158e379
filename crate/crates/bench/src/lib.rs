//! Criterion benchmarks for vulnaudit; see `benches/`.
