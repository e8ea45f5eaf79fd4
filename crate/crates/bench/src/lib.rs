//! Criterion benchmarks for `toflab`; see `benches/`.
