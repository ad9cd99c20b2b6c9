//! Criterion benchmarks for the transform and analysis routines live in `benches/`.
