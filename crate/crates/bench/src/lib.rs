//! Criterion benchmarks for the simulation and analysis pipeline live in `benches/`.
