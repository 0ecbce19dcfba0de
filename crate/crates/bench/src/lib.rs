//! Criterion benchmarks for the spikelens pipeline live in `benches/`.
