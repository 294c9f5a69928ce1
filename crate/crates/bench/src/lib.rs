//! Criterion benchmarks for the spectral, identification and statistics
//! paths; run them with `cargo bench -p mycosig-bench`.
