//! Shared fixtures for the criterion benchmarks (see `benches/`).
//! The crate intentionally exports nothing; each bench target builds its
//! own fixtures from `bscopt-core`.
