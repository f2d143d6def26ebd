//! Library backing the `rfot` command line tool.
//!
//! The binary stays thin: datasets, experiment specs, the benchmark
//! runner, and plotting live here so they can be driven and tested as
//! ordinary functions.

#![forbid(unsafe_code)]

pub mod bench;
pub mod dataset;
pub mod experiment;
pub mod plot;
