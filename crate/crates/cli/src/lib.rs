//! Configuration parsing and command pipelines behind the `kjplate` binary.

pub mod config;
pub mod pipeline;
