//! Library surface of the command-line harness, exposed so integration
//! and acceptance tests can drive the pipelines in-process.

pub mod config;
pub mod pipeline;
