//! Config-driven experiment runner: named pipelines over the core library,
//! reproducible artifacts, and a manifest per run.

pub mod config;
pub mod error;
pub mod manifest;
pub mod pipeline;
