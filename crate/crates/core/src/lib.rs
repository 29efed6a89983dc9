//! Open-vocabulary navigation memory.

pub mod cli;
pub mod config;
pub mod detection;
pub mod fusion;
pub mod geometry;
pub mod keywords;
pub mod metrics;
pub mod omnigraph;
pub mod sim;
