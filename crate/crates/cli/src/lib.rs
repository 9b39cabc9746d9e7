//! Command-line front end for the reconstruction toolkit: a minimal tensor
//! file format, line-oriented experiment configurations, synthetic data
//! generators, an experiment runner and metric emission.

pub mod config;
pub mod error;
pub mod runner;
pub mod synth;
pub mod tensor_file;
