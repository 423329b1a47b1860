//! Standard-library companion to `zxcontract-core`: the circuit file format,
//! report files, rayon parallelism and the `zxcontract` command line.

pub mod cli;
pub mod parallel;
pub mod qcfile;
pub mod report;

pub use zxcontract_core as core;
