//! Library side of the command-line front end: the on-disk index format,
//! workload generation, and the benchmark harness.

pub mod bench;
pub mod format;
pub mod workload;
