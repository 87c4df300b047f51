//! Standard-library companion to `fbcode-core`: JSON and CSV formats,
//! multi-threaded exhaustive verification, and the `fbcode` command line.

pub mod cli;
pub mod format;
pub mod parallel;
