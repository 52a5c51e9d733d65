//! File formats, parallel drivers, property suites and the command line for
//! `hcube-core`.

pub mod cli;
pub mod drivers;
pub mod formats;
pub mod suites;
