//! Command implementations behind the `cindex-multiverse` binary.

pub mod commands;
pub mod io;
pub mod report;
