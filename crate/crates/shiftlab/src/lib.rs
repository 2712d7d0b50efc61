//! Front end for `shiftlab-core`: run configs, table files, deterministic
//! JSON and CSV output.

pub mod commands;
pub mod config;
pub mod json;
pub mod table;
