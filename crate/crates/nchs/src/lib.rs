//! Command-line front end for the subdiagonal-algebra toolkit: report
//! commands, instance generation and the verification suites.

pub mod commands;
pub mod config;
pub mod error;
pub mod gen;
pub mod io;
pub mod verify;
