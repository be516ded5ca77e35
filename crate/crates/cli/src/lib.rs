//! Configuration, file formats and command implementations behind the
//! `bvpmmo` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
