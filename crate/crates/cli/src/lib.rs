//! Library half of the `phoenix` binary, shared with its integration tests.

pub mod commands;
pub mod config;
