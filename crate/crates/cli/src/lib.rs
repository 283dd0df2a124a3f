//! Command line and HTTP front ends over `cscope_core`.

pub mod api;
pub mod cli;
pub mod ops;
