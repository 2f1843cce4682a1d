//! File formats, scripted adversaries and the trace driver for
//! [`exroute_core`].

pub mod format;
pub mod trace;
pub mod workload;

pub use exroute_core as core;
