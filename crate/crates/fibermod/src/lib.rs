//! File formats, the example verification suite and the `fibermod`
//! command-line tool built on `fibermod-core`.

pub mod cli;
pub mod examples;
pub mod io;
pub mod verify;

pub use fibermod_core;
