//! Problem generators, the multi-trial benchmark harness, CSV output and the
//! `mz` command-line front end built on [`mz_core`].

pub mod bench;
pub mod cli;
pub mod config;
pub mod emit;
mod error;
pub mod generate;
pub mod rng;

pub use error::{Error, Result};
