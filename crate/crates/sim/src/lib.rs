//! IO, configuration, parallel experiment drivers and report formats for
//! the contact-process simulator. The simulation kernels live in
//! `contact-core`; this crate adds everything that touches the
//! filesystem or a thread pool.

pub mod config;
pub mod error;
pub mod experiments;
pub mod io;
pub mod manifest;
pub mod runner;

pub use config::Config;
pub use error::{Result, SimError};
