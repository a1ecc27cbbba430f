//! Error type shared by the simulation core.

use core::fmt;

/// Errors surfaced by the core simulation routines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoreError {
    /// A precondition on the inputs was violated (e.g. odd `n*d`).
    Precondition(&'static str),
    /// Rejection sampling gave up; retrying with a larger budget may help.
    Exhausted {
        what: &'static str,
        attempts: u64,
    },
    /// A state-dependent contract was violated by the caller.
    Contract(&'static str),
    /// A configured capacity (arena nodes, particle population, CTMC
    /// state space) was exceeded.
    Capacity {
        what: &'static str,
        limit: usize,
    },
    /// An estimator could not produce a value (e.g. empty mean inside
    /// the fit window).
    Estimation(&'static str),
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            CoreError::Exhausted { what, attempts } => {
                write!(f, "{what}: gave up after {attempts} attempts")
            }
            CoreError::Contract(msg) => write!(f, "contract violated: {msg}"),
            CoreError::Capacity { what, limit } => {
                write!(f, "capacity exceeded: {what} (limit {limit})")
            }
            CoreError::Estimation(msg) => write!(f, "estimation failed: {msg}"),
        }
    }
}

impl core::error::Error for CoreError {}
