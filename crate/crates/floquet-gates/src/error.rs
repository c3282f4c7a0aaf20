//! Error type shared across the crate.

/// Errors produced by construction, diagonalization, propagation, and search
/// routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied value violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Branch tracking failed because consecutive solutions are too far
    /// apart: the best time-averaged overlap fell below 1/2.
    #[error("branch tracking step too large: best overlap {overlap:.4} < 0.5")]
    StepTooLarge { overlap: f64 },

    /// A numerical routine failed to converge or produced an inconsistent
    /// result. `t` is the time (or sweep coordinate) at which it failed.
    #[error("numerical failure at t = {t:.6e}: {message}")]
    Numeric { message: String, t: f64 },

    /// A root-finding target was not bracketed by the supplied interval.
    #[error("root not bracketed: {0}")]
    Bracket(String),

    /// A minimum search found no interior minimum inside the window.
    #[error("no interior minimum in search window: {0}")]
    Window(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>, t: f64) -> Self {
        Error::Numeric {
            message: msg.into(),
            t,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
