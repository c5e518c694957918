use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation requested inside the exclusion radius of a pole.
    #[error("pole of {function} at {at}")]
    Pole {
        function: &'static str,
        at: Complex64,
    },

    /// An iterative method failed to converge.
    #[error("numeric failure in {what}{}", last.map(|z| format!(" (last iterate {z})")).unwrap_or_default())]
    Numeric {
        what: String,
        last: Option<Complex64>,
    },

    /// The energy sits on one of the isolated values where the terminating
    /// series construction breaks down (repeated roots, vanishing minors).
    #[error("degenerate energy E = {energy}: {reason}")]
    DegenerateEnergy { energy: Complex64, reason: String },

    /// A property that must hold by construction was violated numerically.
    #[error("consistency check failed: {0}")]
    Consistency(String),

    /// A SUSY transformation request violates one of the placement rules.
    #[error("invalid transformation: {0}")]
    Spec(String),

    /// A seed solution (or seed Wronskian) changes sign.
    #[error("{what} has a node near x = {at}")]
    Node { what: &'static str, at: f64 },
}

impl Error {
    pub(crate) fn numeric(what: impl Into<String>, last: Option<Complex64>) -> Self {
        Error::Numeric {
            what: what.into(),
            last,
        }
    }

    pub(crate) fn degenerate(energy: Complex64, reason: impl Into<String>) -> Self {
        Error::DegenerateEnergy {
            energy,
            reason: reason.into(),
        }
    }
}
