use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {context}: {message}")]
    Domain {
        context: &'static str,
        message: String,
    },

    #[error("{context}: tolerance {tol:e} not reached after {terms} terms (estimate {estimate:e})")]
    Tolerance {
        context: &'static str,
        tol: f64,
        terms: usize,
        estimate: f64,
    },

    #[error("{context}: no sign change in [{lo}, {hi}]")]
    NoSignChange {
        context: &'static str,
        lo: f64,
        hi: f64,
    },

    #[error("non-finite value at step {step} (t = {t})")]
    NonFinite { step: usize, t: f64 },

    #[error("omega = {omega} is not a real-axis crossing (|Im G| = {imag:e})")]
    NotACrossing { omega: f64, imag: f64 },

    #[error("Newton iteration did not converge in box centred at {re}{im:+}i")]
    NewtonFailed { re: f64, im: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("missing artifacts: {}", .0.join(", "))]
    MissingArtifact(Vec<String>),
}

impl Error {
    pub(crate) fn domain(context: &'static str, message: impl Into<String>) -> Self {
        Error::Domain {
            context,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
