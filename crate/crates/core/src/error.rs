//! Error type shared by every module in the crate.

use std::fmt;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the simulation and analysis routines.
///
/// The variants mirror the failure classes of the public contracts:
/// invalid argument values (`Domain`), arguments outside supported
/// integer/size bounds (`Range`), violated call preconditions
/// (`Contract`), quadrature or iteration failures (`Numerical`),
/// fit failures carrying best-so-far diagnostics (`Fit`), and I/O or
/// file-format problems.
#[derive(Debug)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    Domain(String),
    /// An integer argument is outside the supported range.
    Range(String),
    /// A documented precondition was violated; the message names the bound.
    Contract(String),
    /// A numerical procedure failed to converge or produced non-finite values.
    Numerical(String),
    /// Model fitting failed; carries the diagnostic message and, when
    /// available, the best parameter set seen before the failure.
    Fit {
        message: String,
        best_residual_rms: Option<f64>,
        best_params: Option<Vec<f64>>,
    },
    /// Underlying I/O failure.
    Io(std::io::Error),
    /// A file did not match the documented CSV or binary layout.
    Format(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Range(m) => write!(f, "range error: {m}"),
            Error::Contract(m) => write!(f, "contract violation: {m}"),
            Error::Numerical(m) => write!(f, "numerical error: {m}"),
            Error::Fit {
                message,
                best_residual_rms,
                ..
            } => match best_residual_rms {
                Some(rms) => write!(f, "fit error: {message} (best residual rms {rms:.3e})"),
                None => write!(f, "fit error: {message}"),
            },
            Error::Io(e) => write!(f, "io error: {e}"),
            Error::Format(m) => write!(f, "format error: {m}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
