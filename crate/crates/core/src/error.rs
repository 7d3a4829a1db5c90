use alloc::string::String;

/// Errors produced by the reserving engines and their numerical support.
///
/// Development years are reported 0-indexed and accident years 1-indexed,
/// the same convention the CSV headers use.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{what} must satisfy {requirement}, got {value}")]
    Domain {
        what: &'static str,
        requirement: &'static str,
        value: f64,
    },

    #[error("E[sqrt(theta)] does not exist for shape {shape}{}", column_suffix(*.column))]
    MomentDoesNotExist { shape: f64, column: Option<usize> },

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (estimate {estimate}, error estimate {error_estimate})"
    )]
    Convergence {
        estimate: f64,
        error_estimate: f64,
        subdivisions: usize,
    },

    #[error("root finding failed: {0}")]
    Root(&'static str),

    #[error("triangle shape: {0}")]
    Shape(String),

    #[error("cell (accident year {accident_year}, dev {dev_year}) = {value}: {reason}")]
    InvalidCell {
        accident_year: usize,
        dev_year: usize,
        value: f64,
        reason: &'static str,
    },

    #[error("expected a {expected} triangle")]
    KindMismatch { expected: &'static str },

    #[error("zero denominator in development factor for dev {column}")]
    ZeroDenominator { column: usize },

    #[error("{0}")]
    Contract(String),

    #[error(
        "simulation produced a zero cell at accident year {accident_year}, dev {dev_year} \
         after {attempts} attempts"
    )]
    Generation {
        accident_year: usize,
        dev_year: usize,
        attempts: u32,
    },
}

fn column_suffix(column: Option<usize>) -> String {
    match column {
        Some(j) => alloc::format!(" (dev {j})"),
        None => String::new(),
    }
}

impl Error {
    /// True for failures of the numerical machinery rather than of the input data.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::MomentDoesNotExist { .. }
                | Error::Convergence { .. }
                | Error::Root(_)
                | Error::ZeroDenominator { .. }
                | Error::Generation { .. }
        )
    }

    pub(crate) fn domain(what: &'static str, requirement: &'static str, value: f64) -> Self {
        Error::Domain {
            what,
            requirement,
            value,
        }
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
