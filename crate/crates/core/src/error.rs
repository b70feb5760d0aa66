use thiserror::Error;

/// Every failure the toolkit can report.
///
/// Variants split into input problems (bad files, out-of-range parameters) and
/// numerical outcomes (no root, degenerate system, no matching definition).
/// The CLI maps the first group to exit code 1 and the second to exit code 2.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("missing year: expected {expected}, found {found}")]
    MissingYear { expected: i32, found: i32 },

    #[error("non-positive value {value} in column `{column}` (year {year})")]
    NonPositiveValue {
        column: &'static str,
        year: i32,
        value: f64,
    },

    #[error("series too short: need at least {needed} observations, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    #[error("negative variance {0}")]
    NegativeVariance(f64),

    #[error("consumption must be strictly positive, got {0}")]
    NonPositiveConsumption(f64),

    #[error("unshifted CRRA utility c^(1-rho)/(1-rho) is undefined at rho = 1")]
    UndefinedAtLogLimit,

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error(
        "degenerate system: consistency gap {gap:e} is zero to working precision, \
         so the third equation is the difference of the first two and a \
         one-parameter family of (zeta, xi, rho) solves the system"
    )]
    DegenerateSystem { gap: f64 },

    #[error(
        "inconsistent system: after eliminating zeta and xi the third residual \
         equals the consistency gap {gap:e} for every rho in [{rho_lo}, {rho_hi}], \
         so no exact root exists and rho is not identified by these moments"
    )]
    InconsistentSystem { gap: f64, rho_lo: f64, rho_hi: f64 },

    #[error("unclassifiable: {0}")]
    Unclassifiable(String),

    #[error("invalid combination: {0}")]
    InvalidCombination(String),

    #[error("cannot render an empty report")]
    EmptyReport,

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for outcomes of a computation rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::DegenerateSystem { .. }
                | Error::InconsistentSystem { .. }
                | Error::Unclassifiable(_)
                | Error::InvalidCombination(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
            _ => Error::Schema(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Schema(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 && beta <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
            reason: "discount factor must lie in (0, 1]",
        })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and strictly positive",
        })
    }
}

pub(crate) fn check_rho(rho: f64) -> Result<()> {
    if rho.is_finite() && rho >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "rho",
            value: rho,
            reason: "relative risk aversion must be finite and non-negative",
        })
    }
}
