use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{function}: argument {value} is outside the domain ({reason})")]
    Domain {
        function: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{what}: expected length {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("degenerate reactive load: condition number estimate {condition:.3e} exceeds {limit:.1e}")]
    DegenerateLoad { condition: f64, limit: f64 },

    #[error("steering functions are linearly dependent at element {element}")]
    RankDeficient { element: usize },

    #[error("analytic cdf is not monotone near x = {at}")]
    NonMonotoneCdf { at: f64 },

    #[error("need {needed}: {reason}")]
    InsufficientPoints { needed: &'static str, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(function: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Domain {
            function,
            value,
            reason,
        }
    }
}
