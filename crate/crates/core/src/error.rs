use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A run was configured in a way the solver cannot honor (grid too small, packet on the edge).
    #[error("setup error: {0}")]
    Setup(String),

    /// A state no longer satisfies the invariants an operation relies on.
    #[error("consistency error: {0}")]
    Consistency(String),

    /// The integrator lost unitarity or the wave function reached the domain edge.
    #[error("numerical failure at t = {t}: {message}")]
    Numerical { t: f64, message: String },

    #[error("trial {index} failed: {source}")]
    Trial {
        index: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures raised by the integrator itself, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Numerical { .. } => true,
            Error::Trial { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
