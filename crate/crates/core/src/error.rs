use thiserror::Error;

/// Errors raised while constructing or verifying a metric family.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("degenerate parameter: {what} (value {value:e})")]
    Degenerate { what: &'static str, value: f64 },

    #[error("rank-deficient linear system: {0}")]
    RankDeficient(String),

    #[error("infeasible: {certificate} (residual {residual:e})")]
    Infeasible { certificate: String, residual: f64 },

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("divergent period integral: {0}")]
    DivergentIntegral(String),

    #[error("point outside chart domain: {0}")]
    ChartDomain(String),

    #[error("malformed profile: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn infeasible(certificate: impl Into<String>, residual: f64) -> Self {
        Error::Infeasible {
            certificate: certificate.into(),
            residual,
        }
    }

    /// True for errors that mean "no metric exists for these parameters",
    /// as opposed to bad input or I/O trouble.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::Infeasible { .. } | Error::Degenerate { .. } | Error::RankDeficient(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
