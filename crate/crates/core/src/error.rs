use std::path::PathBuf;

use crate::kernels::ConvolutionProfile;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An invalid or inconsistent configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A kernel whose L1 norm is infinite.
    #[error("divergent kernel norm: {0}")]
    DivergentNorm(String),

    /// A kernel whose L1 norm is zero.
    #[error("degenerate kernel: {0}")]
    DegenerateNorm(String),

    /// A quadrature that did not reach its tolerance. Carries the best estimate.
    #[error("{what} did not converge: estimate {estimate}, error bound {error_bound:e} > tolerance {tol:e}")]
    Convergence {
        what: String,
        estimate: f64,
        error_bound: f64,
        tol: f64,
    },

    /// A self-convolution that did not reach its tolerance. Carries the best profile.
    #[error("self-convolution did not converge: max error bound {error_bound:e} > tolerance {tol:e}")]
    ProfileConvergence {
        best: Box<ConvolutionProfile>,
        error_bound: f64,
        tol: f64,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
