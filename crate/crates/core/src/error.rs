use thiserror::Error;

use crate::reduction::Feasibility;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid polytope: {0}")]
    InvalidPolytope(String),

    #[error("polytope is not full-dimensional: affine span has dimension {span} in R^{ambient}")]
    NotFullDimensional { span: usize, ambient: usize },

    #[error("identity failed: {0}")]
    IdentityFailed(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{classification} level set (no smooth reduced manifold)")]
    Infeasible { classification: Feasibility },

    #[error("point too close to the degenerate locus: {0}")]
    NearDegenerate(String),

    #[error("projection did not converge after {attempts} attempts")]
    ConvergenceFailure { attempts: usize },

    #[error("point outside the map's domain: {0}")]
    Domain(String),

    #[error("chart mismatch: {0} vs {1}")]
    ChartMismatch(String, String),

    #[error("empty sample")]
    EmptySample,

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
