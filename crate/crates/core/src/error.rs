use thiserror::Error;

use crate::poly::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid exponent {powers:?} for {nvars} variables of degree {degree}")]
    InvalidExponent {
        powers: Vec<u32>,
        nvars: usize,
        degree: u32,
    },
    #[error("rank {rank} out of range for {nvars} variables of degree {degree}")]
    InvalidRank { rank: usize, nvars: usize, degree: u32 },
    #[error("expected {expected} coefficients for {nvars} variables of degree {degree}, got {got}")]
    CoeffLength {
        nvars: usize,
        degree: u32,
        expected: usize,
        got: usize,
    },
    #[error("polynomial spaces differ: (nvars, degree) {left:?} vs {right:?}")]
    Mismatch {
        left: (usize, u32),
        right: (usize, u32),
    },
    #[error("invalid orthogonal map: {0}")]
    InvalidMap(String),
    #[error("invalid gram matrix: {0}")]
    Gram(String),
    #[error("matrix is not positive semidefinite: smallest eigenvalue {lambda_min:.3e} < -{eps:.1e}")]
    NotPsd { lambda_min: f64, eps: f64 },
    #[error("sphere minimization did not converge (best value {best_value:.6e}, gradient {grad_norm:.3e})")]
    Convergence {
        best_value: f64,
        grad_norm: f64,
        best_point: Vec<f64>,
    },
    #[error("input is negative at {witness:?}: f = {value:.6e}")]
    Rejected { witness: Vec<f64>, value: f64 },
    #[error("reduction failed: discarded x0^3 coefficient norm {f1_residual:.3e} exceeds {limit:.1e}")]
    Reduction { f1_residual: f64, limit: f64 },
    #[error("sdp problem is malformed: {0}")]
    SdpShape(String),
    #[error("{route} route failed: {reason}")]
    RouteFailed { route: &'static str, reason: String },
    #[error("certificate identity residual {residual:.3e} exceeds {limit:.1e} ({stage})")]
    Residual {
        stage: &'static str,
        residual: f64,
        limit: f64,
    },
    #[error("certification failed: {}", .0.join("; "))]
    CertificationFailed(Vec<String>),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
