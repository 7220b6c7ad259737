//! Certificate file format.
//!
//! A certificate asserts `qmult·f = p = Σ r_k²` for the recorded input `f`,
//! with `qmult` itself a sum of squares of quadratic forms. All coefficient
//! vectors are in graded-lex order over `x0 > x1 > x2 > x3`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::poly::HomogPoly;

pub const FORMAT_NAME: &str = "quartic-cert";
pub const FORMAT_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Structured,
    Direct,
    SosFastPath,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Structured => "structured",
            Method::Direct => "direct",
            Method::SosFastPath => "sos_fast_path",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub text: String,
    pub coeffs: Vec<f64>,
}

/// Coordinates in which the certificate was built: `f` was scaled by `scale`
/// and composed with `x ← matrixᵀ y`. The stored polynomials are already
/// pulled back to the original coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub matrix: Vec<Vec<f64>>,
    pub scale: f64,
}

/// A form together with squares claimed to sum to it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquareSum {
    pub coeffs: Vec<f64>,
    pub squares: Vec<Vec<f64>>,
}

/// `qmult = constant · q2 · f2` with both quadrics sums of linear squares.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factors {
    pub constant: f64,
    pub q2: SquareSum,
    pub f2: SquareSum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Multiplier {
    pub coeffs: Vec<f64>,
    pub squares: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Factors>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub residual: f64,
    pub verify: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub format: String,
    pub version: u32,
    pub tool_version: String,
    pub input: InputRecord,
    pub method: Method,
    pub transform: Transform,
    pub qmult: Multiplier,
    pub p: SquareSum,
    /// `‖qmult·f − p‖∞ / ‖qmult·f‖∞` at construction time.
    pub residual: f64,
    pub tolerances: Tolerances,
}

impl Certificate {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn qmult_poly(&self) -> Result<HomogPoly> {
        HomogPoly::from_coeffs(4, 4, self.qmult.coeffs.clone())
    }

    pub fn p_poly(&self) -> Result<HomogPoly> {
        HomogPoly::from_coeffs(4, 8, self.p.coeffs.clone())
    }

    /// Number of squares `N` in `p`.
    pub fn num_squares(&self) -> usize {
        self.p.squares.len()
    }
}

impl SquareSum {
    pub fn from_polys(total: &HomogPoly, squares: &[HomogPoly]) -> Self {
        SquareSum {
            coeffs: total.coeffs().to_vec(),
            squares: squares.iter().map(|s| s.coeffs().to_vec()).collect(),
        }
    }
}
