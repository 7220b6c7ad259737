//! Orthogonal reduction of a nonnegative quartic to the form
//! `c0·X0⁴ + f2·X0² + f3·X0 + f4`, and the ternary sextic `h = 4 f2 f4 − f3²`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{HomogPoly, OrthoMap, X0Slices};
use crate::sphere::{Classification, MinResult};

/// Largest admissible `‖f1‖∞ / ‖f‖∞` after the change of coordinates.
pub const F1_LIMIT: f64 = 1e-5;

/// Tolerance on the unit norm of the point passed to [`householder_to_e0`].
pub const UNIT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReductionCase {
    /// The form vanishes at the minimizer, which is moved to `e0`.
    Zero,
    /// The minimum `m > 0` is scaled to one and the minimizer moved to `e0`.
    Positive,
}

#[derive(Clone, Debug)]
pub struct ReducedQuartic {
    pub f2: HomogPoly,
    pub f3: HomogPoly,
    pub f4: HomogPoly,
    /// `0` in the zero case, `1` in the positive case.
    pub c0: f64,
    /// Factor applied to `f` before the change of coordinates.
    pub scale: f64,
    pub map: OrthoMap,
    /// Relative size of the discarded `X0³` coefficients.
    pub f1_residual: f64,
    /// Relative deviation of the computed `X0⁴` coefficient from `c0`.
    pub c0_residual: f64,
    pub case: ReductionCase,
}

impl ReducedQuartic {
    /// `g = f2·X0² + f3·X0 + f4` in four variables.
    pub fn g(&self) -> Result<HomogPoly> {
        X0Slices {
            c0: 0.0,
            f1: HomogPoly::zero(3, 1),
            f2: self.f2.clone(),
            f3: self.f3.clone(),
            f4: self.f4.clone(),
        }
        .assemble()
    }

    /// The reduced quartic `c0·X0⁴ + g`.
    pub fn quartic(&self) -> Result<HomogPoly> {
        X0Slices {
            c0: self.c0,
            f1: HomogPoly::zero(3, 1),
            f2: self.f2.clone(),
            f3: self.f3.clone(),
            f4: self.f4.clone(),
        }
        .assemble()
    }
}

/// Orthogonal `Q` with `Q·xstar = e0`: a Householder reflection, or the
/// identity when `xstar` already equals `e0`.
pub fn householder_to_e0(xstar: &[f64]) -> Result<OrthoMap> {
    let n = xstar.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty point".into()));
    }
    let x = DVector::from_column_slice(xstar);
    let norm = x.norm();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::InvalidInput(format!("point has norm {norm}, expected 1")));
    }
    let mut v = x.clone();
    v[0] -= 1.0;
    let vv = v.norm_squared();
    if vv <= 1e-30 {
        return Ok(OrthoMap::identity(n));
    }
    let h = DMatrix::identity(n, n) - (&v * v.transpose()) * (2.0 / vv);
    OrthoMap::new(h)
}

/// Moves the minimizer to `e0` and splits the quartic by powers of `X0`.
pub fn to_reduced(f: &HomogPoly, min: &MinResult) -> Result<ReducedQuartic> {
    if f.nvars() != 4 || f.degree() != 4 {
        return Err(Error::Mismatch {
            left: (f.nvars(), f.degree()),
            right: (4, 4),
        });
    }
    let (case, scale) = match min.classification {
        Classification::NegativeSomewhere => {
            return Err(Error::Rejected {
                witness: min.xstar.clone(),
                value: min.value,
            })
        }
        Classification::ZeroOnSphere => (ReductionCase::Zero, 1.0),
        Classification::PositiveMin => (ReductionCase::Positive, 1.0 / min.value),
    };
    let map = householder_to_e0(&min.xstar)?;
    let reduced = f.scale(scale).apply_map(&map)?;
    let norm = reduced.norm_inf().max(f64::MIN_POSITIVE);
    let slices = reduced.slice_x0()?;
    let f1_residual = slices.f1.norm_inf() / norm;
    if f1_residual > F1_LIMIT {
        return Err(Error::Reduction {
            f1_residual,
            limit: F1_LIMIT,
        });
    }
    let c0 = match case {
        ReductionCase::Zero => 0.0,
        ReductionCase::Positive => 1.0,
    };
    let c0_residual = match case {
        ReductionCase::Zero => slices.c0.abs() / norm,
        ReductionCase::Positive => (slices.c0 - 1.0).abs(),
    };
    Ok(ReducedQuartic {
        f2: slices.f2,
        f3: slices.f3,
        f4: slices.f4,
        c0,
        scale,
        map,
        f1_residual,
        c0_residual,
        case,
    })
}

/// `h = 4·f2·f4 − f3²`, a ternary sextic.
pub fn sextic_h(red: &ReducedQuartic) -> Result<HomogPoly> {
    HomogPoly::linear_combine(4.0, &red.f2.mul(&red.f4)?, -1.0, &red.f3.square())
}

/// Relative indefiniteness of `f2` tolerated before the reduction is
/// considered broken.
pub const F2_PSD_TOL: f64 = 1e-6;

/// Numerical rank of the Gram matrix of `f2` (eigenvalues above
/// `eps·λmax`), with the linear form `ℓ` such that `f2 ≈ ℓ²` at rank one.
pub fn f2_rank(red: &ReducedQuartic, eps: f64) -> Result<(usize, Option<HomogPoly>)> {
    let g = red.f2.quadratic_gram()?;
    let eig = SymmetricEigen::new(g);
    let (imax, lmax) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |a, (i, l)| if l > a.1 { (i, l) } else { a });
    let lmin = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let scale = lmax.abs().max(red.f4.norm_inf()).max(f64::MIN_POSITIVE);
    if lmin < -F2_PSD_TOL * scale {
        return Err(Error::NotPsd {
            lambda_min: lmin,
            eps: F2_PSD_TOL * scale,
        });
    }
    if lmax <= 0.0 {
        return Ok((0, None));
    }
    let rank = eig.eigenvalues.iter().filter(|&&l| l > eps * lmax).count();
    let ell = (rank == 1).then(|| {
        let v: Vec<f64> = eig.eigenvectors.column(imax).iter().map(|c| c * lmax.sqrt()).collect();
        HomogPoly::linear(&v)
    });
    Ok((rank, ell))
}
