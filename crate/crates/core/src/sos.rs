//! Plain sum-of-squares membership via a single Gram matrix.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::poly::{monomials, Exponent, HomogPoly};
use crate::sdp::{
    coefficient_constraints, extract_squares, refine_gram, solve, sum_of_squares, Entry, SdpOptions,
    SdpProblem, SdpStatus,
};

/// Relative re-expansion tolerance for accepting extracted squares.
pub const SOS_MATCH_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SosVerdict {
    IsSos,
    NotSos,
    Inconclusive,
}

impl std::fmt::Display for SosVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SosVerdict::IsSos => "IsSos",
            SosVerdict::NotSos => "NotSos",
            SosVerdict::Inconclusive => "Inconclusive",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct SosCheck {
    pub verdict: SosVerdict,
    pub status: SdpStatus,
    /// Phase-I optimum: the largest `t` with some Gram matrix `⪰ tI`.
    pub t_star: f64,
    pub basis: Vec<Exponent>,
    pub gram: DMatrix<f64>,
    /// Present when `verdict` is `IsSos`.
    pub squares: Vec<HomogPoly>,
    /// `‖g − Σ r_i²‖∞ / ‖g‖∞` for the extracted squares.
    pub match_residual: f64,
}

/// Decides whether `g` is a sum of squares of forms of half its degree.
///
/// A strictly feasible Gram matrix gives `IsSos` and a clearly negative
/// phase-I optimum gives `NotSos`. On the boundary the squares of the
/// computed Gram matrix are re-expanded, and `IsSos` is returned only if they
/// reproduce `g` to [`SOS_MATCH_TOL`].
pub fn sos_check(g: &HomogPoly, opts: &SdpOptions) -> Result<SosCheck> {
    if !g.degree().is_multiple_of(2) || g.degree() == 0 {
        return Err(Error::InvalidInput(format!(
            "sos check needs a positive even degree, got {}",
            g.degree()
        )));
    }
    if g.degree() > 8 || g.nvars() > 4 {
        return Err(Error::InvalidInput(format!(
            "sos check supports at most 4 variables and degree 8, got ({}, {})",
            g.nvars(),
            g.degree()
        )));
    }
    let basis = monomials(g.nvars(), g.degree() / 2);
    let mut problem = SdpProblem::new(vec![basis.len()]);
    for (entries, &rhs) in coefficient_constraints(&basis).into_iter().zip(g.coeffs()) {
        let entries = entries
            .into_iter()
            .map(|(k, l, v)| Entry::new(0, k, l, v))
            .collect();
        problem.add_constraint(entries, rhs)?;
    }
    let sol = solve(&problem, opts);
    let t_star = sol.t.unwrap_or(f64::NAN);
    let gram = sol.blocks[0].clone();
    let mut check = SosCheck {
        verdict: SosVerdict::Inconclusive,
        status: sol.status,
        t_star,
        basis,
        gram,
        squares: Vec::new(),
        match_residual: f64::INFINITY,
    };
    match sol.status {
        SdpStatus::Infeasible => check.verdict = SosVerdict::NotSos,
        SdpStatus::Feasible | SdpStatus::MarginallyFeasible => {
            check.gram = refine_gram(&check.gram, &check.basis, g, 200)?;
            let scale = check.gram.amax().max(f64::MIN_POSITIVE);
            if let Ok(squares) = extract_squares(&check.gram, &check.basis, 1e-7 * scale) {
                let resum = sum_of_squares(&squares, g.nvars(), g.degree());
                let err = g.sub(&resum)?.norm_inf() / g.norm_inf().max(f64::MIN_POSITIVE);
                check.match_residual = err;
                if err <= SOS_MATCH_TOL {
                    check.verdict = SosVerdict::IsSos;
                    check.squares = squares;
                }
            }
        }
        SdpStatus::NumericalFailure => {}
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    #[test]
    fn sum_of_fourth_powers_is_sos() {
        let g = parse_poly("x0^4 + x1^4 + x2^4 + x3^4").unwrap();
        let c = sos_check(&g, &SdpOptions::default()).unwrap();
        assert_eq!(c.verdict, SosVerdict::IsSos);
        assert!(c.match_residual <= SOS_MATCH_TOL);
    }

    #[test]
    fn choi_lam_is_not_sos() {
        let g = parse_poly("x0^4 + x1^2*x2^2 + x2^2*x3^2 + x3^2*x1^2 - 4*x0*x1*x2*x3").unwrap();
        let c = sos_check(&g, &SdpOptions::default()).unwrap();
        assert_eq!(c.verdict, SosVerdict::NotSos);
        assert!(c.t_star < -1e-6, "t* = {}", c.t_star);
    }

    #[test]
    fn motzkin_is_not_sos() {
        let g = parse_poly("x0^4*x1^2 + x0^2*x1^4 - 3*x0^2*x1^2*x2^2 + x2^6").unwrap();
        // parse embeds in four variables; the sos question is the same
        let c = sos_check(&g, &SdpOptions::default()).unwrap();
        assert_eq!(c.verdict, SosVerdict::NotSos, "t* = {}", c.t_star);
    }

    #[test]
    fn odd_degree_is_rejected() {
        let g = parse_poly("x0^3 + x1^3").unwrap();
        assert!(sos_check(&g, &SdpOptions::default()).is_err());
    }
}
