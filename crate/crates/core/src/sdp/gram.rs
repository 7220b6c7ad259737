//! Coefficient-matching constraints for Gram-matrix formulations.

use crate::poly::{basis_len, monomial_rank, Exponent, HomogPoly};

/// Upper-triangle Gram entries `(row, col, value)` of one linear constraint.
pub type GramEntries = Vec<(usize, usize, f64)>;

/// For every monomial of degree `2·deg(basis)` (in rank order), the entries of
/// `G` that contribute to its coefficient in `m(x)ᵀ G m(x)`.
pub fn coefficient_constraints(basis: &[Exponent]) -> Vec<GramEntries> {
    let nvars = basis[0].nvars();
    let degree = 2 * basis[0].degree();
    let mut out = vec![GramEntries::new(); basis_len(nvars, degree)];
    for k in 0..basis.len() {
        for l in k..basis.len() {
            let r = monomial_rank(&basis[k].add(&basis[l]), nvars, degree).expect("same degree");
            out[r].push((k, l, 1.0));
        }
    }
    out
}

/// For every monomial `α` of degree `2·deg(basis) + deg(fixed)`, the linear
/// functional `Q ↦ coeff_α((m(x)ᵀ Q m(x))·fixed)` as Gram entries.
pub fn multiplier_constraints(basis: &[Exponent], fixed: &HomogPoly) -> Vec<GramEntries> {
    let nvars = basis[0].nvars();
    let degree = 2 * basis[0].degree() + fixed.degree();
    let terms: Vec<(Exponent, f64)> = fixed.terms().collect();
    let mut out = vec![GramEntries::new(); basis_len(nvars, degree)];
    for k in 0..basis.len() {
        for l in k..basis.len() {
            let base = basis[k].add(&basis[l]);
            for (e, c) in &terms {
                let r = monomial_rank(&base.add(e), nvars, degree).expect("same degree");
                match out[r].last_mut() {
                    Some(last) if last.0 == k && last.1 == l => last.2 += c,
                    _ => out[r].push((k, l, *c)),
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{from_gram, monomials};
    use nalgebra::DMatrix;

    fn apply(entries: &GramEntries, g: &DMatrix<f64>) -> f64 {
        entries
            .iter()
            .map(|&(k, l, v)| if k == l { v * g[(k, l)] } else { 2.0 * v * g[(k, l)] })
            .sum()
    }

    #[test]
    fn coefficient_functionals_match_from_gram() {
        let basis = monomials(3, 2);
        let g = DMatrix::from_fn(6, 6, |i, j| ((i * 7 + j * 7) % 5) as f64 - 1.5 + (i + j) as f64);
        let p = from_gram(&g, &basis).unwrap();
        for (r, e) in coefficient_constraints(&basis).iter().enumerate() {
            assert!((apply(e, &g) - p.coeffs()[r]).abs() < 1e-12);
        }
    }

    #[test]
    fn multiplier_functionals_match_products() {
        let basis = monomials(3, 1);
        let fixed = HomogPoly::from_coeffs(3, 2, vec![1.0, -2.0, 0.5, 3.0, 0.0, -1.0]).unwrap();
        let g = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, -0.1, 0.3, 1.0, 0.4, -0.1, 0.4, 3.0]);
        let prod = from_gram(&g, &basis).unwrap().mul(&fixed).unwrap();
        let cons = multiplier_constraints(&basis, &fixed);
        assert_eq!(cons.len(), prod.coeffs().len());
        for (r, e) in cons.iter().enumerate() {
            assert!((apply(e, &g) - prod.coeffs()[r]).abs() < 1e-12);
        }
    }
}
