use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::poly::{basis_len, monomial_rank, Exponent, HomogPoly};

/// Splits a PSD Gram matrix into explicit squares `r_i = √λ_i (v_i · m(x))`.
///
/// Eigenvalues in `[-eps, 0]` are clamped to zero and dropped.
pub fn extract_squares(g: &DMatrix<f64>, basis: &[Exponent], eps: f64) -> Result<Vec<HomogPoly>> {
    let n = basis.len();
    if n == 0 || g.nrows() != n || g.ncols() != n {
        return Err(Error::Gram(format!(
            "gram is {}x{} but basis has {n} monomials",
            g.nrows(),
            g.ncols()
        )));
    }
    let nvars = basis[0].nvars();
    let degree = basis[0].degree();
    let ranks: Vec<usize> = basis
        .iter()
        .map(|b| monomial_rank(b, nvars, degree))
        .collect::<Result<_>>()?;
    let sym = (g + g.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let lmin = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if lmin < -eps {
        return Err(Error::NotPsd { lambda_min: lmin, eps });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut out = Vec::new();
    for i in order {
        let lambda = eig.eigenvalues[i];
        if lambda <= 0.0 {
            continue;
        }
        let s = lambda.sqrt();
        let mut coeffs = vec![0.0; basis_len(nvars, degree)];
        for (k, &r) in ranks.iter().enumerate() {
            coeffs[r] += s * eig.eigenvectors[(k, i)];
        }
        out.push(HomogPoly::from_coeffs(nvars, degree, coeffs)?);
    }
    Ok(out)
}

/// Nearest PSD matrix in Frobenius norm, by clipping negative eigenvalues.
pub fn project_psd(g: &DMatrix<f64>) -> DMatrix<f64> {
    let sym = (g + g.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let clipped = eig.eigenvalues.map(|l| l.max(0.0));
    &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose()
}

/// Orthogonal projection onto the Gram matrices of `target`.
///
/// Each coefficient class `{(k, l) : m_k m_l = α}` gets the same additive
/// correction on all its entries, which is the minimum-norm fix.
pub fn project_affine(g: &DMatrix<f64>, basis: &[Exponent], target: &HomogPoly) -> Result<DMatrix<f64>> {
    let n = basis.len();
    let nvars = target.nvars();
    let degree = target.degree();
    let mut classes: Vec<Vec<(usize, usize)>> = vec![Vec::new(); basis_len(nvars, degree)];
    for k in 0..n {
        for l in 0..n {
            classes[monomial_rank(&basis[k].add(&basis[l]), nvars, degree)?].push((k, l));
        }
    }
    let mut out = (g + g.transpose()) * 0.5;
    for (class, &want) in classes.iter().zip(target.coeffs()) {
        if class.is_empty() {
            continue;
        }
        let have: f64 = class.iter().map(|&(k, l)| out[(k, l)]).sum();
        let delta = (want - have) / class.len() as f64;
        for &(k, l) in class {
            out[(k, l)] += delta;
        }
    }
    Ok(out)
}

/// Alternates affine and PSD projections starting from `g` to tighten a
/// numerically computed Gram matrix of `target`. The result is PSD; the
/// iterate with the smallest coefficient mismatch is returned.
pub fn refine_gram(
    g: &DMatrix<f64>,
    basis: &[Exponent],
    target: &HomogPoly,
    max_rounds: usize,
) -> Result<DMatrix<f64>> {
    let scale = target.norm_inf().max(f64::MIN_POSITIVE);
    let mismatch = |m: &DMatrix<f64>| -> Result<f64> {
        Ok(target.sub(&crate::poly::from_gram(m, basis)?)?.norm_inf() / scale)
    };
    let mut best = project_psd(g);
    let mut best_err = mismatch(&best)?;
    let mut cur = best.clone();
    for _ in 0..max_rounds {
        if best_err <= 1e-15 {
            break;
        }
        cur = project_psd(&project_affine(&cur, basis, target)?);
        let err = mismatch(&cur)?;
        if err < best_err {
            best_err = err;
            best = cur.clone();
        }
    }
    Ok(best)
}

/// `Σ r_i²`, or the zero polynomial of the given space when there are no squares.
pub fn sum_of_squares(squares: &[HomogPoly], nvars: usize, degree: u32) -> HomogPoly {
    let mut acc = HomogPoly::zero(nvars, degree);
    for r in squares {
        acc.add_scaled(1.0, &r.square()).expect("square degree matches");
    }
    acc
}
