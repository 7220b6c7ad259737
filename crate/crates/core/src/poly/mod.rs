//! Dense homogeneous polynomials.
//!
//! Coefficients are stored densely, indexed by the rank of each monomial in
//! graded-lexicographic order with `x0 > x1 > x2 > x3`. Within a fixed total
//! degree this is plain lexicographic order on the exponent vectors, read
//! from the largest power of `x0` downwards, so `x0^d` always has rank 0 and
//! `x_{n-1}^d` has the last rank.

mod parse;

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use parse::{parse_poly, ParseError, ParseErrorKind};

/// Orthogonality tolerance for [`OrthoMap`] in the max-entry norm.
pub const ORTHO_TOL: f64 = 1e-12;

/// Exponent vector of a monomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Exponent(Vec<u32>);

impl Exponent {
    pub fn new(powers: Vec<u32>) -> Self {
        Exponent(powers)
    }

    pub fn powers(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Componentwise sum, i.e. the exponent of the product monomial.
    pub fn add(&self, other: &Exponent) -> Exponent {
        debug_assert_eq!(self.nvars(), other.nvars());
        Exponent(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Number of ways to write `m` as an ordered sum of `v` nonnegative parts.
fn compositions(m: usize, v: usize) -> usize {
    if v == 0 {
        return usize::from(m == 0);
    }
    binomial(m + v - 1, v - 1)
}

/// Number of monomials of the given degree in `nvars` variables.
pub fn basis_len(nvars: usize, degree: u32) -> usize {
    compositions(degree as usize, nvars)
}

/// Graded-lex rank of `e` among the monomials of `(nvars, degree)`.
pub fn monomial_rank(e: &Exponent, nvars: usize, degree: u32) -> Result<usize> {
    if e.nvars() != nvars || e.degree() != degree || nvars == 0 {
        return Err(Error::InvalidExponent {
            powers: e.0.clone(),
            nvars,
            degree,
        });
    }
    Ok(rank_unchecked(&e.0, degree))
}

fn rank_unchecked(powers: &[u32], degree: u32) -> usize {
    let n = powers.len();
    let mut rank = 0;
    let mut remaining = degree as usize;
    for (i, &p) in powers.iter().enumerate().take(n.saturating_sub(1)) {
        let p = p as usize;
        let tail_vars = n - i - 1;
        // every exponent sharing the prefix but with a larger power here comes first
        for k in (p + 1)..=remaining {
            rank += compositions(remaining - k, tail_vars);
        }
        remaining -= p;
    }
    rank
}

/// Inverse of [`monomial_rank`].
pub fn monomial_unrank(r: usize, nvars: usize, degree: u32) -> Result<Exponent> {
    let len = basis_len(nvars, degree);
    if nvars == 0 || r >= len {
        return Err(Error::InvalidRank { rank: r, nvars, degree });
    }
    let mut powers = vec![0u32; nvars];
    let mut remaining = degree as usize;
    let mut r = r;
    for (i, slot) in powers.iter_mut().enumerate().take(nvars - 1) {
        let tail_vars = nvars - i - 1;
        let mut k = remaining;
        loop {
            let count = compositions(remaining - k, tail_vars);
            if r < count {
                break;
            }
            r -= count;
            k -= 1;
        }
        *slot = k as u32;
        remaining -= k;
    }
    powers[nvars - 1] = remaining as u32;
    Ok(Exponent(powers))
}

/// All monomials of `(nvars, degree)` in rank order.
pub fn monomials(nvars: usize, degree: u32) -> Vec<Exponent> {
    let mut out = Vec::with_capacity(basis_len(nvars, degree));
    let mut cur = vec![0u32; nvars];
    fill_monomials(&mut cur, 0, degree, &mut out);
    out
}

fn fill_monomials(cur: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<Exponent>) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining;
        out.push(Exponent(cur.clone()));
        return;
    }
    for k in (0..=remaining).rev() {
        cur[pos] = k;
        fill_monomials(cur, pos + 1, remaining - k, out);
    }
    cur[pos] = 0;
}

/// Homogeneous polynomial with dense graded-lex coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogPoly {
    nvars: usize,
    degree: u32,
    coeffs: Vec<f64>,
}

impl HomogPoly {
    pub fn zero(nvars: usize, degree: u32) -> Self {
        HomogPoly {
            nvars,
            degree,
            coeffs: vec![0.0; basis_len(nvars, degree)],
        }
    }

    pub fn from_coeffs(nvars: usize, degree: u32, coeffs: Vec<f64>) -> Result<Self> {
        let expected = basis_len(nvars, degree);
        if nvars == 0 || coeffs.len() != expected {
            return Err(Error::CoeffLength {
                nvars,
                degree,
                expected,
                got: coeffs.len(),
            });
        }
        Ok(HomogPoly { nvars, degree, coeffs })
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs; repeated
    /// exponents accumulate.
    pub fn from_terms<I>(nvars: usize, degree: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, f64)>,
    {
        let mut p = HomogPoly::zero(nvars, degree);
        for (e, c) in terms {
            let r = monomial_rank(&e, nvars, degree)?;
            p.coeffs[r] += c;
        }
        Ok(p)
    }

    pub fn monomial(e: &Exponent, c: f64) -> Self {
        let mut p = HomogPoly::zero(e.nvars(), e.degree());
        p.coeffs[rank_unchecked(&e.0, e.degree())] = c;
        p
    }

    /// The constant polynomial `c` (degree 0).
    pub fn constant(nvars: usize, c: f64) -> Self {
        HomogPoly {
            nvars,
            degree: 0,
            coeffs: vec![c],
        }
    }

    /// The variable `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut p = HomogPoly::zero(nvars, 1);
        p.coeffs[i] = 1.0;
        p
    }

    /// Linear form `Σ v_i x_i`.
    pub fn linear(v: &[f64]) -> Self {
        HomogPoly {
            nvars: v.len(),
            degree: 1,
            coeffs: v.to_vec(),
        }
    }

    /// `(x_0^2 + … + x_{n-1}^2)^k`.
    pub fn sphere_power(nvars: usize, k: u32) -> Self {
        let mut q = HomogPoly::zero(nvars, 2);
        for i in 0..nvars {
            q.coeffs[rank_unchecked(&unit_exponent(nvars, i, 2).0, 2)] = 1.0;
        }
        q.pow(k)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn coeff(&self, e: &Exponent) -> f64 {
        match monomial_rank(e, self.nvars, self.degree) {
            Ok(r) => self.coeffs[r],
            Err(_) => 0.0,
        }
    }

    /// Nonzero terms in rank order.
    pub fn terms(&self) -> impl Iterator<Item = (Exponent, f64)> + '_ {
        monomials(self.nvars, self.degree)
            .into_iter()
            .zip(self.coeffs.iter().copied())
            .filter(|(_, c)| *c != 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    pub fn norm_inf(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn scale(&self, a: f64) -> Self {
        HomogPoly {
            nvars: self.nvars,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| a * c).collect(),
        }
    }

    fn check_same_space(&self, g: &HomogPoly) -> Result<()> {
        if self.nvars != g.nvars || self.degree != g.degree {
            return Err(Error::Mismatch {
                left: (self.nvars, self.degree),
                right: (g.nvars, g.degree),
            });
        }
        Ok(())
    }

    /// Coefficientwise `a·f + b·g`.
    pub fn linear_combine(a: f64, f: &HomogPoly, b: f64, g: &HomogPoly) -> Result<HomogPoly> {
        f.check_same_space(g)?;
        Ok(HomogPoly {
            nvars: f.nvars,
            degree: f.degree,
            coeffs: f
                .coeffs
                .iter()
                .zip(&g.coeffs)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        })
    }

    pub fn add(&self, g: &HomogPoly) -> Result<HomogPoly> {
        HomogPoly::linear_combine(1.0, self, 1.0, g)
    }

    pub fn sub(&self, g: &HomogPoly) -> Result<HomogPoly> {
        HomogPoly::linear_combine(1.0, self, -1.0, g)
    }

    /// In-place `self += a·g`.
    pub fn add_scaled(&mut self, a: f64, g: &HomogPoly) -> Result<()> {
        self.check_same_space(g)?;
        for (x, y) in self.coeffs.iter_mut().zip(&g.coeffs) {
            *x += a * y;
        }
        Ok(())
    }

    pub fn mul(&self, g: &HomogPoly) -> Result<HomogPoly> {
        if self.nvars != g.nvars {
            return Err(Error::Mismatch {
                left: (self.nvars, self.degree),
                right: (g.nvars, g.degree),
            });
        }
        let degree = self.degree + g.degree;
        let mut out = HomogPoly::zero(self.nvars, degree);
        let left: Vec<(Exponent, f64)> = self.terms().collect();
        let right: Vec<(Exponent, f64)> = g.terms().collect();
        for (ea, ca) in &left {
            for (eb, cb) in &right {
                let e = ea.add(eb);
                out.coeffs[rank_unchecked(&e.0, degree)] += ca * cb;
            }
        }
        Ok(out)
    }

    pub fn square(&self) -> HomogPoly {
        self.mul(self).expect("same nvars")
    }

    pub fn pow(&self, k: u32) -> HomogPoly {
        let mut acc = HomogPoly::constant(self.nvars, 1.0);
        for _ in 0..k {
            acc = acc.mul(self).expect("same nvars");
        }
        acc
    }

    /// Evaluates the polynomial at `x` by summing monomial values.
    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.nvars, "point dimension must equal nvars");
        self.terms()
            .map(|(e, c)| {
                c * e
                    .powers()
                    .iter()
                    .zip(x)
                    .map(|(&p, &xi)| xi.powi(p as i32))
                    .product::<f64>()
            })
            .sum()
    }

    /// Gradient at `x`.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nvars).map(|i| self.partial(i).eval(x)).collect()
    }

    /// Partial derivative with respect to `x_i`.
    pub fn partial(&self, i: usize) -> HomogPoly {
        if self.degree == 0 {
            return HomogPoly::zero(self.nvars, 0);
        }
        let mut out = HomogPoly::zero(self.nvars, self.degree - 1);
        for (e, c) in self.terms() {
            let p = e.powers()[i];
            if p == 0 {
                continue;
            }
            let mut powers = e.0.clone();
            powers[i] -= 1;
            out.coeffs[rank_unchecked(&powers, self.degree - 1)] += c * f64::from(p);
        }
        out
    }

    /// Substitutes `x ← Qᵀ y`, returning `F` with `F(y) = f(Qᵀ y)`.
    pub fn apply_map(&self, q: &OrthoMap) -> Result<HomogPoly> {
        let n = self.nvars;
        if q.dim() != n {
            return Err(Error::InvalidMap(format!(
                "map dimension {} does not match {} variables",
                q.dim(),
                n
            )));
        }
        // x_i = Σ_j Q[j][i] y_j
        let forms: Vec<HomogPoly> = (0..n)
            .map(|i| HomogPoly::linear(&q.matrix.column(i).iter().copied().collect::<Vec<_>>()))
            .collect();
        let d = self.degree;
        let powers: Vec<Vec<HomogPoly>> = forms
            .iter()
            .map(|l| {
                let mut v = Vec::with_capacity(d as usize + 1);
                v.push(HomogPoly::constant(n, 1.0));
                for k in 1..=d as usize {
                    let next = v[k - 1].mul(l).expect("same nvars");
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = HomogPoly::zero(n, d);
        for (e, c) in self.terms() {
            let mut term = HomogPoly::constant(n, c);
            for (i, &p) in e.powers().iter().enumerate() {
                if p > 0 {
                    term = term.mul(&powers[i][p as usize])?;
                }
            }
            out.add_scaled(1.0, &term)?;
        }
        Ok(out)
    }

    /// Embeds a ternary polynomial in four variables, `x1,x2,x3 ← X1,X2,X3`,
    /// with no `x0` dependence.
    pub fn lift_ternary(&self) -> Result<HomogPoly> {
        if self.nvars != 3 {
            return Err(Error::Mismatch {
                left: (self.nvars, self.degree),
                right: (3, self.degree),
            });
        }
        let mut out = HomogPoly::zero(4, self.degree);
        for (e, c) in self.terms() {
            let p = e.powers();
            out.coeffs[rank_unchecked(&[0, p[0], p[1], p[2]], self.degree)] = c;
        }
        Ok(out)
    }

    /// Splits a four-variable quartic by powers of `x0`.
    pub fn slice_x0(&self) -> Result<X0Slices> {
        if self.nvars != 4 || self.degree != 4 {
            return Err(Error::Mismatch {
                left: (self.nvars, self.degree),
                right: (4, 4),
            });
        }
        let mut parts: Vec<HomogPoly> = (1..=4).map(|k| HomogPoly::zero(3, k)).collect();
        let mut c0 = 0.0;
        for (e, c) in monomials(4, 4).into_iter().zip(self.coeffs.iter().copied()) {
            let p = e.powers();
            let k = 4 - p[0] as usize;
            if k == 0 {
                c0 = c;
            } else {
                let part = &mut parts[k - 1];
                part.coeffs[rank_unchecked(&p[1..], k as u32)] = c;
            }
        }
        let mut it = parts.into_iter();
        Ok(X0Slices {
            c0,
            f1: it.next().unwrap(),
            f2: it.next().unwrap(),
            f3: it.next().unwrap(),
            f4: it.next().unwrap(),
        })
    }

    /// Symmetric Gram matrix of a quadratic form, `f = xᵀ G x`.
    pub fn quadratic_gram(&self) -> Result<DMatrix<f64>> {
        if self.degree != 2 {
            return Err(Error::Mismatch {
                left: (self.nvars, self.degree),
                right: (self.nvars, 2),
            });
        }
        let n = self.nvars;
        let mut g = DMatrix::zeros(n, n);
        for (e, c) in self.terms() {
            let idx: Vec<usize> = e
                .powers()
                .iter()
                .enumerate()
                .flat_map(|(i, &p)| std::iter::repeat_n(i, p as usize))
                .collect();
            if idx[0] == idx[1] {
                g[(idx[0], idx[0])] = c;
            } else {
                g[(idx[0], idx[1])] = c / 2.0;
                g[(idx[1], idx[0])] = c / 2.0;
            }
        }
        Ok(g)
    }
}

fn unit_exponent(nvars: usize, i: usize, p: u32) -> Exponent {
    let mut v = vec![0; nvars];
    v[i] = p;
    Exponent(v)
}

/// `f = c0·x0⁴ + f1·x0³ + f2·x0² + f3·x0 + f4` with ternary `f_k` of degree `k`
/// in `x1, x2, x3`.
#[derive(Clone, Debug, PartialEq)]
pub struct X0Slices {
    pub c0: f64,
    pub f1: HomogPoly,
    pub f2: HomogPoly,
    pub f3: HomogPoly,
    pub f4: HomogPoly,
}

impl X0Slices {
    /// Reassembles the quartic; the coefficient repartition is exact.
    pub fn assemble(&self) -> Result<HomogPoly> {
        let mut out = HomogPoly::zero(4, 4);
        out.coeffs[0] = self.c0;
        for (k, part) in [&self.f1, &self.f2, &self.f3, &self.f4].into_iter().enumerate() {
            let k = k as u32 + 1;
            if part.nvars != 3 || part.degree != k {
                return Err(Error::Mismatch {
                    left: (part.nvars, part.degree),
                    right: (3, k),
                });
            }
            for (e, c) in part.terms() {
                let p = e.powers();
                out.coeffs[rank_unchecked(&[4 - k, p[0], p[1], p[2]], 4)] = c;
            }
        }
        Ok(out)
    }
}

/// `m(x)ᵀ G m(x)` for the monomial vector `m` given by `basis`.
pub fn from_gram(g: &DMatrix<f64>, basis: &[Exponent]) -> Result<HomogPoly> {
    let n = basis.len();
    if n == 0 || g.nrows() != n || g.ncols() != n {
        return Err(Error::Gram(format!(
            "gram is {}x{} but basis has {} monomials",
            g.nrows(),
            g.ncols(),
            n
        )));
    }
    let nvars = basis[0].nvars();
    let half = basis[0].degree();
    if basis.iter().any(|b| b.nvars() != nvars || b.degree() != half) {
        return Err(Error::Gram("basis monomials must share one degree".into()));
    }
    let scale = g.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for i in 0..n {
        for j in (i + 1)..n {
            if (g[(i, j)] - g[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::Gram(format!("asymmetric entry ({i},{j})")));
            }
        }
    }
    let degree = 2 * half;
    let mut out = HomogPoly::zero(nvars, degree);
    for i in 0..n {
        for j in 0..n {
            let e = basis[i].add(&basis[j]);
            out.coeffs[rank_unchecked(&e.0, degree)] += g[(i, j)];
        }
    }
    Ok(out)
}

/// Orthogonal change of variables, applied as `x ← matrixᵀ y`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthoMap {
    matrix: DMatrix<f64>,
}

impl OrthoMap {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidMap("matrix must be square".into()));
        }
        let defect = orthogonality_defect(&matrix);
        if defect > ORTHO_TOL {
            return Err(Error::InvalidMap(format!(
                "‖QᵀQ − I‖∞ = {defect:.3e} exceeds {ORTHO_TOL:e}"
            )));
        }
        Ok(OrthoMap { matrix })
    }

    pub fn identity(n: usize) -> Self {
        OrthoMap {
            matrix: DMatrix::identity(n, n),
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMap("matrix must be square".into()));
        }
        OrthoMap::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.matrix
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn inverse(&self) -> OrthoMap {
        OrthoMap {
            matrix: self.matrix.transpose(),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.matrix[(i, j)] * x[j]).sum())
            .collect()
    }
}

pub(crate) fn orthogonality_defect(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let prod = m.transpose() * m;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - target).abs());
        }
    }
    worst
}

const VAR_NAMES: [&str; 4] = ["x0", "x1", "x2", "x3"];

impl fmt::Display for HomogPoly {
    /// Prints in the text grammar accepted by [`parse_poly`]; coefficients use
    /// the shortest round-tripping decimal form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.terms() {
            let sign = if c.is_sign_negative() { "-" } else { "+" };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            write!(f, "{}", c.abs())?;
            for (i, &p) in e.powers().iter().enumerate() {
                let name = VAR_NAMES.get(i).map(|s| s.to_string()).unwrap_or(format!("x{i}"));
                match p {
                    0 => {}
                    1 => write!(f, "*{name}")?,
                    _ => write!(f, "*{name}^{p}")?,
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(p: &[u32]) -> Exponent {
        Exponent::new(p.to_vec())
    }

    #[test]
    fn rank_small_cases() {
        assert_eq!(monomial_rank(&e(&[2, 0]), 2, 2).unwrap(), 0);
        assert_eq!(monomial_rank(&e(&[1, 1]), 2, 2).unwrap(), 1);
        assert_eq!(monomial_rank(&e(&[0, 2]), 2, 2).unwrap(), 2);
        assert_eq!(monomial_rank(&e(&[4, 0, 0, 0]), 4, 4).unwrap(), 0);
        assert_eq!(monomial_rank(&e(&[0, 0, 0, 4]), 4, 4).unwrap(), 34);
    }

    #[test]
    fn basis_lengths() {
        assert_eq!(basis_len(4, 4), 35);
        assert_eq!(basis_len(4, 8), 165);
        assert_eq!(basis_len(3, 2), 6);
        assert_eq!(basis_len(3, 4), 15);
        assert_eq!(basis_len(3, 6), 28);
        assert_eq!(basis_len(3, 8), 45);
    }

    #[test]
    fn rank_rejects_bad_exponents() {
        assert!(matches!(
            monomial_rank(&e(&[1, 1]), 2, 3),
            Err(Error::InvalidExponent { .. })
        ));
        assert!(monomial_rank(&e(&[1, 1, 0]), 2, 2).is_err());
        assert!(monomial_unrank(35, 4, 4).is_err());
    }

    /// Exhaustive oracle: enumerate every exponent of degree 8 in 4 variables
    /// by nested loops and sort them lexicographically descending.
    #[test]
    fn rank_unrank_exhaustive_deg8() {
        let mut all = Vec::new();
        for a in 0..=8u32 {
            for b in 0..=(8 - a) {
                for c in 0..=(8 - a - b) {
                    all.push(vec![a, b, c, 8 - a - b - c]);
                }
            }
        }
        all.sort_by(|x, y| y.cmp(x));
        assert_eq!(all.len(), 165);
        for (r, p) in all.iter().enumerate() {
            let ex = e(p);
            assert_eq!(monomial_rank(&ex, 4, 8).unwrap(), r);
            assert_eq!(monomial_unrank(r, 4, 8).unwrap(), ex);
        }
        assert_eq!(monomials(4, 8).iter().map(|x| x.powers().to_vec()).collect::<Vec<_>>(), all);
    }

    #[test]
    fn linear_combine_examples() {
        let f = HomogPoly::sphere_power(4, 2);
        assert!(HomogPoly::linear_combine(1.0, &f, -1.0, &f).unwrap().is_zero());
        let x0 = HomogPoly::monomial(&e(&[2, 0, 0, 0]), 1.0);
        let x1 = HomogPoly::monomial(&e(&[0, 2, 0, 0]), 1.0);
        let c = HomogPoly::linear_combine(2.0, &x0, 3.0, &x1).unwrap();
        assert_eq!(c.coeff(&e(&[2, 0, 0, 0])), 2.0);
        assert_eq!(c.coeff(&e(&[0, 2, 0, 0])), 3.0);
        assert_eq!(HomogPoly::linear_combine(1.0, &f, 0.0, &f.scale(7.0)).unwrap(), f);
        assert!(HomogPoly::linear_combine(1.0, &f, 1.0, &x0).is_err());
    }

    #[test]
    fn mul_examples() {
        let a = HomogPoly::monomial(&e(&[2, 0, 0, 0]), 1.0);
        let b = HomogPoly::monomial(&e(&[0, 2, 0, 0]), 1.0);
        let ab = a.mul(&b).unwrap();
        assert_eq!(ab, HomogPoly::monomial(&e(&[2, 2, 0, 0]), 1.0));
        let s = HomogPoly::var(4, 0).add(&HomogPoly::var(4, 1)).unwrap();
        let sq = s.square();
        assert_eq!(sq.coeff(&e(&[2, 0, 0, 0])), 1.0);
        assert_eq!(sq.coeff(&e(&[1, 1, 0, 0])), 2.0);
        assert_eq!(sq.coeff(&e(&[0, 2, 0, 0])), 1.0);
        assert_eq!(sq.norm_inf(), 2.0);
        assert!(a.mul(&HomogPoly::var(3, 0)).is_err());
    }

    #[test]
    fn eval_examples() {
        let f = HomogPoly::sphere_power(4, 2);
        assert_eq!(f.eval(&[1.0, 0.0, 0.0, 0.0]), 1.0);
        let cl = parse_poly("x0^4 + x1^2*x2^2 + x2^2*x3^2 + x3^2*x1^2 - 4*x0*x1*x2*x3").unwrap();
        assert_eq!(cl.eval(&[1.0; 4]), 0.0);
        assert_eq!(cl.eval(&[0.0; 4]), 0.0);
    }

    #[test]
    fn slice_examples() {
        let x04 = HomogPoly::monomial(&e(&[4, 0, 0, 0]), 1.0);
        let s = x04.slice_x0().unwrap();
        assert_eq!(s.c0, 1.0);
        assert!(s.f1.is_zero() && s.f2.is_zero() && s.f3.is_zero() && s.f4.is_zero());

        let cl = parse_poly("x0^4 + x1^2*x2^2 + x2^2*x3^2 + x3^2*x1^2 - 4*x0*x1*x2*x3").unwrap();
        let s = cl.slice_x0().unwrap();
        assert_eq!(s.c0, 1.0);
        assert!(s.f1.is_zero());
        assert!(s.f2.is_zero());
        assert_eq!(s.f3, HomogPoly::monomial(&e(&[1, 1, 1]), -4.0));
        let f4 = HomogPoly::from_terms(
            3,
            4,
            [(e(&[2, 2, 0]), 1.0), (e(&[0, 2, 2]), 1.0), (e(&[2, 0, 2]), 1.0)],
        )
        .unwrap();
        assert_eq!(s.f4, f4);
        assert_eq!(s.assemble().unwrap(), cl);
    }

    #[test]
    fn from_gram_examples() {
        let basis = monomials(4, 1);
        let g = DMatrix::identity(4, 4);
        assert_eq!(from_gram(&g, &basis).unwrap(), HomogPoly::sphere_power(4, 1));
        let v = [1.0, -2.0, 0.5, 3.0];
        let vvt = DMatrix::from_fn(4, 4, |i, j| v[i] * v[j]);
        let sq = HomogPoly::linear(&v).square();
        let got = from_gram(&vvt, &basis).unwrap();
        for (a, b) in got.coeffs().iter().zip(sq.coeffs()) {
            assert!((a - b).abs() < 1e-14);
        }
        let mut asym = DMatrix::identity(4, 4);
        asym[(0, 1)] = 1.0;
        assert!(from_gram(&asym, &basis).is_err());
    }

    #[test]
    fn orthomap_rejects_non_orthogonal() {
        let mut m = DMatrix::identity(4, 4);
        m[(0, 0)] = 1.0 + 1e-9;
        assert!(OrthoMap::new(m).is_err());
        let q = OrthoMap::identity(4);
        assert!(HomogPoly::var(3, 0).apply_map(&q).is_err());
    }

    #[test]
    fn identity_map_is_noop() {
        let cl = parse_poly("x0^4 + x1^2*x2^2 + x2^2*x3^2 + x3^2*x1^2 - 4*x0*x1*x2*x3").unwrap();
        assert_eq!(cl.apply_map(&OrthoMap::identity(4)).unwrap(), cl);
    }

    #[test]
    fn quadratic_gram_roundtrip() {
        let f = parse_poly("x0^2 + 3*x0*x1 - x2*x3 + 2*x3^2").unwrap();
        let g = f.quadratic_gram().unwrap();
        assert_eq!(from_gram(&g, &monomials(4, 1)).unwrap(), f);
    }

    #[test]
    fn partial_derivative() {
        let f = parse_poly("x0^3*x1 + 2*x2^4").unwrap();
        let d0 = f.partial(0);
        assert_eq!(d0, parse_poly("3*x0^2*x1").unwrap());
        let g = f.gradient(&[1.0, 2.0, 1.0, 0.0]);
        assert_eq!(g, vec![6.0, 1.0, 8.0, 0.0]);
    }
}
