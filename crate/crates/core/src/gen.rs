//! Seeded generators for test corpora.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::poly::{parse_poly, HomogPoly, OrthoMap};

pub const CHOI_LAM: &str = "x0^4 + x1^2*x2^2 + x2^2*x3^2 + x3^2*x1^2 - 4*x0*x1*x2*x3";
pub const MOTZKIN: &str = "x0^4*x1^2 + x0^2*x1^4 - 3*x0^2*x1^2*x2^2 + x2^6";

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn choi_lam() -> HomogPoly {
    parse_poly(CHOI_LAM).expect("fixture parses")
}

/// The Motzkin form as a ternary sextic.
pub fn motzkin() -> HomogPoly {
    let p = parse_poly(MOTZKIN).expect("fixture parses");
    let terms: Vec<_> = p
        .terms()
        .map(|(e, c)| (crate::poly::Exponent::new(e.powers()[..3].to_vec()), c))
        .collect();
    HomogPoly::from_terms(3, 6, terms).expect("ternary sextic")
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// A form of the given degree with standard normal coefficients.
pub fn random_form<R: Rng>(rng: &mut R, nvars: usize, degree: u32) -> HomogPoly {
    let n = crate::poly::basis_len(nvars, degree);
    let coeffs = (0..n).map(|_| normal(rng)).collect();
    HomogPoly::from_coeffs(nvars, degree, coeffs).expect("length matches")
}

/// Haar-distributed orthogonal matrix via QR of a Gaussian matrix.
pub fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> OrthoMap {
    let a = DMatrix::from_fn(n, n, |_, _| normal(rng));
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    OrthoMap::new(q).expect("qr factor is orthogonal")
}

/// Sum of `k` squares of random quadratic forms.
pub fn random_sos_quartic<R: Rng>(rng: &mut R, k: usize) -> HomogPoly {
    let mut acc = HomogPoly::zero(4, 4);
    for _ in 0..k {
        acc.add_scaled(1.0, &random_form(rng, 4, 2).square()).expect("quartic");
    }
    acc
}

/// `random_sos_quartic + eps·(Σ x_i²)²`.
pub fn sos_plus_eps<R: Rng>(rng: &mut R, k: usize, eps: f64) -> HomogPoly {
    let mut f = random_sos_quartic(rng, k);
    f.add_scaled(eps, &HomogPoly::sphere_power(4, 2)).expect("quartic");
    f
}

/// `x0⁴ − a·x0²x1² + b·x1⁴ + c·(x2⁴ + x3⁴)` with `a > 2√b`, in random
/// orthogonal coordinates. Negative along `(1, t, 0, 0)` for suitable `t`.
pub fn indefinite_quartic<R: Rng>(rng: &mut R) -> HomogPoly {
    let b: f64 = rng.random_range(0.5..1.5);
    let a = 2.0 * b.sqrt() + rng.random_range(0.5..2.0);
    let c: f64 = rng.random_range(0.5..2.0);
    let text = format!("x0^4 - {a}*x0^2*x1^2 + {b}*x1^4 + {c}*x2^4 + {c}*x3^4");
    let f = parse_poly(&text).expect("generated text parses");
    f.apply_map(&random_orthogonal(rng, 4)).expect("4x4 map")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Sos,
    SosEps,
    ChoiLam,
    Indefinite,
}

impl std::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sos" => Ok(Kind::Sos),
            "soseps" => Ok(Kind::SosEps),
            "choilam" => Ok(Kind::ChoiLam),
            "indefinite" => Ok(Kind::Indefinite),
            other => Err(Error::InvalidInput(format!(
                "unknown kind {other:?}, expected sos, soseps, choilam or indefinite"
            ))),
        }
    }
}

/// `count` polynomials of the given kind. Choi–Lam instances after the first
/// are composed with random orthogonal maps.
pub fn corpus(kind: Kind, seed: u64, count: usize, eps: f64, squares: usize) -> Vec<HomogPoly> {
    let mut rng = rng(seed);
    (0..count)
        .map(|i| match kind {
            Kind::Sos => random_sos_quartic(&mut rng, squares),
            Kind::SosEps => sos_plus_eps(&mut rng, squares, eps),
            Kind::ChoiLam if i == 0 => choi_lam(),
            Kind::ChoiLam => choi_lam().apply_map(&random_orthogonal(&mut rng, 4)).expect("4x4 map"),
            Kind::Indefinite => indefinite_quartic(&mut rng),
        })
        .collect()
}
