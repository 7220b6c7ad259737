//! Independent checking of certificates.
//!
//! Everything is recomputed from the certificate and the input polynomial;
//! nothing produced during certification is trusted.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cert::{Certificate, Method, SquareSum};
use crate::error::Result;
use crate::poly::{HomogPoly, OrthoMap};

pub const DEFAULT_TOL: f64 = 1e-6;
/// Sample points for the positivity check on `qmult`.
pub const POSITIVITY_SAMPLES: usize = 100;
/// Minimum number of samples with `qmult(x) > 0`.
pub const POSITIVITY_REQUIRED: usize = 99;
const SAMPLE_SEED: u64 = 0x5eed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub tol: f64,
    /// Recomputed `‖qmult·f − p‖∞ / ‖qmult·f‖∞`, when computable.
    pub residual: Option<f64>,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn failures(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{} ({})", c.name, c.detail))
            .collect()
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{:<6} {:<18} {}\n",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.detail
            ));
        }
        out.push_str(if self.passed { "certificate verified\n" } else { "certificate rejected\n" });
        out
    }
}

fn rel(want: &HomogPoly, got: &HomogPoly) -> Result<f64> {
    Ok(want.sub(got)?.norm_inf() / want.norm_inf().max(f64::MIN_POSITIVE))
}

/// `(total, squares)` as polynomials of the given degrees.
fn square_sum(s: &SquareSum, degree: u32) -> Result<(HomogPoly, Vec<HomogPoly>)> {
    let total = HomogPoly::from_coeffs(4, 2 * degree, s.coeffs.clone())?;
    let squares = s
        .squares
        .iter()
        .map(|c| HomogPoly::from_coeffs(4, degree, c.clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok((total, squares))
}

fn resum(squares: &[HomogPoly], degree: u32) -> Result<HomogPoly> {
    let mut acc = HomogPoly::zero(4, 2 * degree);
    for s in squares {
        acc.add_scaled(1.0, &s.square())?;
    }
    Ok(acc)
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|c| c.is_finite())
}

fn sphere_points(n: usize, seed: u64) -> Vec<[f64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut x = [0.0; 4];
            for v in &mut x {
                *v = StandardNormal.sample(&mut rng);
            }
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.map(|v| v / norm)
        })
        .collect()
}

struct Checker {
    checks: Vec<CheckResult>,
}

impl Checker {
    fn record(&mut self, name: &str, outcome: Result<(bool, String)>) {
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, e.to_string()));
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed,
            detail,
        });
    }
}

fn within(err: f64, tol: f64) -> (bool, String) {
    (err <= tol && err.is_finite(), format!("relative error {err:.3e}"))
}

/// Runs every check on `cert` as a certificate for `f`.
///
/// - `p_squares`: the squares re-expand to `p`
/// - `qmult_squares`: the squares (and factors, if present) re-expand to `qmult`
/// - `identity`: `‖qmult·f − p‖∞ ≤ tol·‖qmult·f‖∞`
/// - `degrees`: `f` is a quaternary quartic, `qmult` has degree 4, `p` degree 8,
///   the transform is orthogonal with positive scale
/// - `qmult_positive`: `qmult(x) > 0` at 99 of 100 seeded points on the sphere
/// - `factor_counts`: structured certificates have at most 3 squares per factor
pub fn verify_certificate(f: &HomogPoly, cert: &Certificate, tol: f64) -> VerifyReport {
    let mut c = Checker { checks: Vec::new() };
    let qm = square_sum_q(cert);
    let pp = square_sum(&cert.p, 4);

    c.record("p_squares", (|| {
        let (p, squares) = pp.as_ref().map_err(clone_err)?;
        Ok(within(rel(p, &resum(squares, 4)?)?, tol))
    })());

    c.record("qmult_squares", (|| {
        let (q, squares) = qm.as_ref().map_err(clone_err)?;
        let mut worst = rel(q, &resum(squares, 2)?)?;
        if let Some(fac) = &cert.qmult.factors {
            let (q2, q2s) = square_sum(&fac.q2, 1)?;
            let (f2, f2s) = square_sum(&fac.f2, 1)?;
            worst = worst
                .max(rel(&q2, &resum(&q2s, 1)?)?)
                .max(rel(&f2, &resum(&f2s, 1)?)?)
                .max(rel(q, &q2.mul(&f2)?.scale(fac.constant))?);
        }
        Ok(within(worst, tol))
    })());

    let mut residual = None;
    c.record("identity", (|| {
        let (q, _) = qm.as_ref().map_err(clone_err)?;
        let (p, _) = pp.as_ref().map_err(clone_err)?;
        let r = rel(&q.mul(f)?, p)?;
        residual = Some(r);
        Ok(within(r, tol))
    })());

    c.record("degrees", {
        let mut problems = Vec::new();
        if f.nvars() != 4 || f.degree() != 4 {
            problems.push(format!("input has degree {} in {} variables", f.degree(), f.nvars()));
        }
        if let Err(e) = &qm {
            problems.push(format!("qmult: {e}"));
        }
        if let Err(e) = &pp {
            problems.push(format!("p: {e}"));
        }
        let finite = all_finite(&cert.qmult.coeffs)
            && all_finite(&cert.p.coeffs)
            && cert.p.squares.iter().all(|s| all_finite(s))
            && cert.qmult.squares.iter().all(|s| all_finite(s));
        if !finite {
            problems.push("non-finite coefficients".into());
        }
        if let Err(e) = OrthoMap::from_rows(&cert.transform.matrix) {
            problems.push(format!("transform: {e}"));
        } else if cert.transform.matrix.len() != 4 {
            problems.push("transform is not 4x4".into());
        }
        if !(cert.transform.scale.is_finite() && cert.transform.scale > 0.0) {
            problems.push(format!("scale {} is not positive", cert.transform.scale));
        }
        if problems.is_empty() {
            Ok((true, "qmult degree 4, p degree 8".into()))
        } else {
            Ok((false, problems.join("; ")))
        }
    });

    c.record("qmult_positive", (|| {
        let (q, _) = qm.as_ref().map_err(clone_err)?;
        let pts = sphere_points(POSITIVITY_SAMPLES, SAMPLE_SEED);
        let positive = pts.iter().filter(|x| q.eval(&x[..]) > 0.0).count();
        Ok((
            positive >= POSITIVITY_REQUIRED,
            format!("{positive}/{POSITIVITY_SAMPLES} samples positive"),
        ))
    })());

    c.record("factor_counts", (|| {
        if cert.method != Method::Structured {
            return Ok((true, format!("not applicable to {}", cert.method)));
        }
        let Some(fac) = &cert.qmult.factors else {
            return Ok((false, "structured certificate without factors".into()));
        };
        let (nq, nf) = (fac.q2.squares.len(), fac.f2.squares.len());
        Ok((nq <= 3 && nf <= 3, format!("q2 has {nq} squares, f2 has {nf}")))
    })());

    VerifyReport {
        passed: c.checks.iter().all(|k| k.passed),
        tol,
        residual,
        checks: c.checks,
    }
}

fn square_sum_q(cert: &Certificate) -> Result<(HomogPoly, Vec<HomogPoly>)> {
    square_sum(
        &SquareSum {
            coeffs: cert.qmult.coeffs.clone(),
            squares: cert.qmult.squares.clone(),
        },
        2,
    )
}

fn clone_err(e: &crate::error::Error) -> crate::error::Error {
    crate::error::Error::InvalidInput(e.to_string())
}

/// Pointwise check `|qmult(x) f(x) − p(x)| ≤ tol·max(1, |qmult(x) f(x)|)` at
/// `npoints` seeded points on the unit sphere.
pub fn sample_check(f: &HomogPoly, cert: &Certificate, npoints: usize, tol: f64, seed: u64) -> bool {
    let (Ok(q), Ok(p)) = (cert.qmult_poly(), cert.p_poly()) else {
        return false;
    };
    if f.nvars() != 4 {
        return false;
    }
    sphere_points(npoints, seed).iter().all(|x| {
        let lhs = q.eval(&x[..]) * f.eval(&x[..]);
        (lhs - p.eval(&x[..])).abs() <= tol * lhs.abs().max(1.0)
    })
}
