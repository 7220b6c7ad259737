//! Construction of certificates `f = p / qmult`.
//!
//! Three routes are available: a plain sum-of-squares decomposition wrapped
//! with `qmult = (Σ x_i²)²`, the structured pipeline (reduction, completing
//! the square in `X0`, a quadratic multiplier for the ternary sextic `h`),
//! and a direct Gram SDP for `qmult` and `p` together.

use std::str::FromStr;

use nalgebra::DMatrix;

use crate::cert::{
    Certificate, Factors, InputRecord, Method, Multiplier, SquareSum, Tolerances, Transform,
    FORMAT_NAME, FORMAT_VERSION, TOOL_VERSION,
};
use crate::error::{Error, Result};
use crate::poly::{monomials, Exponent, HomogPoly, OrthoMap};
use crate::reduce::{f2_rank, sextic_h, to_reduced, ReducedQuartic, ReductionCase, F2_PSD_TOL};
use crate::sdp::{
    coefficient_constraints, extract_squares, multiplier_constraints, project_psd, refine_gram,
    solve, sum_of_squares, Entry, GramEntries, SdpOptions, SdpProblem, SdpSolution, SdpStatus,
};
use crate::sos::{sos_check, SosVerdict};
use crate::sphere::{classify, min_on_sphere, Classification, SphereOptions};
use crate::verify::verify_certificate;

/// Identity residual required of an emitted certificate.
pub const RESIDUAL_TOL: f64 = 1e-6;
/// Identity residual required in reduced coordinates, and of `q2·h = u`.
pub const ASSEMBLY_TOL: f64 = 1e-7;
/// Eigenvalue threshold, relative to `λmax`, for counting squares.
pub const RANK_EPS: f64 = 1e-8;

const REFINE_ROUNDS: usize = 200;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MethodChoice {
    #[default]
    Auto,
    Structured,
    Direct,
}

impl FromStr for MethodChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(MethodChoice::Auto),
            "structured" => Ok(MethodChoice::Structured),
            "direct" => Ok(MethodChoice::Direct),
            other => Err(Error::InvalidInput(format!(
                "unknown method {other:?}, expected auto, structured or direct"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CertifyOptions {
    pub method: MethodChoice,
    /// Verification tolerance applied before a certificate is returned.
    pub tol: f64,
    pub sphere: SphereOptions,
    pub sdp: SdpOptions,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            method: MethodChoice::Auto,
            tol: RESIDUAL_TOL,
            sphere: SphereOptions::default(),
            sdp: SdpOptions::default(),
        }
    }
}

/// A certificate before serialization, with every polynomial explicit.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub method: Method,
    pub qmult: HomogPoly,
    pub qmult_squares: Vec<HomogPoly>,
    pub factors: Option<FactorPair>,
    pub squares: Vec<HomogPoly>,
    pub p: HomogPoly,
}

/// `qmult = constant · q2 · f2` with the squares of each quadric.
#[derive(Clone, Debug)]
pub struct FactorPair {
    pub constant: f64,
    pub q2: HomogPoly,
    pub q2_squares: Vec<HomogPoly>,
    pub f2: HomogPoly,
    pub f2_squares: Vec<HomogPoly>,
}

impl Decomposition {
    /// `‖qmult·f − p‖∞ / ‖qmult·f‖∞`.
    pub fn residual(&self, f: &HomogPoly) -> Result<f64> {
        relative_residual(&self.qmult.mul(f)?, &self.p)
    }
}

fn relative_residual(want: &HomogPoly, got: &HomogPoly) -> Result<f64> {
    Ok(want.sub(got)?.norm_inf() / want.norm_inf().max(f64::MIN_POSITIVE))
}

/// Quadratic multiplier `q2` and octic `u = q2·h`, both sums of squares.
#[derive(Clone, Debug)]
pub struct HilbertMultiplier {
    pub q2: HomogPoly,
    pub q2_gram: DMatrix<f64>,
    pub q2_squares: Vec<HomogPoly>,
    pub u: HomogPoly,
    pub u_gram: DMatrix<f64>,
    pub u_squares: Vec<HomogPoly>,
    /// `‖q2·h − Σ u_k²‖∞ / ‖q2·h‖∞`.
    pub residual: f64,
    pub status: SdpStatus,
}

fn push_entries(problem: &mut SdpProblem, parts: &[(usize, f64, &GramEntries)], rhs: f64) -> Result<()> {
    let entries = parts
        .iter()
        .flat_map(|&(block, sign, list)| {
            list.iter().map(move |&(k, l, v)| Entry::new(block, k, l, sign * v))
        })
        .collect();
    problem.add_constraint(entries, rhs)
}

/// Solves `coeff(Q·fixed) = coeff(P)` with `Q ⪰ 0` on `qbasis`, `P ⪰ 0` on
/// `pbasis`, and `trace Q = trace`.
fn multiplier_sdp(
    qbasis: &[Exponent],
    pbasis: &[Exponent],
    fixed: &HomogPoly,
    trace: f64,
    opts: &SdpOptions,
) -> Result<SdpSolution> {
    let mut problem = SdpProblem::new(vec![qbasis.len(), pbasis.len()]);
    let lhs = multiplier_constraints(qbasis, fixed);
    let rhs = coefficient_constraints(pbasis);
    for (a, b) in lhs.iter().zip(&rhs) {
        push_entries(&mut problem, &[(0, 1.0, a), (1, -1.0, b)], 0.0)?;
    }
    let tr: GramEntries = (0..qbasis.len()).map(|i| (i, i, 1.0)).collect();
    push_entries(&mut problem, &[(0, 1.0, &tr)], trace)?;
    Ok(solve(&problem, opts))
}

fn usable(sol: &SdpSolution) -> bool {
    matches!(sol.status, SdpStatus::Feasible | SdpStatus::MarginallyFeasible)
}

/// Squares of a PSD Gram matrix, dropping eigenvalues below `RANK_EPS·λmax`.
fn gram_squares(g: &DMatrix<f64>, basis: &[Exponent]) -> Result<Vec<HomogPoly>> {
    let clipped = project_psd(g);
    let scale = clipped.amax().max(f64::MIN_POSITIVE);
    let all = extract_squares(&clipped, basis, 1e-12 * scale)?;
    let top = all.first().map(|s| s.coeffs().iter().map(|c| c * c).sum::<f64>()).unwrap_or(0.0);
    Ok(all
        .into_iter()
        .filter(|s| s.coeffs().iter().map(|c| c * c).sum::<f64>() > RANK_EPS * top)
        .collect())
}

/// Finds `q2` and `u` with `q2·h = u`, both sums of squares, normalized by
/// `trace Gram(q2) = 3`.
pub fn hilbert_multiplier(h: &HomogPoly, opts: &SdpOptions) -> Result<HilbertMultiplier> {
    if h.nvars() != 3 || h.degree() != 6 {
        return Err(Error::Mismatch {
            left: (h.nvars(), h.degree()),
            right: (3, 6),
        });
    }
    let qbasis = monomials(3, 1);
    let ubasis = monomials(3, 4);
    let hnorm = h.norm_inf();
    if hnorm == 0.0 {
        return Ok(HilbertMultiplier {
            q2: HomogPoly::sphere_power(3, 1),
            q2_gram: DMatrix::identity(3, 3),
            q2_squares: (0..3).map(|i| HomogPoly::var(3, i)).collect(),
            u: HomogPoly::zero(3, 8),
            u_gram: DMatrix::zeros(15, 15),
            u_squares: Vec::new(),
            residual: 0.0,
            status: SdpStatus::Feasible,
        });
    }
    let sol = multiplier_sdp(&qbasis, &ubasis, &h.scale(1.0 / hnorm), 3.0, opts)?;
    if !usable(&sol) {
        return Err(Error::RouteFailed {
            route: "hilbert",
            reason: format!("multiplier sdp {:?}: {}", sol.status, sol.diagnostics),
        });
    }
    let q2_gram = project_psd(&sol.blocks[0]);
    let q2_squares = gram_squares(&q2_gram, &qbasis)?;
    let q2 = sum_of_squares(&q2_squares, 3, 2);
    let u = q2.mul(h)?;
    let u_gram = refine_gram(&(&sol.blocks[1] * hnorm), &ubasis, &u, REFINE_ROUNDS)?;
    let u_squares = gram_squares(&u_gram, &ubasis)?;
    let residual = relative_residual(&u, &sum_of_squares(&u_squares, 3, 8))?;
    if residual > ASSEMBLY_TOL {
        return Err(Error::Residual {
            stage: "hilbert multiplier",
            residual,
            limit: ASSEMBLY_TOL,
        });
    }
    Ok(HilbertMultiplier {
        q2,
        q2_gram,
        q2_squares,
        u,
        u_gram,
        u_squares,
        residual,
        status: sol.status,
    })
}

fn lift_all(polys: &[HomogPoly]) -> Result<Vec<HomogPoly>> {
    polys.iter().map(HomogPoly::lift_ternary).collect()
}

struct ZeroParts {
    qmult: HomogPoly,
    qmult_squares: Vec<HomogPoly>,
    factors: FactorPair,
    squares: Vec<HomogPoly>,
    a: Vec<HomogPoly>,
    b: Vec<HomogPoly>,
}

/// Squares of `qmult·g` for `g = f2·X0² + f3·X0 + f4`, in four variables.
fn zero_parts(red: &ReducedQuartic, q2_squares: &[HomogPoly], u_squares: &[HomogPoly]) -> Result<ZeroParts> {
    let a = lift_all(q2_squares)?;
    let f2 = red.f2.lift_ternary()?;
    let f3 = red.f3.lift_ternary()?;
    let f2_gram = red.f2.quadratic_gram()?;
    let tol = F2_PSD_TOL * f2_gram.amax().max(red.f4.norm_inf()).max(f64::MIN_POSITIVE);
    if crate::sdp::lambda_min(&f2_gram) < -tol {
        return Err(Error::NotPsd {
            lambda_min: crate::sdp::lambda_min(&f2_gram),
            eps: tol,
        });
    }
    let b = lift_all(&gram_squares(&f2_gram, &monomials(3, 1))?)?;
    let q2 = sum_of_squares(&a, 4, 2);
    let qmult = q2.mul(&f2)?.scale(4.0);
    let qmult_squares = a
        .iter()
        .flat_map(|aj| b.iter().map(move |bi| aj.mul(bi).map(|m| m.scale(2.0))))
        .collect::<Result<Vec<_>>>()?;
    // 2·f2·X0 + f3
    let lin = HomogPoly::linear_combine(2.0, &f2.mul(&HomogPoly::var(4, 0))?, 1.0, &f3)?;
    let mut squares = a.iter().map(|aj| aj.mul(&lin)).collect::<Result<Vec<_>>>()?;
    squares.extend(lift_all(u_squares)?);
    let factors = FactorPair {
        constant: 4.0,
        q2: q2.clone(),
        q2_squares: a.clone(),
        f2: f2.clone(),
        f2_squares: b.clone(),
    };
    Ok(ZeroParts {
        qmult,
        qmult_squares,
        factors,
        squares,
        a,
        b,
    })
}

fn check_assembly(d: &Decomposition, target: &HomogPoly) -> Result<()> {
    let residual = d.residual(target)?;
    if residual > ASSEMBLY_TOL {
        return Err(Error::Residual {
            stage: "assembly",
            residual,
            limit: ASSEMBLY_TOL,
        });
    }
    Ok(())
}

/// `4·q2·f2·g = Σ (a_j·(2 f2 X0 + f3))² + Σ u_k²` in reduced coordinates.
pub fn assemble_zero_case(
    red: &ReducedQuartic,
    q2_squares: &[HomogPoly],
    u_squares: &[HomogPoly],
) -> Result<Decomposition> {
    let parts = zero_parts(red, q2_squares, u_squares)?;
    let p = sum_of_squares(&parts.squares, 4, 8);
    let d = Decomposition {
        method: Method::Structured,
        qmult: parts.qmult,
        qmult_squares: parts.qmult_squares,
        factors: Some(parts.factors),
        squares: parts.squares,
        p,
    };
    check_assembly(&d, &red.g()?)?;
    Ok(d)
}

/// Zero-case squares for `f − X0⁴` plus `(2 a_j b_i X0²)²` for the `X0⁴` term.
pub fn assemble_positive_case(
    red: &ReducedQuartic,
    q2_squares: &[HomogPoly],
    u_squares: &[HomogPoly],
) -> Result<Decomposition> {
    let mut parts = zero_parts(red, q2_squares, u_squares)?;
    let x0sq = HomogPoly::var(4, 0).square();
    let extra = parts.qmult_squares.iter().map(|s| s.mul(&x0sq)).collect::<Result<Vec<_>>>()?;
    debug_assert_eq!(extra.len(), parts.a.len() * parts.b.len());
    parts.squares.extend(extra);
    let p = sum_of_squares(&parts.squares, 4, 8);
    let d = Decomposition {
        method: Method::Structured,
        qmult: parts.qmult,
        qmult_squares: parts.qmult_squares,
        factors: Some(parts.factors),
        squares: parts.squares,
        p,
    };
    check_assembly(&d, &red.quartic()?)?;
    Ok(d)
}

/// Gram SDP for `qmult` (on the 10 quadratic monomials) and `p` (on the 35
/// quartic monomials) with `qmult·f = p` and `trace Gram(qmult) = 10`.
pub fn direct_certificate(f: &HomogPoly, opts: &SdpOptions) -> Result<Decomposition> {
    check_quartic(f)?;
    let qbasis = monomials(4, 2);
    let pbasis = monomials(4, 4);
    let fnorm = f.norm_inf();
    let sol = multiplier_sdp(&qbasis, &pbasis, &f.scale(1.0 / fnorm), 10.0, opts)?;
    if !usable(&sol) {
        return Err(Error::RouteFailed {
            route: "direct",
            reason: format!("gram sdp {:?}: {}", sol.status, sol.diagnostics),
        });
    }
    let qmult_squares = gram_squares(&sol.blocks[0], &qbasis)?;
    let qmult = sum_of_squares(&qmult_squares, 4, 4);
    let p_target = qmult.mul(f)?;
    let p_gram = refine_gram(&(&sol.blocks[1] * fnorm), &pbasis, &p_target, REFINE_ROUNDS)?;
    let squares = gram_squares(&p_gram, &pbasis)?;
    let p = sum_of_squares(&squares, 4, 8);
    Ok(Decomposition {
        method: Method::Direct,
        qmult,
        qmult_squares,
        factors: None,
        squares,
        p,
    })
}

/// `qmult = (Σ x_i²)²` with squares `x_i²`, `√2·x_i x_j`, and `p` the products
/// of those with the squares of `f`.
pub fn fast_path(f_squares: &[HomogPoly]) -> Result<Decomposition> {
    let mut qmult_squares = Vec::with_capacity(10);
    for i in 0..4 {
        for j in i..4 {
            let m = HomogPoly::var(4, i).mul(&HomogPoly::var(4, j))?;
            qmult_squares.push(if i == j { m } else { m.scale(std::f64::consts::SQRT_2) });
        }
    }
    let qmult = HomogPoly::sphere_power(4, 2);
    let squares = qmult_squares
        .iter()
        .flat_map(|r| f_squares.iter().map(move |s| r.mul(s)))
        .collect::<Result<Vec<_>>>()?;
    let p = sum_of_squares(&squares, 4, 8);
    Ok(Decomposition {
        method: Method::SosFastPath,
        qmult,
        qmult_squares,
        factors: None,
        squares,
        p,
    })
}

/// Maps a reduced-coordinate decomposition back to the original variables and
/// undoes the scaling, so that it certifies the original `f`.
pub fn pull_back(d: &Decomposition, red: &ReducedQuartic) -> Result<Decomposition> {
    pull_back_with(d, &red.map, red.scale)
}

fn pull_back_with(d: &Decomposition, map: &OrthoMap, scale: f64) -> Result<Decomposition> {
    let inv = map.inverse();
    let all = |v: &[HomogPoly], s: f64| -> Result<Vec<HomogPoly>> {
        v.iter().map(|p| p.apply_map(&inv).map(|q| q.scale(s))).collect()
    };
    let root = (1.0 / scale).sqrt();
    let factors = match &d.factors {
        Some(fp) => Some(FactorPair {
            constant: fp.constant,
            q2: fp.q2.apply_map(&inv)?,
            q2_squares: all(&fp.q2_squares, 1.0)?,
            f2: fp.f2.apply_map(&inv)?,
            f2_squares: all(&fp.f2_squares, 1.0)?,
        }),
        None => None,
    };
    Ok(Decomposition {
        method: d.method,
        qmult: d.qmult.apply_map(&inv)?,
        qmult_squares: all(&d.qmult_squares, 1.0)?,
        factors,
        squares: all(&d.squares, root)?,
        p: d.p.apply_map(&inv)?.scale(1.0 / scale),
    })
}

fn check_quartic(f: &HomogPoly) -> Result<()> {
    if f.nvars() != 4 || f.degree() != 4 {
        return Err(Error::InvalidInput(format!(
            "expected a quartic in 4 variables, got degree {} in {} variables",
            f.degree(),
            f.nvars()
        )));
    }
    if f.is_zero() {
        return Err(Error::InvalidInput("zero polynomial".into()));
    }
    Ok(())
}

/// Serializes a decomposition of `f`, recomputing `p` from its squares.
pub fn to_certificate(
    f: &HomogPoly,
    d: &Decomposition,
    map: &OrthoMap,
    scale: f64,
    tol: f64,
) -> Result<Certificate> {
    let p = sum_of_squares(&d.squares, 4, 8);
    let residual = relative_residual(&d.qmult.mul(f)?, &p)?;
    let factors = d.factors.as_ref().map(|fp| Factors {
        constant: fp.constant,
        q2: SquareSum::from_polys(&fp.q2, &fp.q2_squares),
        f2: SquareSum::from_polys(&fp.f2, &fp.f2_squares),
    });
    Ok(Certificate {
        format: FORMAT_NAME.to_string(),
        version: FORMAT_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        input: InputRecord {
            text: f.to_string(),
            coeffs: f.coeffs().to_vec(),
        },
        method: d.method,
        transform: Transform {
            matrix: map.rows(),
            scale,
        },
        qmult: Multiplier {
            coeffs: d.qmult.coeffs().to_vec(),
            squares: d.qmult_squares.iter().map(|s| s.coeffs().to_vec()).collect(),
            factors,
        },
        p: SquareSum::from_polys(&p, &d.squares),
        residual,
        tolerances: Tolerances {
            residual: RESIDUAL_TOL,
            verify: tol,
        },
    })
}

fn finish(f: &HomogPoly, d: &Decomposition, map: &OrthoMap, scale: f64, tol: f64) -> Result<Certificate> {
    let cert = to_certificate(f, d, map, scale, tol)?;
    if cert.residual > RESIDUAL_TOL {
        return Err(Error::Residual {
            stage: "pull-back",
            residual: cert.residual,
            limit: RESIDUAL_TOL,
        });
    }
    let report = verify_certificate(f, &cert, tol);
    if !report.passed {
        return Err(Error::RouteFailed {
            route: "verify",
            reason: report.failures().join(", "),
        });
    }
    Ok(cert)
}

/// Structured route for a reduced quartic; `Ok(None)` when `f2` vanishes and
/// the route does not apply.
pub fn structured_certificate(
    f: &HomogPoly,
    red: &ReducedQuartic,
    opts: &CertifyOptions,
) -> Result<Option<Certificate>> {
    let (rank, _) = f2_rank(red, RANK_EPS)?;
    if rank == 0 {
        return Ok(None);
    }
    let h = sextic_h(red)?;
    let hm = hilbert_multiplier(&h, &opts.sdp)?;
    let d = match red.case {
        ReductionCase::Zero => assemble_zero_case(red, &hm.q2_squares, &hm.u_squares)?,
        ReductionCase::Positive => assemble_positive_case(red, &hm.q2_squares, &hm.u_squares)?,
    };
    let pulled = pull_back(&d, red)?;
    finish(f, &pulled, &red.map, red.scale, opts.tol).map(Some)
}

fn direct_route(f: &HomogPoly, opts: &CertifyOptions) -> Result<Certificate> {
    let d = direct_certificate(f, &opts.sdp)?;
    finish(f, &d, &OrthoMap::identity(4), 1.0, opts.tol)
}

fn fast_route(f: &HomogPoly, opts: &CertifyOptions) -> Result<Option<Certificate>> {
    let check = sos_check(f, &opts.sdp)?;
    if check.verdict != SosVerdict::IsSos {
        return Ok(None);
    }
    let d = fast_path(&check.squares)?;
    finish(f, &d, &OrthoMap::identity(4), 1.0, opts.tol).map(Some)
}

/// Certifies nonnegativity of a quaternary quartic, or rejects it with a
/// point where it is negative.
pub fn certify(f: &HomogPoly, opts: &CertifyOptions) -> Result<Certificate> {
    check_quartic(f)?;
    let scale = f.norm_inf();
    let min = match min_on_sphere(f, &opts.sphere) {
        Ok(m) => Some(m),
        Err(Error::Convergence {
            best_value,
            best_point,
            ..
        }) => {
            if best_value / scale < -opts.sphere.tau_zero {
                return Err(Error::Rejected {
                    witness: best_point,
                    value: best_value,
                });
            }
            None
        }
        Err(e) => return Err(e),
    };
    if let Some(m) = &min {
        if classify(m, opts.sphere.tau_zero) == Classification::NegativeSomewhere {
            return Err(Error::Rejected {
                witness: m.xstar.clone(),
                value: m.value,
            });
        }
    }

    let mut failures = Vec::new();
    let mut note = |route: &str, e: Error| failures.push(format!("{route}: {e}"));

    if opts.method == MethodChoice::Auto {
        match fast_route(f, opts) {
            Ok(Some(c)) => return Ok(c),
            Ok(None) => note("sos fast path", Error::InvalidInput("not a sum of squares".into())),
            Err(e) => note("sos fast path", e),
        }
    }
    let mut f2_vanishes = false;
    if opts.method != MethodChoice::Direct {
        match &min {
            None => note("structured", Error::InvalidInput("no converged minimizer".into())),
            Some(m) => match to_reduced(f, m).and_then(|red| structured_certificate(f, &red, opts)) {
                Ok(Some(c)) => return Ok(c),
                Ok(None) => {
                    f2_vanishes = true;
                    note("structured", Error::InvalidInput("f2 vanishes".into()));
                }
                Err(e) => note("structured", e),
            },
        }
    }
    if opts.method != MethodChoice::Structured || f2_vanishes {
        match direct_route(f, opts) {
            Ok(c) => return Ok(c),
            Err(e) => note("direct", e),
        }
    }
    Err(Error::CertificationFailed(failures))
}
