//! Minimization of a quartic form over the unit sphere.
//!
//! Each start runs projected gradient descent with Armijo backtracking and
//! is then polished with Riemannian Newton steps. The best stationary point
//! over all starts decides whether the form vanishes on the sphere, is
//! strictly positive there, or takes a negative value.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::HomogPoly;

pub const DEFAULT_TAU_ZERO: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    ZeroOnSphere,
    PositiveMin,
    NegativeSomewhere,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinResult {
    pub xstar: Vec<f64>,
    /// `f(xstar)` for the unnormalized input.
    pub value: f64,
    /// Tangential gradient norm of the normalized form at `xstar`.
    pub grad_tangent_norm: f64,
    pub classification: Classification,
    /// `‖coeffs‖∞` of the input; classification thresholds are relative to it.
    pub coeff_scale: f64,
}

#[derive(Clone, Debug)]
pub struct SphereOptions {
    pub n_starts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    pub tau_zero: f64,
}

impl Default for SphereOptions {
    fn default() -> Self {
        SphereOptions {
            n_starts: 32,
            max_iter: 2000,
            tol: 1e-9,
            seed: 0,
            tau_zero: DEFAULT_TAU_ZERO,
        }
    }
}

/// Classifies a minimum against `tau_zero`, relative to the coefficient scale.
pub fn classify(result: &MinResult, tau_zero: f64) -> Classification {
    let v = result.value / result.coeff_scale.max(f64::MIN_POSITIVE);
    if v < -tau_zero {
        Classification::NegativeSomewhere
    } else if v <= tau_zero {
        Classification::ZeroOnSphere
    } else {
        Classification::PositiveMin
    }
}

struct Derivatives {
    f: HomogPoly,
    grad: Vec<HomogPoly>,
    hess: Vec<Vec<HomogPoly>>,
}

impl Derivatives {
    fn new(f: HomogPoly) -> Self {
        let n = f.nvars();
        let grad: Vec<HomogPoly> = (0..n).map(|i| f.partial(i)).collect();
        let hess = grad
            .iter()
            .map(|g| (0..n).map(|j| g.partial(j)).collect())
            .collect();
        Derivatives { f, grad, hess }
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.f.eval(x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.grad.iter().map(|g| g.eval(x)).collect()
    }

    fn tangent_gradient(&self, x: &[f64]) -> Vec<f64> {
        let g = self.gradient(x);
        let radial = dot(x, &g);
        g.iter().zip(x).map(|(gi, xi)| gi - radial * xi).collect()
    }

    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = x.len();
        DMatrix::from_fn(n, n, |i, j| self.hess[i][j].eval(x))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: &[f64]) -> Vec<f64> {
    let n = norm(a);
    a.iter().map(|v| v / n).collect()
}

struct StartOutcome {
    x: Vec<f64>,
    value: f64,
    grad_norm: f64,
}

fn run_start(d: &Derivatives, start: &[f64], opts: &SphereOptions) -> StartOutcome {
    let mut x = normalize(start);
    let mut fx = d.value(&x);
    let mut step = 1.0;
    for _ in 0..opts.max_iter {
        let rg = d.tangent_gradient(&x);
        let gn2 = dot(&rg, &rg);
        if gn2.sqrt() <= opts.tol {
            break;
        }
        let mut alpha = step;
        let mut accepted = false;
        while alpha > 1e-16 {
            let trial: Vec<f64> = x.iter().zip(&rg).map(|(xi, gi)| xi - alpha * gi).collect();
            let trial = normalize(&trial);
            let ft = d.value(&trial);
            if ft <= fx - 1e-4 * alpha * gn2 {
                x = trial;
                fx = ft;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
        step = (alpha * 2.0).min(1e3);
        // hand over to Newton once the gradient is moderately small
        if gn2.sqrt() <= 1e-4 {
            break;
        }
    }
    newton_polish(d, x, opts)
}

/// Orthonormal basis of the tangent space `x⊥`, as columns.
fn tangent_basis(x: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(n - 1);
    let xv = DVector::from_column_slice(x);
    // Gram-Schmidt against x, seeded by coordinate vectors ordered by how
    // little they overlap with x.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs()));
    for &k in &order {
        if cols.len() == n - 1 {
            break;
        }
        let mut v = DVector::zeros(n);
        v[k] = 1.0;
        v -= &xv * xv.dot(&v);
        for c in &cols {
            v -= c * c.dot(&v);
        }
        let nv = v.norm();
        if nv > 1e-8 {
            cols.push(v / nv);
        }
    }
    DMatrix::from_columns(&cols)
}

fn newton_polish(d: &Derivatives, mut x: Vec<f64>, opts: &SphereOptions) -> StartOutcome {
    let mut fx = d.value(&x);
    let mut gn = norm(&d.tangent_gradient(&x));
    for _ in 0..30 {
        if gn <= opts.tol * 1e-2 {
            break;
        }
        let g = d.gradient(&x);
        let radial = dot(&x, &g);
        let mut h = d.hessian(&x);
        for i in 0..x.len() {
            h[(i, i)] -= radial;
        }
        let b = tangent_basis(&x);
        let reduced = b.transpose() * &h * &b;
        let rhs = -(b.transpose() * DVector::from_column_slice(&g));
        let Some(c) = reduced.clone().lu().solve(&rhs) else {
            break;
        };
        let eta = &b * c;
        let trial: Vec<f64> = x.iter().zip(eta.iter()).map(|(xi, ei)| xi + ei).collect();
        let trial = normalize(&trial);
        let ft = d.value(&trial);
        let gt = norm(&d.tangent_gradient(&trial));
        let slack = 1e-12 * (1.0 + fx.abs());
        if gt < gn && ft <= fx + slack {
            x = trial;
            fx = ft;
            gn = gt;
        } else {
            break;
        }
    }
    StartOutcome {
        x,
        value: fx,
        grad_norm: gn,
    }
}

/// Starting points: the signed coordinate vectors, then seeded uniform points.
pub fn start_points(nvars: usize, n_starts: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut starts = Vec::with_capacity(n_starts);
    for i in 0..nvars {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; nvars];
            v[i] = s;
            starts.push(v);
        }
    }
    starts.truncate(n_starts);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while starts.len() < n_starts {
        let v: Vec<f64> = (0..nvars).map(|_| StandardNormal.sample(&mut rng)).collect();
        if norm(&v) > 1e-6 {
            starts.push(normalize(&v));
        }
    }
    starts
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}

/// Multistart minimization of `f` on the unit sphere.
pub fn min_on_sphere(f: &HomogPoly, opts: &SphereOptions) -> Result<MinResult> {
    if f.nvars() < 2 || f.degree() == 0 || !f.degree().is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "sphere minimization needs an even-degree form in at least 2 variables, got ({}, {})",
            f.nvars(),
            f.degree()
        )));
    }
    if opts.n_starts == 0 {
        return Err(Error::InvalidInput("n_starts must be at least 1".into()));
    }
    let scale = f.norm_inf();
    if scale == 0.0 {
        return Err(Error::InvalidInput("polynomial is identically zero".into()));
    }
    let d = Derivatives::new(f.scale(1.0 / scale));
    let starts = start_points(f.nvars(), opts.n_starts, opts.seed);
    let outcomes: Vec<StartOutcome> = starts
        .par_iter()
        .map(|s| run_start(&d, s, opts))
        .collect();

    let converged: Vec<&StartOutcome> = outcomes.iter().filter(|o| o.grad_norm <= opts.tol).collect();
    if converged.is_empty() {
        let best = outcomes
            .iter()
            .min_by(|a, b| a.value.total_cmp(&b.value))
            .expect("at least one start");
        return Err(Error::Convergence {
            best_value: best.value * scale,
            grad_norm: best.grad_norm,
            best_point: best.x.clone(),
        });
    }
    let best_value = converged
        .iter()
        .map(|o| o.value)
        .fold(f64::INFINITY, f64::min);
    // equal-value minimizers are resolved by the lexicographically smallest point
    let tie = 1e-12;
    let mut best: Option<&StartOutcome> = None;
    for o in converged.iter().filter(|o| o.value <= best_value + tie) {
        if best.is_none_or(|b| lex_less(&o.x, &b.x)) {
            best = Some(o);
        }
    }
    let best = best.expect("nonempty");
    let mut result = MinResult {
        xstar: best.x.clone(),
        value: f.eval(&best.x),
        grad_tangent_norm: best.grad_norm,
        classification: Classification::PositiveMin,
        coeff_scale: scale,
    };
    result.classification = classify(&result, opts.tau_zero);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    fn choi_lam() -> HomogPoly {
        parse_poly("x0^4 + x1^2*x2^2 + x2^2*x3^2 + x3^2*x1^2 - 4*x0*x1*x2*x3").unwrap()
    }

    fn result_with(value: f64) -> MinResult {
        MinResult {
            xstar: vec![1.0, 0.0, 0.0, 0.0],
            value,
            grad_tangent_norm: 0.0,
            classification: Classification::PositiveMin,
            coeff_scale: 1.0,
        }
    }

    #[test]
    fn classify_thresholds() {
        assert_eq!(classify(&result_with(0.5), 1e-8), Classification::PositiveMin);
        assert_eq!(classify(&result_with(1e-12), 1e-8), Classification::ZeroOnSphere);
        assert_eq!(classify(&result_with(-0.3), 1e-8), Classification::NegativeSomewhere);
    }

    #[test]
    fn sphere_form_is_constant() {
        let f = HomogPoly::sphere_power(4, 2);
        let r = min_on_sphere(&f, &SphereOptions::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert_eq!(r.classification, Classification::PositiveMin);
        assert!(((norm(&r.xstar)) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn negative_form_is_flagged() {
        let f = HomogPoly::sphere_power(4, 2).scale(-1.0);
        let r = min_on_sphere(&f, &SphereOptions::default()).unwrap();
        assert!((r.value + 1.0).abs() < 1e-12);
        assert_eq!(r.classification, Classification::NegativeSomewhere);
    }

    #[test]
    fn choi_lam_minimum_is_zero_at_half_ones() {
        let f = choi_lam();
        let r = min_on_sphere(&f, &SphereOptions::default()).unwrap();
        assert!(r.value.abs() < 1e-12, "value {}", r.value);
        assert_eq!(r.classification, Classification::ZeroOnSphere);
        // the lexicographic tie-break prefers a zero with x0 = -1/2
        for xi in &r.xstar {
            assert!((xi.abs() - 0.5).abs() < 1e-6, "{:?}", r.xstar);
        }
        assert!(r.xstar.iter().product::<f64>() > 0.0);
        assert!(f.eval(&r.xstar).abs() < 1e-12);
    }

    #[test]
    fn deterministic_given_seed() {
        let f = parse_poly("x0^4 + 2*x1^4 - x0^2*x2^2 + 3*x3^4 + x2^4 + 0.3*x0*x1*x2*x3").unwrap();
        let opts = SphereOptions {
            seed: 7,
            ..Default::default()
        };
        let a = min_on_sphere(&f, &opts).unwrap();
        let b = min_on_sphere(&f, &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_input() {
        let f = parse_poly("x0^3").unwrap();
        assert!(min_on_sphere(&f, &SphereOptions::default()).is_err());
        let g = HomogPoly::sphere_power(4, 2);
        let opts = SphereOptions {
            n_starts: 0,
            ..Default::default()
        };
        assert!(min_on_sphere(&g, &opts).is_err());
    }

    #[test]
    fn non_convergence_reports_best_iterate() {
        let f = parse_poly("x0^4 + 2*x1^4 + 3*x2^4 + 5*x3^4 + x0^3*x1 + x1^3*x2 + x2^3*x3 + x3^3*x0").unwrap();
        let opts = SphereOptions {
            n_starts: 30,
            max_iter: 0,
            tol: 1e-300,
            ..Default::default()
        };
        match min_on_sphere(&f, &opts) {
            Err(Error::Convergence { best_point, .. }) => assert_eq!(best_point.len(), 4),
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn tangent_basis_is_orthonormal() {
        let x = normalize(&[0.3, -0.4, 0.5, 0.7]);
        let b = tangent_basis(&x);
        assert_eq!(b.ncols(), 3);
        let gram = b.transpose() * &b;
        assert!((gram - DMatrix::identity(3, 3)).amax() < 1e-14);
        let xv = DVector::from_column_slice(&x);
        assert!((b.transpose() * xv).amax() < 1e-14);
    }
}
