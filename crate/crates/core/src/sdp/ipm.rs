//! Infeasible primal-dual path following with HKM search directions and
//! Mehrotra predictor-corrector steps.
//!
//! Standard form, with `w` a vector of free variables:
//!
//! ```text
//! (P) min ⟨C, X⟩ + c_fᵀ w   s.t. ⟨A_i, X⟩ + F_i·w = b_i,  X ⪰ 0
//! (D) max bᵀ y              s.t. Σ y_i A_i + Z = C,  Fᵀ y = c_f,  Z ⪰ 0
//! ```

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use super::{inner, Entry, SdpOptions};

pub(crate) struct Row {
    pub entries: Vec<Entry>,
    pub free: Vec<f64>,
    pub rhs: f64,
}

pub(crate) struct CoreProblem {
    pub blocks: Vec<usize>,
    pub rows: Vec<Row>,
    pub cost: Vec<Entry>,
    pub free_cost: Vec<f64>,
}

pub(crate) struct Outcome {
    pub x: Vec<DMatrix<f64>>,
    pub w: Vec<f64>,
    pub dobj: f64,
    pub pinf: f64,
    pub dinf: f64,
    pub rel_gap: f64,
    pub converged: bool,
    pub iterations: usize,
    pub stop_reason: &'static str,
}

impl Outcome {
    pub fn diagnostics(&self) -> String {
        format!(
            "{} after {} iterations: primal infeasibility {:.2e}, dual infeasibility {:.2e}, relative gap {:.2e}",
            self.stop_reason, self.iterations, self.pinf, self.dinf, self.rel_gap
        )
    }
}

type Blocks = Vec<DMatrix<f64>>;

/// Merit, `X`, `w`, dual objective, primal and dual infeasibility, gap.
type Snapshot = (f64, Blocks, DVector<f64>, f64, f64, f64, f64);

fn scaled_identity(blocks: &[usize], s: f64) -> Blocks {
    blocks.iter().map(|&n| DMatrix::identity(n, n) * s).collect()
}

fn block_inner(a: &Blocks, b: &Blocks) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn block_norm(a: &Blocks) -> f64 {
    block_inner(a, a).sqrt()
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

/// Row-normalized copy of the problem data.
struct Scaled {
    blocks: Vec<usize>,
    a: Vec<Vec<Entry>>,
    f: DMatrix<f64>,
    b: DVector<f64>,
    c: Blocks,
    cf: DVector<f64>,
    /// indices of constraints touching each block
    by_block: Vec<Vec<usize>>,
}

impl Scaled {
    fn new(p: &CoreProblem) -> Self {
        let m = p.rows.len();
        let nf = p.free_cost.len();
        let mut a = Vec::with_capacity(m);
        let mut f = DMatrix::zeros(m, nf);
        let mut b = DVector::zeros(m);
        for (i, row) in p.rows.iter().enumerate() {
            let sq: f64 = row
                .entries
                .iter()
                .map(|e| if e.row == e.col { e.value * e.value } else { 2.0 * e.value * e.value })
                .sum::<f64>()
                + row.free.iter().map(|v| v * v).sum::<f64>();
            let s = if sq > 0.0 { 1.0 / sq.sqrt() } else { 1.0 };
            a.push(
                row.entries
                    .iter()
                    .map(|e| Entry { value: e.value * s, ..*e })
                    .collect::<Vec<_>>(),
            );
            for (k, v) in row.free.iter().enumerate() {
                f[(i, k)] = v * s;
            }
            b[i] = row.rhs * s;
        }
        let mut c: Blocks = p.blocks.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for e in &p.cost {
            c[e.block][(e.row, e.col)] += e.value;
            if e.row != e.col {
                c[e.block][(e.col, e.row)] += e.value;
            }
        }
        let mut by_block = vec![Vec::new(); p.blocks.len()];
        for (i, entries) in a.iter().enumerate() {
            let mut seen: Vec<usize> = entries.iter().map(|e| e.block).collect();
            seen.dedup();
            seen.sort_unstable();
            seen.dedup();
            for blk in seen {
                by_block[blk].push(i);
            }
        }
        Scaled {
            blocks: p.blocks.clone(),
            a,
            f,
            b,
            c,
            cf: DVector::from_column_slice(&p.free_cost),
            by_block,
        }
    }

    fn apply(&self, x: &Blocks) -> DVector<f64> {
        DVector::from_iterator(self.a.len(), self.a.iter().map(|e| inner(e, x)))
    }

    fn adjoint(&self, y: &DVector<f64>) -> Blocks {
        let mut out: Blocks = self.blocks.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (entries, yi) in self.a.iter().zip(y.iter()) {
            for e in entries {
                let v = e.value * yi;
                out[e.block][(e.row, e.col)] += v;
                if e.row != e.col {
                    out[e.block][(e.col, e.row)] += v;
                }
            }
        }
        out
    }

    /// Schur complement `M_ij = ⟨A_i, X A_j Z⁻¹⟩`.
    fn schur(&self, x: &Blocks, zinv: &Blocks) -> DMatrix<f64> {
        let m = self.a.len();
        let mut mat = DMatrix::zeros(m, m);
        for (blk, &n) in self.blocks.iter().enumerate() {
            let xb = &x[blk];
            let zb = &zinv[blk];
            let members = &self.by_block[blk];
            let mut s = DMatrix::zeros(n, n);
            for &j in members {
                s.fill(0.0);
                for e in self.a[j].iter().filter(|e| e.block == blk) {
                    // X (E_rc + E_cr) Z⁻¹ = x_r z_cᵀ + x_c z_rᵀ
                    s.ger(e.value, &xb.column(e.row), &zb.row(e.col).transpose(), 1.0);
                    if e.row != e.col {
                        s.ger(e.value, &xb.column(e.col), &zb.row(e.row).transpose(), 1.0);
                    }
                }
                for &i in members {
                    if i < j {
                        continue;
                    }
                    let v: f64 = self.a[i]
                        .iter()
                        .filter(|e| e.block == blk)
                        .map(|e| {
                            if e.row == e.col {
                                e.value * s[(e.row, e.col)]
                            } else {
                                e.value * (s[(e.row, e.col)] + s[(e.col, e.row)])
                            }
                        })
                        .sum();
                    mat[(i, j)] += v;
                }
            }
        }
        for i in 0..m {
            for j in 0..i {
                mat[(j, i)] = mat[(i, j)];
            }
        }
        mat
    }
}

enum Factorization {
    Chol(Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

/// Regularized factorization of the Schur complement, with iterative
/// refinement against the unregularized matrix.
struct Factor {
    matrix: DMatrix<f64>,
    fact: Factorization,
}

impl Factor {
    fn new(matrix: DMatrix<f64>) -> Option<Self> {
        let n = matrix.nrows();
        let diag_mean = (0..n).map(|i| matrix[(i, i)].abs()).sum::<f64>() / n.max(1) as f64;
        let reg = 1e-10 * diag_mean.max(1e-300);
        let mut m = matrix.clone();
        for i in 0..n {
            m[(i, i)] += reg;
        }
        let fact = if let Some(c) = Cholesky::new(m.clone()) {
            Factorization::Chol(c)
        } else {
            let lu = m.lu();
            if !lu.is_invertible() {
                return None;
            }
            Factorization::Lu(lu)
        };
        Some(Factor { matrix, fact })
    }

    fn raw_solve(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.fact {
            Factorization::Chol(c) => c.solve(rhs),
            Factorization::Lu(l) => l.solve(rhs).unwrap_or_else(|| rhs.clone() * f64::NAN),
        }
    }

    fn solve(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = self.raw_solve(rhs);
        for _ in 0..3 {
            let r = rhs - &self.matrix * &x;
            x += self.raw_solve(&r);
        }
        x
    }
}

/// Largest `α` keeping `X + α D ⪰ 0`, given the Cholesky factor of `X`.
fn max_step(chol: &[DMatrix<f64>], d: &Blocks) -> f64 {
    let mut alpha = f64::INFINITY;
    for (l, db) in chol.iter().zip(d) {
        let linv = l
            .clone()
            .solve_lower_triangular(&DMatrix::identity(l.nrows(), l.nrows()))
            .expect("nonsingular factor");
        let mut t = &linv * db * linv.transpose();
        symmetrize(&mut t);
        let lmin = SymmetricEigen::new(t)
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        if lmin < 0.0 {
            alpha = alpha.min(-1.0 / lmin);
        }
    }
    alpha
}

fn cholesky_blocks(x: &Blocks) -> Option<Vec<DMatrix<f64>>> {
    x.iter().map(|b| Cholesky::new(b.clone()).map(|c| c.l())).collect()
}

fn inverse_blocks(x: &Blocks) -> Option<Blocks> {
    x.iter()
        .map(|b| Cholesky::new(b.clone()).map(|c| {
            let mut inv = c.inverse();
            symmetrize(&mut inv);
            inv
        }))
        .collect()
}

struct Direction {
    dx: Blocks,
    dz: Blocks,
    dy: DVector<f64>,
    dw: DVector<f64>,
}

pub(crate) fn run(p: &CoreProblem, opts: &SdpOptions) -> Outcome {
    let s = Scaled::new(p);
    let m = s.a.len();
    let nf = s.cf.len();
    let ntot: usize = s.blocks.iter().sum();
    let n_f = ntot as f64;

    let bnorm = s.b.norm();
    let cnorm = (block_norm(&s.c).powi(2) + s.cf.norm_squared()).sqrt();
    let amax_b = s.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let xi = 10.0f64.max(n_f.sqrt()).max(n_f * (1.0 + amax_b));
    let eta = 10.0f64.max(n_f.sqrt()).max(1.0 + cnorm);

    let mut x = scaled_identity(&s.blocks, xi);
    let mut z = scaled_identity(&s.blocks, eta);
    let mut y = DVector::zeros(m);
    let mut w = DVector::zeros(nf);

    let mut out = Outcome {
        x: Vec::new(),
        w: Vec::new(),
        dobj: 0.0,
        pinf: f64::INFINITY,
        dinf: f64::INFINITY,
        rel_gap: f64::INFINITY,
        converged: false,
        iterations: 0,
        stop_reason: "iteration limit",
    };
    let mut best: Option<Snapshot> = None;

    for iter in 0..=opts.max_iter {
        let ax = s.apply(&x);
        let rp = &s.b - ax - &s.f * &w;
        let aty = s.adjoint(&y);
        let rd: Blocks = s
            .c
            .iter()
            .zip(&z)
            .zip(&aty)
            .map(|((c, zb), a)| c - zb - a)
            .collect();
        let rf = &s.cf - s.f.transpose() * &y;

        let pobj = block_inner(&s.c, &x) + s.cf.dot(&w);
        let dobj = s.b.dot(&y);
        let xz = block_inner(&x, &z);
        let mu = xz / n_f;
        let pinf = rp.norm() / (1.0 + bnorm);
        let dinf = (block_norm(&rd).powi(2) + rf.norm_squared()).sqrt() / (1.0 + cnorm);
        let rel_gap = xz.abs().max((pobj - dobj).abs()) / (1.0 + pobj.abs() + dobj.abs());

        out.iterations = iter;
        out.pinf = pinf;
        out.dinf = dinf;
        out.rel_gap = rel_gap;
        out.dobj = dobj;
        let merit = pinf.max(dinf).max(rel_gap);
        if best.as_ref().is_none_or(|b| merit <= b.0) {
            best = Some((merit, x.clone(), w.clone(), dobj, pinf, dinf, rel_gap));
        }
        if pinf <= opts.feas_tol && dinf <= opts.feas_tol && rel_gap <= opts.gap_tol {
            out.converged = true;
            out.stop_reason = "converged";
            break;
        }
        if iter == opts.max_iter {
            break;
        }
        let xnorm = block_norm(&x);
        if !xnorm.is_finite() || xnorm > 1e14 || y.norm() > 1e14 {
            out.stop_reason = "diverged";
            break;
        }

        let Some(zinv) = inverse_blocks(&z) else {
            out.stop_reason = "dual slack lost definiteness";
            break;
        };
        let Some(xchol) = cholesky_blocks(&x) else {
            out.stop_reason = "primal iterate lost definiteness";
            break;
        };
        let Some(zchol) = cholesky_blocks(&z) else {
            out.stop_reason = "dual slack lost definiteness";
            break;
        };
        let schur = s.schur(&x, &zinv);
        let Some(factor) = Factor::new(schur) else {
            out.stop_reason = "singular Schur complement";
            break;
        };
        let minv_f = if nf > 0 { factor.solve(&s.f) } else { DMatrix::zeros(m, 0) };
        let border = s.f.transpose() * &minv_f;
        let border_lu = border.clone().lu();

        let direction = |sigma_mu: f64, corr: Option<&Blocks>| -> Option<Direction> {
            // G = σμ Z⁻¹ − X − (corr + X Rd) Z⁻¹
            let g: Blocks = (0..s.blocks.len())
                .map(|k| {
                    let mut inner_term = &x[k] * &rd[k];
                    if let Some(c) = corr {
                        inner_term += &c[k];
                    }
                    let mut gk = &zinv[k] * sigma_mu - &x[k] - inner_term * &zinv[k];
                    // `inner` reads only the upper triangle
                    symmetrize(&mut gk);
                    gk
                })
                .collect();
            let h = &rp - s.apply(&g);
            let hm = DMatrix::from_column_slice(m, 1, h.as_slice());
            let minv_h = factor.solve(&hm).column(0).into_owned();
            let dw = if nf > 0 {
                let r = s.f.transpose() * &minv_h - &rf;
                border_lu.solve(&r)?
            } else {
                DVector::zeros(0)
            };
            let dy = &minv_h - &minv_f * &dw;
            if dy.iter().any(|v| !v.is_finite()) {
                return None;
            }
            let atdy = s.adjoint(&dy);
            let dz: Blocks = rd.iter().zip(&atdy).map(|(r, a)| r - a).collect();
            let dx: Blocks = (0..s.blocks.len())
                .map(|k| {
                    let mut d = &g[k] + &x[k] * &atdy[k] * &zinv[k];
                    symmetrize(&mut d);
                    d
                })
                .collect();
            Some(Direction { dx, dz, dy, dw })
        };

        let Some(pred) = direction(0.0, None) else {
            out.stop_reason = "free-variable system singular";
            break;
        };
        let ap = max_step(&xchol, &pred.dx).min(1.0);
        let ad = max_step(&zchol, &pred.dz).min(1.0);
        let x_aff: Blocks = x.iter().zip(&pred.dx).map(|(a, d)| a + d * ap).collect();
        let z_aff: Blocks = z.iter().zip(&pred.dz).map(|(a, d)| a + d * ad).collect();
        let mu_aff = block_inner(&x_aff, &z_aff) / n_f;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
        let corr: Blocks = pred.dx.iter().zip(&pred.dz).map(|(a, b)| a * b).collect();
        let Some(dir) = direction(sigma * mu, Some(&corr)) else {
            out.stop_reason = "free-variable system singular";
            break;
        };
        let ap = max_step(&xchol, &dir.dx);
        let ad = max_step(&zchol, &dir.dz);
        let gamma = 0.9 + 0.09 * ap.min(ad).min(1.0);
        let ap = (gamma * ap).min(1.0);
        let ad = (gamma * ad).min(1.0);
        if ap < 1e-12 && ad < 1e-12 {
            out.stop_reason = "step length collapsed";
            break;
        }
        for k in 0..x.len() {
            x[k] += &dir.dx[k] * ap;
            symmetrize(&mut x[k]);
            z[k] += &dir.dz[k] * ad;
            symmetrize(&mut z[k]);
        }
        w += &dir.dw * ap;
        y += &dir.dy * ad;
    }

    if out.converged {
        out.x = x;
        out.w = w.iter().copied().collect();
    } else {
        let (_, bx, bw, bd, pinf, dinf, gap) = best.expect("at least one iterate");
        out.x = bx;
        out.w = bw.iter().copied().collect();
        out.dobj = bd;
        out.pinf = pinf;
        out.dinf = dinf;
        out.rel_gap = gap;
    }
    out
}
