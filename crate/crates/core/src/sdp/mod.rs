//! Small dense semidefinite programming.
//!
//! Problems are block-diagonal with linear equality constraints
//! `Σ_b ⟨A_{i,b}, X_b⟩ = c_i`. Without an objective, [`solve`] runs the
//! phase-I program
//!
//! ```text
//! maximize t   s.t.  A(Y + tI) = c,  Y ⪰ 0,  t ≤ 1
//! ```
//!
//! and classifies feasibility by the sign of the optimal `t`. With an
//! objective it maximizes `⟨C, X⟩` directly.

mod gram;
mod ipm;
mod squares;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub use gram::{coefficient_constraints, multiplier_constraints, GramEntries};
pub use squares::{extract_squares, project_affine, project_psd, refine_gram, sum_of_squares};

/// Phase-I thresholds on the optimal `t`.
pub const FEASIBLE_T: f64 = 1e-9;
pub const MARGINAL_T: f64 = -1e-7;

/// One nonzero of a symmetric coefficient matrix; `row ≤ col`, and an
/// off-diagonal entry stands for both `(row, col)` and `(col, row)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Entry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

impl Entry {
    pub fn new(block: usize, row: usize, col: usize, value: f64) -> Self {
        let (row, col) = if row <= col { (row, col) } else { (col, row) };
        Entry { block, row, col, value }
    }
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub entries: Vec<Entry>,
    pub rhs: f64,
}

#[derive(Clone, Debug)]
pub struct SdpProblem {
    blocks: Vec<usize>,
    constraints: Vec<Constraint>,
    objective: Option<Vec<Entry>>,
}

impl SdpProblem {
    pub fn new(blocks: Vec<usize>) -> Self {
        SdpProblem {
            blocks,
            constraints: Vec::new(),
            objective: None,
        }
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    fn check_entries(&self, entries: &[Entry]) -> Result<()> {
        for e in entries {
            let dim = *self
                .blocks
                .get(e.block)
                .ok_or_else(|| Error::SdpShape(format!("block {} does not exist", e.block)))?;
            if e.col >= dim {
                return Err(Error::SdpShape(format!(
                    "entry ({}, {}) outside {dim}x{dim} block {}",
                    e.row, e.col, e.block
                )));
            }
        }
        Ok(())
    }

    /// Adds `Σ entries = rhs`; duplicate positions accumulate.
    pub fn add_constraint(&mut self, entries: Vec<Entry>, rhs: f64) -> Result<()> {
        self.check_entries(&entries)?;
        self.constraints.push(Constraint {
            entries: merge(entries),
            rhs,
        });
        Ok(())
    }

    /// Adds `Σ_b ⟨mats[b], X_b⟩ = rhs` from dense symmetric blocks.
    pub fn add_dense_constraint(&mut self, mats: &[DMatrix<f64>], rhs: f64) -> Result<()> {
        let entries = self.dense_entries(mats)?;
        self.add_constraint(entries, rhs)
    }

    /// Sets the objective to maximize `Σ entries`.
    pub fn set_objective(&mut self, entries: Vec<Entry>) -> Result<()> {
        self.check_entries(&entries)?;
        self.objective = Some(merge(entries));
        Ok(())
    }

    pub fn set_dense_objective(&mut self, mats: &[DMatrix<f64>]) -> Result<()> {
        let entries = self.dense_entries(mats)?;
        self.set_objective(entries)
    }

    fn dense_entries(&self, mats: &[DMatrix<f64>]) -> Result<Vec<Entry>> {
        if mats.len() != self.blocks.len() {
            return Err(Error::SdpShape(format!(
                "{} matrices for {} blocks",
                mats.len(),
                self.blocks.len()
            )));
        }
        let mut entries = Vec::new();
        for (b, (m, &dim)) in mats.iter().zip(&self.blocks).enumerate() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::SdpShape(format!("block {b} must be {dim}x{dim}")));
            }
            let scale = m.amax().max(1.0);
            for i in 0..dim {
                for j in i..dim {
                    if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                        return Err(Error::SdpShape(format!("block {b} is not symmetric")));
                    }
                    if m[(i, j)] != 0.0 {
                        entries.push(Entry::new(b, i, j, m[(i, j)]));
                    }
                }
            }
        }
        Ok(entries)
    }

    /// `⟨A_i, X⟩` for every constraint.
    pub fn apply(&self, x: &[DMatrix<f64>]) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|c| inner(&c.entries, x))
            .collect()
    }

    /// `‖A(X) − c‖∞ / (1 + ‖c‖∞)`.
    pub fn equality_residual(&self, x: &[DMatrix<f64>]) -> f64 {
        let ax = self.apply(x);
        let bmax = self.constraints.iter().fold(0.0f64, |m, c| m.max(c.rhs.abs()));
        let worst = ax
            .iter()
            .zip(&self.constraints)
            .fold(0.0f64, |m, (v, c)| m.max((v - c.rhs).abs()));
        worst / (1.0 + bmax)
    }

    /// Least Frobenius-norm correction of `x` onto the affine set `A(X) = c`.
    /// `None` when the constraint Gram matrix is too ill conditioned.
    pub fn project_affine(&self, x: &[DMatrix<f64>]) -> Option<Vec<DMatrix<f64>>> {
        let m = self.constraints.len();
        let r: Vec<f64> = self
            .apply(x)
            .iter()
            .zip(&self.constraints)
            .map(|(v, c)| c.rhs - v)
            .collect();
        let mats: Vec<Vec<DMatrix<f64>>> = self
            .constraints
            .iter()
            .map(|c| {
                let mut blocks: Vec<DMatrix<f64>> =
                    self.blocks.iter().map(|&n| DMatrix::zeros(n, n)).collect();
                for e in &c.entries {
                    blocks[e.block][(e.row, e.col)] += e.value;
                    if e.row != e.col {
                        blocks[e.block][(e.col, e.row)] += e.value;
                    }
                }
                blocks
            })
            .collect();
        let gram = DMatrix::from_fn(m, m, |i, j| {
            mats[i].iter().zip(&mats[j]).map(|(a, b)| a.dot(b)).sum::<f64>()
        });
        let svd = gram.svd(true, true);
        let top = svd.singular_values.max();
        let y = svd.solve(&nalgebra::DVector::from_vec(r), 1e-12 * top).ok()?;
        let mut out = x.to_vec();
        for (yi, blocks) in y.iter().zip(&mats) {
            for (o, a) in out.iter_mut().zip(blocks) {
                *o += a * *yi;
            }
        }
        out.iter().all(|b| b.iter().all(|v| v.is_finite())).then_some(out)
    }
}

fn merge(mut entries: Vec<Entry>) -> Vec<Entry> {
    entries.sort_by_key(|e| (e.block, e.row, e.col));
    let mut out: Vec<Entry> = Vec::with_capacity(entries.len());
    for e in entries {
        match out.last_mut() {
            Some(last) if (last.block, last.row, last.col) == (e.block, e.row, e.col) => {
                last.value += e.value;
            }
            _ => out.push(e),
        }
    }
    out.retain(|e| e.value != 0.0);
    out
}

/// `⟨A, X⟩` for a sparse symmetric `A`.
pub(crate) fn inner(entries: &[Entry], x: &[DMatrix<f64>]) -> f64 {
    entries
        .iter()
        .map(|e| {
            let v = x[e.block][(e.row, e.col)];
            if e.row == e.col {
                e.value * v
            } else {
                2.0 * e.value * v
            }
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdpStatus {
    Feasible,
    MarginallyFeasible,
    Infeasible,
    NumericalFailure,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub blocks: Vec<DMatrix<f64>>,
    pub lambda_min: Vec<f64>,
    /// Relative primal equality residual, see [`SdpProblem::equality_residual`].
    pub residual: f64,
    pub status: SdpStatus,
    /// Phase-I optimum; `None` when an objective was given.
    pub t: Option<f64>,
    /// `⟨C, X⟩` in objective mode, `t` in phase-I mode.
    pub objective: f64,
    pub iterations: usize,
    pub gap: f64,
    pub diagnostics: String,
}

#[derive(Clone, Debug)]
pub struct SdpOptions {
    pub max_iter: usize,
    pub gap_tol: f64,
    pub feas_tol: f64,
    /// Upper bound on `t` in phase-I.
    pub t_cap: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions {
            max_iter: 120,
            gap_tol: 1e-9,
            feas_tol: 1e-9,
            t_cap: 1.0,
        }
    }
}

pub fn lambda_min(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b))
}

/// Number of eigenvalues above `eps·λmax`; zero for a matrix with no
/// positive eigenvalue.
pub fn numerical_rank(m: &DMatrix<f64>, eps: f64) -> usize {
    if m.nrows() == 0 {
        return 0;
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym).eigenvalues;
    let lmax = eig.iter().fold(0.0f64, |a, &b| a.max(b));
    if lmax <= 0.0 {
        return 0;
    }
    eig.iter().filter(|&&l| l > eps * lmax).count()
}

/// Solves `p`: phase-I feasibility when no objective is set, otherwise
/// maximizes the objective.
pub fn solve(p: &SdpProblem, opts: &SdpOptions) -> SdpSolution {
    match &p.objective {
        None => solve_phase1(p, opts),
        Some(obj) => solve_objective(p, obj, opts),
    }
}

fn solve_phase1(p: &SdpProblem, opts: &SdpOptions) -> SdpSolution {
    // Y blocks, then a 1x1 slack block s with t + s = t_cap; t is the single free variable.
    let nb = p.blocks.len();
    let mut blocks = p.blocks.clone();
    blocks.push(1);
    let mut rows: Vec<ipm::Row> = p
        .constraints
        .iter()
        .map(|c| {
            let trace: f64 = c
                .entries
                .iter()
                .filter(|e| e.row == e.col)
                .map(|e| e.value)
                .sum();
            ipm::Row {
                entries: c.entries.clone(),
                free: vec![trace],
                rhs: c.rhs,
            }
        })
        .collect();
    rows.push(ipm::Row {
        entries: vec![Entry::new(nb, 0, 0, 1.0)],
        free: vec![1.0],
        rhs: opts.t_cap,
    });
    let core = ipm::CoreProblem {
        blocks,
        rows,
        cost: Vec::new(),
        free_cost: vec![-1.0],
    };
    let out = ipm::run(&core, opts);
    let t = out.w[0];
    let xs: Vec<DMatrix<f64>> = out.x[..nb]
        .iter()
        .map(|y| y + DMatrix::identity(y.nrows(), y.ncols()) * t)
        .collect();
    let mut xs = xs;
    let mut residual = p.equality_residual(&xs);
    if t > MARGINAL_T {
        if let Some(fixed) = p.project_affine(&xs) {
            let r = p.equality_residual(&fixed);
            if r < residual {
                xs = fixed;
                residual = r;
            }
        }
    }
    let lmins: Vec<f64> = xs.iter().map(lambda_min).collect();
    let trace_scale = xs.iter().map(|x| x.trace().abs()).fold(1.0f64, f64::max);
    // an exactly feasible point with λmin = l proves t* ≥ l
    let point_t = lmins.iter().copied().fold(f64::INFINITY, f64::min);
    let on_affine = residual <= 1e-10;
    let strictly_feasible = on_affine && point_t >= FEASIBLE_T * trace_scale;

    let accurate = out.converged || (out.pinf <= 1e-7 && out.dinf <= 1e-7 && out.rel_gap <= 1e-6);
    let status = if accurate {
        if t >= FEASIBLE_T {
            SdpStatus::Feasible
        } else if t > MARGINAL_T {
            SdpStatus::MarginallyFeasible
        } else {
            SdpStatus::Infeasible
        }
    } else if (out.pinf <= 1e-7 && t >= FEASIBLE_T) || strictly_feasible {
        // a strictly feasible point is a certificate on its own
        SdpStatus::Feasible
    } else if out.dinf <= 1e-7 && -out.dobj < MARGINAL_T {
        // weak duality bounds t from above by the dual objective
        SdpStatus::Infeasible
    } else if on_affine && point_t > MARGINAL_T {
        SdpStatus::MarginallyFeasible
    } else {
        SdpStatus::NumericalFailure
    };
    let status = match status {
        SdpStatus::Feasible
            if residual > 1e-8 || lmins.iter().any(|&l| l < -1e-9 * trace_scale) =>
        {
            SdpStatus::MarginallyFeasible
        }
        s => s,
    };
    SdpSolution {
        blocks: xs,
        lambda_min: lmins,
        residual,
        status,
        t: Some(t),
        objective: t,
        iterations: out.iterations,
        gap: out.rel_gap,
        diagnostics: out.diagnostics(),
    }
}

fn solve_objective(p: &SdpProblem, obj: &[Entry], opts: &SdpOptions) -> SdpSolution {
    let rows = p
        .constraints
        .iter()
        .map(|c| ipm::Row {
            entries: c.entries.clone(),
            free: Vec::new(),
            rhs: c.rhs,
        })
        .collect();
    let cost = obj
        .iter()
        .map(|e| Entry { value: -e.value, ..*e })
        .collect();
    let core = ipm::CoreProblem {
        blocks: p.blocks.clone(),
        rows,
        cost,
        free_cost: Vec::new(),
    };
    let out = ipm::run(&core, opts);
    let xs = out.x.clone();
    let residual = p.equality_residual(&xs);
    let lmins: Vec<f64> = xs.iter().map(lambda_min).collect();
    let status = if out.converged || (out.pinf <= 1e-7 && out.dinf <= 1e-7 && out.rel_gap <= 1e-6) {
        SdpStatus::Feasible
    } else {
        match solve_phase1(p, opts).status {
            SdpStatus::Infeasible => SdpStatus::Infeasible,
            _ => SdpStatus::NumericalFailure,
        }
    };
    SdpSolution {
        objective: inner(obj, &xs),
        blocks: xs,
        lambda_min: lmins,
        residual,
        status,
        t: None,
        iterations: out.iterations,
        gap: out.rel_gap,
        diagnostics: out.diagnostics(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_equal_one_is_feasible() {
        let mut p = SdpProblem::new(vec![1]);
        p.add_constraint(vec![Entry::new(0, 0, 0, 1.0)], 1.0).unwrap();
        let s = solve(&p, &SdpOptions::default());
        assert_eq!(s.status, SdpStatus::Feasible);
        assert!((s.blocks[0][(0, 0)] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn scalar_equal_minus_one_is_infeasible() {
        let mut p = SdpProblem::new(vec![1]);
        p.add_constraint(vec![Entry::new(0, 0, 0, 1.0)], -1.0).unwrap();
        let s = solve(&p, &SdpOptions::default());
        assert_eq!(s.status, SdpStatus::Infeasible);
        assert!(s.t.unwrap() < -0.5);
    }

    #[test]
    fn maximize_off_diagonal() {
        let mut p = SdpProblem::new(vec![2]);
        p.add_constraint(vec![Entry::new(0, 0, 0, 1.0)], 1.0).unwrap();
        p.add_constraint(vec![Entry::new(0, 1, 1, 1.0)], 1.0).unwrap();
        // ⟨C, X⟩ = X12 with C = [[0, 1/2], [1/2, 0]]
        p.set_objective(vec![Entry::new(0, 0, 1, 0.5)]).unwrap();
        let s = solve(&p, &SdpOptions::default());
        assert_eq!(s.status, SdpStatus::Feasible);
        assert!((s.blocks[0][(0, 1)] - 1.0).abs() < 1e-7, "{}", s.blocks[0]);
        assert!(s.lambda_min[0].abs() < 1e-7);
    }

    #[test]
    fn shape_errors() {
        let mut p = SdpProblem::new(vec![2]);
        assert!(p.add_constraint(vec![Entry::new(1, 0, 0, 1.0)], 1.0).is_err());
        assert!(p.add_constraint(vec![Entry::new(0, 0, 2, 1.0)], 1.0).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(p.add_dense_constraint(&[asym], 1.0).is_err());
    }

    #[test]
    fn duplicate_entries_merge() {
        let mut p = SdpProblem::new(vec![2]);
        p.add_constraint(
            vec![Entry::new(0, 1, 0, 1.0), Entry::new(0, 0, 1, 2.0)],
            0.0,
        )
        .unwrap();
        assert_eq!(p.constraints()[0].entries, vec![Entry::new(0, 0, 1, 3.0)]);
    }
}
