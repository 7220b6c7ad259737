#![allow(dead_code)]

use nalgebra::DMatrix;
use quartic_cert::cert::Certificate;
use quartic_cert::gen::rng;
use quartic_cert::sdp::SdpProblem;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn gaussian(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(r))
}

fn random_symmetric(r: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = gaussian(r, n, n);
    (&a + a.transpose()) * 0.5
}

fn random_blocks(r: &mut ChaCha8Rng) -> Vec<usize> {
    let nb = r.random_range(1..=3);
    (0..nb).map(|_| r.random_range(2..=6)).collect()
}

fn dense_inner(a: &[DMatrix<f64>], x: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(x).map(|(p, q)| p.dot(q)).sum()
}

/// Random constraints satisfied by a known positive definite point.
pub fn feasible_problem(seed: u64) -> SdpProblem {
    let mut r = rng(seed);
    let blocks = random_blocks(&mut r);
    let total: usize = blocks.iter().map(|n| n * (n + 1) / 2).sum();
    let m = r.random_range(1..=total.min(12));
    let x0: Vec<DMatrix<f64>> = blocks
        .iter()
        .map(|&n| {
            let b = gaussian(&mut r, n, n);
            &b * b.transpose() + DMatrix::identity(n, n)
        })
        .collect();
    let mut p = SdpProblem::new(blocks.clone());
    for _ in 0..m {
        let a: Vec<DMatrix<f64>> = blocks.iter().map(|&n| random_symmetric(&mut r, n)).collect();
        let rhs = dense_inner(&a, &x0);
        p.add_dense_constraint(&a, rhs).unwrap();
    }
    p
}

/// Constraints with `Σ y_i A_i = W ≻ 0` and `bᵀy = −1`, so no PSD point
/// satisfies them.
pub fn infeasible_problem(seed: u64) -> SdpProblem {
    let mut r = rng(seed);
    let blocks = random_blocks(&mut r);
    let total: usize = blocks.iter().map(|n| n * (n + 1) / 2).sum();
    let m = r.random_range(1..=total.min(8));
    let w: Vec<DMatrix<f64>> = blocks
        .iter()
        .map(|&n| {
            let b = gaussian(&mut r, n, n);
            (&b * b.transpose()) * 0.1 + DMatrix::identity(n, n) * 0.1
        })
        .collect();
    let y: Vec<f64> = (0..m)
        .map(|i| if i + 1 == m { 1.0 } else { StandardNormal.sample(&mut r) })
        .collect();
    let mut mats = Vec::new();
    let mut rhs = Vec::new();
    let mut acc: Vec<DMatrix<f64>> = w.clone();
    let mut dot = 0.0;
    for yi in y.iter().take(m - 1) {
        let a: Vec<DMatrix<f64>> = blocks.iter().map(|&n| random_symmetric(&mut r, n)).collect();
        let b: f64 = StandardNormal.sample(&mut r);
        for (k, ak) in a.iter().enumerate() {
            acc[k] -= ak * *yi;
        }
        dot += yi * b;
        mats.push(a);
        rhs.push(b);
    }
    mats.push(acc);
    rhs.push(-1.0 - dot);
    let mut p = SdpProblem::new(blocks);
    for (a, b) in mats.iter().zip(rhs) {
        p.add_dense_constraint(a, b).unwrap();
    }
    p
}

/// Random PSD matrix of size `n` and rank at most `rank`.
pub fn random_psd(seed: u64, n: usize, rank: usize) -> DMatrix<f64> {
    let mut r = rng(seed);
    let b = gaussian(&mut r, n, rank);
    &b * b.transpose()
}

/// Fields of a certificate that a tampering step may modify.
#[derive(Clone, Copy, Debug)]
pub enum Field {
    QmultCoeffs,
    QmultSquare,
    PCoeffs,
    PSquare,
    FactorSquare,
}

pub const FIELDS: [Field; 5] = [
    Field::QmultCoeffs,
    Field::QmultSquare,
    Field::PCoeffs,
    Field::PSquare,
    Field::FactorSquare,
];

fn argmax_abs(v: &[f64]) -> usize {
    (0..v.len()).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap_or(0)
}

fn largest(list: &[Vec<f64>]) -> usize {
    (0..list.len())
        .max_by(|&a, &b| {
            let na = list[a].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let nb = list[b].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            na.total_cmp(&nb)
        })
        .unwrap_or(0)
}

/// Adds `rel · ‖v‖∞` to the largest entry of `v`, with a random sign.
fn bump(v: &mut [f64], rel: f64, r: &mut ChaCha8Rng) {
    let i = argmax_abs(v);
    let scale = v[i].abs().max(1e-300);
    let sign = if r.random::<bool>() { 1.0 } else { -1.0 };
    v[i] += sign * rel * scale;
}

/// Perturbs one field by a relative amount `rel`. Square lists are tampered
/// in their largest member. Returns `false` when the field does not exist.
pub fn tamper(cert: &mut Certificate, field: Field, rel: f64, seed: u64) -> bool {
    let mut r = rng(seed);
    match field {
        Field::QmultCoeffs => bump(&mut cert.qmult.coeffs, rel, &mut r),
        Field::PCoeffs => bump(&mut cert.p.coeffs, rel, &mut r),
        Field::QmultSquare => {
            let k = largest(&cert.qmult.squares);
            bump(&mut cert.qmult.squares[k], rel, &mut r)
        }
        Field::PSquare => {
            let k = largest(&cert.p.squares);
            bump(&mut cert.p.squares[k], rel, &mut r)
        }
        Field::FactorSquare => {
            let Some(f) = cert.qmult.factors.as_mut() else {
                return false;
            };
            let list = if r.random::<bool>() { &mut f.q2.squares } else { &mut f.f2.squares };
            let k = largest(list);
            bump(&mut list[k], rel, &mut r)
        }
    }
    true
}
