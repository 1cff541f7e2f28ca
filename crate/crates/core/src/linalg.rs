//! Thin dense-matrix helpers over `faer`.

use faer::{c64, Mat, MatRef, Side};

use crate::error::{Error, Result};

pub type CMat = Mat<c64>;

pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub const ONE: c64 = c64 { re: 1.0, im: 0.0 };
pub const I: c64 = c64 { re: 0.0, im: 1.0 };

/// Largest absolute entry.
pub fn max_abs(m: MatRef<'_, c64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

/// `max|M - M†| / max(max|M|, 1)`.
pub fn hermitian_residual(m: MatRef<'_, c64>) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst / max_abs(m).max(1.0)
}

/// `max|U†U - I|`.
pub fn unitarity_residual(u: MatRef<'_, c64>) -> f64 {
    let g = u.adjoint() * u;
    let mut worst = 0.0f64;
    for j in 0..g.ncols() {
        for i in 0..g.nrows() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn commutator(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    a * b - b * a
}

pub fn frobenius(m: MatRef<'_, c64>) -> f64 {
    m.norm_l2()
}

/// Largest singular value.
pub fn operator_norm(m: MatRef<'_, c64>) -> f64 {
    m.singular_values()
        .ok()
        .and_then(|s| s.first().copied())
        .unwrap_or(f64::NAN)
}

pub fn identity(n: usize) -> CMat {
    Mat::identity(n, n)
}

/// Rotates every column so its largest-magnitude entry is real and positive.
/// Ties resolve to the lowest row index.
pub fn fix_column_phases(v: &mut CMat) {
    for j in 0..v.ncols() {
        let mut best = 0usize;
        let mut best_abs = -1.0f64;
        for i in 0..v.nrows() {
            let a = v[(i, j)].norm();
            if a > best_abs * (1.0 + 1e-12) + 1e-300 {
                best = i;
                best_abs = a;
            }
        }
        if best_abs <= 0.0 {
            continue;
        }
        let phase = v[(best, j)].conj() / best_abs;
        for i in 0..v.nrows() {
            v[(i, j)] *= phase;
        }
        v[(best, j)] = c64::new(v[(best, j)].re, 0.0);
    }
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and
/// phase-fixed eigenvector columns.
pub fn eigh(m: MatRef<'_, c64>) -> Result<(Vec<f64>, CMat)> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let values: Vec<f64> = (0..s.nrows()).map(|k| s[k].re).collect();
    let mut vectors = evd.U().to_owned();
    fix_column_phases(&mut vectors);
    Ok((values, vectors))
}

pub fn eigvalsh(m: MatRef<'_, c64>) -> Result<Vec<f64>> {
    let vals = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    Ok(vals)
}

/// `V diag(f(λ)) V†` for a spectral decomposition.
pub fn spectral_function(values: &[f64], vectors: MatRef<'_, c64>, f: impl Fn(f64) -> c64) -> CMat {
    let n = vectors.nrows();
    let k = values.len();
    let scaled = Mat::from_fn(n, k, |i, j| vectors[(i, j)] * f(values[j]));
    scaled * vectors.adjoint()
}

/// Column `j` of `m` as an owned vector.
pub fn column(m: MatRef<'_, c64>, j: usize) -> Vec<c64> {
    (0..m.nrows()).map(|i| m[(i, j)]).collect()
}

pub fn dot(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[c64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn mat_vec(m: MatRef<'_, c64>, v: &[c64]) -> Vec<c64> {
    let mut out = vec![ZERO; m.nrows()];
    for (j, &x) in v.iter().enumerate() {
        if x == ZERO {
            continue;
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o += m[(i, j)] * x;
        }
    }
    out
}

/// `⟨v| M |v⟩`.
pub fn expectation(m: MatRef<'_, c64>, v: &[c64]) -> c64 {
    dot(v, &mat_vec(m, v))
}

pub fn from_columns(cols: &[Vec<c64>]) -> CMat {
    let n = cols.first().map_or(0, Vec::len);
    Mat::from_fn(n, cols.len(), |i, j| cols[j][i])
}

pub fn scaled(m: MatRef<'_, c64>, s: c64) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s)
}
