//! Small dense helpers shared by the Gaussian-state and measurement code.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

pub(crate) fn cholesky(m: &DMatrix<f64>, what: &'static str) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(m.clone()).ok_or(Error::NotPositiveDefinite(what))
}

/// `v^T A^{-1} v` computed as `|L^{-1} v|^2`, so the result is never negative.
pub(crate) fn inverse_quadratic_form(factor: &Cholesky<f64, Dyn>, v: &DVector<f64>) -> f64 {
    let y = factor
        .l_dirty()
        .solve_lower_triangular(v)
        .expect("Cholesky factor has a positive diagonal");
    y.norm_squared()
}

pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

pub(crate) fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub(crate) fn select(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |a, b| m[(rows[a], cols[b])])
}

/// Checks that `sites` is a non-empty set of distinct indices below `len`.
pub(crate) fn validate_subset(sites: &[usize], len: usize) -> Result<()> {
    if sites.is_empty() {
        return Err(Error::EmptySubset);
    }
    let mut seen = vec![false; len];
    for &s in sites {
        if s >= len {
            return Err(Error::IndexOutOfRange { index: s, len });
        }
        if seen[s] {
            return Err(Error::DuplicateIndex(s));
        }
        seen[s] = true;
    }
    Ok(())
}

pub(crate) fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
