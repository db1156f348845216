//! Thin wrappers over faer for the dense symmetric problems used here.

use faer::{Mat, Side};

use crate::error::{Error, Result};

/// Row-major square matrix to a faer matrix.
fn to_mat(n: usize, a: &[f64]) -> Result<Mat<f64>> {
    if a.len() != n * n {
        return Err(Error::Linalg(format!("expected {} entries, got {}", n * n, a.len())));
    }
    Ok(Mat::from_fn(n, n, |i, j| a[i * n + j]))
}

/// Ascending eigenvalues of a symmetric row-major matrix (lower triangle read).
pub fn sym_eigenvalues(n: usize, a: &[f64]) -> Result<Vec<f64>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let m = to_mat(n, a)?;
    let mut ev = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Linalg(format!("{e:?}")))?;
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Ascending eigenvalues with eigenvectors; `vectors[k]` pairs with `values[k]`.
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

pub fn sym_eigen(n: usize, a: &[f64]) -> Result<SymEigen> {
    let m = to_mat(n, a)?;
    let eig = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Linalg(format!("{e:?}")))?;
    let s = eig.S();
    let u = eig.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[i].total_cmp(&s[j]));
    Ok(SymEigen {
        values: order.iter().map(|&i| s[i]).collect(),
        vectors: order
            .iter()
            .map(|&k| (0..n).map(|r| u[(r, k)]).collect())
            .collect(),
    })
}

/// `det(A)` as `(sign, ln|det|)` via partial-pivot LU. A singular matrix
/// returns sign 0 and `-inf`.
pub fn log_det(n: usize, a: &[f64]) -> Result<(f64, f64)> {
    if n == 0 {
        return Ok((1.0, 0.0));
    }
    let m = to_mat(n, a)?;
    let lu = m.partial_piv_lu();
    let u = lu.U();
    let mut sign = 1.0;
    let mut log = 0.0;
    for i in 0..n {
        let d = u[(i, i)];
        if d == 0.0 {
            return Ok((0.0, f64::NEG_INFINITY));
        }
        if !d.is_finite() {
            return Err(Error::Linalg(format!("non-finite pivot {d} at {i}")));
        }
        if d < 0.0 {
            sign = -sign;
        }
        log += d.abs().ln();
    }
    let (fwd, _) = lu.P().arrays();
    sign *= permutation_sign(fwd);
    Ok((sign, log))
}

fn permutation_sign(perm: &[usize]) -> f64 {
    let mut seen = vec![false; perm.len()];
    let mut sign = 1.0;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}
