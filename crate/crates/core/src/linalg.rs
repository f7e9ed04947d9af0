//! Small dense and tridiagonal eigenvalue helpers.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use crate::error::{QesError, Result};

const SCHUR_MAX_ITER: usize = 10_000;

/// Eigenvalues of a general real square matrix via the real Schur form.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if m.nrows() != m.ncols() {
        return Err(QesError::invalid("eigenvalues of a non-square matrix"));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(QesError::invalid("non-finite matrix entry"));
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or_else(|| QesError::Convergence("Schur iteration did not converge".into()))?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect())
}

/// Unit vector spanning the (numerical) null space of `m`: the right singular
/// vector of the smallest singular value.
pub fn null_vector(m: &DMatrix<f64>) -> DVector<f64> {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, &s)| if s < best.1 { (i, s) } else { best });
    v_t.row(idx).transpose()
}

/// Orthonormal basis (as columns) of the span of `vectors`. Directions whose
/// singular value falls below `rel_tol · σ_max` are dropped.
pub fn orthonormal_basis(dim: usize, vectors: &[DVector<f64>], rel_tol: f64) -> DMatrix<f64> {
    if vectors.is_empty() {
        return DMatrix::zeros(dim, 0);
    }
    let stacked = DMatrix::from_columns(vectors);
    let svd = stacked.svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.max();
    let keep: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| smax > 0.0 && s > rel_tol * smax)
        .map(|(i, _)| u.column(i).into_owned())
        .collect();
    if keep.is_empty() {
        DMatrix::zeros(dim, 0)
    } else {
        DMatrix::from_columns(&keep)
    }
}

/// Number of eigenvalues strictly below `x` of the symmetric tridiagonal
/// matrix with diagonal `diag` and off-diagonal `off` (Sturm sequence).
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let denom = if q == 0.0 { f64::EPSILON * (off[i - 1].abs() + 1e-300) } else { q };
        q = diag[i] - x - off[i - 1] * off[i - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k` smallest eigenvalues, ascending, of a symmetric tridiagonal
/// matrix, by bisection on the Sturm count.
pub fn tridiagonal_lowest(diag: &[f64], off: &[f64], k: usize) -> Vec<f64> {
    let n = diag.len();
    assert_eq!(off.len() + 1, n.max(1), "off-diagonal length must be n - 1");
    let k = k.min(n);
    if k == 0 {
        return Vec::new();
    }
    // Gershgorin interval
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let radius = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - radius);
        hi = hi.max(diag[i] + radius);
    }
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    lo -= 1e-12 * span + 1e-300;
    hi += 1e-12 * span + 1e-300;
    let scale = lo.abs().max(hi.abs());

    (0..k)
        .map(|j| {
            let (mut a, mut b) = (lo, hi);
            // invariant: count(a) <= j < count(b)
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if b - a <= 4.0 * f64::EPSILON * scale.max(mid.abs()) || mid == a || mid == b {
                    break;
                }
                if sturm_count(diag, off, mid) > j {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}
