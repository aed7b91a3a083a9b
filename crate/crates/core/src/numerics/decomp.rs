use nalgebra::DMatrix;

use super::matrix::{vec_norm, ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Relative tolerance on `max|A - A^H| / max|A|` for Hermitian inputs.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Iteration cap for [`spectral_norm`].
pub const POWER_ITERATION_CAP: usize = 10_000;

/// Lower-triangular Cholesky factor `L` with `A = L L^H`.
///
/// The input is checked for Hermitian symmetry and symmetrized before
/// factoring, so analytically Hermitian inputs polluted by roundoff pass.
pub fn cholesky(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "cholesky of a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let defect = a.hermitian_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian { asymmetry: defect });
    }
    let a = a.hermitian_part();
    let n = a.rows();
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut pivot = a[(j, j)].re;
        for k in 0..j {
            pivot -= l[(j, k)].norm_sqr();
        }
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite { index: j, pivot });
        }
        let d = pivot.sqrt();
        l[(j, j)] = C64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// `ln det(A)` for Hermitian positive-definite `A`.
pub fn logdet_hpd(a: &ComplexMatrix) -> Result<f64> {
    let l = cholesky(a)?;
    Ok(2.0 * (0..l.rows()).map(|i| l[(i, i)].re.ln()).sum::<f64>())
}

/// Inverse of a Hermitian positive-definite matrix through its Cholesky factor.
pub fn hpd_inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let l = cholesky(a)?;
    let n = l.rows();
    let mut inv = ComplexMatrix::zeros(n, n);
    let mut y = vec![C64::new(0.0, 0.0); n];
    let mut x = vec![C64::new(0.0, 0.0); n];
    for col in 0..n {
        // L y = e_col
        for i in 0..n {
            let mut s = if i == col { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            for k in 0..i {
                s -= l[(i, k)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        // L^H x = y
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l[(k, i)].conj() * x[k];
            }
            x[i] = s / l[(i, i)];
        }
        for i in 0..n {
            inv[(i, col)] = x[i];
        }
    }
    Ok(inv.hermitian_part())
}

/// Largest singular value by power iteration on the smaller Gram matrix.
///
/// The start vector is all-ones, so repeated calls are bit-identical. The
/// iteration stops once the eigen-residual `||G v - mu v||` drops below
/// `tol * mu`.
pub fn spectral_norm(a: &ComplexMatrix, tol: f64) -> Result<f64> {
    assert!(tol > 0.0, "spectral_norm tolerance must be positive");
    assert!(a.rows() > 0 && a.cols() > 0, "spectral_norm of an empty matrix");
    if a.as_slice().iter().all(|z| z.re == 0.0 && z.im == 0.0) {
        return Ok(0.0);
    }
    // Work in the smaller dimension: G = A^H A (cols) or A A^H (rows).
    let owned;
    let m = if a.cols() <= a.rows() {
        a
    } else {
        owned = a.adjoint();
        &owned
    };
    let n = m.cols();
    let gram = |v: &[C64]| -> Vec<C64> {
        let av = m.matmul(&ComplexMatrix::column(v));
        m.adjoint_matmul(&av).into_vec()
    };

    let mut v = vec![C64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    let mut w = gram(&v);
    if vec_norm(&w) == 0.0 {
        // all-ones lies in the null space; restart on the heaviest column
        let heaviest = (0..n)
            .max_by(|&i, &j| {
                let ci: f64 = (0..m.rows()).map(|r| m[(r, i)].norm_sqr()).sum();
                let cj: f64 = (0..m.rows()).map(|r| m[(r, j)].norm_sqr()).sum();
                ci.total_cmp(&cj)
            })
            .unwrap_or(0);
        v = vec![C64::new(0.0, 0.0); n];
        v[heaviest] = C64::new(1.0, 0.0);
        w = gram(&v);
    }

    let mut mu = 0.0;
    for _ in 0..POWER_ITERATION_CAP {
        // Rayleigh quotient with ||v|| = 1
        mu = v.iter().zip(&w).map(|(x, y)| (x.conj() * y).re).sum::<f64>();
        let residual = vec_norm(
            &w.iter().zip(&v).map(|(y, x)| y - x * mu).collect::<Vec<_>>(),
        );
        if residual <= tol * mu {
            return Ok(mu.max(0.0).sqrt());
        }
        let norm = vec_norm(&w);
        v = w.iter().map(|z| z / norm).collect();
        w = gram(&v);
    }
    Err(Error::NoConvergence {
        iterations: POWER_ITERATION_CAP,
        estimate: mu.max(0.0).sqrt(),
    })
}

/// [`spectral_norm`] with a dense SVD fallback when the power iteration stalls.
pub fn spectral_norm_or_svd(a: &ComplexMatrix, tol: f64) -> f64 {
    match spectral_norm(a, tol) {
        Ok(s) => s,
        Err(_) => singular_values(a).into_iter().fold(0.0, f64::max),
    }
}

/// All singular values via a dense SVD.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    to_nalgebra(a).singular_values().iter().copied().collect()
}

pub fn to_nalgebra(a: &ComplexMatrix) -> DMatrix<C64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.as_slice())
}

pub fn from_nalgebra(m: &DMatrix<C64>) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
}
