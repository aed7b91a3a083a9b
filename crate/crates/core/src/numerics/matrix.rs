use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// Column vector from a slice.
    pub fn column(v: &[C64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c].conj();
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul: {}x{} times {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Self::zeros(self.rows, rhs.cols);
        let n = rhs.cols;
        for i in 0..self.rows {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let rhs_row = &rhs.data[k * n..(k + 1) * n];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self^H * rhs` without materializing the adjoint.
    pub fn adjoint_matmul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.rows, rhs.rows,
            "adjoint_matmul: ({}x{})^H times {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Self::zeros(self.cols, rhs.cols);
        let n = rhs.cols;
        for k in 0..self.rows {
            let rhs_row = &rhs.data[k * n..(k + 1) * n];
            for i in 0..self.cols {
                let a = self.data[k * self.cols + i].conj();
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let out_row = &mut out.data[i * n..(i + 1) * n];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn add_assign(&mut self, rhs: &Self) {
        assert_eq!(self.shape(), rhs.shape());
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }

    /// `self += s * rhs`
    pub fn axpy(&mut self, s: C64, rhs: &Self) {
        assert_eq!(self.shape(), rhs.shape());
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += s * b;
        }
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        assert_eq!(self.shape(), rhs.shape(), "elementwise op on mismatched shapes");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    /// `diag(d) * self`
    pub fn scale_rows(&self, d: &[C64]) -> Self {
        assert_eq!(d.len(), self.rows);
        let mut out = self.clone();
        for (r, &s) in d.iter().enumerate() {
            for z in &mut out.data[r * self.cols..(r + 1) * self.cols] {
                *z *= s;
            }
        }
        out
    }

    /// `self * diag(d)`
    pub fn scale_cols(&self, d: &[C64]) -> Self {
        assert_eq!(d.len(), self.cols);
        let mut out = self.clone();
        for r in 0..self.rows {
            for (z, &s) in out.data[r * self.cols..(r + 1) * self.cols].iter_mut().zip(d) {
                *z *= s;
            }
        }
        out
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    /// `Re tr(self^H rhs)`, the real inner product on C^{m x n}.
    pub fn real_inner(&self, rhs: &Self) -> f64 {
        assert_eq!(self.shape(), rhs.shape());
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    /// Horizontal concatenation `[A_1 A_2 ...]`.
    pub fn hstack(blocks: &[&Self]) -> Result<Self> {
        let Some(first) = blocks.first() else {
            return Err(Error::DimensionMismatch("hstack of zero blocks".into()));
        };
        let rows = first.rows;
        if blocks.iter().any(|b| b.rows != rows) {
            return Err(Error::DimensionMismatch("hstack: row counts differ".into()));
        }
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        for r in 0..rows {
            let mut offset = 0;
            for b in blocks {
                out.data[r * cols + offset..r * cols + offset + b.cols].copy_from_slice(b.row(r));
                offset += b.cols;
            }
        }
        Ok(out)
    }

    /// Vertical concatenation `[A_1; A_2; ...]`.
    pub fn vstack(blocks: &[&Self]) -> Result<Self> {
        let Some(first) = blocks.first() else {
            return Err(Error::DimensionMismatch("vstack of zero blocks".into()));
        };
        let cols = first.cols;
        if blocks.iter().any(|b| b.cols != cols) {
            return Err(Error::DimensionMismatch("vstack: column counts differ".into()));
        }
        let mut data = Vec::with_capacity(blocks.iter().map(|b| b.data.len()).sum());
        for b in blocks {
            data.extend_from_slice(&b.data);
        }
        Ok(Self {
            rows: blocks.iter().map(|b| b.rows).sum(),
            cols,
            data,
        })
    }

    /// `(A + A^H) / 2`
    pub fn hermitian_part(&self) -> Self {
        assert!(self.is_square());
        let n = self.rows;
        Self::from_fn(n, n, |r, c| (self[(r, c)] + self[(c, r)].conj()) * 0.5)
    }

    /// Max-abs asymmetry relative to the largest entry magnitude.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.rows;
        let scale = self.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst / scale
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(r) {
                write!(f, "{:+.4e}{:+.4e}j ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Squared 2-norm of a complex vector.
pub fn vec_norm_sq(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn vec_norm(v: &[C64]) -> f64 {
    vec_norm_sq(v).sqrt()
}

/// `Re <a, b>` for complex vectors.
pub fn vec_real_inner(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

pub fn vec_sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn matmul_and_adjoint_matmul_agree() {
        let a = ComplexMatrix::from_fn(3, 2, |r, k| c(r as f64 + 1.0, k as f64 - 0.5));
        let b = ComplexMatrix::from_fn(3, 4, |r, k| c((r * k) as f64, 1.0));
        let direct = a.adjoint().matmul(&b);
        let fused = a.adjoint_matmul(&b);
        assert!(direct.sub(&fused).frobenius_norm() < 1e-14);
    }

    #[test]
    fn stacking_shapes() {
        let a = ComplexMatrix::zeros(2, 3);
        let b = ComplexMatrix::identity(2);
        let h = ComplexMatrix::hstack(&[&a, &b]).unwrap();
        assert_eq!(h.shape(), (2, 5));
        assert_eq!(h[(1, 4)], c(1.0, 0.0));
        let v = ComplexMatrix::vstack(&[&a, &ComplexMatrix::zeros(1, 3)]).unwrap();
        assert_eq!(v.shape(), (3, 3));
        assert!(ComplexMatrix::hstack(&[&a, &ComplexMatrix::zeros(3, 1)]).is_err());
    }

    #[test]
    fn new_rejects_wrong_length() {
        assert!(ComplexMatrix::new(2, 2, vec![c(0.0, 0.0); 3]).is_err());
    }

    #[test]
    fn diagonal_scaling_matches_matmul() {
        let a = ComplexMatrix::from_fn(3, 3, |r, k| c(r as f64, k as f64 + 1.0));
        let d = vec![c(1.0, 1.0), c(0.0, -2.0), c(3.0, 0.0)];
        let dm = ComplexMatrix::from_fn(3, 3, |r, k| if r == k { d[r] } else { c(0.0, 0.0) });
        assert!(a.scale_rows(&d).sub(&dm.matmul(&a)).frobenius_norm() < 1e-14);
        assert!(a.scale_cols(&d).sub(&a.matmul(&dm)).frobenius_norm() < 1e-14);
    }
}
