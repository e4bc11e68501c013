//! Small dense complex matrices for the MIMO link computations.

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Result, SimError};
use crate::num::Real;

/// Row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex<T>,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        CMat { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(SimError::Dimension("ragged rows".into()));
        }
        Ok(CMat {
            rows: n_rows,
            cols: n_cols,
            data: rows.concat(),
        })
    }

    /// Real diagonal matrix.
    pub fn diag(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex::new(v, T::zero());
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(SimError::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] = out.data[i * rhs.cols + j] + a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// `self · selfᴴ`.
    pub fn gram_outer(&self) -> Self {
        let n = self.rows;
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = Complex::zero();
                for k in 0..self.cols {
                    acc = acc + self[(i, k)] * self[(j, k)].conj();
                }
                out[(i, j)] = acc;
                out[(j, i)] = acc.conj();
            }
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.scale(s)).collect(),
        }
    }

    pub fn scale_in_place(&mut self, s: T) {
        for z in &mut self.data {
            *z = z.scale(s);
        }
    }

    /// `self += s · other` for same-shaped matrices.
    pub fn add_scaled(&mut self, other: &Self, s: T) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(SimError::Dimension(
                "add of differently shaped matrices".into(),
            ));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a = *a + b.scale(s);
        }
        Ok(())
    }

    /// Multiply column `c` by `factor(c)`, in place.
    pub fn scale_columns(&mut self, factor: impl Fn(usize) -> Complex<T>) {
        let cols = self.cols;
        for (i, z) in self.data.iter_mut().enumerate() {
            *z = *z * factor(i % cols);
        }
    }

    /// Add `v` to every diagonal entry.
    pub fn add_diag(&mut self, v: T) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)].re = self[(i, i)].re + v;
        }
    }

    pub fn frobenius_sqr(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    pub fn trace_re(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc + self[(i, i)].re)
    }

    /// Columns `0..n` of the matrix.
    pub fn leading_columns(&self, n: usize) -> Self {
        Self::from_fn(self.rows, n, |r, c| self[(r, c)])
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting. `None` when
    /// a pivot falls below `T::epsilon()` times the largest entry.
    pub fn inverse(&self) -> Option<Self> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()));
        if !(scale > T::zero()) {
            return None;
        }
        let tol = scale * T::epsilon() * T::from_count(n);
        for col in 0..n {
            let (piv, piv_abs) =
                (col..n)
                    .map(|r| (r, a[(r, col)].norm()))
                    .fold(
                        (col, -T::one()),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if !(piv_abs > tol) {
                return None;
            }
            if piv != col {
                for c in 0..n {
                    a.data.swap(piv * n + c, col * n + c);
                    inv.data.swap(piv * n + c, col * n + c);
                }
            }
            let d = a[(col, col)].inv();
            for c in 0..n {
                a[(col, c)] = a[(col, c)] * d;
                inv[(col, c)] = inv[(col, c)] * d;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f.is_zero() {
                    continue;
                }
                for c in 0..n {
                    a[(r, c)] = a[(r, c)] - f * a[(col, c)];
                    inv[(r, c)] = inv[(r, c)] - f * inv[(col, c)];
                }
            }
        }
        Some(inv)
    }

    /// Determinant by LU with partial pivoting.
    pub fn determinant(&self) -> Result<Complex<T>> {
        if self.rows != self.cols {
            return Err(SimError::Dimension(
                "determinant of a non-square matrix".into(),
            ));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Complex::new(T::one(), T::zero());
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| a[(x, col)].norm().partial_cmp(&a[(y, col)].norm()).unwrap())
                .unwrap_or(col);
            if a[(piv, col)].is_zero() {
                return Ok(Complex::zero());
            }
            if piv != col {
                for c in 0..n {
                    a.data.swap(piv * n + c, col * n + c);
                }
                det = -det;
            }
            let p = a[(col, col)];
            det = det * p;
            for r in col + 1..n {
                let f = a[(r, col)] / p;
                for c in col..n {
                    a[(r, c)] = a[(r, c)] - f * a[(col, c)];
                }
            }
        }
        Ok(det)
    }
}

impl<T> Index<(usize, usize)> for CMat<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex<T> {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for CMat<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[r * self.cols + c]
    }
}
