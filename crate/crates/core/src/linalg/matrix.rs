use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Dense square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diag(&d)
    }

    /// Builds a matrix from rows, checking squareness and finiteness.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare { rows: n, cols: row.len() });
            }
            for (j, z) in row.iter().enumerate() {
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
            data.extend_from_slice(row);
        }
        Ok(Self { n, data })
    }

    /// Builds a matrix from separate real and imaginary parts.
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::DimensionMismatch { expected: re.len(), found: im.len() });
        }
        let rows: Vec<Vec<C64>> = re
            .iter()
            .zip(im)
            .map(|(r, i)| {
                if r.len() != i.len() {
                    return Err(Error::DimensionMismatch { expected: r.len(), found: i.len() });
                }
                Ok(r.iter().zip(i).map(|(&a, &b)| C64::new(a, b)).collect())
            })
            .collect::<Result<_>>()?;
        Self::from_rows(&rows)
    }

    /// Row-major constructor from a flat slice of length n².
    pub fn from_flat(n: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), n * n, "flat data must have n*n entries");
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn re_parts(&self) -> Vec<Vec<f64>> {
        self.rows().map(|r| r.iter().map(|z| z.re).collect()).collect()
    }

    pub fn im_parts(&self) -> Vec<Vec<f64>> {
        self.rows().map(|r| r.iter().map(|z| z.im).collect()).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[C64]> {
        self.data.chunks(self.n.max(1))
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[C64]) {
        for (i, &z) in col.iter().enumerate() {
            self[(i, j)] = z;
        }
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&z| z * c).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            let a_row = self.row(i);
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for (k, &a) in a_row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: v.len() });
        }
        Ok(self.rows().map(|r| r.iter().zip(v).map(|(&a, &b)| a * b).sum()).collect())
    }

    /// Commutator `self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(&self.mul_unchecked(other) - &other.mul_unchecked(self))
    }

    pub fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        Ok(())
    }

    /// Replaces `self` by `(self + self†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
            }
        }
        out
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        assert_eq!(self.n, rhs.n);
        ComplexMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        assert_eq!(self.n, rhs.n);
        ComplexMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        assert_eq!(self.n, rhs.n);
        self.mul_unchecked(rhs)
    }
}

/// Euclidean inner product `u† v`.
pub fn dot_conj(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
