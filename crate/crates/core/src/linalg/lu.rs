use num_complex::Complex64 as C64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Relative pivot threshold below which a matrix is reported singular.
pub const SINGULAR_PIVOT_RATIO: f64 = 1.0e-12;

/// LU factorization with partial pivoting, `P·A = L·U` packed in one matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &ComplexMatrix) -> Result<Self> {
        let n = a.dim();
        let threshold = SINGULAR_PIVOT_RATIO * a.norm_fro();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let (p, pivot_abs) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pivot_abs > threshold) {
                return Err(Error::Singular { pivot: k });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= factor * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, rhs: &[C64]) -> Result<Vec<C64>> {
        let n = self.lu.dim();
        if rhs.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: rhs.len() });
        }
        let mut x: Vec<C64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc / self.lu[(i, i)];
        }
        Ok(x)
    }

    pub fn inverse(&self) -> ComplexMatrix {
        let n = self.lu.dim();
        let mut inv = ComplexMatrix::zeros(n);
        let mut e = vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            e.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            e[j] = C64::new(1.0, 0.0);
            let col = self.solve(&e).expect("dimension checked");
            inv.set_column(j, &col);
        }
        inv
    }
}

/// Inverse by partially pivoted LU.
pub fn mat_inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(Lu::factor(a)?.inverse())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn identity_inverts_to_itself() {
        let id = ComplexMatrix::identity(4);
        assert_eq!(mat_inverse(&id).unwrap(), id);
    }

    #[test]
    fn upper_unit_triangular() {
        let a = ComplexMatrix::from_rows(&[vec![c(1.0), c(1.0)], vec![c(0.0), c(1.0)]]).unwrap();
        let inv = mat_inverse(&a).unwrap();
        let expected =
            ComplexMatrix::from_rows(&[vec![c(1.0), c(-1.0)], vec![c(0.0), c(1.0)]]).unwrap();
        assert_eq!(inv, expected);
        let prod = a.matmul(&inv).unwrap();
        assert_eq!(prod, ComplexMatrix::identity(2));
    }

    #[test]
    fn rank_deficient_is_singular() {
        let a = ComplexMatrix::from_rows(&[vec![c(1.0), c(1.0)], vec![c(1.0), c(1.0)]]).unwrap();
        assert!(matches!(mat_inverse(&a), Err(Error::Singular { pivot: 1 })));
    }

    #[test]
    fn complex_entries_round_trip() {
        let a = ComplexMatrix::from_rows(&[
            vec![C64::new(0.0, 2.0), C64::new(1.0, -1.0), c(0.5)],
            vec![c(3.0), C64::new(0.0, 0.0), C64::new(-1.0, 1.0)],
            vec![C64::new(1.0, 1.0), c(2.0), C64::new(0.0, -3.0)],
        ])
        .unwrap();
        let inv = mat_inverse(&a).unwrap();
        let resid = (&a.matmul(&inv).unwrap() - &ComplexMatrix::identity(3)).norm_fro();
        assert!(resid < 1e-14, "residual {resid}");
    }
}
