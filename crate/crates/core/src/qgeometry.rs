//! The modified inner product `I_Q(u, v) = u† Q v` with `Q = (P†)⁻¹ P⁻¹`,
//! under which a diagonalizable Hamiltonian is normal and its eigenvectors
//! are orthonormal.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{dot_conj, ComplexMatrix, Gauge, SpectralData};

/// Hermitian positive-definite metric together with its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct QMetric {
    pub q: ComplexMatrix,
    pub q_inv: ComplexMatrix,
    pub source_gauge: Gauge,
}

impl QMetric {
    pub fn identity(n: usize) -> Self {
        Self {
            q: ComplexMatrix::identity(n),
            q_inv: ComplexMatrix::identity(n),
            source_gauge: Gauge::UnitNormRealMax,
        }
    }

    pub fn dim(&self) -> usize {
        self.q.dim()
    }

    fn check_vec(&self, v: &[C64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: v.len() });
        }
        Ok(())
    }

    /// `‖Q − Q†‖_F / ‖Q‖_F`.
    pub fn hermiticity_error(&self) -> f64 {
        (&self.q - &self.q.adjoint()).norm_fro() / self.q.norm_fro()
    }

    /// Positive definiteness of the Hermitian part, via Cholesky.
    pub fn is_positive_definite(&self) -> bool {
        cholesky_succeeds(&self.q.hermitian_part())
    }

    /// Largest `|⟨λ_i|Q|λ_j⟩ − δ_ij|` over the eigenbasis of `s`.
    pub fn biorthonormality_error(&self, s: &SpectralData) -> Result<f64> {
        self.q.check_same_dim(&s.p)?;
        let gram = &s.p.adjoint() * &(&self.q * &s.p);
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - C64::new(delta, 0.0)).norm());
            }
        }
        Ok(worst)
    }
}

/// `Q = (P†)⁻¹ P⁻¹`, formed as `M†M` with `M = P⁻¹` so it is Hermitian by
/// construction; `Q⁻¹ = P P†`.
pub fn build_q_metric(s: &SpectralData) -> Result<QMetric> {
    if !s.p_inv.is_finite() {
        return Err(Error::Singular { pivot: 0 });
    }
    let m = &s.p_inv;
    let q = (&m.adjoint() * m).hermitian_part();
    let q_inv = (&s.p * &s.p.adjoint()).hermitian_part();
    Ok(QMetric { q, q_inv, source_gauge: s.gauge })
}

/// `u† Q v`.
pub fn q_inner(u: &[C64], v: &[C64], metric: &QMetric) -> Result<C64> {
    metric.check_vec(u)?;
    metric.check_vec(v)?;
    let qv = metric.q.matvec(v)?;
    Ok(dot_conj(u, &qv))
}

/// `u† Q A v`.
pub fn q_matrix_element(u: &[C64], a: &ComplexMatrix, v: &[C64], metric: &QMetric) -> Result<C64> {
    a.check_same_dim(&metric.q)?;
    let av = a.matvec(v)?;
    q_inner(u, &av, metric)
}

/// Q-Hermitian conjugate `A^{†Q} = Q⁻¹ A† Q`.
pub fn q_adjoint(a: &ComplexMatrix, metric: &QMetric) -> Result<ComplexMatrix> {
    a.check_same_dim(&metric.q)?;
    Ok(&metric.q_inv * &(&a.adjoint() * &metric.q))
}

/// Q-Hermitian and anti-Q-Hermitian parts, `(H ± H^{†Q})/2`.
pub fn q_split(h: &ComplexMatrix, metric: &QMetric) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let adj = q_adjoint(h, metric)?;
    let half = C64::new(0.5, 0.0);
    Ok(((h + &adj).scale(half), (h - &adj).scale(half)))
}

/// Relative commutator `‖[H, H^{†Q}]‖_F / ‖H‖_F²`.
pub fn q_normality_defect(h: &ComplexMatrix, metric: &QMetric) -> Result<f64> {
    let adj = q_adjoint(h, metric)?;
    let comm = h.commutator(&adj)?;
    let scale = h.norm_fro().powi(2);
    Ok(if scale > 0.0 { comm.norm_fro() / scale } else { comm.norm_fro() })
}

pub fn is_q_normal(h: &ComplexMatrix, metric: &QMetric, tol: f64) -> Result<bool> {
    Ok(q_normality_defect(h, metric)? <= tol)
}

/// Relative defect `‖A^{†Q} − A‖_F / ‖A‖_F` (zero for Q-Hermitian `A`).
pub fn q_hermiticity_defect(a: &ComplexMatrix, metric: &QMetric) -> Result<f64> {
    let adj = q_adjoint(a, metric)?;
    let scale = a.norm_fro();
    let d = (&adj - a).norm_fro();
    Ok(if scale > 0.0 { d / scale } else { d })
}

/// Seeded random Q-Hermitian operator `(G + G^{†Q})/2`, entries of `G`
/// uniform in `[−scale, scale] + i[−scale, scale]`.
///
/// Evaluated as `Q⁻¹·K` with `K = (QG + (QG)†)/2`, which is the same
/// operator written so that `Q·O` is exactly Hermitian.
pub fn random_q_hermitian(metric: &QMetric, seed: u64, scale: f64) -> ComplexMatrix {
    let n = metric.dim();
    let g = random_matrix(n, seed, scale);
    let k = (&metric.q * &g).hermitian_part();
    &metric.q_inv * &k
}

/// Seeded matrix with entries uniform in `[−scale, scale] + i[−scale, scale]`.
pub fn random_matrix(n: usize, seed: u64, scale: f64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * n)
        .map(|_| C64::new(rng.gen_range(-scale..=scale), rng.gen_range(-scale..=scale)))
        .collect();
    ComplexMatrix::from_flat(n, data)
}

fn cholesky_succeeds(a: &ComplexMatrix) -> bool {
    let n = a.dim();
    let mut l = ComplexMatrix::zeros(n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        l[(j, j)] = C64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    true
}
