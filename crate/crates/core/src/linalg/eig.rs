//! Non-symmetric complex eigendecomposition.
//!
//! The matrix is reduced to upper Hessenberg form with Householder
//! reflections, then to complex Schur form `H = Z·T·Z†` by single-shift QR
//! sweeps with Wilkinson shifts. Eigenvectors are recovered from the
//! triangular factor by back-substitution and mapped back through `Z`.
//!
//! Output is fully deterministic: eigenpairs are ordered by imaginary part
//! (descending) then real part (ascending), and every eigenvector is scaled
//! to unit Euclidean norm with its largest component real and positive.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::lu::mat_inverse;
use super::matrix::{dot_conj, vec_norm, ComplexMatrix};
use crate::error::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const EPS: f64 = f64::EPSILON;

/// Default ceiling on cond(P) above which a matrix is treated as defective.
pub const DEFAULT_COND_CEILING: f64 = 1.0e10;
/// Default relative residual tolerance for `‖HP − PD‖_F / ‖H‖_F`.
pub const DEFAULT_TOL_EIG: f64 = 1.0e-10;

/// Eigenvector normalization convention attached to a [`SpectralData`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    /// Unit Euclidean norm, largest-modulus component real and positive.
    UnitNormRealMax,
    /// Caller-supplied eigenvector scaling.
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigOptions {
    pub tol_eig: f64,
    pub cond_ceiling: f64,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self { tol_eig: DEFAULT_TOL_EIG, cond_ceiling: DEFAULT_COND_CEILING }
    }
}

/// Eigenvalues with the diagonalizing matrix `P` (eigenvectors as columns)
/// and its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub eigenvalues: Vec<C64>,
    pub p: ComplexMatrix,
    pub p_inv: ComplexMatrix,
    pub cond_p: f64,
    pub gauge: Gauge,
}

impl SpectralData {
    /// Builds spectral data from explicitly chosen eigenvectors. Used to
    /// override the default gauge; no ordering is imposed.
    pub fn with_eigenvectors(eigenvalues: Vec<C64>, p: ComplexMatrix) -> Result<Self> {
        if eigenvalues.len() != p.dim() {
            return Err(Error::DimensionMismatch { expected: p.dim(), found: eigenvalues.len() });
        }
        let p_inv = mat_inverse(&p)?;
        let cond_p = spectral_norm(&p)? * spectral_norm(&p_inv)?;
        Ok(Self { eigenvalues, p, p_inv, cond_p, gauge: Gauge::Custom })
    }

    /// Same eigenbasis with column `i` of `P` multiplied by `factors[i]`.
    pub fn rescaled(&self, factors: &[C64]) -> Result<Self> {
        let n = self.dim();
        if factors.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: factors.len() });
        }
        let mut p = self.p.clone();
        for (j, &f) in factors.iter().enumerate() {
            if f == ZERO {
                return Err(Error::InvalidArgument("zero rescaling factor".into()));
            }
            for i in 0..n {
                p[(i, j)] *= f;
            }
        }
        Self::with_eigenvectors(self.eigenvalues.clone(), p)
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `P·diag(λ)·P⁻¹`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut pd = self.p.clone();
        let n = self.dim();
        for j in 0..n {
            for i in 0..n {
                pd[(i, j)] *= self.eigenvalues[j];
            }
        }
        &pd * &self.p_inv
    }

    /// Relative residual `‖HP − PD‖_F / ‖H‖_F`.
    pub fn residual(&self, h: &ComplexMatrix) -> Result<f64> {
        h.check_same_dim(&self.p)?;
        let hp = h * &self.p;
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (hp[(i, j)] - self.p[(i, j)] * self.eigenvalues[j]).norm_sqr();
            }
        }
        let scale = h.norm_fro();
        Ok(if scale > 0.0 { acc.sqrt() / scale } else { acc.sqrt() })
    }

    /// `‖P·P⁻¹ − I‖_F`.
    pub fn inverse_residual(&self) -> f64 {
        (&(&self.p * &self.p_inv) - &ComplexMatrix::identity(self.dim())).norm_fro()
    }

    /// Diagonal matrix elements `(P⁻¹·O·P)_nn`, i.e. `⟨λ_n|_Q O |λ_n⟩`.
    pub fn eigen_diagonal(&self, op: &ComplexMatrix) -> Result<Vec<C64>> {
        op.check_same_dim(&self.p)?;
        let op_p = op * &self.p;
        let n = self.dim();
        Ok((0..n)
            .map(|k| (0..n).map(|i| self.p_inv[(k, i)] * op_p[(i, k)]).sum())
            .collect())
    }

    /// Full eigenbasis representation `P⁻¹·O·P`.
    pub fn to_eigenbasis(&self, op: &ComplexMatrix) -> Result<ComplexMatrix> {
        op.check_same_dim(&self.p)?;
        Ok(&self.p_inv * &(op * &self.p))
    }
}

/// Eigendecomposition with default conditioning ceiling.
pub fn eig(h: &ComplexMatrix, tol_eig: f64) -> Result<SpectralData> {
    eig_with(h, &EigOptions { tol_eig, ..EigOptions::default() })
}

pub fn eig_with(h: &ComplexMatrix, opts: &EigOptions) -> Result<SpectralData> {
    let n = h.dim();
    if n == 0 {
        return Err(Error::Empty);
    }
    if let Some(pos) = h.as_slice().iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite { row: pos / n, col: pos % n });
    }

    let mut t = h.clone();
    let mut z = ComplexMatrix::identity(n);
    hessenberg(&mut t, &mut z);
    schur(&mut t, &mut z, true)?;

    let values: Vec<C64> = t.diagonal();
    let x = triangular_eigenvectors(&t);
    let raw = &z * &x;

    // Ordering by (Im desc, Re asc) with near-equal imaginary parts grouped.
    let scale = 1.0 + values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let order = spectral_order(&values, 1.0e-10 * scale);

    let eigenvalues: Vec<C64> = order.iter().map(|&k| values[k]).collect();
    let mut vectors: Vec<Vec<C64>> = order.iter().map(|&k| raw.column(k)).collect();
    for v in vectors.iter_mut() {
        normalize(v);
    }
    orthogonalize_clusters(&eigenvalues, &mut vectors, 1.0e-9 * scale)?;
    for v in vectors.iter_mut() {
        fix_gauge(v);
    }

    let mut p = ComplexMatrix::zeros(n);
    for (j, v) in vectors.iter().enumerate() {
        p.set_column(j, v);
    }

    let p_inv = match mat_inverse(&p) {
        Ok(inv) => inv,
        Err(Error::Singular { .. }) => {
            return Err(Error::NonDiagonalizable { cond: f64::INFINITY, residual: f64::NAN })
        }
        Err(e) => return Err(e),
    };
    let cond_p = spectral_norm(&p)? * spectral_norm(&p_inv)?;
    let data = SpectralData { eigenvalues, p, p_inv, cond_p, gauge: Gauge::UnitNormRealMax };
    let residual = data.residual(h)?;
    if !(cond_p <= opts.cond_ceiling) || !(residual <= opts.tol_eig) {
        return Err(Error::NonDiagonalizable { cond: cond_p, residual });
    }
    Ok(data)
}

/// Eigenvalues only, in the same order as [`eig`].
pub fn eigenvalues(h: &ComplexMatrix) -> Result<Vec<C64>> {
    let mut t = h.clone();
    let mut z = ComplexMatrix::identity(h.dim());
    hessenberg(&mut t, &mut z);
    schur(&mut t, &mut z, false)?;
    let values = t.diagonal();
    let scale = 1.0 + values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(spectral_order(&values, 1.0e-10 * scale).into_iter().map(|k| values[k]).collect())
}

/// Largest singular value, from the top eigenvalue of `A†A`.
pub fn spectral_norm(a: &ComplexMatrix) -> Result<f64> {
    let gram = (&a.adjoint() * a).hermitian_part();
    let vals = eigenvalues(&gram)?;
    Ok(vals.iter().map(|v| v.re).fold(0.0, f64::max).sqrt())
}

/// Householder reduction to upper Hessenberg form, accumulating into `z`.
fn hessenberg(a: &mut ComplexMatrix, z: &mut ComplexMatrix) {
    let n = a.dim();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let mut v: Vec<C64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let xnorm = vec_norm(&v);
        if xnorm == 0.0 {
            continue;
        }
        let phase = if v[0].norm() > 0.0 { v[0] / v[0].norm() } else { C64::new(1.0, 0.0) };
        let alpha = -phase * xnorm;
        v[0] -= alpha;
        let vnorm = vec_norm(&v);
        if vnorm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= vnorm);

        // a <- (I - 2vv†) a
        for j in 0..n {
            let s: C64 = v.iter().enumerate().map(|(i, vi)| vi.conj() * a[(k + 1 + i, j)]).sum();
            for (i, vi) in v.iter().enumerate() {
                a[(k + 1 + i, j)] -= *vi * s * 2.0;
            }
        }
        // a <- a (I - 2vv†), z <- z (I - 2vv†)
        for m in [&mut *a, &mut *z] {
            for i in 0..n {
                let s: C64 = v.iter().enumerate().map(|(j, vj)| m[(i, k + 1 + j)] * vj).sum();
                for (j, vj) in v.iter().enumerate() {
                    m[(i, k + 1 + j)] -= s * vj.conj() * 2.0;
                }
            }
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = ZERO;
        }
    }
}

/// Rotation `[[c, s], [-s̄, c]]` with real `c` mapping `(x, y)` to `(r, 0)`.
fn givens(x: C64, y: C64) -> (f64, C64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, ZERO);
    }
    if ax == 0.0 {
        return (0.0, C64::new(1.0, 0.0));
    }
    let rho = ax.hypot(ay);
    (ax / rho, (x / ax) * y.conj() / rho)
}

fn l1(z: C64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Single-shift QR iteration on an upper Hessenberg matrix. When `full` is
/// set the whole triangular factor is maintained (needed for eigenvectors).
fn schur(h: &mut ComplexMatrix, z: &mut ComplexMatrix, full: bool) -> Result<()> {
    let n = h.dim();
    if n < 2 {
        return Ok(());
    }
    let norm = h.norm_fro().max(f64::MIN_POSITIVE);
    let max_total = 100 * n.max(4);
    let mut total = 0usize;
    let mut its = 0usize;
    let mut hi = n - 1;

    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let mut s = l1(h[(l - 1, l - 1)]) + l1(h[(l, l)]);
            if s == 0.0 {
                s = norm;
            }
            if l1(h[(l, l - 1)]) <= EPS * s || h[(l, l - 1)].norm() <= f64::MIN_POSITIVE * norm {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            its = 0;
            continue;
        }
        its += 1;
        total += 1;
        if total > max_total {
            return Err(Error::NoConvergence { iterations: total });
        }

        let shift = if its.is_multiple_of(10) {
            let extra = if hi >= 2 { h[(hi - 1, hi - 2)].re.abs() } else { 0.0 };
            h[(hi, hi)] + C64::new(h[(hi, hi - 1)].re.abs() + extra, 0.0)
        } else {
            wilkinson(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        let (col_end, row_start) = if full { (n, 0) } else { (hi + 1, l) };
        let mut x = h[(l, l)] - shift;
        let mut y = h[(l + 1, l)];
        for k in l..hi {
            let (c, s) = givens(x, y);
            let start = if k > l { k - 1 } else { l };
            for j in start..col_end {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = a * c + s * b;
                h[(k + 1, j)] = -s.conj() * a + b * c;
            }
            let row_end = (k + 2).min(hi);
            for i in row_start..=row_end {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * c + b * s.conj();
                h[(i, k + 1)] = -a * s + b * c;
            }
            if full {
                for i in 0..n {
                    let a = z[(i, k)];
                    let b = z[(i, k + 1)];
                    z[(i, k)] = a * c + b * s.conj();
                    z[(i, k + 1)] = -a * s + b * c;
                }
            }
            if k > l {
                h[(k + 1, k - 1)] = ZERO;
            }
            if k + 1 < hi {
                x = h[(k + 1, k)];
                y = h[(k + 2, k)];
            }
        }
    }
    Ok(())
}

/// Eigenvalue of the trailing 2×2 block closest to its last diagonal entry.
fn wilkinson(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mean = (a + d) * 0.5;
    let mu1 = mean + disc;
    let mu2 = mean - disc;
    if (mu1 - d).norm() <= (mu2 - d).norm() {
        mu1
    } else {
        mu2
    }
}

/// Columns are eigenvectors of the upper triangular `t`.
fn triangular_eigenvectors(t: &ComplexMatrix) -> ComplexMatrix {
    let n = t.dim();
    let smin = (EPS * t.norm_fro()).max(f64::MIN_POSITIVE);
    let mut x = ComplexMatrix::zeros(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        x[(k, k)] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = t[(i, k)];
            for j in i + 1..k {
                acc += t[(i, j)] * x[(j, k)];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < smin {
                denom = C64::new(smin, 0.0);
            }
            x[(i, k)] = -acc / denom;
        }
        // rescale column to avoid overflow on near-defective input
        let big = (0..=k).map(|i| x[(i, k)].norm()).fold(0.0, f64::max);
        if big > 1.0e150 {
            for i in 0..=k {
                x[(i, k)] /= big;
            }
        }
    }
    x
}

/// Permutation sorting eigenvalues by Im descending, then Re ascending.
/// Eigenvalues whose imaginary parts lie within `group_tol` of the first
/// member of their run are treated as tied.
fn spectral_order(values: &[C64], group_tol: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        values[b].im.total_cmp(&values[a].im).then(values[a].re.total_cmp(&values[b].re))
    });
    let mut out = Vec::with_capacity(idx.len());
    let mut start = 0;
    while start < idx.len() {
        let lead = values[idx[start]].im;
        let mut end = start + 1;
        while end < idx.len() && lead - values[idx[end]].im <= group_tol {
            end += 1;
        }
        let mut group = idx[start..end].to_vec();
        group.sort_by(|&a, &b| values[a].re.total_cmp(&values[b].re).then(a.cmp(&b)));
        out.extend(group);
        start = end;
    }
    out
}

fn normalize(v: &mut [C64]) {
    let nrm = vec_norm(v);
    if nrm > 0.0 {
        v.iter_mut().for_each(|z| *z /= nrm);
    }
}

/// Unit norm with the (first) largest-modulus component real and positive.
fn fix_gauge(v: &mut [C64]) {
    normalize(v);
    let big = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if big == 0.0 {
        return;
    }
    let k = v.iter().position(|z| z.norm() >= big * (1.0 - 1.0e-12)).unwrap_or(0);
    let phase = v[k].conj() / v[k].norm();
    v.iter_mut().for_each(|z| *z *= phase);
    v[k] = C64::new(v[k].norm(), 0.0);
}

/// Gram–Schmidt inside each cluster of (numerically) equal eigenvalues so a
/// semisimple eigenspace gets a well-conditioned basis.
fn orthogonalize_clusters(values: &[C64], vectors: &mut [Vec<C64>], tol: f64) -> Result<()> {
    let n = values.len();
    let mut cluster: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in 0..i {
            if (values[i] - values[j]).norm() <= tol {
                cluster[i] = cluster[j];
                break;
            }
        }
    }
    for i in 0..n {
        let members: Vec<usize> = (0..i).filter(|&j| cluster[j] == cluster[i]).collect();
        if members.is_empty() {
            continue;
        }
        for _pass in 0..2 {
            for &j in &members {
                let proj = dot_conj(&vectors[j], &vectors[i]);
                let (head, tail) = vectors.split_at_mut(i);
                for (x, y) in tail[0].iter_mut().zip(&head[j]) {
                    *x -= proj * y;
                }
            }
        }
        let nrm = vec_norm(&vectors[i]);
        if nrm < 1.0e-8 {
            return Err(Error::NonDiagonalizable { cond: f64::INFINITY, residual: f64::NAN });
        }
        normalize(&mut vectors[i]);
    }
    Ok(())
}

/// `Σ_n e^{−iλ_n t/ħ} ⟨λ_n|_Q O |λ_n⟩ = Tr(e^{−iHt/ħ} O)`, summed over the
/// full spectrum.
pub fn trace_weighted_exp(s: &SpectralData, op: &ComplexMatrix, t: f64, hbar: f64) -> Result<C64> {
    let diag = s.eigen_diagonal(op)?;
    Ok(diag
        .iter()
        .zip(&s.eigenvalues)
        .map(|(&d, &lambda)| d * phase_factor(lambda, t, hbar))
        .sum())
}

/// `e^{−iλt/ħ}`.
pub fn phase_factor(lambda: C64, t: f64, hbar: f64) -> C64 {
    (C64::new(0.0, -t / hbar) * lambda).exp()
}
