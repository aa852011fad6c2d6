//! Periodic-time expectation values
//! `⟨O⟩ = Tr(e^{−iHt_p/ħ} O) / Tr(e^{−iHt_p/ħ})`, their reduction to the
//! dominant subset of eigenvalues, and the objective `f(t_p) = |Tr e^{−iHt_p/ħ}|²`.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{phase_factor, trace_weighted_exp, ComplexMatrix, SpectralData};

/// Relative threshold (per dimension) for a vanishing trace.
pub const VANISHING_TRACE: f64 = 1.0e-12;
/// Default degeneracy tolerance for the dominant subset.
pub const DEFAULT_TOL_DEG: f64 = 1.0e-9;
/// Default "much smaller" factor for `|B| ≪ min spacing`.
pub const DEFAULT_KAPPA: f64 = 1.0e-2;

/// Indices of eigenvalues whose imaginary part attains the maximum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominantSubset {
    pub indices: Vec<usize>,
    /// Maximal imaginary part `B`.
    pub b_max: f64,
    /// `B` minus the largest excluded imaginary part; infinite when nothing
    /// is excluded.
    pub gap: f64,
}

impl DominantSubset {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Real parts of the subset eigenvalues, in subset order.
    pub fn real_parts(&self, s: &SpectralData) -> Vec<f64> {
        self.indices.iter().map(|&i| s.eigenvalues[i].re).collect()
    }

    /// Smallest gap between distinct real parts in the subset (infinite for
    /// fewer than two distinct values).
    pub fn min_real_spacing(&self, s: &SpectralData, merge_tol: f64) -> f64 {
        let mut re = self.real_parts(s);
        re.sort_by(f64::total_cmp);
        re.windows(2)
            .map(|w| w[1] - w[0])
            .filter(|&d| d > merge_tol)
            .fold(f64::INFINITY, f64::min)
    }
}

/// `{i : max_j Im λ_j − Im λ_i ≤ tol_deg·(1 + |max Im λ|)}`.
pub fn dominant_subset(s: &SpectralData, tol_deg: f64) -> DominantSubset {
    let b_max = s.eigenvalues.iter().map(|l| l.im).fold(f64::NEG_INFINITY, f64::max);
    let cut = tol_deg * (1.0 + b_max.abs());
    let mut indices = Vec::new();
    let mut next = f64::NEG_INFINITY;
    for (i, l) in s.eigenvalues.iter().enumerate() {
        if b_max - l.im <= cut {
            indices.push(i);
        } else {
            next = next.max(l.im);
        }
    }
    DominantSubset { indices, b_max, gap: b_max - next }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodicExpectation {
    pub value: C64,
    pub t_p: f64,
    pub numerator: C64,
    pub denominator: C64,
    pub reduced: bool,
    pub subset_size: usize,
}

impl PeriodicExpectation {
    /// `|Im v| / (1 + |v|)`.
    pub fn im_ratio(&self) -> f64 {
        im_ratio(self.value)
    }
}

pub fn im_ratio(v: C64) -> f64 {
    v.im.abs() / (1.0 + v.norm())
}

fn check_time(t_p: f64) -> Result<()> {
    if !(t_p >= 0.0) || !t_p.is_finite() {
        return Err(Error::InvalidArgument(format!("t_p must be non-negative, got {t_p}")));
    }
    Ok(())
}

/// Exact periodic-time expectation value over the full spectrum.
pub fn periodic_expectation(
    s: &SpectralData,
    op: &ComplexMatrix,
    t_p: f64,
    hbar: f64,
) -> Result<PeriodicExpectation> {
    check_time(t_p)?;
    let n = s.dim();
    let numerator = trace_weighted_exp(s, op, t_p, hbar)?;
    let denominator = trace_weighted_exp(s, &ComplexMatrix::identity(n), t_p, hbar)?;
    let threshold = VANISHING_TRACE * n as f64;
    if !(denominator.norm() >= threshold) {
        return Err(Error::VanishingTrace { modulus: denominator.norm(), threshold });
    }
    Ok(PeriodicExpectation {
        value: numerator / denominator,
        t_p,
        numerator,
        denominator,
        reduced: false,
        subset_size: n,
    })
}

/// Dominant-subset approximation
/// `Σ_{n∈A} ⟨λ_n|_Q O|λ_n⟩e^{−iθ_n} / Σ_{n∈A} e^{−iθ_n}`, `θ_n = Re λ_n·t_p/ħ`.
pub fn reduced_expectation(
    s: &SpectralData,
    op: &ComplexMatrix,
    t_p: f64,
    hbar: f64,
    subset: &DominantSubset,
) -> Result<PeriodicExpectation> {
    check_time(t_p)?;
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    if let Some(&bad) = subset.indices.iter().find(|&&i| i >= s.dim()) {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: bad + 1 });
    }
    let diag = s.eigen_diagonal(op)?;
    let mut numerator = C64::new(0.0, 0.0);
    let mut denominator = C64::new(0.0, 0.0);
    for &i in &subset.indices {
        let w = C64::from_polar(1.0, -s.eigenvalues[i].re * t_p / hbar);
        numerator += diag[i] * w;
        denominator += w;
    }
    let threshold = VANISHING_TRACE * subset.len() as f64;
    if !(denominator.norm() >= threshold) {
        return Err(Error::VanishingTrace { modulus: denominator.norm(), threshold });
    }
    Ok(PeriodicExpectation {
        value: numerator / denominator,
        t_p,
        numerator,
        denominator,
        reduced: true,
        subset_size: subset.len(),
    })
}

/// `f(t_p) = |Tr e^{−iHt_p/ħ}|²`. With a subset, the dominant-subset
/// approximant `e^{2Bt_p/ħ}·Σ_{n,m∈A} cos((Re λ_m − Re λ_n)t_p/ħ)`.
pub fn amplitude_modulus_sq(
    s: &SpectralData,
    t_p: f64,
    hbar: f64,
    subset: Option<&DominantSubset>,
) -> f64 {
    match subset {
        None => {
            let tr: C64 = s.eigenvalues.iter().map(|&l| phase_factor(l, t_p, hbar)).sum();
            tr.norm_sqr()
        }
        Some(sub) => {
            let re = sub.real_parts(s);
            let mut acc = 0.0;
            for &am in &re {
                for &an in &re {
                    acc += ((am - an) * t_p / hbar).cos();
                }
            }
            (2.0 * sub.b_max * t_p / hbar).exp() * acc
        }
    }
}

/// Analytic `df/dt_p` of the dominant-subset approximant.
pub fn amplitude_modulus_sq_derivative(
    s: &SpectralData,
    t_p: f64,
    hbar: f64,
    subset: &DominantSubset,
) -> f64 {
    let re = subset.real_parts(s);
    let b = subset.b_max;
    let mut acc = 0.0;
    for &am in &re {
        for &an in &re {
            let delta = am - an;
            let arg = delta * t_p / hbar;
            acc += 2.0 * b * arg.cos() - delta * arg.sin();
        }
    }
    acc * (2.0 * b * t_p / hbar).exp() / hbar
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealityReport {
    pub exact: PeriodicExpectation,
    pub reduced: PeriodicExpectation,
    pub exact_im_ratio: f64,
    pub reduced_im_ratio: f64,
    pub subset: DominantSubset,
    /// Exactly one dominant eigenstate.
    pub single_dominant: bool,
    /// `B ≤ 0` and `|B| ≤ κ·(min spacing of Re λ over the subset)`.
    pub spacing_prerequisite: bool,
    pub min_real_spacing: f64,
    /// Suppression `e^{−gap·t_p/ħ}` of excluded eigenvalues.
    pub suppression: f64,
}

/// Exact and reduced expectation values with the prerequisites under which
/// their reality is guaranteed.
pub fn reality_report(
    s: &SpectralData,
    op: &ComplexMatrix,
    t_p: f64,
    hbar: f64,
    tol_deg: f64,
    kappa: f64,
) -> Result<RealityReport> {
    let subset = dominant_subset(s, tol_deg);
    let exact = periodic_expectation(s, op, t_p, hbar)?;
    let reduced = reduced_expectation(s, op, t_p, hbar, &subset)?;
    let scale = 1.0 + subset.b_max.abs();
    let merge_tol = tol_deg * (1.0 + s.eigenvalues.iter().map(|l| l.re.abs()).fold(0.0, f64::max));
    let min_real_spacing = subset.min_real_spacing(s, merge_tol);
    let spacing_prerequisite = subset.b_max <= tol_deg * scale
        && subset.b_max.abs() <= kappa * min_real_spacing + tol_deg * scale;
    Ok(RealityReport {
        exact_im_ratio: exact.im_ratio(),
        reduced_im_ratio: reduced.im_ratio(),
        single_dominant: subset.len() == 1,
        spacing_prerequisite,
        min_real_spacing,
        suppression: (-subset.gap * t_p / hbar).exp(),
        exact,
        reduced,
        subset,
    })
}
