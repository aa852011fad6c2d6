//! Future-included dynamics in eigenbasis coordinates.
//!
//! A past state `|A(t)⟩ = Σ a_i(t)|λ_i⟩` evolves with `H`, a future state
//! `|B(t)⟩ = Σ b_i(t)|λ_i⟩` with `H^{†Q}`. Because the eigenvectors are
//! Q-orthonormal, every Q-inner product reduces to a plain dot product of
//! coefficient vectors.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{phase_factor, vec_norm, ComplexMatrix, SpectralData};
use crate::periodic::DominantSubset;
use crate::qgeometry::{q_split, QMetric};

/// Relative threshold below which `⟨B|_Q A⟩` counts as zero.
pub const VANISHING_DENOMINATOR: f64 = 1.0e-12;

/// Eigenbasis coefficients of the past state at `t_a` and the future state
/// at `t_b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatePair {
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    pub t_a: f64,
    pub t_b: f64,
}

/// Both coefficient vectors evolved to a common time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolvedPair {
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    pub t: f64,
}

impl StatePair {
    pub fn new(a: Vec<C64>, b: Vec<C64>, t_a: f64, t_b: f64) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
        }
        if !(t_b >= t_a) {
            return Err(Error::InvalidArgument(format!("T_B = {t_b} precedes T_A = {t_a}")));
        }
        Ok(Self { a, b, t_a, t_b })
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// Rescales both coefficient vectors to unit Q-norm.
    pub fn normalized(&self) -> Self {
        let na = vec_norm(&self.a);
        let nb = vec_norm(&self.b);
        Self {
            a: self.a.iter().map(|z| z / na).collect(),
            b: self.b.iter().map(|z| z / nb).collect(),
            ..self.clone()
        }
    }

    fn check(&self, s: &SpectralData) -> Result<()> {
        if self.dim() != s.dim() {
            return Err(Error::DimensionMismatch { expected: s.dim(), found: self.dim() });
        }
        Ok(())
    }
}

/// `a_i(t) = a_i(T_A)e^{−iλ_i(t−T_A)/ħ}`, `b_i(t) = b_i(T_B)e^{−iλ_i*(t−T_B)/ħ}`.
pub fn evolve_pair(s: &SpectralData, pair: &StatePair, t: f64, hbar: f64) -> Result<EvolvedPair> {
    pair.check(s)?;
    if !(t >= pair.t_a && t <= pair.t_b) {
        return Err(Error::TimeOutOfRange { t, t_a: pair.t_a, t_b: pair.t_b });
    }
    let a = pair
        .a
        .iter()
        .zip(&s.eigenvalues)
        .map(|(&a, &l)| a * phase_factor(l, t - pair.t_a, hbar))
        .collect();
    let b = pair
        .b
        .iter()
        .zip(&s.eigenvalues)
        .map(|(&b, &l)| b * phase_factor(l.conj(), t - pair.t_b, hbar))
        .collect();
    Ok(EvolvedPair { a, b, t })
}

/// `⟨B(t)|_Q A(t)⟩` evaluated at a chosen `t`.
pub fn amplitude_at(s: &SpectralData, pair: &StatePair, t: f64, hbar: f64) -> Result<C64> {
    let ev = evolve_pair(s, pair, t, hbar)?;
    Ok(ev.b.iter().zip(&ev.a).map(|(b, a)| b.conj() * a).sum())
}

/// Transition amplitude `⟨B(t)|_Q A(t)⟩`; independent of `t`, evaluated at `T_A`.
pub fn transition_amplitude(s: &SpectralData, pair: &StatePair, hbar: f64) -> Result<C64> {
    amplitude_at(s, pair, pair.t_a, hbar)
}

/// Closed-form maximizer of `|⟨B|_Q A⟩|` over Q-normalized pairs with
/// `T_B − T_A = period`: support on the dominant subset, `|a_i| = |b_i| = √w_i`,
/// `θ_{b_i} = 0` and `θ_{a_i} = θ_c + T·Re λ_i/ħ`.
pub fn maximize_states(
    s: &SpectralData,
    subset: &DominantSubset,
    period: f64,
    hbar: f64,
    weights: Option<&[f64]>,
    theta_c: f64,
) -> Result<StatePair> {
    if !(period > 0.0) {
        return Err(Error::InvalidArgument(format!("T must be positive, got {period}")));
    }
    if subset.indices.is_empty() {
        return Err(Error::EmptySubset);
    }
    let k = subset.indices.len();
    let w: Vec<f64> = match weights {
        Some(w) => {
            if w.len() != k {
                return Err(Error::DimensionMismatch { expected: k, found: w.len() });
            }
            if w.iter().any(|&x| !(x > 0.0)) {
                return Err(Error::InvalidArgument("weights must be positive".into()));
            }
            let total: f64 = w.iter().sum();
            if (total - 1.0).abs() > 1.0e-10 {
                return Err(Error::InvalidArgument(format!("weights sum to {total}, not 1")));
            }
            w.to_vec()
        }
        None => vec![1.0 / k as f64; k],
    };
    let n = s.dim();
    let mut a = vec![C64::new(0.0, 0.0); n];
    let mut b = vec![C64::new(0.0, 0.0); n];
    for (&i, &wi) in subset.indices.iter().zip(&w) {
        if i >= n {
            return Err(Error::DimensionMismatch { expected: n, found: i + 1 });
        }
        let amp = wi.sqrt();
        let theta_a = theta_c + period * s.eigenvalues[i].re / hbar;
        a[i] = C64::from_polar(amp, theta_a);
        b[i] = C64::new(amp, 0.0);
    }
    StatePair::new(a, b, 0.0, period)
}

/// Weak value `⟨B(t)|_Q O|A(t)⟩ / ⟨B(t)|_Q A(t)⟩`.
pub fn weak_value(
    op: &ComplexMatrix,
    s: &SpectralData,
    pair: &StatePair,
    t: f64,
    hbar: f64,
) -> Result<C64> {
    let rep = s.to_eigenbasis(op)?;
    weak_value_in_eigenbasis(&rep, s, pair, t, hbar)
}

/// As [`weak_value`] with the operator already expressed as `P⁻¹·O·P`.
pub fn weak_value_in_eigenbasis(
    rep: &ComplexMatrix,
    s: &SpectralData,
    pair: &StatePair,
    t: f64,
    hbar: f64,
) -> Result<C64> {
    let ev = evolve_pair(s, pair, t, hbar)?;
    let den: C64 = ev.b.iter().zip(&ev.a).map(|(b, a)| b.conj() * a).sum();
    let threshold = VANISHING_DENOMINATOR * vec_norm(&ev.a) * vec_norm(&ev.b);
    if !(den.norm() >= threshold) || den.norm() == 0.0 {
        return Err(Error::VanishingDenominator { modulus: den.norm(), threshold });
    }
    let ra = rep.matvec(&ev.a)?;
    let num: C64 = ev.b.iter().zip(&ra).map(|(b, x)| b.conj() * x).sum();
    Ok(num / den)
}

/// Default finite-difference step `10⁻⁴·ħ/‖H‖`, with `‖H‖` the spectral radius.
pub fn default_dt(s: &SpectralData, hbar: f64) -> f64 {
    let radius = s.eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max);
    if radius > 0.0 {
        1.0e-4 * hbar / radius
    } else {
        1.0e-4 * hbar
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeisenbergCheck {
    /// Centered finite difference of the weak value.
    pub derivative: C64,
    /// `(i/ħ)⟨[H_Qh, O]⟩`.
    pub predicted: C64,
    pub residual: f64,
}

/// Compares `d/dt⟨O⟩_Q^{BA}` with `(i/ħ)⟨[H_Qh, O]⟩_Q^{BA}` at time `t`.
pub fn heisenberg_check(
    op: &ComplexMatrix,
    s: &SpectralData,
    metric: &QMetric,
    pair: &StatePair,
    t: f64,
    dt: f64,
    hbar: f64,
) -> Result<HeisenbergCheck> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let h = s.reconstruct();
    let (h_qh, _) = q_split(&h, metric)?;
    let comm = h_qh.commutator(op)?;

    // keep the stencil inside [T_A, T_B]
    let centre = t.clamp(pair.t_a + dt, pair.t_b - dt);
    let rep = s.to_eigenbasis(op)?;
    let plus = weak_value_in_eigenbasis(&rep, s, pair, centre + dt, hbar)?;
    let minus = weak_value_in_eigenbasis(&rep, s, pair, centre - dt, hbar)?;
    let derivative = (plus - minus) / (2.0 * dt);
    let predicted = C64::new(0.0, 1.0 / hbar) * weak_value(&comm, s, pair, centre, hbar)?;
    Ok(HeisenbergCheck { derivative, predicted, residual: (derivative - predicted).norm() })
}

/// `|d/dt⟨O⟩ − (i/ħ)⟨[H_Qh, O]⟩|`.
pub fn heisenberg_residual(
    op: &ComplexMatrix,
    s: &SpectralData,
    metric: &QMetric,
    pair: &StatePair,
    t: f64,
    dt: f64,
    hbar: f64,
) -> Result<f64> {
    Ok(heisenberg_check(op, s, metric, pair, t, dt, hbar)?.residual)
}
