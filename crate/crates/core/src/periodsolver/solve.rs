use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_complex::Complex64 as C64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use super::rational::{exact, to_f64, RationalSpacing};
use crate::error::{Error, Result};

/// Relative window within which `α₁t_p/h` is treated as an integer.
const SNAP: f64 = 1.0e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverBounds {
    /// Largest multiplier of the minimal lattice step (`a` or `l` in the
    /// order-3 and order-n constructions).
    pub max_scale: u64,
    pub max_m1: i64,
    pub max_candidates: usize,
}

impl Default for SolverBounds {
    fn default() -> Self {
        Self { max_scale: 10_000, max_m1: 1_000_000, max_candidates: 16 }
    }
}

/// An aligned period with its integer certificate
/// `α_i·t_p − h·m_i = C`, `0 ≤ C < h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodCandidate {
    pub t_p: f64,
    pub m: Vec<i64>,
    #[serde(rename = "C")]
    pub c: f64,
    pub f_value: f64,
    pub damped_f: f64,
    pub scale: u64,
    pub approx_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Alignment {
    pub aligned: bool,
    /// Circular mean of the residues `α_i·t_p mod h`, in `[0, h)`.
    #[serde(rename = "C")]
    pub c: f64,
    /// Largest pairwise circular distance between residues, in units of `h`.
    pub spread: f64,
}

/// Largest pairwise circular distance of `α_i·t_p mod h`, as a fraction of `h`.
pub fn alignment_spread(alphas: &[f64], t_p: f64, h: f64) -> f64 {
    let res: Vec<f64> = alphas.iter().map(|&a| (a * t_p).rem_euclid(h) / h).collect();
    let mut worst: f64 = 0.0;
    for (i, &x) in res.iter().enumerate() {
        for &y in &res[i + 1..] {
            let d = (x - y).abs();
            worst = worst.max(d.min(1.0 - d));
        }
    }
    worst
}

/// Checks `α_i·t_p ≡ C (mod h)` for all `i` within `tol_align·h`.
pub fn verify_alignment(alphas: &[f64], t_p: f64, h: f64, tol_align: f64) -> Alignment {
    if alphas.is_empty() {
        return Alignment { aligned: true, c: 0.0, spread: 0.0 };
    }
    let spread = alignment_spread(alphas, t_p, h);
    let mean: C64 = alphas.iter().map(|&a| C64::from_polar(1.0, TAU * (a * t_p) / h)).sum();
    let mut c = (mean.arg() / TAU).rem_euclid(1.0) * h;
    if c >= h * (1.0 - 1e-12) {
        c = 0.0;
    }
    Alignment { aligned: spread <= tol_align, c, spread }
}

/// `|Σ_i mult_i·e^{−iα_i t/ħ}|²`.
pub fn level_amplitude_sq(alphas: &[f64], mult: Option<&[usize]>, t: f64, hbar: f64) -> f64 {
    let tr: C64 = alphas
        .iter()
        .enumerate()
        .map(|(i, &a)| C64::from_polar(mult.map_or(1.0, |m| m[i] as f64), -a * t / hbar))
        .sum();
    tr.norm_sqr()
}

/// `floor(α₁·span_m/span_α)`, rounded up when within the snap window of the
/// next integer. Returns the integer and `x − m₁`.
fn base_offset(a1: &BigRational, span_m: &BigInt, span_alpha: &BigRational) -> (BigInt, f64) {
    let x = a1 * BigRational::from_integer(span_m.clone()) / span_alpha;
    let floor = x.floor();
    let frac = to_f64(&(&x - &floor));
    let xf = to_f64(&x);
    if 1.0 - frac <= SNAP * (1.0 + xf.abs()) {
        (floor.to_integer() + 1, 0.0)
    } else {
        (floor.to_integer(), frac)
    }
}

/// Internal emission tolerance (units of `h`): rationalization error grows
/// with the lattice span, float error with the size of the phases.
fn emission_tol(approx_error: f64, order: usize, span_m: f64, phase: f64) -> f64 {
    10.0 * order as f64 * span_m * approx_error + 1e-12 * (1.0 + phase)
}

struct Lattice<'a> {
    alphas: &'a [f64],
    steps: Vec<BigInt>,
    approx_error: f64,
}

impl Lattice<'_> {
    fn enumerate(&self, h: f64, bounds: &SolverBounds) -> Result<Vec<PeriodCandidate>> {
        let n = self.alphas.len();
        let a1 = exact(self.alphas[0]);
        let span_alpha = exact(self.alphas[n - 1]) - &a1;
        let unit: BigInt = self.steps.iter().sum();
        let hbar = h / TAU;
        let amax = self.alphas.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let mut out = Vec::new();
        for scale in 1..=bounds.max_scale {
            if out.len() >= bounds.max_candidates {
                break;
            }
            let span_m = &unit * BigInt::from(scale);
            let (m1, frac) = base_offset(&a1, &span_m, &span_alpha);
            if m1.abs() > BigInt::from(bounds.max_m1) {
                break;
            }
            let mut m = Vec::with_capacity(n);
            let mut acc = m1.clone();
            m.push(acc.to_i64());
            for step in &self.steps {
                acc += step * BigInt::from(scale);
                m.push(acc.to_i64());
            }
            let Some(m) = m.into_iter().collect::<Option<Vec<i64>>>() else {
                break;
            };
            let t_p = h * to_f64(&(BigRational::from_integer(span_m.clone()) / &span_alpha));
            let c = (h * frac).clamp(0.0, h);
            let c = if c >= h { 0.0 } else { c };
            let tol = emission_tol(self.approx_error, n, span_m.to_f64().unwrap_or(f64::INFINITY), amax * t_p / h);
            if alignment_spread(self.alphas, t_p, h) > tol {
                continue;
            }
            let f = level_amplitude_sq(self.alphas, None, t_p, hbar);
            out.push(PeriodCandidate {
                t_p,
                m,
                c,
                f_value: f,
                damped_f: f,
                scale,
                approx_error: self.approx_error,
            });
        }
        if out.is_empty() {
            return Err(Error::EmptyWithinBounds(format!(
                "no aligned period up to scale {} with |m1| <= {}",
                bounds.max_scale, bounds.max_m1
            )));
        }
        Ok(out)
    }
}

/// Order-2 closed form: enumerates `Δ = m₂ − m₁ = 1, 2, …` and takes the
/// unique `m₁` with `α₂m₁ ≤ α₁m₂ < α₂m₁ + (α₂ − α₁)`.
pub fn solve_order2(alphas: [f64; 2], h: f64, bounds: &SolverBounds) -> Result<Vec<PeriodCandidate>> {
    let [x1, x2] = alphas;
    if !(x1.is_finite() && x2.is_finite() && x2 > x1) {
        return Err(Error::InvalidArgument(format!("order-2 levels must satisfy α₁ < α₂, got {alphas:?}")));
    }
    check_h(h)?;
    let (a1, a2) = (exact(x1), exact(x2));
    let delta = &a2 - &a1;
    let hbar = h / TAU;
    let mut out = Vec::new();
    for gap in 1..=bounds.max_scale {
        if out.len() >= bounds.max_candidates {
            break;
        }
        let d = BigInt::from(gap);
        let (m1, frac) = base_offset(&a1, &d, &delta);
        if m1.abs() > BigInt::from(bounds.max_m1) {
            break;
        }
        let m2 = &m1 + &d;
        let lhs = &a2 * BigRational::from_integer(m1.clone());
        let mid = &a1 * BigRational::from_integer(m2.clone());
        let inside = lhs <= mid && mid < &lhs + &delta;
        if !inside && frac != 0.0 {
            continue;
        }
        let (Some(m1), Some(m2)) = (m1.to_i64(), m2.to_i64()) else {
            break;
        };
        let t_p = h * to_f64(&(BigRational::from_integer(d) / &delta));
        let c = if inside { (h * frac).min(h) } else { 0.0 };
        let c = if c >= h { 0.0 } else { c };
        let tol = emission_tol(0.0, 2, gap as f64, x1.abs().max(x2.abs()) * t_p / h);
        if alignment_spread(&alphas, t_p, h) > tol {
            continue;
        }
        let f = level_amplitude_sq(&alphas, None, t_p, hbar);
        out.push(PeriodCandidate {
            t_p,
            m: vec![m1, m2],
            c,
            f_value: f,
            damped_f: f,
            scale: gap,
            approx_error: 0.0,
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyWithinBounds(format!(
            "no (m1, m2) with m2 - m1 <= {} and |m1| <= {}",
            bounds.max_scale, bounds.max_m1
        )));
    }
    Ok(out)
}

/// Order-3 step vector `(m₂ − m₁, m₃ − m₂) = (n₁n₂, n₂d₁)/gcd(n₂, d₁)`,
/// after checking the consistency relation `d₁d₂ = n₂(d₁ + n₁)`.
fn order3_steps(spacing: &RationalSpacing) -> Result<Vec<BigInt>> {
    let (n1, d1) = spacing.ratios[0];
    let (n2, d2) = spacing
        .closing
        .ok_or_else(|| Error::ApproximationFailure("missing closing ratio".into()))?;
    let (n1, d1, n2, d2) = (BigInt::from(n1), BigInt::from(d1), BigInt::from(n2), BigInt::from(d2));
    if &d1 * &d2 != &n2 * (&d1 + &n1) {
        return Err(Error::ApproximationFailure(format!(
            "inconsistent ratios: d1*d2 = {} but n2*(d1+n1) = {}",
            &d1 * &d2,
            &n2 * (&d1 + &n1)
        )));
    }
    let g = n2.gcd(&d1);
    Ok(vec![&n1 * &n2 / &g, &n2 * &d1 / &g])
}

/// All aligned periods from a rationalized spacing chain, sorted by `t_p`.
pub fn solve_general(spacing: &RationalSpacing, h: f64, bounds: &SolverBounds) -> Result<Vec<PeriodCandidate>> {
    check_h(h)?;
    let alphas = &spacing.alphas;
    match alphas.len() {
        0 | 1 => Err(Error::InvalidArgument("at least two distinct levels are required".into())),
        2 => solve_order2([alphas[0], alphas[1]], h, bounds),
        3 => Lattice { alphas, steps: order3_steps(spacing)?, approx_error: spacing.approx_error }
            .enumerate(h, bounds),
        _ => Lattice { alphas, steps: spacing.lattice_steps(), approx_error: spacing.approx_error }
            .enumerate(h, bounds),
    }
}

fn check_h(h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("h must be positive, got {h}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub index: usize,
    pub candidate: PeriodCandidate,
    /// Every candidate attains the same undamped maximum (`B_max = 0`).
    pub degenerate: bool,
}

/// Chooses the period maximizing `f·e^{2B_max t_p/ħ}`; for `B_max = 0` the
/// smallest `t_p` among the degenerate maxima.
pub fn select_period(candidates: &[PeriodCandidate], b_max: f64, hbar: f64) -> Result<Selection> {
    if b_max > 0.0 {
        return Err(Error::PositiveBmax { b_max });
    }
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no candidates to select from".into()));
    }
    let damped: Vec<f64> =
        candidates.iter().map(|c| c.f_value * (2.0 * b_max * c.t_p / hbar).exp()).collect();
    let smaller = |i: usize, j: usize| candidates[i].t_p < candidates[j].t_p;
    let index = if b_max == 0.0 {
        (0..candidates.len()).fold(0, |best, i| if smaller(i, best) { i } else { best })
    } else {
        (0..candidates.len()).fold(0, |best, i| {
            let tie = (damped[i] - damped[best]).abs() <= 1e-12 * damped[best].abs();
            if (!tie && damped[i] > damped[best]) || (tie && smaller(i, best)) {
                i
            } else {
                best
            }
        })
    };
    let mut candidate = candidates[index].clone();
    candidate.damped_f = damped[index];
    Ok(Selection { index, candidate, degenerate: b_max == 0.0 })
}

/// Groups values that agree within `tol·(1 + max|v|)`. Returns the sorted
/// distinct levels, their multiplicities and the level of each input.
pub fn merge_levels(values: &[f64], tol: f64) -> (Vec<f64>, Vec<usize>, Vec<usize>) {
    let scale = 1.0 + values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut levels: Vec<f64> = Vec::new();
    let mut sums: Vec<(f64, usize)> = Vec::new();
    let mut level_of = vec![0; values.len()];
    let mut anchor = f64::NEG_INFINITY;
    for &i in &order {
        if levels.is_empty() || values[i] - anchor > tol * scale {
            anchor = values[i];
            levels.push(values[i]);
            sums.push((0.0, 0));
        }
        let k = levels.len() - 1;
        sums[k].0 += values[i];
        sums[k].1 += 1;
        level_of[i] = k;
    }
    let levels = sums.iter().map(|&(s, c)| s / c as f64).collect();
    let mult = sums.iter().map(|&(_, c)| c).collect();
    (levels, mult, level_of)
}

/// Certificate over the original (possibly degenerate) indices: merged
/// levels share one integer.
pub fn expand_certificate(m: &[i64], level_of: &[usize]) -> Vec<i64> {
    level_of.iter().map(|&k| m[k]).collect()
}
