//! Periods `t_p` with `Re λ_i·t_p ≡ C (mod h)` across the dominant subset.
//!
//! Spacing ratios are rationalized by continued fractions, the integer
//! certificates `m_i` are built in exact arithmetic and converted to real
//! periods only at the end. [`scan_oracle`] is an independent brute-force
//! maximizer of `|Tr e^{−iHt/ħ}|²`.

mod rational;
mod scan;
mod solve;

use std::f64::consts::TAU;

use serde::Serialize;

pub use rational::{
    best_rational, rationalize_spacings, RationalSpacing, DEFAULT_MAX_DENOMINATOR, DEFAULT_RATIONAL_TOL,
};
pub use scan::{scan_oracle, scan_oracle_with, LocalMax, ScanOptions, ScanReport, ScanRow};
pub use solve::{
    alignment_spread, expand_certificate, level_amplitude_sq, merge_levels, select_period, solve_general,
    solve_order2, verify_alignment, Alignment, PeriodCandidate, Selection, SolverBounds,
};

use crate::error::{Error, Result};
use crate::linalg::SpectralData;
use crate::periodic::DominantSubset;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveConfig {
    pub hbar: f64,
    /// Levels closer than `tol_deg·(1 + max|α|)` are merged; the same
    /// window decides whether `B_max` counts as zero.
    pub tol_deg: f64,
    pub max_denominator: u64,
    pub rational_tol: f64,
    pub bounds: SolverBounds,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            tol_deg: 1e-9,
            max_denominator: DEFAULT_MAX_DENOMINATOR,
            rational_tol: DEFAULT_RATIONAL_TOL,
            bounds: SolverBounds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodSolution {
    /// Distinct sorted real parts of the dominant subset.
    pub levels: Vec<f64>,
    pub multiplicities: Vec<usize>,
    /// Level of each subset member, in subset order.
    pub level_of: Vec<usize>,
    pub b_max: f64,
    pub spacing: Option<RationalSpacing>,
    /// Candidates with `m` indexed by level; `f_value` counts multiplicities.
    pub candidates: Vec<PeriodCandidate>,
    pub selected: Option<Selection>,
    /// Only one distinct level: every `t_p` is aligned.
    pub single_level: bool,
}

impl PeriodSolution {
    pub fn selected_t_p(&self) -> Option<f64> {
        self.selected.as_ref().map(|s| s.candidate.t_p)
    }

    /// Certificate of the selected period over subset members.
    pub fn selected_certificate(&self) -> Option<Vec<i64>> {
        self.selected.as_ref().map(|s| expand_certificate(&s.candidate.m, &self.level_of))
    }
}

/// Full pipeline: merge degenerate levels, rationalize, enumerate, select.
pub fn solve_periods(s: &SpectralData, subset: &DominantSubset, cfg: &SolveConfig) -> Result<PeriodSolution> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    if !(cfg.hbar > 0.0) {
        return Err(Error::InvalidArgument(format!("hbar must be positive, got {}", cfg.hbar)));
    }
    let scale = 1.0 + s.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.norm()));
    let b_max = if subset.b_max.abs() <= cfg.tol_deg * scale { 0.0 } else { subset.b_max };
    if b_max > 0.0 {
        return Err(Error::PositiveBmax { b_max });
    }
    let re = subset.real_parts(s);
    let (levels, multiplicities, level_of) = merge_levels(&re, cfg.tol_deg);
    if levels.len() == 1 {
        return Ok(PeriodSolution {
            levels,
            multiplicities,
            level_of,
            b_max,
            spacing: None,
            candidates: Vec::new(),
            selected: None,
            single_level: true,
        });
    }
    let h = TAU * cfg.hbar;
    let spacing = rationalize_spacings(&levels, cfg.max_denominator, cfg.rational_tol)?;
    let mut candidates = solve_general(&spacing, h, &cfg.bounds)?;
    for c in &mut candidates {
        c.f_value = level_amplitude_sq(&levels, Some(&multiplicities), c.t_p, cfg.hbar);
        c.damped_f = c.f_value * (2.0 * b_max * c.t_p / cfg.hbar).exp();
    }
    let selected = select_period(&candidates, b_max, cfg.hbar)?;
    Ok(PeriodSolution {
        levels,
        multiplicities,
        level_of,
        b_max,
        spacing: Some(spacing),
        candidates,
        selected: Some(selected),
        single_level: false,
    })
}
