use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{phase_factor, SpectralData};

const GOLDEN: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub t_p: f64,
    /// `|Tr e^{−iHt/ħ}|²·e^{−2B_max t/ħ}`, the alignment profile without damping.
    pub f: f64,
    /// `|Tr e^{−iHt/ħ}|²` as evaluated.
    pub damped_f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalMax {
    pub t_p: f64,
    pub damped_f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub t_max: f64,
    pub grid_points: usize,
    pub grid_step: f64,
    pub b_max: f64,
    pub rows: Vec<ScanRow>,
    pub argmax_t: f64,
    pub argmax_f: f64,
    pub local_maxima: Vec<LocalMax>,
    pub flat: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Local maxima below this fraction of the global maximum are not reported.
    pub report_fraction: f64,
    /// Golden-section stopping width relative to `t_max`.
    pub refine_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { report_fraction: 0.5, refine_tol: 1e-10 }
    }
}

fn trace_sq(eigenvalues: &[C64], t: f64, hbar: f64) -> f64 {
    eigenvalues.iter().map(|&l| phase_factor(l, t, hbar)).sum::<C64>().norm_sqr()
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Brute-force maximization of `|Tr e^{−iHt/ħ}|²` over `[0, t_max]`.
pub fn scan_oracle(s: &SpectralData, hbar: f64, t_max: f64, grid_points: usize) -> Result<ScanReport> {
    scan_oracle_with(s, hbar, t_max, grid_points, &ScanOptions::default())
}

pub fn scan_oracle_with(
    s: &SpectralData,
    hbar: f64,
    t_max: f64,
    grid_points: usize,
    opts: &ScanOptions,
) -> Result<ScanReport> {
    if grid_points < 2 {
        return Err(Error::InvalidArgument(format!("grid needs at least 2 points, got {grid_points}")));
    }
    if !(t_max > 0.0 && t_max.is_finite()) || !(hbar > 0.0) {
        return Err(Error::InvalidArgument(format!("t_max and hbar must be positive, got {t_max}, {hbar}")));
    }
    let ev = &s.eigenvalues;
    let b_max = ev.iter().map(|l| l.im).fold(f64::NEG_INFINITY, f64::max);
    let eval = |t: f64| trace_sq(ev, t, hbar);
    let step = t_max / (grid_points - 1) as f64;
    let rows: Vec<ScanRow> = (0..grid_points)
        .map(|k| {
            let t = if k + 1 == grid_points { t_max } else { step * k as f64 };
            let damped_f = eval(t);
            ScanRow { t_p: t, f: damped_f * (-2.0 * b_max * t / hbar).exp(), damped_f }
        })
        .collect();

    let vals: Vec<f64> = rows.iter().map(|r| r.damped_f).collect();
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let flat = hi - lo <= 1e-12 * (1.0 + hi.abs());

    let mut refined = Vec::new();
    if !flat {
        for k in 1..grid_points.saturating_sub(1) {
            if vals[k] >= vals[k - 1] && vals[k] > vals[k + 1] {
                let (t, v) = golden_max(eval, rows[k - 1].t_p, rows[k + 1].t_p, opts.refine_tol * t_max);
                let (t, v) = if v >= vals[k] { (t, v) } else { (rows[k].t_p, vals[k]) };
                refined.push(LocalMax { t_p: t, damped_f: v });
            }
        }
    }

    let best = if refined.is_empty() {
        let k = (0..grid_points).fold(0, |b, k| if vals[k] > vals[b] { k } else { b });
        LocalMax { t_p: rows[k].t_p, damped_f: vals[k] }
    } else {
        let top = refined.iter().map(|m| m.damped_f).fold(f64::NEG_INFINITY, f64::max);
        *refined
            .iter()
            .find(|m| m.damped_f >= top - 1e-9 * top.abs())
            .expect("nonempty")
    };
    let local_maxima = refined
        .into_iter()
        .filter(|m| m.damped_f >= opts.report_fraction * best.damped_f)
        .collect();

    Ok(ScanReport {
        t_max,
        grid_points,
        grid_step: step,
        b_max,
        rows,
        argmax_t: best.t_p,
        argmax_f: best.damped_f,
        local_maxima,
        flat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eig, ComplexMatrix, DEFAULT_TOL_EIG};
    use std::f64::consts::PI;

    fn spectrum(vals: &[f64]) -> SpectralData {
        eig(&ComplexMatrix::from_real_diag(vals), DEFAULT_TOL_EIG).unwrap()
    }

    #[test]
    fn two_level_profile() {
        let rep = scan_oracle(&spectrum(&[1.0, 2.0]), 1.0, 10.0, 1000).unwrap();
        assert_eq!(rep.rows.len(), 1000);
        assert!((rep.argmax_t - 2.0 * PI).abs() < 1e-6, "{}", rep.argmax_t);
        assert!((rep.argmax_f - 4.0).abs() < 1e-12);
        assert!(!rep.flat);
        for r in &rep.rows {
            assert!((r.damped_f - (2.0 + 2.0 * r.t_p.cos())).abs() < 1e-12);
        }
    }

    #[test]
    fn single_level_is_flat() {
        let rep = scan_oracle(&spectrum(&[0.7]), 1.0, 5.0, 50).unwrap();
        assert!(rep.flat);
        assert!(rep.local_maxima.is_empty());
        assert!(rep.rows.iter().all(|r| (r.f - 1.0).abs() < 1e-15));
    }

    #[test]
    fn two_point_grid() {
        let rep = scan_oracle(&spectrum(&[1.0, 2.0]), 1.0, 10.0, 2).unwrap();
        assert_eq!(rep.rows.len(), 2);
        assert_eq!(rep.rows[1].t_p, 10.0);
        assert!(scan_oracle(&spectrum(&[1.0, 2.0]), 1.0, 10.0, 1).is_err());
    }

    #[test]
    fn damping_column() {
        let s = eig(
            &ComplexMatrix::from_diag(&[C64::new(1.0, -0.1), C64::new(2.0, -0.1)]),
            DEFAULT_TOL_EIG,
        )
        .unwrap();
        let rep = scan_oracle(&s, 1.0, 10.0, 201).unwrap();
        for r in &rep.rows {
            assert!((r.f - (2.0 + 2.0 * r.t_p.cos())).abs() < 1e-12);
            assert!((r.damped_f - r.f * (-0.2 * r.t_p).exp()).abs() < 1e-12);
        }
        // stationary point of (2 + 2 cos t)e^{−0.2t}
        let t = rep.argmax_t;
        assert!(t > 5.5 && t < 2.0 * PI, "{t}");
        assert!((-2.0 * t.sin() - 0.2 * (2.0 + 2.0 * t.cos())).abs() < 1e-6);
    }

    #[test]
    fn deterministic() {
        let s = spectrum(&[0.3, 1.1, 2.9]);
        assert_eq!(scan_oracle(&s, 1.0, 40.0, 777).unwrap(), scan_oracle(&s, 1.0, 40.0, 777).unwrap());
    }
}
