//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! criterion fails.

mod common;

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use common::json::{compare_golden, fixture, pcat};
use common::*;
use pcat::evolution::{maximize_states, transition_amplitude, weak_value, StatePair};
use pcat::linalg::{eig, ComplexMatrix, SpectralData, DEFAULT_TOL_EIG};
use pcat::periodic::{
    amplitude_modulus_sq, amplitude_modulus_sq_derivative, dominant_subset, im_ratio, periodic_expectation,
    DominantSubset, DEFAULT_TOL_DEG,
};
use pcat::periodsolver::{
    alignment_spread, rationalize_spacings, scan_oracle, solve_general, solve_order2, solve_periods,
    verify_alignment, SolveConfig, SolverBounds,
};
use pcat::qgeometry::{build_q_metric, q_normality_defect, random_q_hermitian};
use pcat::C64;
use rand::Rng;
use serde_json::Value;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn spectral(h: &ComplexMatrix) -> SpectralData {
    eig(h, DEFAULT_TOL_EIG).expect("corpus matrices are diagonalizable")
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}

/// `P·diag(λ)·P⁻¹` whose first `dominant` levels share `Im λ = b` and whose
/// remaining levels sit at least `gap` lower.
fn gapped(n: usize, dominant: usize, b: f64, gap: f64, r: &mut impl Rng) -> ComplexMatrix {
    let re = distinct_ints(n, -8, 8, r);
    let lambdas: Vec<C64> = (0..n)
        .map(|i| {
            let im = if i < dominant { b } else { b - gap - r.gen_range(0.0..0.5) };
            C64::new(re[i] as f64 * r.gen_range(0.3..0.7), im)
        })
        .collect();
    with_spectrum(&random_basis(n, r, 0.4), &lambdas)
}

/// Commensurate real parts with common `Im λ = b` in a non-orthogonal basis.
fn commensurate_h(n: usize, b: f64, r: &mut impl Rng) -> (ComplexMatrix, Vec<f64>) {
    let (levels, _) = commensurate_levels(n, r);
    let lambdas: Vec<C64> = levels.iter().map(|&x| C64::new(x, b)).collect();
    (with_spectrum(&random_basis(n, r, 0.4), &lambdas), levels)
}

fn criterion1() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1001);
    let (mut worst_bio, mut worst_norm, mut worst_cond) = (0.0f64, 0.0f64, 0.0f64);
    let mut failures = 0;
    let mut count = 0;
    while count < 500 {
        let n = r.gen_range(2..=32);
        let h = random_entries(n, &mut r, 1.0);
        let s = match eig(&h, DEFAULT_TOL_EIG) {
            Ok(s) if s.cond_p <= 1e6 => s,
            _ => continue,
        };
        count += 1;
        let m = build_q_metric(&s).unwrap();
        let bio = m.biorthonormality_error(&s).unwrap();
        let defect = q_normality_defect(&h, &m).unwrap();
        worst_bio = worst_bio.max(bio);
        worst_norm = worst_norm.max(defect);
        worst_cond = worst_cond.max(s.cond_p);
        if !(m.is_positive_definite() && m.hermiticity_error() == 0.0 && bio <= 1e-10 && defect <= 1e-9) {
            failures += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures == 0 && secs <= 60.0,
        format!(
            "{count} matrices, failures {failures}, max biorth {worst_bio:.2e}, max normality defect {worst_norm:.2e}, max cond {worst_cond:.1e}, {secs:.1}s"
        ),
    )
}

fn criterion2() -> Outcome {
    let mut r = rng(1002);
    let (mut worst_amp, mut worst_im) = (0.0f64, 0.0f64);
    let mut exceed = 0;
    for _ in 0..200 {
        let n = r.gen_range(2..=8);
        let dominant = r.gen_range(1..=(n - 1).min(3));
        let gap = r.gen_range(0.2..1.0);
        let hbar = r.gen_range(0.5..2.0);
        let h = gapped(n, dominant, r.gen_range(-0.2..0.2), gap, &mut r);
        let s = spectral(&h);
        let sub = dominant_subset(&s, DEFAULT_TOL_DEG);
        let t = 30.0 * hbar / sub.gap;
        let pair = maximize_states(&s, &sub, t, hbar, None, r.gen_range(0.0..TAU)).unwrap();
        let best = transition_amplitude(&s, &pair, hbar).unwrap().norm();
        let target = (sub.b_max * t / hbar).exp();
        worst_amp = worst_amp.max((best - target).abs() / target);

        let m = build_q_metric(&s).unwrap();
        let o = random_q_hermitian(&m, r.gen(), 1.0);
        for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let w = weak_value(&o, &s, &pair, frac * t, hbar).unwrap();
            worst_im = worst_im.max(im_ratio(w));
        }

        for _ in 0..50 {
            let eps = 10f64.powf(r.gen_range(-4.0..0.0));
            let a: Vec<C64> = pair.a.iter().map(|z| z + random_c64(&mut r, eps)).collect();
            let b: Vec<C64> = pair.b.iter().map(|z| z + random_c64(&mut r, eps)).collect();
            let p = StatePair::new(a, b, pair.t_a, pair.t_b).unwrap().normalized();
            if transition_amplitude(&s, &p, hbar).unwrap().norm() > best * (1.0 + 1e-10) {
                exceed += 1;
            }
        }
    }
    outcome(
        worst_amp <= 1e-9 && worst_im <= 1e-9 && exceed == 0,
        format!("200 instances, max amplitude rel err {worst_amp:.2e}, max weak-value Im ratio {worst_im:.2e}, perturbed pairs above max {exceed}/10000"),
    )
}

fn criterion3() -> Outcome {
    let mut r = rng(1003);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = r.gen_range(2..=8);
        let gap = r.gen_range(0.2..1.0);
        let hbar = r.gen_range(0.5..2.0);
        let h = gapped(n, 1, r.gen_range(-0.2..0.2), gap, &mut r);
        let s = spectral(&h);
        let sub = dominant_subset(&s, DEFAULT_TOL_DEG);
        assert_eq!(sub.len(), 1);
        let m = build_q_metric(&s).unwrap();
        let o = random_q_hermitian(&m, r.gen(), 1.0);
        let t_p = (30.0 + r.gen_range(0.0..20.0)) * hbar / sub.gap;
        let v = periodic_expectation(&s, &o, t_p, hbar).unwrap();
        worst = worst.max(v.im_ratio());
    }
    outcome(worst <= 1e-8, format!("100 instances, max Im ratio {worst:.2e}"))
}

fn criterion4() -> Outcome {
    let mut r = rng(1004);
    let (mut worst_zero, mut worst_neg_excess) = (0.0f64, 0.0f64);
    let mut misaligned = Vec::new();
    for case in 0..200 {
        let damped = case >= 100;
        let n = r.gen_range(2..=6);
        let (levels, _) = commensurate_levels(n, &mut r);
        let spacing = levels.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let b = if damped { -r.gen_range(0.0..1.0e-3) * spacing - f64::MIN_POSITIVE } else { 0.0 };
        let lambdas: Vec<C64> = levels.iter().map(|&x| C64::new(x, b)).collect();
        let s = spectral(&with_spectrum(&random_basis(n, &mut r, 0.4), &lambdas));
        let sub = dominant_subset(&s, DEFAULT_TOL_DEG);
        let sol = solve_periods(&s, &sub, &SolveConfig::default()).unwrap();
        let t_p = sol.selected_t_p().unwrap();
        let m = build_q_metric(&s).unwrap();
        let o = random_q_hermitian(&m, r.gen(), 1.0);
        let ratio = periodic_expectation(&s, &o, t_p, 1.0).unwrap().im_ratio();
        if damped {
            let bound = 10.0 * 1e-9 * (-sol.b_max * t_p).exp();
            worst_neg_excess = worst_neg_excess.max(ratio / bound);
        } else {
            worst_zero = worst_zero.max(ratio);
        }
        let mut k = 0;
        while k < 10 {
            let t = r.gen_range(0.05..0.95) * t_p;
            if alignment_spread(&levels, t, TAU) < 1e-2 {
                continue;
            }
            if let Ok(v) = periodic_expectation(&s, &o, t, 1.0) {
                misaligned.push(v.im_ratio());
                k += 1;
            }
        }
    }
    let med = median(misaligned);
    outcome(
        worst_zero <= 1e-9 && worst_neg_excess <= 1.0 && med > 1e-3,
        format!(
            "B=0: max Im ratio {worst_zero:.2e}; B<0: max ratio/bound {worst_neg_excess:.2e}; misaligned median Im ratio {med:.2e} over 2000 points"
        ),
    )
}

fn criterion5() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1005);
    let (mut worst_offset, mut earlier) = (0.0f64, 0);
    let mut mismatches = 0;
    for _ in 0..100 {
        let n = r.gen_range(2..=6);
        let (h, levels) = commensurate_h(n, 0.0, &mut r);
        let s = spectral(&h);
        let sub = dominant_subset(&s, DEFAULT_TOL_DEG);
        let t_p = solve_periods(&s, &sub, &SolveConfig::default()).unwrap().selected_t_p().unwrap();

        let t_max = 1.25 * t_p;
        let points = 20_001;
        let scan = scan_oracle(&s, 1.0, t_max, points).unwrap();
        let offset = (scan.argmax_t - t_p).abs();
        worst_offset = worst_offset.max(offset / scan.grid_step);
        if offset > scan.grid_step {
            mismatches += 1;
        }

        let span = levels.last().unwrap() - levels[0];
        let step = 1e-3 * t_p;
        let threshold = span * step / (2.0 * TAU);
        if (1..1000).any(|k| alignment_spread(&levels, k as f64 * step, TAU) <= threshold) {
            earlier += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        mismatches == 0 && earlier == 0 && secs <= 120.0,
        format!(
            "100 spectra, scan/solver mismatches {mismatches} (max offset {worst_offset:.2e} grid steps), earlier aligned periods {earlier}, {secs:.1}s"
        ),
    )
}

fn criterion6() -> Outcome {
    let bounds = SolverBounds::default();
    let mut notes = Vec::new();
    let mut ok = true;
    let cases: [(&[f64], f64); 4] = [(&[1.0, 2.0], TAU), (&[1.0, 1.5], 2.0 * TAU), (&[1.0, 2.0, 3.0], TAU), (&[0.5, 1.0, 2.0], 2.0 * TAU)];
    for (alphas, expected) in cases {
        let sp = rationalize_spacings(alphas, 1_000_000, 1e-9).unwrap();
        let general = solve_general(&sp, TAU, &bounds).unwrap();
        let first = &general[0];
        let mut good = (first.t_p - expected).abs() <= 1e-12 * expected
            && verify_alignment(alphas, first.t_p, TAU, 1e-12).aligned;
        if alphas.len() == 2 {
            let closed = solve_order2([alphas[0], alphas[1]], TAU, &bounds).unwrap();
            good &= closed == general;
        }
        if alphas == [1.0, 2.0] {
            good &= first.m == vec![1, 2] && first.c == 0.0;
        }
        ok &= good;
        notes.push(format!("{alphas:?}->{:.6}", first.t_p));
    }
    outcome(ok, notes.join(", "))
}

fn criterion7() -> Outcome {
    let mut r = rng(1007);
    let mut ratios = Vec::new();
    for _ in 0..50 {
        let n = r.gen_range(2..=6);
        let b = -r.gen_range(0.0..0.05);
        let lambdas: Vec<C64> = (0..n).map(|_| C64::new(r.gen_range(-3.0..3.0), b)).collect();
        let s = SpectralData::with_eigenvectors(lambdas, ComplexMatrix::identity(n)).unwrap();
        let sub = DominantSubset { indices: (0..n).collect(), b_max: b, gap: f64::INFINITY };
        let hbar = r.gen_range(0.5..2.0);
        let t = r.gen_range(0.5..10.0);
        let f = |x: f64| amplitude_modulus_sq(&s, x, hbar, Some(&sub));
        let exact = amplitude_modulus_sq_derivative(&s, t, hbar, &sub);
        let err = |dt: f64| ((f(t + dt) - f(t - dt)) / (2.0 * dt) - exact).abs();
        let re: Vec<f64> = s.eigenvalues.iter().map(|l| l.re).collect();
        let span = re.iter().copied().fold(f64::NEG_INFINITY, f64::max) - re.iter().copied().fold(f64::INFINITY, f64::min);
        let dt = 0.01 * hbar / span.max(1.0);
        ratios.push(err(dt) / err(dt / 2.0));
    }
    let worst = ratios.iter().map(|q| (q - 4.0).abs()).fold(0.0, f64::max);
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    outcome(worst <= 0.5, format!("50 instances, error ratios in [{lo:.3}, {hi:.3}]"))
}

fn criterion8() -> Outcome {
    let mut r = rng(1008);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = r.gen_range(2..=8);
        let ints = distinct_ints(n, -10, 10, &mut r);
        let u = random_unitary(n, &mut r);
        let d = ComplexMatrix::from_real_diag(&ints.iter().map(|&k| k as f64).collect::<Vec<_>>());
        let h = (&(&u * &d) * &u.adjoint()).hermitian_part();
        let o = random_entries(n, &mut r, 1.0).hermitian_part();
        let s = spectral(&h);
        let sub = dominant_subset(&s, DEFAULT_TOL_DEG);
        let t_p = solve_periods(&s, &sub, &SolveConfig::default()).unwrap().selected_t_p().unwrap();
        worst = worst.max(periodic_expectation(&s, &o, t_p, 1.0).unwrap().im_ratio());
    }
    outcome(worst <= 1e-9, format!("50 Hermitian instances, max Im ratio {worst:.2e}"))
}

fn criterion9() -> Outcome {
    let diag12 = fixture("diag12.json");
    let op = fixture("hermitian_op2.json");
    let two_pi = TAU.to_string();
    let goldens: [(&str, Vec<&str>); 7] = [
        ("spectrum", vec!["spectrum", &diag12]),
        ("qmetric", vec!["qmetric", &diag12]),
        ("weak_value", vec!["weak-value", &diag12, &op, "--T", "1"]),
        ("periodic", vec!["periodic", &diag12, &op, "--tp", &two_pi]),
        ("solve_period", vec!["solve-period", &diag12]),
        ("scan", vec!["scan", &diag12, "--t-max", "10", "--grid", "101"]),
        ("verify", vec!["verify", &diag12, "--tp", &two_pi]),
    ];
    let mut problems = Vec::new();
    for (name, args) in &goldens {
        let out = pcat(args);
        let parsed: Option<Value> = serde_json::from_slice(&out.stdout).ok();
        match (out.status.code(), parsed) {
            (Some(0), Some(v)) => {
                if let Err(e) = compare_golden(name, &v) {
                    problems.push(e);
                }
            }
            (code, _) => problems.push(format!("{name}: exit {code:?}")),
        }
    }

    let id2 = fixture("identity2.json");
    let pi = PI.to_string();
    let matrix: [(Vec<String>, i32, &str); 8] = [
        (vec!["spectrum".into(), fixture("jordan.json")], 3, "NonDiagonalizable"),
        (vec!["solve-period".into(), fixture("positive_b.json")], 3, "PositiveBmax"),
        (vec!["periodic".into(), diag12.clone(), id2.clone(), "--tp".into(), pi], 3, "VanishingTrace"),
        (vec!["solve-period".into(), fixture("far_levels.json")], 3, "EmptyWithinBounds"),
        (vec!["periodic".into(), diag12.clone(), fixture("identity3.json"), "--tp".into(), "1".into()], 3, "DimensionMismatch"),
        (vec!["spectrum".into(), fixture("malformed.json")], 2, "ParseError"),
        (vec!["weak-value".into(), diag12.clone(), id2, "--T".into(), "0".into()], 2, "UsageError"),
        (vec!["spectrum".into(), diag12.clone(), "--output".into(), "csv".into()], 2, "UsageError"),
    ];
    for (args, code, kind) in &matrix {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = pcat(&args);
        let err: Option<Value> = serde_json::from_slice(&out.stderr).ok();
        let got = err.as_ref().and_then(|e| e["error"].as_str()).unwrap_or("<none>");
        if out.status.code() != Some(*code) || got != *kind {
            problems.push(format!("{kind}: exit {:?}, kind {got}", out.status.code()));
        }
    }
    let detail = if problems.is_empty() {
        format!("{} goldens, {} error cases", goldens.len(), matrix.len())
    } else {
        problems.join("; ")
    };
    outcome(problems.is_empty(), detail)
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("Q-machinery suite", criterion1),
        ("maximizing pair amplitude and reality", criterion2),
        ("single dominant state reality", criterion3),
        ("aligned-period reality", criterion4),
        ("solver/scan equivalence and minimality", criterion5),
        ("worked instances", criterion6),
        ("derivative convergence", criterion7),
        ("Hermitian reality", criterion8),
        ("CLI contract", criterion9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {}: {} | {name} | {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
