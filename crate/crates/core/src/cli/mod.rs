//! `pcat` command-line front end.

mod file;

use std::f64::consts::TAU;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::{json, Value};

pub use file::{FileError, HamiltonianFile};

use crate::error::Error;
use crate::evolution::{default_dt, heisenberg_check, maximize_states, transition_amplitude, weak_value};
use crate::linalg::{eig_with, ComplexMatrix, EigOptions, SpectralData, DEFAULT_COND_CEILING};
use crate::periodic::{amplitude_modulus_sq, dominant_subset, im_ratio, reality_report};
use crate::periodsolver::{scan_oracle, solve_periods, verify_alignment, SolveConfig, SolverBounds};
use crate::qgeometry::{build_q_metric, q_adjoint, q_hermiticity_defect, q_normality_defect};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DOMAIN: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "pcat", version, about = "Periodic-time analysis of non-normal Hamiltonians")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub config: RunConfig,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues, conditioning and the dominant subset.
    Spectrum { file: PathBuf },
    /// The metric Q = (P†)⁻¹P⁻¹ and its diagnostics.
    Qmetric { file: PathBuf },
    /// Maximizing state pair over [0, T] and the weak value of an operator.
    WeakValue { file: PathBuf, operator: PathBuf },
    /// Periodic-time expectation value at --tp.
    Periodic { file: PathBuf, operator: PathBuf },
    /// Aligned periods of the dominant subset and the selected one.
    SolvePeriod { file: PathBuf },
    /// Samples of |Tr exp(-iHt/hbar)|² on [0, --t-max].
    Scan { file: PathBuf },
    /// Phase alignment of the dominant subset at --tp.
    Verify { file: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RunConfig {
    #[arg(long, global = true, allow_negative_numbers = true, default_value_t = 1.0)]
    pub hbar: f64,
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol_deg: f64,
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol_eig: f64,
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol_align: f64,
    #[arg(long = "kappa", value_name = "KAPPA", global = true, default_value_t = 1e-2)]
    pub kappa_theorem3: f64,
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub max_denominator: u64,
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub rational_tol: f64,
    #[arg(long, global = true, default_value_t = 10_000)]
    pub max_scale: u64,
    #[arg(long = "max-m1", global = true, default_value_t = 1_000_000)]
    pub max_m1: i64,
    #[arg(long, global = true, default_value_t = 16)]
    pub max_candidates: usize,
    #[arg(long, global = true, allow_negative_numbers = true, default_value_t = 10.0)]
    pub t_max: f64,
    #[arg(long = "grid", global = true, default_value_t = 1000)]
    pub grid_points: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "output", global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub output_format: OutputFormat,
    #[arg(long, global = true)]
    pub q_hermitize: bool,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tp: Option<f64>,
    #[arg(long = "T", global = true, allow_negative_numbers = true)]
    pub period: Option<f64>,
}

impl RunConfig {
    fn validate(&self) -> Result<(), Failure> {
        let positive = [
            ("hbar", self.hbar),
            ("tol-deg", self.tol_deg),
            ("tol-eig", self.tol_eig),
            ("tol-align", self.tol_align),
            ("kappa", self.kappa_theorem3),
            ("rational-tol", self.rational_tol),
            ("t-max", self.t_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Failure::Usage(format!("--{name} must be positive, got {v}")));
            }
        }
        if self.max_denominator == 0 || self.max_scale == 0 || self.max_m1 <= 0 || self.max_candidates == 0 {
            return Err(Failure::Usage("enumeration bounds must be positive".into()));
        }
        if self.grid_points < 2 {
            return Err(Failure::Usage(format!("--grid must be at least 2, got {}", self.grid_points)));
        }
        Ok(())
    }

    fn solve_config(&self) -> SolveConfig {
        SolveConfig {
            hbar: self.hbar,
            tol_deg: self.tol_deg,
            max_denominator: self.max_denominator,
            rational_tol: self.rational_tol,
            bounds: SolverBounds {
                max_scale: self.max_scale,
                max_m1: self.max_m1,
                max_candidates: self.max_candidates,
            },
        }
    }

    fn tp(&self) -> Result<f64, Failure> {
        match self.tp {
            Some(t) if t >= 0.0 && t.is_finite() => Ok(t),
            Some(t) => Err(Failure::Usage(format!("--tp must be non-negative, got {t}"))),
            None => Err(Failure::Usage("--tp is required".into())),
        }
    }

    fn period(&self) -> Result<f64, Failure> {
        match self.period {
            Some(t) if t > 0.0 && t.is_finite() => Ok(t),
            Some(t) => Err(Failure::Usage(format!("--T must be positive, got {t}"))),
            None => Err(Failure::Usage("--T is required".into())),
        }
    }
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Parse(FileError),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(msg) => Failure::Usage(msg),
            other => Failure::Domain(other),
        }
    }
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Parse(_) => EXIT_USAGE,
            Failure::Domain(_) => EXIT_DOMAIN,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "UsageError",
            Failure::Parse(_) => "ParseError",
            Failure::Domain(e) => e.kind(),
        }
    }

    fn to_json(&self) -> Value {
        let message = match self {
            Failure::Usage(m) => m.clone(),
            Failure::Parse(e) => e.to_string(),
            Failure::Domain(e) => e.to_string(),
        };
        json!({ "error": self.kind(), "message": message })
    }
}

/// Parses `std::env::args`, runs the command and maps failures to exit codes.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(&cli, &mut out) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.exit_code())
        }
    }
}

pub fn run(cli: &Cli, out: &mut impl Write) -> Result<(), Failure> {
    let cfg = &cli.config;
    cfg.validate()?;
    if cfg.output_format == OutputFormat::Csv && !matches!(cli.command, Command::Scan { .. }) {
        return Err(Failure::Usage("csv output is only available for scan".into()));
    }
    let report = match &cli.command {
        Command::Spectrum { file } => cmd_spectrum(file, cfg)?,
        Command::Qmetric { file } => cmd_qmetric(file, cfg)?,
        Command::WeakValue { file, operator } => cmd_weak_value(file, operator, cfg)?,
        Command::Periodic { file, operator } => cmd_periodic(file, operator, cfg)?,
        Command::SolvePeriod { file } => cmd_solve_period(file, cfg)?,
        Command::Scan { file } => return cmd_scan(file, cfg, out),
        Command::Verify { file } => cmd_verify(file, cfg)?,
    };
    write_json(out, &report)
}

fn write_json(out: &mut impl Write, v: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).expect("report serializes");
    writeln!(out, "{text}").map_err(|e| Failure::Usage(format!("cannot write output: {e}")))
}

fn cx(z: C64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn cxs(zs: &[C64]) -> Value {
    Value::Array(zs.iter().map(|&z| cx(z)).collect())
}

fn matrix_json(m: &ComplexMatrix) -> Value {
    json!({ "re": m.re_parts(), "im": m.im_parts() })
}

struct Loaded {
    label: Option<String>,
    h: ComplexMatrix,
    s: SpectralData,
}

fn load_matrix(path: &Path) -> Result<(ComplexMatrix, Option<String>), Failure> {
    let f = HamiltonianFile::load(path).map_err(Failure::Parse)?;
    let m = f.matrix().map_err(|e| {
        Failure::Parse(FileError::Shape { path: path.display().to_string(), source: e })
    })?;
    Ok((m, f.label))
}

fn load(path: &Path, cfg: &RunConfig) -> Result<Loaded, Failure> {
    let (h, label) = load_matrix(path)?;
    let s = eig_with(&h, &EigOptions { tol_eig: cfg.tol_eig, cond_ceiling: DEFAULT_COND_CEILING })?;
    Ok(Loaded { label, h, s })
}

fn header(cmd: &str, l: &Loaded, cfg: &RunConfig) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("command".into(), json!(cmd));
    m.insert("label".into(), json!(l.label));
    m.insert("n".into(), json!(l.h.dim()));
    m.insert("config".into(), serde_json::to_value(cfg).expect("config serializes"));
    m
}

fn cmd_spectrum(path: &Path, cfg: &RunConfig) -> Result<Value, Failure> {
    let l = load(path, cfg)?;
    let sub = dominant_subset(&l.s, cfg.tol_deg);
    let mut r = header("spectrum", &l, cfg);
    r.insert("eigenvalues".into(), cxs(&l.s.eigenvalues));
    r.insert("cond_p".into(), json!(l.s.cond_p));
    r.insert("residual".into(), json!(l.s.residual(&l.h)?));
    r.insert("subset".into(), json!(sub.indices));
    r.insert("b_max".into(), json!(sub.b_max));
    r.insert("gap".into(), json!(sub.gap));
    Ok(Value::Object(r))
}

fn cmd_qmetric(path: &Path, cfg: &RunConfig) -> Result<Value, Failure> {
    let l = load(path, cfg)?;
    let q = build_q_metric(&l.s)?;
    let mut r = header("qmetric", &l, cfg);
    r.insert("cond_p".into(), json!(l.s.cond_p));
    r.insert("q".into(), matrix_json(&q.q));
    r.insert("q_inv".into(), matrix_json(&q.q_inv));
    r.insert("hermiticity_error".into(), json!(q.hermiticity_error()));
    r.insert("positive_definite".into(), json!(q.is_positive_definite()));
    r.insert("biorthonormality_error".into(), json!(q.biorthonormality_error(&l.s)?));
    r.insert("q_normality_defect".into(), json!(q_normality_defect(&l.h, &q)?));
    Ok(Value::Object(r))
}

fn load_operator(path: &Path, n: usize) -> Result<(ComplexMatrix, Option<String>), Failure> {
    let (o, label) = load_matrix(path)?;
    if o.dim() != n {
        return Err(Failure::Domain(Error::DimensionMismatch { expected: n, found: o.dim() }));
    }
    Ok((o, label))
}

fn q_hermitize(o: &ComplexMatrix, metric: &crate::qgeometry::QMetric) -> Result<ComplexMatrix, Failure> {
    let adj = q_adjoint(o, metric)?;
    Ok((o + &adj).scale(C64::new(0.5, 0.0)))
}

fn cmd_weak_value(path: &Path, op_path: &Path, cfg: &RunConfig) -> Result<Value, Failure> {
    let period = cfg.period()?;
    let l = load(path, cfg)?;
    let (mut o, op_label) = load_operator(op_path, l.h.dim())?;
    let metric = build_q_metric(&l.s)?;
    if cfg.q_hermitize {
        o = q_hermitize(&o, &metric)?;
    }
    let sub = dominant_subset(&l.s, cfg.tol_deg);
    let pair = maximize_states(&l.s, &sub, period, cfg.hbar, None, 0.0)?;
    let amp = transition_amplitude(&l.s, &pair, cfg.hbar)?;
    let bound = (sub.b_max * period / cfg.hbar).exp();
    let t_mid = 0.5 * period;
    let wv = weak_value(&o, &l.s, &pair, t_mid, cfg.hbar)?;
    let hc = heisenberg_check(&o, &l.s, &metric, &pair, t_mid, default_dt(&l.s, cfg.hbar), cfg.hbar)?;

    let mut r = header("weak-value", &l, cfg);
    r.insert("operator_label".into(), json!(op_label));
    r.insert("T".into(), json!(period));
    r.insert("subset".into(), json!(sub.indices));
    r.insert("b_max".into(), json!(sub.b_max));
    r.insert("a".into(), cxs(&pair.a));
    r.insert("b".into(), cxs(&pair.b));
    r.insert("amplitude".into(), cx(amp));
    r.insert("amplitude_modulus".into(), json!(amp.norm()));
    r.insert("expected_modulus".into(), json!(bound));
    r.insert("amplitude_rel_error".into(), json!((amp.norm() - bound).abs() / bound));
    r.insert("t".into(), json!(t_mid));
    r.insert("weak_value".into(), cx(wv));
    r.insert("im_ratio".into(), json!(im_ratio(wv)));
    r.insert("operator_q_hermiticity_defect".into(), json!(q_hermiticity_defect(&o, &metric)?));
    r.insert(
        "heisenberg".into(),
        json!({
            "derivative": cx(hc.derivative),
            "predicted": cx(hc.predicted),
            "residual": hc.residual,
        }),
    );
    Ok(Value::Object(r))
}

fn cmd_periodic(path: &Path, op_path: &Path, cfg: &RunConfig) -> Result<Value, Failure> {
    let tp = cfg.tp()?;
    let l = load(path, cfg)?;
    let (mut o, op_label) = load_operator(op_path, l.h.dim())?;
    if cfg.q_hermitize {
        o = q_hermitize(&o, &build_q_metric(&l.s)?)?;
    }
    let rep = reality_report(&l.s, &o, tp, cfg.hbar, cfg.tol_deg, cfg.kappa_theorem3)?;
    let mut r = header("periodic", &l, cfg);
    r.insert("operator_label".into(), json!(op_label));
    r.insert("t_p".into(), json!(tp));
    r.insert("value".into(), cx(rep.exact.value));
    r.insert("im_ratio".into(), json!(rep.exact_im_ratio));
    r.insert("reduced_value".into(), cx(rep.reduced.value));
    r.insert("reduced_im_ratio".into(), json!(rep.reduced_im_ratio));
    r.insert("subset".into(), json!(rep.subset.indices));
    r.insert("b_max".into(), json!(rep.subset.b_max));
    r.insert("gap".into(), json!(rep.subset.gap));
    r.insert("single_dominant".into(), json!(rep.single_dominant));
    r.insert("spacing_prerequisite".into(), json!(rep.spacing_prerequisite));
    r.insert("min_real_spacing".into(), json!(rep.min_real_spacing));
    r.insert("suppression".into(), json!(rep.suppression));
    Ok(Value::Object(r))
}

fn cmd_solve_period(path: &Path, cfg: &RunConfig) -> Result<Value, Failure> {
    let l = load(path, cfg)?;
    let sub = dominant_subset(&l.s, cfg.tol_deg);
    let sol = solve_periods(&l.s, &sub, &cfg.solve_config())?;
    let h = TAU * cfg.hbar;
    let mut r = header("solve-period", &l, cfg);
    r.insert("subset".into(), json!(sub.indices));
    r.insert("b_max".into(), json!(sol.b_max));
    r.insert("levels".into(), json!(sol.levels));
    r.insert("multiplicities".into(), json!(sol.multiplicities));
    r.insert("single_level".into(), json!(sol.single_level));
    r.insert("ratios".into(), json!(sol.spacing.as_ref().map(|s| &s.ratios)));
    r.insert("closing_ratio".into(), json!(sol.spacing.as_ref().and_then(|s| s.closing)));
    r.insert("approx_error".into(), json!(sol.spacing.as_ref().map_or(0.0, |s| s.approx_error)));
    r.insert("candidates".into(), serde_json::to_value(&sol.candidates).expect("serializes"));
    let selected = sol.selected.as_ref().map(|sel| {
        let check = verify_alignment(&sol.levels, sel.candidate.t_p, h, cfg.tol_align);
        json!({
            "t_p": sel.candidate.t_p,
            "m": sel.candidate.m,
            "certificate": sol.selected_certificate(),
            "C": sel.candidate.c,
            "f_value": sel.candidate.f_value,
            "damped_f": sel.candidate.damped_f,
            "degenerate": sel.degenerate,
            "aligned": check.aligned,
            "spread": check.spread,
        })
    });
    r.insert("selected".into(), json!(selected));
    Ok(Value::Object(r))
}

fn cmd_scan(path: &Path, cfg: &RunConfig, out: &mut impl Write) -> Result<(), Failure> {
    let l = load(path, cfg)?;
    let rep = scan_oracle(&l.s, cfg.hbar, cfg.t_max, cfg.grid_points)?;
    match cfg.output_format {
        OutputFormat::Json => {
            let mut r = header("scan", &l, cfg);
            let body = serde_json::to_value(&rep).expect("scan serializes");
            if let Value::Object(fields) = body {
                r.extend(fields);
            }
            write_json(out, &Value::Object(r))
        }
        OutputFormat::Csv => {
            let io_err = |e: io::Error| Failure::Usage(format!("cannot write output: {e}"));
            writeln!(out, "t_p,f,damped_f").map_err(io_err)?;
            for row in &rep.rows {
                writeln!(out, "{:.15e},{:.15e},{:.15e}", row.t_p, row.f, row.damped_f).map_err(io_err)?;
            }
            writeln!(out, "# argmax_t={:.15e}", rep.argmax_t).map_err(io_err)?;
            writeln!(out, "# argmax_f={:.15e}", rep.argmax_f).map_err(io_err)?;
            writeln!(out, "# flat={}", rep.flat).map_err(io_err)?;
            for m in &rep.local_maxima {
                writeln!(out, "# local_max t_p={:.15e} damped_f={:.15e}", m.t_p, m.damped_f).map_err(io_err)?;
            }
            let config = serde_json::to_string(cfg).expect("config serializes");
            writeln!(out, "# config={config}").map_err(io_err)
        }
    }
}

fn cmd_verify(path: &Path, cfg: &RunConfig) -> Result<Value, Failure> {
    let tp = cfg.tp()?;
    let l = load(path, cfg)?;
    let sub = dominant_subset(&l.s, cfg.tol_deg);
    let alphas = sub.real_parts(&l.s);
    let check = verify_alignment(&alphas, tp, TAU * cfg.hbar, cfg.tol_align);
    let mut r = header("verify", &l, cfg);
    r.insert("t_p".into(), json!(tp));
    r.insert("subset".into(), json!(sub.indices));
    r.insert("alphas".into(), json!(alphas));
    r.insert("aligned".into(), json!(check.aligned));
    r.insert("C".into(), json!(check.c));
    r.insert("spread".into(), json!(check.spread));
    r.insert("f_exact".into(), json!(amplitude_modulus_sq(&l.s, tp, cfg.hbar, None)));
    r.insert("f_subset".into(), json!(amplitude_modulus_sq(&l.s, tp, cfg.hbar, Some(&sub))));
    Ok(Value::Object(r))
}
