//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::canonical::{
    canonical_gate, decompose, reconstruct, CanonicalDecomposition, WeylCoordinates,
};
use crate::error::Error;
use crate::oracle::{unit_grid, verify_profile, OptimizerConfig, ProfileReport};
use crate::power::{
    c0_max, c1_min, can_reach_max, can_reach_zero, compare_gates, effective_angle, power_interval,
};
use crate::qubit_algebra::{check_unitary, distance_up_to_phase, Mat2, Mat4};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Tolerance on closed-form vs oracle deviation for `curve --verify`.
pub const CURVE_VERIFY_TOL: f64 = 1e-3;

/// Unitarity tolerance for matrices read from files.
pub const FILE_UNITARITY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Gate(#[from] Error),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed gate file {path}: {message}")]
    GateFile { path: PathBuf, message: String },
}

#[derive(Debug, Parser)]
#[command(
    name = "entpower",
    version,
    about = "Canonical coordinates and entanglement-changing power of two-qubit gates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Display {
    /// Emit a single JSON document instead of text.
    #[arg(long)]
    json: bool,
    /// Show angles in degrees (computation stays in radians).
    #[arg(long)]
    degrees: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Canonical decomposition of a gate.
    Decompose {
        #[arg(long)]
        gate: String,
        #[command(flatten)]
        display: Display,
    },
    /// Reachable output concurrence interval for input concurrence c0.
    Power {
        #[arg(long)]
        gate: String,
        #[arg(long, allow_hyphen_values = true)]
        c0: f64,
        #[command(flatten)]
        display: Display,
    },
    /// Tabulate the interval over c0 as CSV.
    Curve {
        #[arg(long)]
        gate: String,
        #[arg(long, default_value_t = 11)]
        steps: usize,
        /// Output file; standard output when omitted or "-".
        #[arg(long)]
        out: Option<PathBuf>,
        /// Add oracle columns and fail if they deviate by more than 1e-3.
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = 64)]
        starts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Order two gates by entanglement-changing power.
    Compare {
        #[arg(long = "gate-a")]
        gate_a: String,
        #[arg(long = "gate-b")]
        gate_b: String,
        #[command(flatten)]
        display: Display,
    },
    /// Check the closed-form interval against the numerical oracle.
    Verify {
        #[arg(long)]
        gate: String,
        #[arg(long, default_value_t = 11)]
        grid: usize,
        #[arg(long, default_value_t = 64)]
        starts: usize,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

/// Where a gate comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum GateSpec {
    Named(String),
    Weyl(WeylCoordinates),
    File(PathBuf),
}

impl GateSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let t = text.trim();
        if t.is_empty() {
            return Err(CliError::Input("empty gate specification".into()));
        }
        let lower = t.to_ascii_lowercase();
        if let Some(rest) = lower.strip_prefix("canonical:") {
            return Ok(Self::Weyl(parse_triple(rest)?));
        }
        if is_named(&lower) {
            return Ok(Self::Named(lower));
        }
        if t.contains(',') && !Path::new(t).exists() {
            return Ok(Self::Weyl(parse_triple(t)?));
        }
        if Path::new(t).exists() || t.ends_with(".json") {
            return Ok(Self::File(PathBuf::from(t)));
        }
        Err(CliError::Input(format!(
            "unknown gate '{t}'; expected one of identity, cnot, cz, swap, iswap, sqrtswap, \
             cphase:<radians>, canonical:<a1>,<a2>,<a3>, or a JSON matrix file"
        )))
    }

    pub fn resolve(&self) -> Result<Mat4, CliError> {
        match self {
            Self::Named(name) => named_gate(name),
            Self::Weyl(w) => Ok(canonical_gate(w)),
            Self::File(path) => read_gate_file(path),
        }
    }
}

fn is_named(token: &str) -> bool {
    matches!(
        token,
        "identity" | "cnot" | "cz" | "swap" | "iswap" | "sqrtswap"
    ) || token.starts_with("cphase:")
}

fn parse_number(s: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Input(format!("'{}' is not a finite number", s.trim())))
}

fn parse_triple(s: &str) -> Result<WeylCoordinates, CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::Input(format!(
            "expected three comma-separated angles, got '{s}'"
        )));
    }
    Ok(WeylCoordinates::new(
        parse_number(parts[0])?,
        parse_number(parts[1])?,
        parse_number(parts[2])?,
    ))
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Matrices of the built-in gate tokens.
pub fn named_gate(token: &str) -> Result<Mat4, CliError> {
    let one = c(1.0, 0.0);
    let mut m = Mat4::zeros();
    match token {
        "identity" => return Ok(Mat4::identity()),
        "cnot" => {
            m[(0, 0)] = one;
            m[(1, 1)] = one;
            m[(2, 3)] = one;
            m[(3, 2)] = one;
        }
        "cz" => {
            m = Mat4::identity();
            m[(3, 3)] = -one;
        }
        "swap" => {
            m[(0, 0)] = one;
            m[(1, 2)] = one;
            m[(2, 1)] = one;
            m[(3, 3)] = one;
        }
        "iswap" => {
            m[(0, 0)] = one;
            m[(1, 2)] = c(0.0, 1.0);
            m[(2, 1)] = c(0.0, 1.0);
            m[(3, 3)] = one;
        }
        "sqrtswap" => {
            m[(0, 0)] = one;
            m[(1, 1)] = c(0.5, 0.5);
            m[(1, 2)] = c(0.5, -0.5);
            m[(2, 1)] = c(0.5, -0.5);
            m[(2, 2)] = c(0.5, 0.5);
            m[(3, 3)] = one;
        }
        other => {
            let Some(angle) = other.strip_prefix("cphase:") else {
                return Err(CliError::Input(format!("unknown gate '{other}'")));
            };
            let theta = parse_number(angle)?;
            m = Mat4::identity();
            m[(3, 3)] = Complex64::from_polar(1.0, theta);
        }
    }
    Ok(m)
}

#[derive(Debug, Deserialize)]
struct GateFile {
    matrix: Vec<Vec<[f64; 2]>>,
    #[allow(dead_code)]
    name: Option<String>,
}

/// Reads `{"matrix": [[[re, im] x4] x4], "name": ...}` (row-major).
pub fn read_gate_file(path: &Path) -> Result<Mat4, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let bad = |message: String| CliError::GateFile {
        path: path.to_path_buf(),
        message,
    };
    let file: GateFile = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    if file.matrix.len() != 4 || file.matrix.iter().any(|row| row.len() != 4) {
        return Err(bad("matrix must be 4x4".into()));
    }
    let m = Mat4::from_fn(|r, col| {
        let [re, im] = file.matrix[r][col];
        c(re, im)
    });
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(bad("matrix entries must be finite".into()));
    }
    check_unitary(&m, FILE_UNITARITY_TOL)?;
    Ok(m)
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros trimmed,
/// magnitudes below 1e-12 shown as 0.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x.abs() < 1e-12 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..12).contains(&exp) {
        let s = format!("{:.11e}", x);
        let (mantissa, e) = s.split_once('e').unwrap_or((&s, "0"));
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{e}");
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn fmt_angle(x: f64, degrees: bool) -> String {
    fmt_num(if degrees { x.to_degrees() } else { x })
}

fn fmt_list(xs: &[f64], degrees: bool) -> String {
    xs.iter()
        .map(|x| fmt_angle(*x, degrees))
        .collect::<Vec<_>>()
        .join(" ")
}

fn fmt_complex(z: Complex64) -> String {
    let re = fmt_num(z.re);
    let im = fmt_num(z.im.abs());
    let sign = if z.im < 0.0 && im != "0" { '-' } else { '+' };
    format!("{re}{sign}{im}i")
}

fn fmt_mat2(m: &Mat2) -> String {
    (0..2)
        .map(|r| {
            let row: Vec<String> = (0..2).map(|col| fmt_complex(m[(r, col)])).collect();
            format!("[{}]", row.join(", "))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn json_angle(x: f64, degrees: bool) -> f64 {
    if degrees {
        x.to_degrees()
    } else {
        x
    }
}

fn json_mat2(m: &Mat2) -> serde_json::Value {
    json!((0..2)
        .map(|r| (0..2)
            .map(|col| [m[(r, col)].re, m[(r, col)].im])
            .collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn units(degrees: bool) -> &'static str {
    if degrees {
        "degrees"
    } else {
        "radians"
    }
}

struct Resolved {
    label: String,
    decomposition: CanonicalDecomposition,
    residual: f64,
}

fn resolve(text: &str) -> Result<Resolved, CliError> {
    let spec = GateSpec::parse(text)?;
    let u = spec.resolve()?;
    let decomposition = decompose(&u)?;
    let residual = distance_up_to_phase(&reconstruct(&decomposition), &u);
    Ok(Resolved {
        label: text.trim().to_string(),
        decomposition,
        residual,
    })
}

fn cmd_decompose(gate: &str, display: &Display, out: &mut dyn Write) -> Result<i32, CliError> {
    let r = resolve(gate)?;
    let d = &r.decomposition;
    let deg = display.degrees;
    let lambda = d.eigen_phases().lambda;
    if display.json {
        let doc = json!({
            "gate": r.label,
            "units": units(deg),
            "alpha": d.weyl.alpha.map(|x| json_angle(x, deg)),
            "lambda": lambda.map(|x| json_angle(x, deg)),
            "global_phase": json_angle(d.global_phase, deg),
            "locals": {
                "U_A": json_mat2(&d.post_local.0),
                "U_B": json_mat2(&d.post_local.1),
                "V_A": json_mat2(&d.pre_local.0),
                "V_B": json_mat2(&d.pre_local.1),
            },
            "reconstruction_residual": r.residual,
        });
        write_json(out, &doc)?;
    } else {
        let mut s = String::new();
        let _ = writeln!(s, "gate: {}", r.label);
        let _ = writeln!(s, "units: {}", units(deg));
        let _ = writeln!(s, "alpha: {}", fmt_list(&d.weyl.alpha, deg));
        let _ = writeln!(s, "lambda: {}", fmt_list(&lambda, deg));
        let _ = writeln!(s, "global_phase: {}", fmt_angle(d.global_phase, deg));
        let _ = writeln!(s, "U_A: {}", fmt_mat2(&d.post_local.0));
        let _ = writeln!(s, "U_B: {}", fmt_mat2(&d.post_local.1));
        let _ = writeln!(s, "V_A: {}", fmt_mat2(&d.pre_local.0));
        let _ = writeln!(s, "V_B: {}", fmt_mat2(&d.pre_local.1));
        let _ = writeln!(s, "reconstruction_residual: {:.3e}", r.residual);
        emit(out, &s)?;
    }
    Ok(EXIT_OK)
}

fn cmd_power(gate: &str, c0: f64, display: &Display, out: &mut dyn Write) -> Result<i32, CliError> {
    let r = resolve(gate)?;
    let w = r.decomposition.weyl;
    let interval = power_interval(&w, c0)?;
    let (reach_max, reach_zero) = (can_reach_max(&w, c0)?, can_reach_zero(&w, c0)?);
    let theta = effective_angle(&w);
    let deg = display.degrees;
    if display.json {
        let doc = json!({
            "gate": r.label,
            "units": units(deg),
            "alpha": w.alpha.map(|x| json_angle(x, deg)),
            "effective_angle": json_angle(theta, deg),
            "c0": c0,
            "c_min": interval.c_min,
            "c_max": interval.c_max,
            "c0_max": c0_max(&w),
            "c1_min": c1_min(&w),
            "can_reach_max": reach_max,
            "can_reach_zero": reach_zero,
        });
        write_json(out, &doc)?;
    } else {
        let mut s = String::new();
        let _ = writeln!(s, "gate: {}", r.label);
        let _ = writeln!(s, "alpha: {}", fmt_list(&w.alpha, deg));
        let _ = writeln!(s, "effective_angle: {}", fmt_angle(theta, deg));
        let _ = writeln!(s, "c0: {}", fmt_num(c0));
        let _ = writeln!(s, "c_min: {}", fmt_num(interval.c_min));
        let _ = writeln!(s, "c_max: {}", fmt_num(interval.c_max));
        let _ = writeln!(s, "c0_max: {}", fmt_num(c0_max(&w)));
        let _ = writeln!(s, "c1_min: {}", fmt_num(c1_min(&w)));
        let _ = writeln!(s, "can_reach_max: {reach_max}");
        let _ = writeln!(s, "can_reach_zero: {reach_zero}");
        emit(out, &s)?;
    }
    Ok(EXIT_OK)
}

fn oracle_config(starts: usize, seed: u64) -> Result<OptimizerConfig, CliError> {
    let cfg = OptimizerConfig {
        starts,
        seed,
        ..OptimizerConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

/// CSV body for `curve`; the oracle columns are present when `report` is.
pub fn curve_csv(
    w: &WeylCoordinates,
    steps: usize,
    report: Option<&ProfileReport>,
) -> Result<String, CliError> {
    let mut s = String::from("c0,c_min,c_max");
    if report.is_some() {
        s.push_str(",oracle_min,oracle_max");
    }
    s.push('\n');
    for (k, c0) in unit_grid(steps).into_iter().enumerate() {
        let p = power_interval(w, c0)?;
        let _ = write!(
            s,
            "{},{},{}",
            fmt_num(c0),
            fmt_num(p.c_min),
            fmt_num(p.c_max)
        );
        if let Some(rep) = report {
            let row = &rep.rows[k];
            let _ = write!(
                s,
                ",{},{}",
                fmt_num(row.oracle_min),
                fmt_num(row.oracle_max)
            );
        }
        s.push('\n');
    }
    Ok(s)
}

fn cmd_curve(
    gate: &str,
    steps: usize,
    out_path: Option<&Path>,
    verify: bool,
    starts: usize,
    seed: u64,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    if steps < 2 {
        return Err(CliError::Input(format!(
            "--steps must be at least 2, got {steps}"
        )));
    }
    let r = resolve(gate)?;
    let w = r.decomposition.weyl;
    let report = if verify {
        let cfg = oracle_config(starts, seed)?;
        Some(verify_profile(
            &w,
            &unit_grid(steps),
            &cfg,
            CURVE_VERIFY_TOL,
        )?)
    } else {
        None
    };
    let csv = curve_csv(&w, steps, report.as_ref())?;
    match out_path {
        Some(path) if path != Path::new("-") => {
            std::fs::write(path, csv).map_err(|source| CliError::Write {
                path: path.to_path_buf(),
                source,
            })?;
        }
        _ => emit(out, &csv)?,
    }
    let failed = report.is_some_and(|rep| {
        rep.rows
            .iter()
            .any(|row| row.deviation_min > CURVE_VERIFY_TOL || row.deviation_max > CURVE_VERIFY_TOL)
    });
    Ok(if failed { EXIT_VERIFY_FAILED } else { EXIT_OK })
}

fn cmd_compare(a: &str, b: &str, display: &Display, out: &mut dyn Write) -> Result<i32, CliError> {
    let ra = resolve(a)?;
    let rb = resolve(b)?;
    let (wa, wb) = (ra.decomposition.weyl, rb.decomposition.weyl);
    let order = compare_gates(&wa, &wb);
    let (ta, tb) = (effective_angle(&wa), effective_angle(&wb));
    let deg = display.degrees;
    if display.json {
        let doc = json!({
            "gate_a": ra.label,
            "gate_b": rb.label,
            "relation": order.symbol(),
            "units": units(deg),
            "effective_angle_a": json_angle(ta, deg),
            "effective_angle_b": json_angle(tb, deg),
        });
        write_json(out, &doc)?;
    } else {
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {}", ra.label, order.symbol(), rb.label);
        let _ = writeln!(s, "effective_angle({}): {}", ra.label, fmt_angle(ta, deg));
        let _ = writeln!(s, "effective_angle({}): {}", rb.label, fmt_angle(tb, deg));
        emit(out, &s)?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct VerifyDoc<'a> {
    gate: &'a str,
    starts: usize,
    seed: u64,
    #[serde(flatten)]
    report: &'a ProfileReport,
}

fn cmd_verify(
    gate: &str,
    grid: usize,
    starts: usize,
    tol: f64,
    seed: u64,
    json_out: bool,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    if grid < 2 {
        return Err(CliError::Input(format!(
            "--grid must be at least 2, got {grid}"
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(CliError::Input(format!(
            "--tol must be positive, got {tol}"
        )));
    }
    let r = resolve(gate)?;
    let cfg = oracle_config(starts, seed)?;
    let report = verify_profile(&r.decomposition.weyl, &unit_grid(grid), &cfg, tol)?;
    if json_out {
        let doc = VerifyDoc {
            gate: &r.label,
            starts,
            seed,
            report: &report,
        };
        let value = serde_json::to_value(&doc).map_err(|e| CliError::Input(e.to_string()))?;
        write_json(out, &value)?;
    } else {
        let mut s = String::new();
        let _ = writeln!(s, "gate: {}", r.label);
        let _ = writeln!(s, "alpha: {}", fmt_list(&r.decomposition.weyl.alpha, false));
        let _ = writeln!(s, "tolerance: {tol:e}");
        let _ = writeln!(
            s,
            "c0 closed_min closed_max oracle_min oracle_max dev_min dev_max converged samples_inside result"
        );
        for row in &report.rows {
            let _ = writeln!(
                s,
                "{} {} {} {} {} {:.2e} {:.2e} {} {} {}",
                fmt_num(row.c0),
                fmt_num(row.closed_min),
                fmt_num(row.closed_max),
                fmt_num(row.oracle_min),
                fmt_num(row.oracle_max),
                row.deviation_min,
                row.deviation_max,
                row.converged,
                row.samples_inside,
                if row.pass { "pass" } else { "FAIL" }
            );
        }
        let _ = writeln!(s, "overall: {}", if report.pass { "pass" } else { "FAIL" });
        emit(out, &s)?;
    }
    Ok(if report.pass {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}

fn emit(out: &mut dyn Write, s: &str) -> Result<(), CliError> {
    out.write_all(s.as_bytes())
        .map_err(|source| CliError::Write {
            path: PathBuf::from("<stdout>"),
            source,
        })
}

fn write_json(out: &mut dyn Write, value: &serde_json::Value) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Input(e.to_string()))?;
    s.push('\n');
    emit(out, &s)
}

/// Parses `args` (including the program name) and runs one command. Returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_INPUT
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Decompose { gate, display } => cmd_decompose(gate, display, out),
        Command::Power { gate, c0, display } => cmd_power(gate, *c0, display, out),
        Command::Curve {
            gate,
            steps,
            out: path,
            verify,
            starts,
            seed,
        } => cmd_curve(gate, *steps, path.as_deref(), *verify, *starts, *seed, out),
        Command::Compare {
            gate_a,
            gate_b,
            display,
        } => cmd_compare(gate_a, gate_b, display, out),
        Command::Verify {
            gate,
            grid,
            starts,
            tol,
            seed,
            json,
        } => cmd_verify(gate, *grid, *starts, *tol, *seed, *json, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}
