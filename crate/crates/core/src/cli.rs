//! Command-line surface: kernel validation, single evaluations, error-table
//! reproduction, convergence studies, and SVG figure emission.
//!
//! Exit codes: 0 success, 1 validation or acceptance failure, 2 usage error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use thiserror::Error;

use crate::analysis::{
    estimate_rate, pointwise_errors, ErrorCell, ErrorReport, ParamsTemplate, RateOutcome,
};
use crate::kernels::{
    bspline_psi, mellin_bspline, mellin_fejer, validate_kernel_pair, KernelPhi, KernelPsi,
};
use crate::operators::OperatorKind;
use crate::quad::QuadratureSpec;
use crate::signal::{test_f, test_g, Signal};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown kernel identifier `{0}` (expected bspline:<order> or fejer:<beta>:<t>)")]
    UnknownKernel(String),
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
    #[error("unknown signal `{0}` (expected f, g, const:<c> or file:<path>)")]
    UnknownSignal(String),
    #[error("bad numeric list `{0}`")]
    BadList(String),
    #[error("bad z-grid spec `{0}` (expected lo:hi:count)")]
    BadGrid(String),
    #[error("empty n list")]
    EmptyN,
    #[error("plot needs a z-grid spec (--z-grid lo:hi:count)")]
    MissingGrid,
    #[error("operator/signal mismatch: {0}")]
    Mismatch(String),
    #[error("signal file {path}: {message}")]
    SignalFile { path: String, message: String },
    #[error("format `{0}` not valid for this command")]
    BadFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Other(String),
}

/// Usage errors exit 2, everything else that fails exits 1.
fn is_usage(err: &CliError) -> bool {
    matches!(
        err,
        CliError::UnknownKernel(_)
            | CliError::UnknownOperator(_)
            | CliError::UnknownSignal(_)
            | CliError::BadList(_)
            | CliError::BadGrid(_)
            | CliError::EmptyN
            | CliError::MissingGrid
            | CliError::BadFormat(_)
    )
}

#[derive(Debug, Parser)]
#[command(
    name = "expsamp",
    about = "Durrmeyer-type exponential sampling operators: validation, evaluation, tables, plots"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct KernelArgs {
    /// Discrete-side kernel: bspline:<order> or fejer:<beta>:<t>
    #[arg(long, default_value = "bspline:2")]
    phi: String,
    /// Integral-side kernel: bspline:<order> or fejer:<beta>:<t> (beta accepts `pi`)
    #[arg(long, default_value = "fejer:pi:0")]
    psi: String,
}

#[derive(Debug, Clone, Args)]
struct EvalArgs {
    #[command(flatten)]
    kernels: KernelArgs,
    /// Operator: max-product | max-min | linear | kantorovich
    #[arg(long, default_value = "max-product")]
    op: String,
    /// Signal: f | g | const:<c> | file:<path>
    #[arg(long, default_value = "f")]
    signal: String,
    /// Comma-separated sampling rates
    #[arg(long, default_value = "5,10,15,20")]
    n: String,
    /// Comma-separated evaluation points
    #[arg(long)]
    z: Option<String>,
    /// Log-uniform evaluation grid lo:hi:count
    #[arg(long = "z-grid")]
    z_grid: Option<String>,
    /// Absolute quadrature tail tolerance
    #[arg(long = "quad-tol", default_value_t = 1e-9)]
    quad_tol: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the kernel pair against the four admissibility conditions
    Validate {
        #[command(flatten)]
        kernels: KernelArgs,
        /// Tolerance for the unit Mellin integral check
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Evaluate the operator at individual points and print the results
    Eval {
        #[command(flatten)]
        args: EvalArgs,
    },
    /// Write a pointwise absolute-error table as CSV
    Table {
        #[command(flatten)]
        args: EvalArgs,
        #[arg(long, default_value = "table.csv")]
        out: PathBuf,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Plot the exact signal against operator approximations as SVG
    Plot {
        #[command(flatten)]
        args: EvalArgs,
        /// Comma-separated operators to overlay (one curve per op and n)
        #[arg(long, default_value = "")]
        ops: String,
        #[arg(long, default_value = "plot.svg")]
        out: PathBuf,
        #[arg(long, default_value = "svg")]
        format: String,
    },
    /// Estimate the empirical convergence rate over an n ladder
    Converge {
        #[command(flatten)]
        args: EvalArgs,
        #[arg(long, default_value = "converge.csv")]
        out: PathBuf,
    },
}

/// Parse `bspline:<order>` into the discrete-side kernel.
pub fn parse_phi(id: &str) -> Result<KernelPhi, CliError> {
    let parts: Vec<&str> = id.split(':').collect();
    match parts.as_slice() {
        ["bspline", order] => {
            let order: u32 = order
                .parse()
                .map_err(|_| CliError::UnknownKernel(id.into()))?;
            mellin_bspline(order).map_err(|e| CliError::Other(e.to_string()))
        }
        ["fejer", beta, t] => {
            let (beta, t) = parse_fejer_params(beta, t).ok_or_else(|| CliError::UnknownKernel(id.into()))?;
            let psi = mellin_fejer(beta, t).map_err(|e| CliError::Other(e.to_string()))?;
            // The Fejér kernel in the Phi role: same evaluation, no support.
            KernelPhi::new(psi.name().to_string(), {
                let inner = psi.clone();
                std::sync::Arc::new(move |x| inner.evaluate_log(x))
            }, None)
            .map_err(|e| CliError::Other(e.to_string()))
        }
        _ => Err(CliError::UnknownKernel(id.into())),
    }
}

/// Parse `fejer:<beta>:<t>` (beta accepts the literal `pi`) or
/// `bspline:<order>` into the integral-side kernel.
pub fn parse_psi(id: &str) -> Result<KernelPsi, CliError> {
    let parts: Vec<&str> = id.split(':').collect();
    match parts.as_slice() {
        ["fejer", beta, t] => {
            let (beta, t) = parse_fejer_params(beta, t).ok_or_else(|| CliError::UnknownKernel(id.into()))?;
            mellin_fejer(beta, t).map_err(|e| CliError::Other(e.to_string()))
        }
        ["bspline", order] => {
            let order: u32 = order
                .parse()
                .map_err(|_| CliError::UnknownKernel(id.into()))?;
            bspline_psi(order).map_err(|e| CliError::Other(e.to_string()))
        }
        _ => Err(CliError::UnknownKernel(id.into())),
    }
}

fn parse_fejer_params(beta: &str, t: &str) -> Option<(f64, f64)> {
    let beta = if beta.eq_ignore_ascii_case("pi") {
        std::f64::consts::PI
    } else {
        beta.parse().ok()?
    };
    let t: f64 = t.parse().ok()?;
    Some((beta, t))
}

/// Parse `f | g | const:<c> | file:<path>` into a signal.
pub fn parse_signal(id: &str) -> Result<Signal, CliError> {
    if id == "f" {
        return Ok(test_f());
    }
    if id == "g" {
        return Ok(test_g());
    }
    if let Some(c) = id.strip_prefix("const:") {
        let c: f64 = c.parse().map_err(|_| CliError::UnknownSignal(id.into()))?;
        return Ok(Signal::constant(c));
    }
    if let Some(path) = id.strip_prefix("file:") {
        return load_signal_file(path);
    }
    Err(CliError::UnknownSignal(id.into()))
}

/// One-column-per-sample CSV loader: rows `u,value`, linear interpolation
/// in ln u, zero outside the sampled range.
fn load_signal_file(path: &str) -> Result<Signal, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::SignalFile {
        path: path.into(),
        message: e.to_string(),
    })?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split(',');
        let (u, v) = (it.next(), it.next());
        match (u, v) {
            (Some(u), Some(v)) => {
                let parsed = u
                    .trim()
                    .parse::<f64>()
                    .and_then(|u| v.trim().parse::<f64>().map(|v| (u, v)));
                match parsed {
                    Ok(pair) => rows.push(pair),
                    // Tolerate a non-numeric header row.
                    Err(_) if i == 0 => continue,
                    Err(_) => {
                        return Err(CliError::SignalFile {
                            path: path.into(),
                            message: format!("bad row {}", i + 1),
                        })
                    }
                }
            }
            _ => {
                return Err(CliError::SignalFile {
                    path: path.into(),
                    message: format!("row {} needs `u,value`", i + 1),
                })
            }
        }
    }
    Signal::from_samples(format!("file:{path}"), rows).map_err(|e| CliError::SignalFile {
        path: path.into(),
        message: e.to_string(),
    })
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|p| p.trim().parse().map_err(|_| CliError::BadList(s.into())))
        .collect()
}

fn parse_u32_list(s: &str) -> Result<Vec<u32>, CliError> {
    s.split(',')
        .map(|p| p.trim().parse().map_err(|_| CliError::BadList(s.into())))
        .collect()
}

/// `lo:hi:count` log-uniform grid.
fn parse_z_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::BadGrid(s.into()));
    }
    let lo: f64 = parts[0].parse().map_err(|_| CliError::BadGrid(s.into()))?;
    let hi: f64 = parts[1].parse().map_err(|_| CliError::BadGrid(s.into()))?;
    let count: usize = parts[2].parse().map_err(|_| CliError::BadGrid(s.into()))?;
    if !(lo > 0.0 && hi > lo && count >= 2) {
        return Err(CliError::BadGrid(s.into()));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect())
}

/// Fully parsed run configuration; round-trips through its flag form.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub op: OperatorKind,
    pub signal_id: String,
    pub phi_id: String,
    pub psi_id: String,
    pub n_values: Vec<u32>,
    pub z_values: Vec<f64>,
    pub quad_tol: f64,
}

impl RunConfig {
    pub fn to_args(&self) -> Vec<String> {
        let z = self
            .z_values
            .iter()
            .map(|z| z.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let n = self
            .n_values
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(",");
        vec![
            "--phi".into(),
            self.phi_id.clone(),
            "--psi".into(),
            self.psi_id.clone(),
            "--op".into(),
            self.op.name().into(),
            "--signal".into(),
            self.signal_id.clone(),
            "--n".into(),
            n,
            "--z".into(),
            z,
            "--quad-tol".into(),
            self.quad_tol.to_string(),
        ]
    }
}

fn resolve_config(args: &EvalArgs, default_z: &[f64]) -> Result<RunConfig, CliError> {
    let op = OperatorKind::parse(&args.op).ok_or_else(|| CliError::UnknownOperator(args.op.clone()))?;
    let n_values = parse_u32_list(&args.n)?;
    if n_values.is_empty() {
        return Err(CliError::EmptyN);
    }
    let z_values = match (&args.z, &args.z_grid) {
        (Some(z), _) => parse_f64_list(z)?,
        (None, Some(grid)) => parse_z_grid(grid)?,
        (None, None) => default_z.to_vec(),
    };
    Ok(RunConfig {
        op,
        signal_id: args.signal.clone(),
        phi_id: args.kernels.phi.clone(),
        psi_id: args.kernels.psi.clone(),
        n_values,
        z_values,
        quad_tol: args.quad_tol,
    })
}

/// Round-trip a flag vector back into a config (used by the config
/// round-trip invariant and handy for scripting tests).
pub fn config_from_args(argv: &[String]) -> Result<RunConfig, CliError> {
    let mut full = vec!["expsamp".to_string(), "eval".to_string()];
    full.extend_from_slice(argv);
    let cli = Cli::try_parse_from(&full).map_err(|e| CliError::Other(e.to_string()))?;
    match cli.command {
        Command::Eval { args } => resolve_config(&args, &[]),
        _ => unreachable!("forced eval subcommand"),
    }
}

fn build_template(cfg: &RunConfig) -> Result<ParamsTemplate, CliError> {
    let phi = parse_phi(&cfg.phi_id)?;
    let psi = parse_psi(&cfg.psi_id)?;
    let mut template = ParamsTemplate::new(phi, psi);
    template.quad = QuadratureSpec {
        abs_tol: cfg.quad_tol,
        ..QuadratureSpec::default()
    };
    Ok(template)
}

fn check_signal_compat(op: OperatorKind, signal: &Signal) -> Result<(), CliError> {
    if op == OperatorKind::MaxMin && !signal.in_unit_range() {
        let (lo, hi) = signal.range_bounds();
        return Err(CliError::Mismatch(format!(
            "max-min needs range within [0, 1]; `{}` declares [{lo}, {hi}]",
            signal.name()
        )));
    }
    Ok(())
}

/// Report any jump a signal declares or exhibits at its breakpoints; the
/// piecewise test signal is printed as-is, discontinuities included.
fn report_jumps(signal: &Signal) {
    for &u in signal.breakpoints() {
        let jump = signal.jump_at(u);
        if jump > 1e-9 {
            eprintln!(
                "note: signal `{}` jumps by {jump:.6} at u = {u}; printed piecewise definition kept verbatim",
                signal.name()
            );
        }
    }
}

/// Format with six significant digits, locale-independent.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0.00000".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let mag = v.abs().log10().floor() as i32;
    let dec = (5 - mag).clamp(0, 17) as usize;
    format!("{v:.dec$}")
}

const TABLE_DEFAULT_Z: [f64; 5] = [0.3, 0.8, 1.5, 2.2, 2.8];

fn cmd_validate(kernels: &KernelArgs, tol: f64) -> Result<i32, CliError> {
    let phi = parse_phi(&kernels.phi)?;
    let psi = parse_psi(&kernels.psi)?;
    let report = validate_kernel_pair(&phi, &psi, tol);
    for check in &report.checks {
        println!(
            "{}: {} (measured {})",
            check.condition,
            if check.passed { "pass" } else { "FAIL" },
            check.measured
        );
    }
    Ok(if report.all_passed() { 0 } else { 1 })
}

fn cmd_eval(args: &EvalArgs) -> Result<i32, CliError> {
    let cfg = resolve_config(args, &TABLE_DEFAULT_Z)?;
    let signal = parse_signal(&cfg.signal_id)?;
    check_signal_compat(cfg.op, &signal)?;
    let template = build_template(&cfg)?;
    println!("z,n,value,exact,abs_error");
    for &z in &cfg.z_values {
        for &n in &cfg.n_values {
            let params = template.with_n(n);
            match cfg.op.evaluate(&signal, z, &params) {
                Ok(v) => {
                    let exact = signal.evaluate(z);
                    println!(
                        "{},{},{},{},{}",
                        fmt_sig(z),
                        n,
                        fmt_sig(v),
                        fmt_sig(exact),
                        fmt_sig((v - exact).abs())
                    );
                }
                Err(e) => println!("{},{},error: {e},,", fmt_sig(z), n),
            }
        }
    }
    Ok(0)
}

fn report_to_csv(report: &ErrorReport) -> String {
    let mut out = String::from("z,n,approx,exact,abs_error\n");
    for row in &report.rows {
        for (j, cell) in row.cells.iter().enumerate() {
            match cell {
                ErrorCell::Value {
                    approx,
                    exact,
                    abs_error,
                } => {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{}",
                        fmt_sig(row.z),
                        report.n_values[j],
                        fmt_sig(*approx),
                        fmt_sig(*exact),
                        fmt_sig(*abs_error)
                    );
                }
                ErrorCell::Failed(msg) => {
                    let _ = writeln!(out, "{},{},error: {msg},,", fmt_sig(row.z), report.n_values[j]);
                }
            }
        }
    }
    out
}

fn cmd_table(args: &EvalArgs, out: &Path, format: &str) -> Result<i32, CliError> {
    if format != "csv" {
        return Err(CliError::BadFormat(format.into()));
    }
    let cfg = resolve_config(args, &TABLE_DEFAULT_Z)?;
    let signal = parse_signal(&cfg.signal_id)?;
    check_signal_compat(cfg.op, &signal)?;
    report_jumps(&signal);
    let template = build_template(&cfg)?;
    let report = pointwise_errors(cfg.op, &signal, &cfg.z_values, &cfg.n_values, &template)
        .map_err(|e| CliError::Other(e.to_string()))?;
    std::fs::write(out, report_to_csv(&report))?;
    println!(
        "wrote {} ({} rows)",
        out.display(),
        report.rows.len() * report.n_values.len()
    );
    Ok(0)
}

struct Curve {
    label: String,
    points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 8] = [
    "#1a1a1a", "#c0392b", "#2980b9", "#27ae60", "#8e44ad", "#d35400", "#16a085", "#7f8c8d",
];

/// Minimal hand-rolled SVG: fixed 800x500 viewport, 50px margin, linear
/// axes with six ticks, one polyline per curve, legend in the top-right.
fn render_svg(curves: &[Curve]) -> String {
    let (width, height, margin) = (800.0, 500.0, 50.0);
    let (pw, ph) = (width - 2.0 * margin, height - 2.0 * margin);
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for c in curves {
        for &(x, y) in &c.points {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
    }
    if xmin >= xmax {
        xmax = xmin + 1.0;
    }
    if ymin >= ymax {
        ymax = ymin + 1.0;
    }
    let pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    let sx = move |x: f64| margin + (x - xmin) / (xmax - xmin) * pw;
    let sy = move |y: f64| height - margin - (y - ymin) / (ymax - ymin) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<rect x=\"{margin}\" y=\"{margin}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"#666\"/>"
    );
    for i in 0..6 {
        let t = i as f64 / 5.0;
        let xv = xmin + t * (xmax - xmin);
        let yv = ymin + t * (ymax - ymin);
        let x = sx(xv);
        let y = sy(yv);
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#666\"/>",
            height - margin,
            height - margin + 5.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
            height - margin + 18.0,
            fmt_sig(xv)
        );
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{margin}\" y2=\"{y:.2}\" stroke=\"#666\"/>",
            margin - 5.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{}</text>",
            margin - 8.0,
            y + 4.0,
            fmt_sig(yv)
        );
    }
    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts = String::new();
        for &(x, y) in &c.points {
            let _ = write!(pts, "{:.2},{:.2} ", sx(x), sy(y));
        }
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            pts.trim_end()
        );
        let ly = margin + 16.0 + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>",
            width - margin - 150.0,
            width - margin - 120.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\">{}</text>",
            width - margin - 112.0,
            ly + 4.0,
            c.label
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn cmd_plot(args: &EvalArgs, ops_flag: &str, out: &Path, format: &str) -> Result<i32, CliError> {
    if format != "svg" {
        return Err(CliError::BadFormat(format.into()));
    }
    if args.z.is_none() && args.z_grid.is_none() {
        return Err(CliError::MissingGrid);
    }
    let cfg = resolve_config(args, &[])?;
    let ops: Vec<OperatorKind> = if ops_flag.is_empty() {
        vec![cfg.op]
    } else {
        ops_flag
            .split(',')
            .map(|s| OperatorKind::parse(s.trim()).ok_or_else(|| CliError::UnknownOperator(s.into())))
            .collect::<Result<_, _>>()?
    };
    let signal = parse_signal(&cfg.signal_id)?;
    for &op in &ops {
        check_signal_compat(op, &signal)?;
    }
    report_jumps(&signal);
    let template = build_template(&cfg)?;

    let mut curves = Vec::new();
    curves.push(Curve {
        label: signal.name().to_string(),
        points: cfg.z_values.iter().map(|&z| (z, signal.evaluate(z))).collect(),
    });
    for &op in &ops {
        for &n in &cfg.n_values {
            let params = template.with_n(n);
            let points: Vec<(f64, f64)> = cfg
                .z_values
                .par_iter()
                .map(|&z| {
                    let v = op.evaluate(&signal, z, &params).unwrap_or(f64::NAN);
                    (z, v)
                })
                .collect();
            let points: Vec<(f64, f64)> = points.into_iter().filter(|p| p.1.is_finite()).collect();
            let label = if ops.len() > 1 {
                format!("{} n={n}", op.name())
            } else {
                format!("n={n}")
            };
            curves.push(Curve { label, points });
        }
    }

    std::fs::write(out, render_svg(&curves))?;

    // Samples as a sibling CSV, one column per curve.
    let csv_path = out.with_extension("csv");
    let mut csv = String::from("z");
    for c in &curves {
        let _ = write!(csv, ",{}", c.label.replace(',', ";"));
    }
    csv.push('\n');
    for &z in &cfg.z_values {
        let _ = write!(csv, "{}", fmt_sig(z));
        for c in &curves {
            match c.points.iter().find(|p| p.0 == z) {
                Some(&(_, y)) => {
                    let _ = write!(csv, ",{}", fmt_sig(y));
                }
                None => csv.push(','),
            }
        }
        csv.push('\n');
    }
    std::fs::write(&csv_path, csv)?;
    println!("wrote {} and {}", out.display(), csv_path.display());
    Ok(0)
}

fn cmd_converge(args: &EvalArgs, out: &Path) -> Result<i32, CliError> {
    let cfg = resolve_config(args, &TABLE_DEFAULT_Z)?;
    let signal = parse_signal(&cfg.signal_id)?;
    check_signal_compat(cfg.op, &signal)?;
    let template = build_template(&cfg)?;
    let report = pointwise_errors(cfg.op, &signal, &cfg.z_values, &cfg.n_values, &template)
        .map_err(|e| CliError::Other(e.to_string()))?;
    let sups = report.sup_errors().map_err(|e| CliError::Other(e.to_string()))?;
    let mut csv = String::from("n,sup_abs_error\n");
    for &(n, e) in &sups {
        let _ = writeln!(csv, "{n},{}", fmt_sig(e));
    }
    std::fs::write(out, csv)?;
    match estimate_rate(&report).map_err(|e| CliError::Other(e.to_string()))? {
        RateOutcome::Estimate(est) => {
            println!(
                "slope={:.6} intercept={:.6} r_squared={:.6} n={:?}",
                est.slope, est.intercept, est.r_squared, est.n_values
            );
        }
        RateOutcome::Undefined(reason) => {
            println!("rate undefined: {reason}");
        }
    }
    Ok(0)
}

/// Run a parsed CLI and return the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Validate { kernels, tol } => cmd_validate(kernels, *tol),
        Command::Eval { args } => cmd_eval(args),
        Command::Table { args, out, format } => cmd_table(args, out, format),
        Command::Plot {
            args,
            ops,
            out,
            format,
        } => cmd_plot(args, ops, out, format),
        Command::Converge { args, out } => cmd_converge(args, out),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if is_usage(&e) {
                2
            } else {
                1
            }
        }
    }
}

/// Parse argv and run; clap usage errors exit 2 on their own.
pub fn main_from_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(argv) {
        Ok(cli) => run(cli),
        Err(e) => {
            // clap renders its own message; keep its exit-code convention
            // (2 for usage problems, 0 for --help/--version).
            e.exit()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_identifiers_parse() {
        assert!(parse_phi("bspline:2").is_ok());
        assert!(parse_phi("bspline:3").is_ok());
        assert!(parse_psi("fejer:pi:0").is_ok());
        assert!(parse_psi("fejer:3.5:0").is_ok());
        assert!(parse_psi("bspline:2").is_ok());
        assert!(parse_phi("fejer:pi:0").is_ok());
        assert!(matches!(parse_phi("box:1"), Err(CliError::UnknownKernel(_))));
        assert!(matches!(parse_psi("fejer:pi"), Err(CliError::UnknownKernel(_))));
    }

    #[test]
    fn signal_identifiers_parse() {
        assert_eq!(parse_signal("f").unwrap().name(), "f");
        assert_eq!(parse_signal("g").unwrap().name(), "g");
        assert!((parse_signal("const:0.5").unwrap().evaluate(1.0) - 0.5).abs() < 1e-15);
        assert!(matches!(parse_signal("h"), Err(CliError::UnknownSignal(_))));
    }

    #[test]
    fn z_grid_parses_log_uniform() {
        let g = parse_z_grid("0.05:3:301").unwrap();
        assert_eq!(g.len(), 301);
        assert!((g[0] - 0.05).abs() < 1e-12);
        assert!((g[300] - 3.0).abs() < 1e-12);
        // Log-uniform: ratios are constant.
        let r0 = g[1] / g[0];
        let r1 = g[150] / g[149];
        assert!((r0 - r1).abs() < 1e-9);
        assert!(parse_z_grid("3:0.05:10").is_err());
    }

    #[test]
    fn config_round_trips_through_flags() {
        let cfg = RunConfig {
            op: OperatorKind::MaxMin,
            signal_id: "g".into(),
            phi_id: "bspline:2".into(),
            psi_id: "fejer:pi:0".into(),
            n_values: vec![5, 10, 20],
            z_values: vec![0.3, 1.5, 2.8],
            quad_tol: 1e-9,
        };
        let parsed = config_from_args(&cfg.to_args()).unwrap();
        assert_eq!(parsed, cfg);
    }

    #[test]
    fn fmt_sig_is_six_significant_digits() {
        assert_eq!(fmt_sig(0.038152), "0.0381520");
        assert_eq!(fmt_sig(1.2345678), "1.23457");
        assert_eq!(fmt_sig(0.0), "0.00000");
        assert_eq!(fmt_sig(123456.7), "123457");
        assert!(!fmt_sig(0.1).contains(','));
    }

    #[test]
    fn builtin_f_matches_independent_transcription() {
        // Duplicate-transcription guard: compare against a separately typed
        // copy of the formula at pseudo-random points of the support.
        let f = test_f();
        let independent = |u: f64| {
            let numerator = (std::f64::consts::PI * u).sin() + 1.0;
            let denominator = 1.0 + u.powi(2);
            (numerator / denominator).atan() / (2.0_f64).atan()
        };
        let mut state = 0x1234_5678_u64;
        for _ in 0..10 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let t = (state >> 11) as f64 / (1u64 << 53) as f64;
            let u = 0.1 + t * 2.9;
            assert!((f.evaluate(u) - independent(u)).abs() < 1e-15, "u={u}");
        }
    }

    #[test]
    fn g_spot_values_follow_printed_pieces() {
        let g = test_g();
        assert!((g.evaluate(0.5) - (0.1 + 0.8 / 9.0 * 0.25)).abs() < 1e-15);
        assert!((g.evaluate(1.1) - 0.9).abs() < 1e-15);
        assert!((g.evaluate(2.5) - (0.3 + 0.7 * 0.5)).abs() < 1e-15);
    }
}
