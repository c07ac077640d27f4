//! Error measurement and convergence analysis: the logarithmic modulus of
//! continuity, pointwise error tables matching the published layout, the
//! quantitative max-product error bound, and empirical rate estimation.

use rayon::prelude::*;
use thiserror::Error;

use crate::kernels::{KernelPhi, KernelPsi, MomentValue};
use crate::operators::{OperatorKind, OperatorParams};
use crate::quad::QuadratureSpec;
use crate::signal::Signal;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("signal support is empty or degenerate")]
    EmptySupport,
    #[error("modulus step parameter must be positive, got {0}")]
    BadStep(f64),
    #[error("rate estimation needs at least 4 distinct n values, got {0}")]
    TooFewPoints(usize),
    #[error("no successful cells for n = {0}")]
    EmptyColumn(u32),
    #[error("empty evaluation grid")]
    EmptyGrid,
}

/// Default point count for the log-uniform modulus grid.
pub const DEFAULT_MODULUS_GRID: u32 = 4096;

/// Logarithmic modulus of continuity: the supremum of |h(s) - h(t)| over
/// support pairs with |ln s - ln t| <= varsigma, approximated on a
/// log-uniform grid (a lower estimate of the true supremum).
pub fn log_modulus(signal: &Signal, varsigma: f64, grid: u32) -> Result<f64, AnalysisError> {
    if varsigma.is_nan() || varsigma <= 0.0 {
        return Err(AnalysisError::BadStep(varsigma));
    }
    let samples = modulus_samples(signal, grid)?;
    Ok(modulus_from_samples(&samples.values, samples.step, varsigma))
}

struct ModulusSamples {
    values: Vec<f64>,
    step: f64,
}

fn modulus_samples(signal: &Signal, grid: u32) -> Result<ModulusSamples, AnalysisError> {
    let (lo, hi) = signal.support();
    let lo = if lo > 0.0 { lo } else { hi * 1e-12 };
    if lo >= hi || grid < 2 {
        return Err(AnalysisError::EmptySupport);
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (grid - 1) as f64;
    let values = (0..grid)
        .map(|i| signal.evaluate((a + i as f64 * step).exp()))
        .collect();
    Ok(ModulusSamples { values, step })
}

/// Sliding-window sup of (max - min) over index windows of width
/// floor(varsigma / step), via monotonic deques.
fn modulus_from_samples(values: &[f64], step: f64, varsigma: f64) -> f64 {
    let w = (varsigma / step).floor() as usize;
    if w == 0 {
        return 0.0;
    }
    let n = values.len();
    let mut best = 0.0_f64;
    let mut maxq: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    let mut minq: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    for i in 0..n {
        while let Some(&j) = maxq.back() {
            if values[j] <= values[i] {
                maxq.pop_back();
            } else {
                break;
            }
        }
        maxq.push_back(i);
        while let Some(&j) = minq.back() {
            if values[j] >= values[i] {
                minq.pop_back();
            } else {
                break;
            }
        }
        minq.push_back(i);
        let lo = i.saturating_sub(w);
        while *maxq.front().unwrap() < lo {
            maxq.pop_front();
        }
        while *minq.front().unwrap() < lo {
            minq.pop_front();
        }
        best = best.max(values[*maxq.front().unwrap()] - values[*minq.front().unwrap()]);
    }
    best
}

/// One table cell: the operator value against the exact signal value, or
/// the failure that prevented it.
#[derive(Debug, Clone)]
pub enum ErrorCell {
    Value {
        approx: f64,
        exact: f64,
        abs_error: f64,
    },
    Failed(String),
}

#[derive(Debug, Clone)]
pub struct ErrorRow {
    pub z: f64,
    pub cells: Vec<ErrorCell>,
}

/// Pointwise absolute errors across a (z, n) cross product, in the layout
/// of the published tables: one row per z, one column per n.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub operator_name: String,
    pub signal_name: String,
    pub z_values: Vec<f64>,
    pub n_values: Vec<u32>,
    pub rows: Vec<ErrorRow>,
}

impl ErrorReport {
    /// Sup over the z grid of the absolute error, per n column.
    pub fn sup_errors(&self) -> Result<Vec<(u32, f64)>, AnalysisError> {
        let mut out = Vec::with_capacity(self.n_values.len());
        for (j, &n) in self.n_values.iter().enumerate() {
            let mut sup: Option<f64> = None;
            for row in &self.rows {
                if let ErrorCell::Value { abs_error, .. } = row.cells[j] {
                    sup = Some(sup.map_or(abs_error, |s: f64| s.max(abs_error)));
                }
            }
            match sup {
                Some(s) => out.push((n, s)),
                None => return Err(AnalysisError::EmptyColumn(n)),
            }
        }
        Ok(out)
    }
}

/// Operator parameters minus the sampling rate; error reports instantiate
/// it per n column.
#[derive(Debug, Clone)]
pub struct ParamsTemplate {
    pub phi: KernelPhi,
    pub psi: KernelPsi,
    pub quad: QuadratureSpec,
    pub k_window_pad: f64,
}

impl ParamsTemplate {
    pub fn new(phi: KernelPhi, psi: KernelPsi) -> Self {
        Self {
            phi,
            psi,
            quad: QuadratureSpec::default(),
            k_window_pad: 0.0,
        }
    }

    pub fn with_n(&self, n: u32) -> OperatorParams {
        OperatorParams {
            n,
            phi: self.phi.clone(),
            psi: self.psi.clone(),
            quad: self.quad,
            k_window_pad: self.k_window_pad,
        }
    }
}

/// Evaluate |operator(h)(z) - h(z)| for every (z, n) pair. Cells where the
/// operator fails carry the failure message instead of a number; the
/// computation is deterministic for a fixed configuration.
pub fn pointwise_errors(
    kind: OperatorKind,
    signal: &Signal,
    z_values: &[f64],
    n_values: &[u32],
    template: &ParamsTemplate,
) -> Result<ErrorReport, AnalysisError> {
    if z_values.is_empty() || n_values.is_empty() {
        return Err(AnalysisError::EmptyGrid);
    }
    let params: Vec<OperatorParams> = n_values.iter().map(|&n| template.with_n(n)).collect();
    let rows: Vec<ErrorRow> = z_values
        .par_iter()
        .map(|&z| {
            let cells = params
                .iter()
                .map(|p| match kind.evaluate(signal, z, p) {
                    Ok(approx) => {
                        let exact = signal.evaluate(z);
                        ErrorCell::Value {
                            approx,
                            exact,
                            abs_error: (approx - exact).abs(),
                        }
                    }
                    Err(e) => ErrorCell::Failed(e.to_string()),
                })
                .collect();
            ErrorRow { z, cells }
        })
        .collect();
    Ok(ErrorReport {
        operator_name: kind.name().to_string(),
        signal_name: signal.name().to_string(),
        z_values: z_values.to_vec(),
        n_values: n_values.to_vec(),
        rows,
    })
}

/// The quantitative max-product error bound, or a divergence flag when a
/// required kernel moment is infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundValue {
    Finite(f64),
    Divergent,
}

impl BoundValue {
    pub fn finite(&self) -> Option<f64> {
        match self {
            BoundValue::Finite(v) => Some(*v),
            BoundValue::Divergent => None,
        }
    }
}

/// Right-hand side of the max-product rate inequality at a given varsigma:
///
/// `(℧/ϑ) m0(Φ) M0(Ψ) + (℧/(n ϑ ς)) (m0(Φ) M1(Ψ) + m1(Φ) M0(Ψ))`
///
/// with ℧ the logarithmic modulus of the signal at ς. Divergence of any
/// moment (the Fejér kernel's M1) propagates as a flag.
#[allow(clippy::too_many_arguments)]
pub fn rate_bound_maxproduct(
    signal: &Signal,
    varsigma: f64,
    m0_phi: &MomentValue,
    m1_phi: &MomentValue,
    m0_psi: &MomentValue,
    m1_psi: &MomentValue,
    floor: f64,
    n: u32,
    modulus_grid: u32,
) -> Result<BoundValue, AnalysisError> {
    let (m0p, m1p, m0s, m1s) = match (
        m0_phi.finite(),
        m1_phi.finite(),
        m0_psi.finite(),
        m1_psi.finite(),
    ) {
        (Some(a), Some(b), Some(c), Some(d)) => (a, b, c, d),
        _ => return Ok(BoundValue::Divergent),
    };
    let omega = log_modulus(signal, varsigma, modulus_grid)?;
    let value = omega / floor * m0p * m0s
        + omega / (n as f64 * floor * varsigma) * (m0p * m1s + m1p * m0s);
    Ok(BoundValue::Finite(value))
}

/// The bound minimized over varsigma in [1/n, 1] by golden-section search.
/// Every varsigma yields a valid upper bound, so a local minimum is safe.
#[allow(clippy::too_many_arguments)]
pub fn optimal_rate_bound(
    signal: &Signal,
    m0_phi: &MomentValue,
    m1_phi: &MomentValue,
    m0_psi: &MomentValue,
    m1_psi: &MomentValue,
    floor: f64,
    n: u32,
    modulus_grid: u32,
) -> Result<BoundValue, AnalysisError> {
    if !(m0_phi.is_finite() && m1_phi.is_finite() && m0_psi.is_finite() && m1_psi.is_finite()) {
        return Ok(BoundValue::Divergent);
    }
    let samples = modulus_samples(signal, modulus_grid)?;
    let (m0p, m1p, m0s, m1s) = (
        m0_phi.finite().unwrap(),
        m1_phi.finite().unwrap(),
        m0_psi.finite().unwrap(),
        m1_psi.finite().unwrap(),
    );
    let eval = |s: f64| {
        let omega = modulus_from_samples(&samples.values, samples.step, s);
        omega / floor * m0p * m0s + omega / (n as f64 * floor * s) * (m0p * m1s + m1p * m0s)
    };
    let (mut a, mut b) = (1.0 / n as f64, 1.0_f64);
    if a >= b {
        return Ok(BoundValue::Finite(eval(b)));
    }
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (eval(c), eval(d));
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d);
        }
    }
    Ok(BoundValue::Finite(fc.min(fd)))
}

/// Log-log regression of sup-grid error against n.
#[derive(Debug, Clone)]
pub struct RateEstimate {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_values: Vec<u32>,
}

/// Rate estimation outcome; degenerate error profiles (all zero, or
/// constant) have no defined slope and are flagged instead.
#[derive(Debug, Clone)]
pub enum RateOutcome {
    Estimate(RateEstimate),
    Undefined(&'static str),
}

/// Least-squares slope of ln(sup error) against ln n over the report's
/// n values.
pub fn estimate_rate(report: &ErrorReport) -> Result<RateOutcome, AnalysisError> {
    let sups = report.sup_errors()?;
    if sups.len() < 4 {
        return Err(AnalysisError::TooFewPoints(sups.len()));
    }
    // Errors at the arithmetic noise floor (constant signals reproduce to
    // rounding) carry no rate information.
    if sups.iter().any(|&(_, e)| e < 1e-12) {
        return Ok(RateOutcome::Undefined("zero errors: slope undefined"));
    }
    let pts: Vec<(f64, f64)> = sups
        .iter()
        .map(|&(n, e)| ((n as f64).ln(), e.ln()))
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return Ok(RateOutcome::Undefined("degenerate n grid"));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - (slope * p.0 + intercept)).powi(2))
        .sum();
    if ss_tot < 1e-24 {
        return Ok(RateOutcome::Undefined("constant errors: slope undefined"));
    }
    Ok(RateOutcome::Estimate(RateEstimate {
        slope,
        intercept,
        r_squared: 1.0 - ss_res / ss_tot,
        n_values: sups.iter().map(|&(n, _)| n).collect(),
    }))
}
