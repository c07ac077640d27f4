//! The four sampling operators: max-product Durrmeyer, max-min Durrmeyer,
//! and the linear Durrmeyer and Kantorovich baselines, together with the
//! lattice combinators and index-window logic they share.
//!
//! The lattice supremum over k in Z is realized as a maximum over a finite
//! index window; for a compactly supported Phi the window is exact, and the
//! supremum always contains the zero contributed by the (vanishing) far
//! terms of the lattice.

use thiserror::Error;

use crate::kernels::{KernelPhi, KernelPsi};
use crate::quad::{coefficient_detail, signal_exp_integral, QuadError, QuadratureSpec};
use crate::signal::Signal;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("supremum of an empty value list")]
    EmptyList,
    #[error("non-finite value in lattice supremum")]
    NonFiniteValue,
    #[error("index window for z = {z} (n = {n}) is empty")]
    EmptyWindow { z: f64, n: u32 },
    #[error(
        "denominator {denominator:.3e} below positivity threshold at z = {z} (window {k_lo}..={k_hi})"
    )]
    DenominatorTooSmall {
        z: f64,
        denominator: f64,
        k_lo: i64,
        k_hi: i64,
    },
    #[error("max-min operator requires a signal with range inside [0, 1]; `{name}` declares [{lo}, {hi}]")]
    RangeOutsideUnit { name: String, lo: f64, hi: f64 },
    #[error("evaluation point must be positive and finite, got {0}")]
    BadPoint(f64),
    #[error(transparent)]
    Quad(#[from] QuadError),
}

/// Denominators below this are treated as a configuration bug (a vanishing
/// kernel or a mis-declared support), not as zero output.
pub const DENOMINATOR_THRESHOLD: f64 = 1e-12;

/// Window radius (in units of tau from the sampling theory) used for
/// kernels without a declared log-domain support. The neglected lattice
/// terms are bounded by the kernel values past n*TAU_MAX.
pub const TAU_MAX: f64 = 4.0;

/// Finite lattice maximum. Errors on an empty or non-finite list.
pub fn sup_over(values: &[f64]) -> Result<f64, OperatorError> {
    if values.is_empty() {
        return Err(OperatorError::EmptyList);
    }
    let mut best = f64::NEG_INFINITY;
    for &v in values {
        if !v.is_finite() {
            return Err(OperatorError::NonFiniteValue);
        }
        best = best.max(v);
    }
    Ok(best)
}

/// The lattice meet.
pub fn min_pair(a: f64, b: f64) -> f64 {
    a.min(b)
}

/// Evaluation parameters shared by all four operators.
#[derive(Debug, Clone)]
pub struct OperatorParams {
    pub n: u32,
    pub phi: KernelPhi,
    pub psi: KernelPsi,
    pub quad: QuadratureSpec,
    /// Extra log-radius added to the Phi support window.
    pub k_window_pad: f64,
}

impl OperatorParams {
    pub fn new(n: u32, phi: KernelPhi, psi: KernelPsi) -> Self {
        Self {
            n,
            phi,
            psi,
            quad: QuadratureSpec::default(),
            k_window_pad: 0.0,
        }
    }
}

/// Per-evaluation record: the window, the two lattice aggregates, and the
/// operator value. For the max-min operator `numerator` holds the winning
/// min-term (the value itself) and `denominator` the weight normalizer.
#[derive(Debug, Clone)]
pub struct EvalTrace {
    pub z: f64,
    pub k_indices: Vec<i64>,
    pub numerator: f64,
    pub denominator: f64,
    pub value: f64,
}

/// All integers k with |n ln z - k| within the kernel's log-support
/// half-width plus `n * pad`; kernels without a declared support get the
/// fixed radius `n * TAU_MAX`.
pub fn index_window(phi: &KernelPhi, n: u32, z: f64, pad: f64) -> Vec<i64> {
    let t = n as f64 * z.ln();
    let half = match phi.log_support() {
        Some((a, b)) => a.abs().max(b.abs()),
        None => n as f64 * TAU_MAX,
    };
    let radius = half + n as f64 * pad;
    let lo = (t - radius).ceil() as i64;
    let hi = (t + radius).floor() as i64;
    (lo..=hi).collect()
}

struct WindowEval {
    ks: Vec<i64>,
    phis: Vec<f64>,
    denominator: f64,
}

fn check_point(z: f64) -> Result<(), OperatorError> {
    if !(z.is_finite() && z > 0.0) {
        return Err(OperatorError::BadPoint(z));
    }
    Ok(())
}

/// Shared setup: window, kernel weights, unit-signal coefficients, and the
/// denominator lattice sup, with its positivity check.
fn window_eval(signal: &Signal, z: f64, params: &OperatorParams) -> Result<WindowEval, OperatorError> {
    check_point(z)?;
    let ks = index_window(&params.phi, params.n, z, params.k_window_pad);
    if ks.is_empty() {
        return Err(OperatorError::EmptyWindow { z, n: params.n });
    }
    let t = params.n as f64 * z.ln();
    let unit = signal.unit_on_same_support();
    let mut phis = Vec::with_capacity(ks.len());
    let mut unit_coeffs = Vec::with_capacity(ks.len());
    let mut any_clipped = false;
    for &k in &ks {
        let phi_k = params.phi.evaluate_log(t - k as f64);
        let c = if phi_k != 0.0 {
            let outcome = coefficient_detail(&params.psi, &unit, params.n, k, &params.quad)?;
            any_clipped |= outcome.support_clipped;
            outcome.result.value
        } else {
            // A vanishing kernel weight zeroes the term regardless of the
            // coefficient; skip the integral.
            0.0
        };
        phis.push(phi_k);
        unit_coeffs.push(c);
    }
    // The far lattice terms vanish, so the supremum over Z is at least 0.
    let mut denominator = 0.0_f64;
    for (p, c) in phis.iter().zip(&unit_coeffs) {
        denominator = denominator.max(p * c);
    }
    if denominator < DENOMINATOR_THRESHOLD {
        return Err(OperatorError::DenominatorTooSmall {
            z,
            denominator,
            k_lo: ks[0],
            k_hi: ks[ks.len() - 1],
        });
    }
    // With the quadrature window fully inside the signal support, the unit
    // coefficients collapse to 1 and the denominator to the bare kernel sup.
    if cfg!(debug_assertions) && !any_clipped {
        let phi_sup = phis.iter().cloned().fold(0.0_f64, f64::max);
        debug_assert!(
            (denominator - phi_sup).abs() <= 1e-7 * phi_sup.max(1.0),
            "unit-normalized denominator {denominator} drifted from kernel sup {phi_sup}"
        );
    }
    Ok(WindowEval {
        ks,
        phis,
        denominator,
    })
}

fn signal_coefficient(
    signal: &Signal,
    k: i64,
    params: &OperatorParams,
    phi_k: f64,
) -> Result<f64, OperatorError> {
    if phi_k == 0.0 {
        return Ok(0.0);
    }
    let c = coefficient_detail(&params.psi, signal, params.n, k, &params.quad)?;
    Ok(c.result.value)
}

/// Max-product Durrmeyer operator:
/// the lattice sup of `Phi(z^n e^{-k}) c_k(h)` normalized by the lattice
/// sup of `Phi(z^n e^{-k}) c_k(1)`.
pub fn max_product_durrmeyer(
    signal: &Signal,
    z: f64,
    params: &OperatorParams,
) -> Result<EvalTrace, OperatorError> {
    let w = window_eval(signal, z, params)?;
    let mut numerator = 0.0_f64;
    for (&k, &phi_k) in w.ks.iter().zip(&w.phis) {
        let c = signal_coefficient(signal, k, params, phi_k)?;
        numerator = numerator.max(phi_k * c);
    }
    Ok(EvalTrace {
        z,
        k_indices: w.ks,
        numerator,
        denominator: w.denominator,
        value: numerator / w.denominator,
    })
}

/// Max-min Durrmeyer operator for signals valued in [0, 1]:
/// the lattice sup of `c_k(h) ∧ w_k(z)` with weights
/// `w_k(z) = Phi(z^n e^{-k}) / ⋁_j Phi(z^n e^{-j}) c_j(1)`.
pub fn max_min_durrmeyer(
    signal: &Signal,
    z: f64,
    params: &OperatorParams,
) -> Result<EvalTrace, OperatorError> {
    if !signal.in_unit_range() {
        let (lo, hi) = signal.range_bounds();
        return Err(OperatorError::RangeOutsideUnit {
            name: signal.name().to_string(),
            lo,
            hi,
        });
    }
    let w = window_eval(signal, z, params)?;
    let mut value = 0.0_f64;
    for (&k, &phi_k) in w.ks.iter().zip(&w.phis) {
        let c = signal_coefficient(signal, k, params, phi_k)?;
        let weight = phi_k / w.denominator;
        value = value.max(min_pair(c, weight));
    }
    debug_assert!(
        (-1e-6..=1.0 + 1e-6).contains(&value),
        "max-min output {value} escaped [0, 1] beyond quadrature slack"
    );
    Ok(EvalTrace {
        z,
        k_indices: w.ks,
        numerator: value,
        denominator: w.denominator,
        value,
    })
}

/// Linear Durrmeyer baseline: the window sum of `Phi(z^n e^{-k}) c_k(h)`.
pub fn linear_durrmeyer(
    signal: &Signal,
    z: f64,
    params: &OperatorParams,
) -> Result<f64, OperatorError> {
    check_point(z)?;
    let ks = index_window(&params.phi, params.n, z, params.k_window_pad);
    if ks.is_empty() {
        return Err(OperatorError::EmptyWindow { z, n: params.n });
    }
    let t = params.n as f64 * z.ln();
    let mut acc = 0.0;
    for &k in &ks {
        let phi_k = params.phi.evaluate_log(t - k as f64);
        if phi_k != 0.0 {
            let c = coefficient_detail(&params.psi, signal, params.n, k, &params.quad)?;
            acc += phi_k * c.result.value;
        }
    }
    Ok(acc)
}

/// Kantorovich baseline: the window sum of
/// `Phi(z^n e^{-k}) · n ∫_{k/n}^{(k+1)/n} h(e^u) du`.
pub fn kantorovich(
    signal: &Signal,
    z: f64,
    params: &OperatorParams,
) -> Result<f64, OperatorError> {
    check_point(z)?;
    let ks = index_window(&params.phi, params.n, z, params.k_window_pad);
    if ks.is_empty() {
        return Err(OperatorError::EmptyWindow { z, n: params.n });
    }
    let t = params.n as f64 * z.ln();
    let nf = params.n as f64;
    let mut acc = 0.0;
    for &k in &ks {
        let phi_k = params.phi.evaluate_log(t - k as f64);
        if phi_k != 0.0 {
            let cell = signal_exp_integral(signal, k as f64 / nf, (k + 1) as f64 / nf, &params.quad)?;
            acc += phi_k * nf * cell.value;
        }
    }
    Ok(acc)
}

/// Operator selector used by the error-table and CLI layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    MaxProduct,
    MaxMin,
    Linear,
    Kantorovich,
}

impl OperatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            OperatorKind::MaxProduct => "max-product",
            OperatorKind::MaxMin => "max-min",
            OperatorKind::Linear => "linear",
            OperatorKind::Kantorovich => "kantorovich",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "max-product" | "maxproduct" | "max_product" => Some(OperatorKind::MaxProduct),
            "max-min" | "maxmin" | "max_min" => Some(OperatorKind::MaxMin),
            "linear" => Some(OperatorKind::Linear),
            "kantorovich" => Some(OperatorKind::Kantorovich),
            _ => None,
        }
    }

    pub fn evaluate(
        &self,
        signal: &Signal,
        z: f64,
        params: &OperatorParams,
    ) -> Result<f64, OperatorError> {
        match self {
            OperatorKind::MaxProduct => max_product_durrmeyer(signal, z, params).map(|t| t.value),
            OperatorKind::MaxMin => max_min_durrmeyer(signal, z, params).map(|t| t.value),
            OperatorKind::Linear => linear_durrmeyer(signal, z, params),
            OperatorKind::Kantorovich => kantorovich(signal, z, params),
        }
    }
}
