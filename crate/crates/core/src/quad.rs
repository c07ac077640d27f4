//! Numerical integration against the multiplicative Haar measure dt/t.
//!
//! Everything reduces to ordinary integrals on the log line via x = ln t.
//! The base rule is composite Simpson on uniform panels; one refinement
//! doubling supplies the rule-error estimate. Integration ranges are the
//! intersection of the truncation window, the kernel support, and the image
//! of the signal support, split at declared signal breakpoints so that
//! panels never straddle a jump.

use thiserror::Error;

use crate::kernels::{KernelPsi, TailCorrection};
use crate::signal::Signal;

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("integrand is not finite at log-domain x = {x} (value {value})")]
    NonFiniteSample { x: f64, value: f64 },
    #[error("quadrature spec invalid: {0}")]
    InvalidSpec(&'static str),
}

/// Base composite rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuadRule {
    #[default]
    Simpson,
    Trapezoid,
}

/// Truncation and panel policy for Mellin integrals.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    /// Hard cap on the log-domain truncation radius.
    pub truncation_radius: f64,
    /// Panels per unit log-interval (rounded up to even per segment).
    pub panels_per_unit: u32,
    pub rule: QuadRule,
    /// Target absolute tolerance for truncation-tail handling.
    pub abs_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            truncation_radius: 1e4,
            panels_per_unit: 64,
            rule: QuadRule::Simpson,
            abs_tol: 1e-9,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), QuadError> {
        if !self.truncation_radius.is_finite() || self.truncation_radius <= 0.0 {
            return Err(QuadError::InvalidSpec("truncation_radius must be positive"));
        }
        if self.panels_per_unit == 0 {
            return Err(QuadError::InvalidSpec("panels_per_unit must be positive"));
        }
        if !self.abs_tol.is_finite() || self.abs_tol <= 0.0 {
            return Err(QuadError::InvalidSpec("abs_tol must be positive"));
        }
        Ok(())
    }
}

/// Value with an error estimate (rule estimate plus any tail contribution)
/// and the integrand evaluation count.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuadResult {
    pub value: f64,
    pub est_error: f64,
    pub evaluations: u64,
}

impl QuadResult {
    pub fn within(&self, tol: f64) -> bool {
        self.est_error <= tol
    }
}

/// Tail handling for [`integrate_mellin`]: either an upper bound folded
/// into the error estimate, or accurate tail integrals added to the value
/// with their remainder folded into the estimate.
pub enum TailModel<'a> {
    Bound(&'a dyn Fn(f64) -> f64),
    Correction(&'a dyn Fn(f64) -> TailCorrection),
}

/// Minimum truncation radius handed to tail corrections. Far enough out
/// that a signal's boundary value is an accurate stand-in for its tail
/// behaviour, while keeping panel counts moderate.
const MIN_CORRECTED_RADIUS: f64 = 200.0;

/// Inward nudge applied to segment endpoints so samples never land exactly
/// on a support edge or jump point.
const EDGE_NUDGE: f64 = 1e-10;

fn composite<F: Fn(f64) -> f64>(
    rule: QuadRule,
    f: &F,
    a: f64,
    b: f64,
    panels: u32,
) -> Result<(f64, u64), QuadError> {
    let panels = panels.max(2);
    let h = (b - a) / panels as f64;
    let sample = |x: f64| -> Result<f64, QuadError> {
        let v = f(x);
        if !v.is_finite() {
            return Err(QuadError::NonFiniteSample { x, value: v });
        }
        Ok(v)
    };
    match rule {
        QuadRule::Simpson => {
            debug_assert!(panels.is_multiple_of(2));
            let mut acc = sample(a)? + sample(b)?;
            for i in 1..panels {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * sample(a + i as f64 * h)?;
            }
            Ok((acc * h / 3.0, panels as u64 + 1))
        }
        QuadRule::Trapezoid => {
            let mut acc = 0.5 * (sample(a)? + sample(b)?);
            for i in 1..panels {
                acc += sample(a + i as f64 * h)?;
            }
            Ok((acc * h, panels as u64 + 1))
        }
    }
}

fn even_panels(width: f64, per_unit: u32) -> u32 {
    let mut p = (width * per_unit as f64).ceil() as u32;
    p = p.max(4);
    if p % 2 == 1 {
        p += 1;
    }
    p
}

/// Integrate one smooth segment with a refinement doubling as the error
/// estimate (Simpson converges like h^4, so the difference over 15 bounds
/// the refined value's own error).
fn segment<F: Fn(f64) -> f64>(
    rule: QuadRule,
    f: &F,
    a: f64,
    b: f64,
    per_unit: u32,
) -> Result<QuadResult, QuadError> {
    if b <= a {
        return Ok(QuadResult::default());
    }
    let p = even_panels(b - a, per_unit);
    let (coarse, n1) = composite(rule, f, a, b, p)?;
    let (fine, n2) = composite(rule, f, a, b, p * 2)?;
    let divisor = match rule {
        QuadRule::Simpson => 15.0,
        QuadRule::Trapezoid => 3.0,
    };
    Ok(QuadResult {
        value: fine,
        est_error: (fine - coarse).abs() / divisor + f64::EPSILON * fine.abs(),
        evaluations: n1 + n2,
    })
}

/// Largest log radius at which `e^x` neither under- nor overflows, so the
/// t-space integrand of [`integrate_mellin`] stays inside its domain.
const EXP_REPRESENTABLE_RADIUS: f64 = 700.0;

/// `∫_0^∞ f(t) dt/t` truncated to `t ∈ [e^{-T}, e^{T}]` with
/// `T = spec.truncation_radius`, computed as `∫_{-T}^{T} f(e^x) dx`.
///
/// The integrand is sampled at `t = e^x`, so the effective radius is capped
/// at the representable exponential range; anything past it is accounted
/// for by the [`TailModel`]: a bound enlarges the error estimate, a
/// correction is added to the value.
pub fn integrate_mellin<F: Fn(f64) -> f64>(
    f: F,
    spec: &QuadratureSpec,
    tail: Option<TailModel<'_>>,
) -> Result<QuadResult, QuadError> {
    spec.validate()?;
    let t = spec.truncation_radius.min(EXP_REPRESENTABLE_RADIUS);
    let g = |x: f64| f(x.exp());
    let mut out = segment(spec.rule, &g, -t, t, spec.panels_per_unit)?;
    match tail {
        Some(TailModel::Bound(bound)) => {
            out.est_error += bound(t).max(0.0);
        }
        Some(TailModel::Correction(correct)) => {
            let c = correct(t);
            out.value += c.left + c.right;
            out.est_error += c.remainder;
        }
        None => {}
    }
    Ok(out)
}

/// Integration plan for one Durrmeyer coefficient.
struct CoeffPlan {
    /// Smooth segments in x, already clipped and nudged.
    cuts: Vec<f64>,
    /// Truncation clip on the left that the kernel tail must account for.
    left_truncated: bool,
    right_truncated: bool,
    /// The signal support clipped the range (tails beyond are exactly zero).
    support_clipped: bool,
    radius: f64,
}

fn coefficient_plan(psi: &KernelPsi, signal: &Signal, n: u32, k: i64, spec: &QuadratureSpec) -> CoeffPlan {
    let nf = n as f64;
    let kf = k as f64;
    // Radius at which the kernel tail is either absent (compact support) or
    // accurately corrected; capped by the spec.
    let radius = match psi.log_support() {
        Some((a, b)) => a.abs().max(b.abs()).max(1.0),
        None => {
            if psi.tail_correction(MIN_CORRECTED_RADIUS).is_some() {
                let mut t = MIN_CORRECTED_RADIUS;
                while psi.tail_correction(t).map(|c| c.remainder).unwrap_or(0.0) > spec.abs_tol
                    && t < spec.truncation_radius
                {
                    t *= 2.0;
                }
                t.min(spec.truncation_radius)
            } else {
                spec.truncation_radius
            }
        }
    };

    let (s_lo, s_hi) = signal.support();
    // Image of the signal support under x = n ln u - k.
    let sig_lo = if s_lo > 0.0 {
        nf * s_lo.ln() - kf
    } else {
        f64::NEG_INFINITY
    };
    let sig_hi = nf * s_hi.ln() - kf;

    let (psi_lo, psi_hi) = psi.log_support().unwrap_or((f64::NEG_INFINITY, f64::INFINITY));

    let lo = (-radius).max(sig_lo).max(psi_lo);
    let hi = radius.min(sig_hi).min(psi_hi);

    let left_truncated = -radius > sig_lo.max(psi_lo);
    let right_truncated = radius < sig_hi.min(psi_hi);
    let support_clipped = sig_lo > (-radius).max(psi_lo) || sig_hi < radius.min(psi_hi);

    let mut cuts = vec![lo];
    for &b in signal.breakpoints() {
        let x = nf * b.ln() - kf;
        if x > lo && x < hi {
            cuts.push(x);
        }
    }
    cuts.push(hi);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());

    CoeffPlan {
        cuts,
        left_truncated,
        right_truncated,
        support_clipped,
        radius,
    }
}

pub(crate) struct CoeffOutcome {
    pub result: QuadResult,
    /// True when the signal support bounded the integration range, i.e. the
    /// coefficient of the unit signal is genuinely below 1.
    pub support_clipped: bool,
}

pub(crate) fn coefficient_detail(
    psi: &KernelPsi,
    signal: &Signal,
    n: u32,
    k: i64,
    spec: &QuadratureSpec,
) -> Result<CoeffOutcome, QuadError> {
    assert!(n >= 1, "sampling rate n must be at least 1");
    spec.validate()?;
    let nf = n as f64;
    let kf = k as f64;
    let plan = coefficient_plan(psi, signal, n, k, spec);

    let integrand = |x: f64| psi.evaluate_log(x) * signal.evaluate(((x + kf) / nf).exp());

    let mut total = QuadResult::default();
    if plan.cuts.len() >= 2 && plan.cuts[plan.cuts.len() - 1] > plan.cuts[0] {
        for w in plan.cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b - a <= 2.0 * EDGE_NUDGE {
                continue;
            }
            let part = segment(spec.rule, &integrand, a + EDGE_NUDGE, b - EDGE_NUDGE, spec.panels_per_unit)?;
            total.value += part.value;
            total.est_error += part.est_error;
            total.evaluations += part.evaluations;
        }
    }

    // Kernel mass beyond the truncation radius, weighted by the signal value
    // just inside the edge: exact for signals constant past the window and
    // exponentially accurate for the built-ins, whose variation there decays
    // like the sample spacing.
    if plan.left_truncated || plan.right_truncated {
        match psi.tail_correction(plan.radius) {
            Some(c) => {
                if plan.left_truncated {
                    let edge = ((-plan.radius + kf) / nf).exp();
                    total.value += signal.evaluate(edge) * c.left;
                    total.est_error += c.remainder * signal.abs_bound();
                }
                if plan.right_truncated {
                    let edge = ((plan.radius + kf) / nf).exp();
                    total.value += signal.evaluate(edge) * c.right;
                    total.est_error += c.remainder * signal.abs_bound();
                }
            }
            None => {
                total.est_error += psi.tail_bound(plan.radius) * signal.abs_bound();
            }
        }
    }

    Ok(CoeffOutcome {
        result: total,
        support_clipped: plan.support_clipped,
    })
}

/// The Durrmeyer sample coefficient
/// `c_k(h) = n ∫_0^∞ Ψ(u^n e^{-k}) h(u) du/u`,
/// computed via the substitution `x = n ln u - k` as
/// `∫ Ψ(e^x) h(e^{(x+k)/n}) dx`. For `h ≡ 1` on a wide enough support the
/// value is 1 by the kernel's unit Mellin integral.
pub fn durrmeyer_coefficient(
    psi: &KernelPsi,
    signal: &Signal,
    n: u32,
    k: i64,
    spec: &QuadratureSpec,
) -> Result<QuadResult, QuadError> {
    coefficient_detail(psi, signal, n, k, spec).map(|o| o.result)
}

/// `n ∫_a^b h(e^u) du` over one Kantorovich cell, split at the image of the
/// signal's breakpoints.
pub(crate) fn signal_exp_integral(
    signal: &Signal,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<QuadResult, QuadError> {
    let (s_lo, s_hi) = signal.support();
    let lo = if s_lo > 0.0 { a.max(s_lo.ln()) } else { a };
    let hi = b.min(s_hi.ln());
    if hi <= lo {
        return Ok(QuadResult::default());
    }
    let mut cuts = vec![lo];
    for &bp in signal.breakpoints() {
        let x = bp.ln();
        if x > lo && x < hi {
            cuts.push(x);
        }
    }
    cuts.push(hi);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let integrand = |u: f64| signal.evaluate(u.exp());
    // Cells are 1/n wide; keep the panel count meaningful on short pieces.
    let per_unit = ((spec.panels_per_unit as f64 / (b - a)).ceil() as u32).clamp(8, 1 << 16);
    let mut total = QuadResult::default();
    for w in cuts.windows(2) {
        if w[1] - w[0] <= 2.0 * EDGE_NUDGE {
            continue;
        }
        let part = segment(spec.rule, &integrand, w[0] + EDGE_NUDGE, w[1] - EDGE_NUDGE, per_unit)?;
        total.value += part.value;
        total.est_error += part.est_error;
        total.evaluations += part.evaluations;
    }
    Ok(total)
}
