//! Kernel families for exponential sampling: the Mellin B-spline on the
//! discrete side and the Mellin-Fejér kernel on the integral side, together
//! with the moment and admissibility machinery both operators rely on.
//!
//! Every kernel is evaluated natively in the log domain: a kernel value at
//! `z > 0` is obtained from `x = ln z`, which keeps arguments like
//! `z^n e^{-k}` representable (`x = n ln z - k`) and avoids exp/ln round
//! trips in the quadrature loops.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Shared closure type for log-domain kernel evaluation.
pub type EvalFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Shared closure type for tail bounds: truncation radius `T` (log domain)
/// to an upper bound on the absolute Mellin mass outside `[-T, T]`.
pub type TailBoundFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Accurate one-sided tail integrals of a kernel past a truncation radius,
/// with a rigorous remainder bound on the evaluation itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailCorrection {
    /// `∫_{-∞}^{-T} Ψ(e^x) dx`
    pub left: f64,
    /// `∫_{T}^{∞} Ψ(e^x) dx`
    pub right: f64,
    /// Upper bound on the error of `left` and `right` combined.
    pub remainder: f64,
}

/// Closure producing accurate tail integrals at a given radius.
pub type TailIntegralFn = Arc<dyn Fn(f64) -> TailCorrection + Send + Sync>;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("B-spline order must be at least 1")]
    ZeroOrder,
    #[error("Fejér beta must be finite and >= 1, got {0}")]
    InvalidBeta(f64),
    #[error("Fejér exponent parameter must be finite, got {0}")]
    InvalidExponent(f64),
    #[error("kernel `{0}` declares neither a log-domain support nor a tail bound")]
    NoTailControl(String),
    #[error("invalid log-domain support [{0}, {1}]")]
    InvalidSupport(f64, f64),
}

/// Discrete-side kernel Φ on (0, ∞).
///
/// `log_support = [a, b]` asserts that `Φ(e^x) = 0` for `x` outside `[a, b]`,
/// which makes every lattice supremum over `k ∈ ℤ` a finite maximum.
#[derive(Clone)]
pub struct KernelPhi {
    name: String,
    eval_log: EvalFn,
    log_support: Option<(f64, f64)>,
}

impl fmt::Debug for KernelPhi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelPhi")
            .field("name", &self.name)
            .field("log_support", &self.log_support)
            .finish()
    }
}

impl KernelPhi {
    pub fn new(
        name: impl Into<String>,
        eval_log: EvalFn,
        log_support: Option<(f64, f64)>,
    ) -> Result<Self, KernelError> {
        if let Some((a, b)) = log_support {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(KernelError::InvalidSupport(a, b));
            }
        }
        Ok(Self {
            name: name.into(),
            eval_log,
            log_support,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Kernel value at `z > 0`; zero for arguments outside the domain
    /// (underflowed or overflowed exponentials included).
    pub fn evaluate(&self, z: f64) -> f64 {
        if z > 0.0 && z.is_finite() {
            (self.eval_log)(z.ln())
        } else {
            0.0
        }
    }

    /// Kernel value at `e^x`.
    pub fn evaluate_log(&self, x: f64) -> f64 {
        (self.eval_log)(x)
    }

    pub fn log_support(&self) -> Option<(f64, f64)> {
        self.log_support
    }
}

/// Integral-side kernel Ψ on (0, ∞).
#[derive(Clone)]
pub struct KernelPsi {
    name: String,
    eval_log: EvalFn,
    log_support: Option<(f64, f64)>,
    tail_bound: Option<TailBoundFn>,
    tail_integral: Option<TailIntegralFn>,
    log_symmetric: bool,
}

impl fmt::Debug for KernelPsi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelPsi")
            .field("name", &self.name)
            .field("log_support", &self.log_support)
            .field("log_symmetric", &self.log_symmetric)
            .finish()
    }
}

impl KernelPsi {
    /// A Ψ kernel must declare how its tails are controlled: either a compact
    /// log-domain support or a tail bound. Anything else would force silent
    /// infinite integrals downstream.
    pub fn new(
        name: impl Into<String>,
        eval_log: EvalFn,
        log_support: Option<(f64, f64)>,
        tail_bound: Option<TailBoundFn>,
    ) -> Result<Self, KernelError> {
        let name = name.into();
        if let Some((a, b)) = log_support {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(KernelError::InvalidSupport(a, b));
            }
        }
        if log_support.is_none() && tail_bound.is_none() {
            return Err(KernelError::NoTailControl(name));
        }
        Ok(Self {
            name,
            eval_log,
            log_support,
            tail_bound,
            tail_integral: None,
            log_symmetric: false,
        })
    }

    pub fn with_tail_integral(mut self, tail_integral: TailIntegralFn) -> Self {
        self.tail_integral = Some(tail_integral);
        self
    }

    pub fn with_log_symmetry(mut self, symmetric: bool) -> Self {
        self.log_symmetric = symmetric;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        if t > 0.0 && t.is_finite() {
            (self.eval_log)(t.ln())
        } else {
            0.0
        }
    }

    pub fn evaluate_log(&self, x: f64) -> f64 {
        (self.eval_log)(x)
    }

    pub fn log_support(&self) -> Option<(f64, f64)> {
        self.log_support
    }

    /// Whether `Ψ(e^x) = Ψ(e^{-x})`; lets odd algebraic moments cancel
    /// exactly under symmetric truncation.
    pub fn log_symmetric(&self) -> bool {
        self.log_symmetric
    }

    /// Upper bound on `∫_{|x|>T} |Ψ(e^x)| dx`. Zero once a compact support
    /// is fully inside the radius; infinite when the kernel declares an
    /// unbounded tail (Fejér with t ≠ 0).
    pub fn tail_bound(&self, radius: f64) -> f64 {
        if let Some((a, b)) = self.log_support {
            if -radius <= a && b <= radius {
                return 0.0;
            }
        }
        match &self.tail_bound {
            Some(bound) => bound(radius),
            None => 0.0,
        }
    }

    /// Accurate one-sided tail integrals, when the kernel supplies them.
    pub fn tail_correction(&self, radius: f64) -> Option<TailCorrection> {
        if let Some((a, b)) = self.log_support {
            if -radius <= a && b <= radius {
                return Some(TailCorrection {
                    left: 0.0,
                    right: 0.0,
                    remainder: 0.0,
                });
            }
        }
        self.tail_integral.as_ref().map(|f| f(radius))
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Log-domain B-spline value: the classical order-`m` B-spline evaluated at
/// `x + m/2`, via the truncated-power closed form.
fn bspline_log_value(order: u32, x: f64) -> f64 {
    let half = order as f64 / 2.0;
    // Exact zero outside the support; the alternating sum below would only
    // cancel approximately there.
    if x.abs() > half || x.is_nan() {
        return 0.0;
    }
    let m = order as i64;
    let mut acc = 0.0;
    let mut sign = 1.0;
    let mut binom = 1.0;
    for j in 0..=m {
        let base = half + x - j as f64;
        if base > 0.0 {
            acc += sign * binom * base.powi(m as i32 - 1);
        }
        sign = -sign;
        binom = binom * (m - j) as f64 / (j + 1) as f64;
    }
    acc / factorial(order - 1)
}

/// Mellin B-spline kernel of the given order, compactly supported on
/// `[e^{-order/2}, e^{order/2}]`. Order 2 coincides with
/// `max{0, 1 - |ln z|}`.
pub fn mellin_bspline(order: u32) -> Result<KernelPhi, KernelError> {
    if order == 0 {
        return Err(KernelError::ZeroOrder);
    }
    let half = order as f64 / 2.0;
    KernelPhi::new(
        format!("bspline:{order}"),
        Arc::new(move |x| bspline_log_value(order, x)),
        Some((-half, half)),
    )
}

/// The Mellin B-spline in the Ψ role. It is admissible there: unit Mellin
/// integral and compact support give (Ψ.1) and (Ψ.2) with every absolute
/// moment finite.
pub fn bspline_psi(order: u32) -> Result<KernelPsi, KernelError> {
    if order == 0 {
        return Err(KernelError::ZeroOrder);
    }
    let half = order as f64 / 2.0;
    let psi = KernelPsi::new(
        format!("bspline:{order}"),
        Arc::new(move |x| bspline_log_value(order, x)),
        Some((-half, half)),
        // B_m <= 1, so the mass outside radius T is at most the leftover width.
        Some(Arc::new(move |t: f64| 2.0 * (half - t).max(0.0))),
    )?;
    Ok(psi.with_log_symmetry(true))
}

/// sin(w)/w with the removable singularity filled in.
fn sinc_ratio(w: f64) -> f64 {
    if w.abs() < 1e-6 {
        let w2 = w * w;
        1.0 - w2 / 6.0 + w2 * w2 / 120.0
    } else {
        w.sin() / w
    }
}

/// One-sided Fejér tail `∫_T^∞ (2/(πβ)) sin²(βx/2)/x² dx`, expanded by
/// repeated integration by parts. The remainder after the listed terms is
/// bounded by `6/(πβ⁴T⁴)`.
fn fejer_tail_one_sided(beta: f64, t: f64) -> (f64, f64) {
    let bt = beta * t;
    let series = 1.0 / t + bt.sin() / (beta * t * t)
        - 2.0 * bt.cos() / (beta * beta * t * t * t)
        - 6.0 * bt.sin() / (beta * beta * beta * t * t * t * t);
    let value = series / (PI * beta);
    let remainder = 6.0 / (PI * beta.powi(4) * t.powi(4));
    (value, remainder)
}

/// Mellin-Fejér kernel `F_β^t(z) = (β / (2π z^t)) sinc²(β ln√z / π)`.
///
/// For `t = 0` the kernel is log-symmetric with heavy `1/x²` log-domain
/// tails; the envelope `|sin| ≤ 1` gives the bound `4/(πβT)` on the mass
/// outside radius `T`, and an asymptotic expansion supplies the tail
/// integrals themselves to fourth order. For `t ≠ 0` one tail grows
/// exponentially: the kernel is constructible, but its absolute moments
/// all diverge and are reported as such.
pub fn mellin_fejer(beta: f64, t_param: f64) -> Result<KernelPsi, KernelError> {
    if !beta.is_finite() || beta < 1.0 {
        return Err(KernelError::InvalidBeta(beta));
    }
    if !t_param.is_finite() {
        return Err(KernelError::InvalidExponent(t_param));
    }
    let name = format!("fejer:{beta}:{t_param}");
    let eval: EvalFn = Arc::new(move |x: f64| {
        let s = sinc_ratio(beta * x / 2.0);
        beta / (2.0 * PI) * (-t_param * x).exp() * s * s
    });
    if t_param == 0.0 {
        let bound: TailBoundFn = Arc::new(move |t: f64| {
            if t <= 0.0 {
                f64::INFINITY
            } else {
                4.0 / (PI * beta * t)
            }
        });
        let tail: TailIntegralFn = Arc::new(move |t: f64| {
            let (side, rem) = fejer_tail_one_sided(beta, t.max(1.0));
            TailCorrection {
                left: side,
                right: side,
                remainder: 2.0 * rem,
            }
        });
        let psi = KernelPsi::new(name, eval, None, Some(bound))?;
        Ok(psi.with_tail_integral(tail).with_log_symmetry(true))
    } else {
        let bound: TailBoundFn = Arc::new(|_| f64::INFINITY);
        KernelPsi::new(name, eval, None, Some(bound))
    }
}

/// Outcome of a moment computation: a finite value or an explicit
/// divergence flag. Divergent moments are first-class results, never
/// clamped numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentValue {
    Finite(f64),
    Divergent,
}

impl MomentValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, MomentValue::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            MomentValue::Finite(v) => Some(*v),
            MomentValue::Divergent => None,
        }
    }
}

/// Moment result together with a description of the grid or truncation
/// that produced it.
#[derive(Debug, Clone)]
pub struct MomentReport {
    pub order: u32,
    pub value: MomentValue,
    pub method: String,
}

/// Default probe grid per unit log-interval for lattice suprema, with one
/// refinement doubling used by callers that need a stability check.
pub const DEFAULT_LATTICE_GRID: u32 = 10_001;

/// Ceiling past which a growing lattice supremum is declared divergent.
const SUP_CEILING: f64 = 1e9;

/// Discrete absolute moment `m_r(Φ) = sup_z ⋁_k |Φ(z e^{-k})| |ln z - k|^r`.
///
/// The supremum over all `z > 0` reduces to one log-period `ln z ∈ [0, 1]`
/// because shifting `ln z` by an integer permutes the lattice. For a
/// compactly supported kernel the `k` range is exact; otherwise the lattice
/// is scanned in doubling rings until the supremum stalls (finite) or keeps
/// growing (divergence flag).
pub fn discrete_abs_moment(phi: &KernelPhi, r: u32, grid: u32) -> MomentReport {
    assert!(grid >= 2, "lattice probe grid must have at least 2 points");
    let xs: Vec<f64> = (0..grid).map(|i| i as f64 / (grid - 1) as f64).collect();
    let term = |x: f64, k: i64| {
        let d = x - k as f64;
        phi.evaluate_log(d).abs() * d.abs().powi(r as i32)
    };

    if let Some((a, b)) = phi.log_support() {
        let mut sup = 0.0_f64;
        for &x in &xs {
            let k_lo = (x - b).ceil() as i64;
            let k_hi = (x - a).floor() as i64;
            for k in k_lo..=k_hi {
                sup = sup.max(term(x, k));
            }
        }
        return MomentReport {
            order: r,
            value: MomentValue::Finite(sup),
            method: format!("lattice sup on [1, e], {grid}-point grid, support-exact k range"),
        };
    }

    // No declared support: expand the k range in doubling rings and watch
    // whether the running supremum stalls or keeps climbing.
    let mut sup = 0.0_f64;
    let mut radius: i64 = 16;
    let mut prev_sup = -1.0_f64;
    let mut stalls = 0;
    let mut growths = 0;
    let mut scanned: i64 = 0;
    loop {
        for &x in &xs {
            for k in -radius..=radius {
                if k.abs() > scanned {
                    sup = sup.max(term(x, k));
                }
            }
        }
        // `scanned` tracks ring interiors already visited.
        scanned = radius;
        if sup > SUP_CEILING {
            return MomentReport {
                order: r,
                value: MomentValue::Divergent,
                method: format!("lattice sup exceeded ceiling {SUP_CEILING:e} at ring radius {radius}"),
            };
        }
        if prev_sup >= 0.0 {
            if sup <= prev_sup * (1.0 + 1e-9) {
                stalls += 1;
                growths = 0;
            } else {
                growths += 1;
                stalls = 0;
            }
        }
        if stalls >= 2 {
            return MomentReport {
                order: r,
                value: MomentValue::Finite(sup),
                method: format!("lattice sup on [1, e], {grid}-point grid, ring radius {radius}"),
            };
        }
        if growths >= 4 {
            return MomentReport {
                order: r,
                value: MomentValue::Divergent,
                method: format!("lattice sup still growing at ring radius {radius}"),
            };
        }
        prev_sup = sup;
        radius *= 2;
        if radius > 1 << 22 {
            return MomentReport {
                order: r,
                value: MomentValue::Divergent,
                method: format!("no stall up to ring radius {radius}"),
            };
        }
    }
}

/// Result of [`phi_floor`]: the lattice-supremum floor ϑ with a warning
/// flag when it underflows the positivity threshold.
#[derive(Debug, Clone, Copy)]
pub struct FloorEstimate {
    pub value: f64,
    pub below_threshold: bool,
}

/// Positivity threshold below which the floor is reported as vacuous.
pub const FLOOR_THRESHOLD: f64 = 1e-9;

/// Probe radius for lattice suprema of kernels without declared support.
const FLOOR_SCAN_RADIUS: i64 = 32;

/// The denominator floor `ϑ = inf_{ln z ∈ [0,1]} ⋁_k Φ(z e^{-k})`.
///
/// The infimum is taken over one log-period of the lattice supremum, the
/// quantity the convergence proofs actually bound from below. (The raw
/// pointwise infimum over `[1, e]` would be zero for any compactly
/// supported kernel and useless as a denominator bound.)
pub fn phi_floor(phi: &KernelPhi, grid: u32) -> FloorEstimate {
    assert!(grid >= 2, "floor probe grid must have at least 2 points");
    let mut inf = f64::INFINITY;
    for i in 0..grid {
        let x = i as f64 / (grid - 1) as f64;
        let (k_lo, k_hi) = match phi.log_support() {
            Some((a, b)) => ((x - b).ceil() as i64, (x - a).floor() as i64),
            None => (-FLOOR_SCAN_RADIUS, FLOOR_SCAN_RADIUS),
        };
        let mut sup = f64::NEG_INFINITY;
        for k in k_lo..=k_hi {
            sup = sup.max(phi.evaluate_log(x - k as f64));
        }
        if !sup.is_finite() {
            sup = 0.0;
        }
        inf = inf.min(sup);
    }
    if !inf.is_finite() || inf < FLOOR_THRESHOLD {
        FloorEstimate {
            value: if inf.is_finite() { inf.max(0.0) } else { 0.0 },
            below_threshold: true,
        }
    } else {
        FloorEstimate {
            value: inf,
            below_threshold: false,
        }
    }
}

/// One admissibility condition with its measured value.
#[derive(Debug, Clone)]
pub struct ConditionCheck {
    pub condition: &'static str,
    pub passed: bool,
    pub measured: String,
}

/// Report of [`validate_kernel_pair`].
#[derive(Debug, Clone)]
pub struct PairReport {
    pub checks: Vec<ConditionCheck>,
}

impl PairReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Checks the four admissibility conditions for an operator kernel pair:
/// finite second discrete moment of Φ, positive lattice floor of Φ, unit
/// Mellin integral of Ψ, and finite absolute Mellin mass of Ψ.
pub fn validate_kernel_pair(phi: &KernelPhi, psi: &KernelPsi, tol: f64) -> PairReport {
    let mut checks = Vec::with_capacity(4);

    let m2 = discrete_abs_moment(phi, 2, DEFAULT_LATTICE_GRID);
    checks.push(match m2.value {
        MomentValue::Finite(v) => ConditionCheck {
            condition: "m_2(phi) finite",
            passed: true,
            measured: format!("{v:.9}"),
        },
        MomentValue::Divergent => ConditionCheck {
            condition: "m_2(phi) finite",
            passed: false,
            measured: format!("divergent ({})", m2.method),
        },
    });

    let floor = phi_floor(phi, DEFAULT_LATTICE_GRID);
    checks.push(ConditionCheck {
        condition: "phi lattice floor positive",
        passed: !floor.below_threshold,
        measured: format!("{:.9}", floor.value),
    });

    let unit = continuous_moment(psi, 0, false, 1e-10);
    checks.push(match unit.value {
        MomentValue::Finite(v) => ConditionCheck {
            condition: "psi unit Mellin integral",
            passed: (v - 1.0).abs() <= tol,
            measured: format!("{v:.12}"),
        },
        MomentValue::Divergent => ConditionCheck {
            condition: "psi unit Mellin integral",
            passed: false,
            measured: format!("divergent ({})", unit.method),
        },
    });

    let m0 = continuous_moment(psi, 0, true, 1e-10);
    checks.push(match m0.value {
        MomentValue::Finite(v) => ConditionCheck {
            condition: "M_0(psi) finite",
            passed: true,
            measured: format!("{v:.12}"),
        },
        MomentValue::Divergent => ConditionCheck {
            condition: "M_0(psi) finite",
            passed: false,
            measured: format!("divergent ({})", m0.method),
        },
    });

    PairReport { checks }
}

/// Composite Simpson over `[a, b]` with the given even panel count.
fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: u32) -> f64 {
    debug_assert!(panels >= 2 && panels.is_multiple_of(2));
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

fn moment_integrand(psi: &KernelPsi, r: u32, absolute: bool) -> impl Fn(f64) -> f64 + '_ {
    move |x: f64| {
        let v = psi.evaluate_log(x);
        let w = x.abs().powi(r as i32);
        if absolute {
            v.abs() * w
        } else if r % 2 == 1 {
            v * w * x.signum()
        } else {
            v * w
        }
    }
}

/// Continuous Mellin moment of Ψ of order `r`:
/// `∫ Ψ(t) (ln t)^r dt/t` (algebraic) or `∫ |Ψ(t)| |ln t|^r dt/t`
/// (absolute), computed in the log domain.
///
/// Compactly supported kernels integrate exactly over their support. For
/// heavy-tailed kernels the partial integrals are expanded over doubling
/// truncation radii: if the increments fail to contract the moment is
/// flagged divergent (the Fejér kernel genuinely fails `M_1 < ∞`);
/// otherwise the kernel's accurate tail integral closes the gap.
pub fn continuous_moment(psi: &KernelPsi, r: u32, absolute: bool, tol: f64) -> MomentReport {
    assert!(tol > 0.0, "moment tolerance must be positive");
    let f = moment_integrand(psi, r, absolute);

    if let Some((a, b)) = psi.log_support() {
        // Nudge inward so samples never land on a support-edge jump (the
        // order-1 B-spline is discontinuous exactly there).
        let (a, b) = (a + 1e-10, b - 1e-10);
        let width = b - a;
        let mut panels = (width * 64.0).ceil() as u32;
        panels = panels.max(8);
        if panels % 2 == 1 {
            panels += 1;
        }
        let mut value = simpson(&f, a, b, panels);
        loop {
            let refined = simpson(&f, a, b, panels * 2);
            let est = (refined - value).abs() / 15.0;
            value = refined;
            panels *= 2;
            if est <= tol || panels >= 1 << 22 {
                return MomentReport {
                    order: r,
                    value: MomentValue::Finite(value),
                    method: format!("Simpson over support [{a}, {b}], {panels} panels"),
                };
            }
        }
    }

    // Symmetric kernels integrate odd algebraic moments to zero at every
    // symmetric truncation; the tail vanishes by the same cancellation.
    let symmetric_odd = !absolute && psi.log_symmetric() && r % 2 == 1;

    // Unbounded declared tail: every moment of either kind is unbounded.
    if psi.tail_bound(1.0) == f64::INFINITY && psi.tail_correction(1.0).is_none() {
        return MomentReport {
            order: r,
            value: MomentValue::Divergent,
            method: "kernel declares an unbounded tail".into(),
        };
    }

    let abs_f = moment_integrand(psi, r, true);
    let ppu = 64.0;
    let seg = |lo: f64, hi: f64, integrand: &dyn Fn(f64) -> f64| {
        let mut panels = ((hi - lo) * ppu).ceil() as u32;
        panels = panels.max(8);
        if panels % 2 == 1 {
            panels += 1;
        }
        simpson(&integrand, lo, hi, panels)
    };

    // Mass-type moments with an accurate tail integral close directly:
    // truncate where the expansion remainder meets the tolerance and add
    // the tail back.
    if r == 0 {
        let mut radius = 200.0_f64;
        while let Some(c) = psi.tail_correction(radius) {
            if c.remainder <= tol || radius >= 16384.0 {
                let core = seg(-radius, radius, &f);
                return MomentReport {
                    order: r,
                    value: MomentValue::Finite(core + c.left + c.right),
                    method: format!(
                        "Simpson on [-{radius}, {radius}] plus tail integrals (remainder <= {:.2e})",
                        c.remainder
                    ),
                };
            }
            radius *= 2.0;
        }
    }

    let t0 = 16.0;
    let mut radius = t0;
    let mut partial_abs = seg(-t0, t0, &abs_f);
    let mut partial = if absolute {
        partial_abs
    } else {
        seg(-t0, t0, &f)
    };
    let mut prev_increment = f64::INFINITY;
    let mut non_contracting = 0;
    let max_radius = 16384.0;

    loop {
        let next = radius * 2.0;
        let inc_abs = seg(-next, -radius, &abs_f) + seg(radius, next, &abs_f);
        let inc_signed = if absolute {
            inc_abs
        } else {
            seg(-next, -radius, &f) + seg(radius, next, &f)
        };
        partial_abs += inc_abs;
        partial += inc_signed;
        radius = next;

        if partial_abs > SUP_CEILING {
            return MomentReport {
                order: r,
                value: MomentValue::Divergent,
                method: format!("partial absolute integral exceeded ceiling at T={radius}"),
            };
        }
        let ratio = if prev_increment.is_finite() && prev_increment > 0.0 {
            inc_abs / prev_increment
        } else {
            0.0
        };
        if prev_increment.is_finite() && ratio > 0.7 && inc_abs > tol {
            non_contracting += 1;
        } else {
            non_contracting = 0;
        }
        if non_contracting >= 3 && !symmetric_odd {
            return MomentReport {
                order: r,
                value: MomentValue::Divergent,
                method: format!(
                    "doubling T keeps adding >= 0.7x the previous increment (T={radius}, last increment {inc_abs:.3e})"
                ),
            };
        }
        prev_increment = inc_abs;

        if symmetric_odd && radius >= 64.0 {
            return MomentReport {
                order: r,
                value: MomentValue::Finite(partial),
                method: format!("symmetric truncation at T={radius}, odd integrand tail cancels"),
            };
        }
        if inc_abs <= tol {
            return MomentReport {
                order: r,
                value: MomentValue::Finite(partial),
                method: format!("Simpson on [-{radius}, {radius}], increments below {tol:.1e}"),
            };
        }
        if radius >= max_radius {
            // Slowly convergent but contracting: extrapolate the geometric
            // tail. Non-contracting increments were already flagged above;
            // an ambiguous ratio at the cap is reported as divergent.
            if ratio < 0.7 {
                let extrapolated = inc_signed * ratio / (1.0 - ratio);
                return MomentReport {
                    order: r,
                    value: MomentValue::Finite(partial + extrapolated),
                    method: format!(
                        "Simpson on [-{radius}, {radius}] with geometric tail extrapolation ({:.2e})",
                        extrapolated.abs()
                    ),
                };
            }
            return MomentReport {
                order: r,
                value: MomentValue::Divergent,
                method: format!("increments still {inc_abs:.3e} at the radius cap T={radius}"),
            };
        }
    }
}
