//! Signals on (0, ∞): a declared support interval outside which the value
//! is zero, declared range bounds, and the breakpoints the quadrature engine
//! splits panels at.

use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("signal support must satisfy 0 <= lo < hi, got [{0}, {1}]")]
    InvalidSupport(f64, f64),
    #[error("signal range bounds must be finite with min <= max, got [{0}, {1}]")]
    InvalidRange(f64, f64),
    #[error("sampled signal needs at least two rows with positive abscissae")]
    TooFewSamples,
    #[error("sampled signal has a non-finite or non-positive abscissa: {0}")]
    BadAbscissa(f64),
    #[error("sampled signal has a non-finite value at u = {0}")]
    BadValue(f64),
}

type SignalFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Support half-width (in ln u) for constant signals: wide enough that any
/// realistic quadrature window truncates inside it, so tail corrections see
/// the constant value and reproduce it exactly.
const WIDE_LOG_RADIUS: f64 = 700.0;

/// A real-valued function on (0, ∞) with a declared support `[lo, hi]`
/// (values outside are zero) and declared range bounds.
#[derive(Clone)]
pub struct Signal {
    name: String,
    eval: SignalFn,
    support: (f64, f64),
    range_bounds: (f64, f64),
    breakpoints: Vec<f64>,
}

impl std::fmt::Debug for Signal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Signal")
            .field("name", &self.name)
            .field("support", &self.support)
            .field("range_bounds", &self.range_bounds)
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

impl Signal {
    pub fn new(
        name: impl Into<String>,
        eval: SignalFn,
        support: (f64, f64),
        range_bounds: (f64, f64),
    ) -> Result<Self, SignalError> {
        let (lo, hi) = support;
        if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
            return Err(SignalError::InvalidSupport(lo, hi));
        }
        let (rmin, rmax) = range_bounds;
        if !(rmin.is_finite() && rmax.is_finite() && rmin <= rmax) {
            return Err(SignalError::InvalidRange(rmin, rmax));
        }
        Ok(Self {
            name: name.into(),
            eval,
            support,
            range_bounds,
            breakpoints: Vec::new(),
        })
    }

    /// Declare interior points where the signal jumps or kinks; quadrature
    /// panels never straddle them.
    pub fn with_breakpoints(mut self, mut points: Vec<f64>) -> Self {
        points.retain(|&u| u > self.support.0 && u < self.support.1);
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        self.breakpoints = points;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Signal value at `u`; zero outside the declared support.
    pub fn evaluate(&self, u: f64) -> f64 {
        if u < self.support.0 || u > self.support.1 || !u.is_finite() {
            0.0
        } else {
            (self.eval)(u)
        }
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn range_bounds(&self) -> (f64, f64) {
        self.range_bounds
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Largest absolute value the signal declares.
    pub fn abs_bound(&self) -> f64 {
        self.range_bounds.0.abs().max(self.range_bounds.1.abs())
    }

    /// Whether the declared range fits in [0, 1], the domain the max-min
    /// operator requires.
    pub fn in_unit_range(&self) -> bool {
        self.range_bounds.0 >= 0.0 && self.range_bounds.1 <= 1.0
    }

    /// The constant-one signal on the same support; the Durrmeyer operators
    /// normalize against it.
    pub fn unit_on_same_support(&self) -> Signal {
        Signal {
            name: "1".into(),
            eval: Arc::new(|_| 1.0),
            support: self.support,
            range_bounds: (1.0, 1.0),
            breakpoints: Vec::new(),
        }
    }

    /// Constant signal `c` on a support wide enough to behave as a constant
    /// on all of (0, ∞) for every quadrature window.
    pub fn constant(c: f64) -> Signal {
        Signal {
            name: format!("const:{c}"),
            eval: Arc::new(move |_| c),
            support: ((-WIDE_LOG_RADIUS).exp(), WIDE_LOG_RADIUS.exp()),
            range_bounds: (c.min(0.0), c.max(0.0)),
            breakpoints: Vec::new(),
        }
    }

    /// Jump magnitude at `u` measured from one-sided samples.
    pub fn jump_at(&self, u: f64) -> f64 {
        let eps = 1e-7 * u.max(1e-30);
        (self.evaluate(u + eps) - self.evaluate(u - eps)).abs()
    }

    /// Piecewise-linear signal through `(u, value)` samples, interpolated
    /// linearly in ln u and zero outside the sampled range.
    pub fn from_samples(
        name: impl Into<String>,
        mut points: Vec<(f64, f64)>,
    ) -> Result<Signal, SignalError> {
        if points.len() < 2 {
            return Err(SignalError::TooFewSamples);
        }
        for &(u, v) in &points {
            if !(u.is_finite() && u > 0.0) {
                return Err(SignalError::BadAbscissa(u));
            }
            if !v.is_finite() {
                return Err(SignalError::BadValue(u));
            }
        }
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        points.dedup_by(|a, b| a.0 == b.0);
        if points.len() < 2 {
            return Err(SignalError::TooFewSamples);
        }
        let knots: Vec<(f64, f64)> = points.iter().map(|&(u, v)| (u.ln(), v)).collect();
        let lo = points.first().unwrap().0;
        let hi = points.last().unwrap().0;
        let (mut rmin, mut rmax) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(_, v) in &points {
            rmin = rmin.min(v);
            rmax = rmax.max(v);
        }
        let breaks: Vec<f64> = points[1..points.len() - 1].iter().map(|&(u, _)| u).collect();
        let table = knots;
        let eval: SignalFn = Arc::new(move |u: f64| {
            let x = u.ln();
            match table.binary_search_by(|probe| probe.0.partial_cmp(&x).unwrap()) {
                Ok(i) => table[i].1,
                Err(0) => table[0].1,
                Err(i) if i >= table.len() => table[table.len() - 1].1,
                Err(i) => {
                    let (x0, v0) = table[i - 1];
                    let (x1, v1) = table[i];
                    let t = (x - x0) / (x1 - x0);
                    v0 + t * (v1 - v0)
                }
            }
        });
        let sig = Signal::new(name, eval, (lo, hi), (rmin, rmax))?;
        Ok(sig.with_breakpoints(breaks))
    }
}

/// Evaluation domain shared by the built-in test signals: the error tables
/// and figures are produced with the Durrmeyer integrals running over
/// u in [0.1, 3].
pub const BUILTIN_SUPPORT: (f64, f64) = (0.1, 3.0);

/// Smooth oscillatory test signal
/// `f(u) = arctan((sin(pi u) + 1) / (1 + u^2)) / arctan(2)`.
pub fn test_f() -> Signal {
    Signal::new(
        "f",
        Arc::new(f_formula),
        BUILTIN_SUPPORT,
        (0.0, 1.0),
    )
    .expect("static support is valid")
}

pub(crate) fn f_formula(u: f64) -> f64 {
    (((std::f64::consts::PI * u).sin() + 1.0) / (1.0 + u * u)).atan() / 2.0_f64.atan()
}

/// Piecewise test signal: a parabola, a squared-sine arch, and a falling
/// line. The printed pieces jump at u = 1.1 and u = 2.0; they are
/// implemented exactly as printed and the jumps are declared as
/// breakpoints.
pub fn test_g() -> Signal {
    Signal::new(
        "g",
        Arc::new(g_formula),
        BUILTIN_SUPPORT,
        (0.0, 1.0),
    )
    .expect("static support is valid")
    .with_breakpoints(vec![1.1, 2.0])
}

pub(crate) fn g_formula(u: f64) -> f64 {
    if u < 0.0 {
        0.0
    } else if u < 1.1 {
        0.1 + 0.8 / 9.0 * u * u
    } else if u < 2.0 {
        0.9 - 0.4 * (2.0 * std::f64::consts::PI * (u - 1.1)).sin().powi(2)
    } else if u <= 3.0 {
        0.3 + 0.7 * (3.0 - u)
    } else {
        0.0
    }
}
