//! Max-product and max-min Durrmeyer-type exponential sampling operators.
//!
//! The crate reconstructs signals on (0, ∞) from Mellin-convolution sample
//! coefficients taken on the exponential lattice `e^{k/n}`, replacing the
//! usual series either by a lattice supremum (max-product) or by a
//! supremum of minima against normalized kernel weights (max-min). Linear
//! Durrmeyer and Kantorovich operators are included as baselines.
//!
//! Modules:
//! - [`kernels`]: Mellin B-spline and Mellin-Fejér kernels, discrete and
//!   continuous moments, lattice floor, admissibility validation.
//! - [`quad`]: log-domain quadrature against dt/t and the Durrmeyer sample
//!   coefficients.
//! - [`signal`]: signals with declared support, range and breakpoints,
//!   plus the built-in test signals.
//! - [`operators`]: the four sampling operators and lattice combinators.
//! - [`analysis`]: logarithmic modulus of continuity, error tables, the
//!   quantitative error bound, and empirical convergence rates.
//! - [`cli`]: the `expsamp` command-line tool.

pub mod analysis;
pub mod cli;
pub mod kernels;
pub mod operators;
pub mod quad;
pub mod signal;

pub use analysis::{
    estimate_rate, log_modulus, optimal_rate_bound, pointwise_errors, rate_bound_maxproduct,
    BoundValue, ErrorCell, ErrorReport, ParamsTemplate, RateEstimate, RateOutcome,
};
pub use kernels::{
    bspline_psi, continuous_moment, discrete_abs_moment, mellin_bspline, mellin_fejer, phi_floor,
    validate_kernel_pair, KernelPhi, KernelPsi, MomentReport, MomentValue, PairReport,
};
pub use operators::{
    index_window, kantorovich, linear_durrmeyer, max_min_durrmeyer, max_product_durrmeyer,
    min_pair, sup_over, EvalTrace, OperatorKind, OperatorParams,
};
pub use quad::{durrmeyer_coefficient, integrate_mellin, QuadResult, QuadRule, QuadratureSpec, TailModel};
pub use signal::{test_f, test_g, Signal};
