//! Simulation toolkit for event-triggered control with a sup-norm triggering
//! law.
//!
//! The toolkit covers the full design-to-simulation workflow for sampled
//! feedback loops `u(t) = g(x(t_k))` where the resampling instants are chosen
//! online by a triggering rule:
//!
//! * [`gains`] — an algebra of class-K gain functions (compose, pointwise
//!   max, scaling, monotone inversion, slope-at-zero analysis),
//! * [`dynamics`] — controlled-system definitions with analytic feedback
//!   gradients, plus a small registry of built-in systems,
//! * [`trigger`] — the inter-sample error state and the event condition
//!   `(t − t_k) γ̄(‖r‖_sup) ≥ ‖r‖_sup`, with interval predictions,
//! * [`simulator`] — a fixed-step RK4 integrator with event localization,
//!   self-checking error accounting, and CSV/summary reporting,
//! * [`interconnect`] — declared ISS certificates for coupled `(z, x)`
//!   subsystems, their small-gain composition into a trigger gain, and a
//!   Monte-Carlo falsifier for the declared bounds,
//! * [`backstepping`] — recursive controller synthesis for lower-triangular
//!   uncertain systems, producing the gain certificate that feeds the
//!   triggering law,
//! * [`scenario`] — TOML-backed run configuration shared with the `etcsim`
//!   command-line tool.
//!
//! All gain objects are immutable and cheap to clone; every numeric check
//! that cannot be decided in closed form is performed on explicit grids or by
//! seeded Monte-Carlo sampling, and reports a witness when it fails.

pub mod backstepping;
pub mod dynamics;
pub mod gains;
pub mod interconnect;
pub mod scenario;
pub mod simulator;
pub mod trigger;

pub use gains::{GainFn, Grid};

/// Errors shared across the toolkit.
///
/// Variants carry enough payload to act as machine-readable diagnostics: the
/// CLI prints `kind()` plus the display message on every failure path.
#[derive(Debug, Clone)]
pub enum Error {
    /// A gain function was evaluated at a negative argument.
    NegativeArgument { value: f64 },
    /// A precondition on an argument failed (dimension, sign, ordering, ...).
    InvalidArgument(String),
    /// A value lies outside the range over which an inverse is validated.
    OutOfRange { value: f64, max: f64 },
    /// The numeric slope-at-zero estimator could not classify the ratio
    /// trend; `ratios` holds `g(s)/s` on the probe grid, largest `s` first.
    SlopeEstimation { reason: String, ratios: Vec<f64> },
    /// A small-gain condition `g1(g2(s)) < s` failed at `witness`.
    SmallGain { witness: f64, value: f64 },
    /// Vector length does not match the declared dimension.
    DimensionMismatch { expected: usize, actual: usize },
    /// Controller synthesis failed; `level` is 1-based.
    Synthesis { level: usize, reason: String },
    /// A declared envelope was violated at a sampled point.
    Calibration { witness: Vec<f64>, value: f64, bound: f64 },
    /// The state norm left the divergence guard; `t` is the last good time.
    Divergence { t: f64, norm: f64 },
    /// The accumulated and directly-evaluated inter-sample errors disagree
    /// beyond the integrator-order bound.
    DualR { t: f64, residual: f64, bound: f64 },
    /// Configuration file or override could not be interpreted.
    Config(String),
    Io(String),
}

impl Error {
    /// Stable snake_case token identifying the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NegativeArgument { .. } => "negative_argument",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::OutOfRange { .. } => "out_of_range",
            Error::SlopeEstimation { .. } => "slope_estimation",
            Error::SmallGain { .. } => "small_gain",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Synthesis { .. } => "synthesis",
            Error::Calibration { .. } => "calibration",
            Error::Divergence { .. } => "divergence",
            Error::DualR { .. } => "dual_r",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

impl std::fmt::Display for Error {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Error::NegativeArgument { value } => {
                write!(f, "gain argument {value} is negative; class-K domain is s >= 0")
            }
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::OutOfRange { value, max } => {
                write!(f, "value {value} outside invertible range [0, {max}]")
            }
            Error::SlopeEstimation { reason, ratios } => {
                write!(f, "slope-at-zero estimation failed: {reason}; g(s)/s probe = {ratios:?}")
            }
            Error::SmallGain { witness, value } => {
                write!(f, "small-gain condition fails at s = {witness}: composed value {value} >= s")
            }
            Error::DimensionMismatch { expected, actual } => {
                write!(f, "dimension mismatch: expected {expected}, got {actual}")
            }
            Error::Synthesis { level, reason } => {
                write!(f, "synthesis failed at level {level}: {reason}")
            }
            Error::Calibration { witness, value, bound } => {
                write!(f, "declared envelope violated at {witness:?}: |value| {value} > bound {bound}")
            }
            Error::Divergence { t, norm } => {
                write!(f, "trajectory diverged after t = {t}: state norm {norm}")
            }
            Error::DualR { t, residual, bound } => {
                write!(f, "inter-sample error cross-check failed at t = {t}: residual {residual} > bound {bound}")
            }
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Euclidean norm of a slice.
pub(crate) fn euclidean_norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}
