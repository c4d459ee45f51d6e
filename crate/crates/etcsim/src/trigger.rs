//! The sup-norm event-triggering law and its interval analytics.
//!
//! Between control updates the sampling disturbance `r(t) = ∫_{t_k}^t ξ ds`
//! grows from zero; the trigger compares its running sup
//! `R(t) = sup_{s ∈ [t_k, t]} ‖r(s)‖` (Euclidean pointwise norm) against the
//! elapsed time through a trigger gain `γ̄`:
//!
//! ```text
//! h(t) = (t − t_k) · γ̄(R(t)) − R(t)
//! ```
//!
//! The next update fires at the first `t` with `h(t) ≥ 0` **and** `R > 0`;
//! the `R = 0` exclusion keeps a quiescent loop (equilibrium start, or any
//! stretch where `g(x(t))` never moves) from firing on the `0 = 0` tie.
//!
//! Two analytics accompany the law. [`predicted_limit_interval`] gives the
//! interval the sequence converges to as the state settles,
//! `T = 1 / lim_{s→0+} γ̄(s)/s`; [`interval_upper_bound`] gives the hard cap
//! `T_max = 1 / inf_{s ∈ (0, r_sup]} γ̄(s)/s`, which bounds every interval
//! because the event condition pins `t_{k+1} − t_k = R/γ̄(R)`.

use crate::dynamics::ControlledSystem;
use crate::gains::GainFn;
use crate::{euclidean_norm, Error, Result};

/// Per-interval state of the triggering law.
#[derive(Debug, Clone)]
pub struct TriggerState {
    t_k: f64,
    x_k: Vec<f64>,
    u_held: Vec<f64>,
    r: Vec<f64>,
    /// Running sup of `‖r‖` over the current interval.
    r_sup: f64,
    gamma_bar: GainFn,
    /// Time of the last sample folded in by [`TriggerState::accumulate`].
    t_last: f64,
    xi_last: Option<Vec<f64>>,
}

impl TriggerState {
    /// A trigger at `t = 0` with empty history; call
    /// [`TriggerState::reset`] before use to snapshot the initial state.
    pub fn new(gamma_bar: GainFn, state_dim: usize, input_dim: usize) -> Self {
        TriggerState {
            t_k: 0.0,
            x_k: vec![0.0; state_dim],
            u_held: vec![0.0; input_dim],
            r: vec![0.0; input_dim],
            r_sup: 0.0,
            gamma_bar,
            t_last: 0.0,
            xi_last: None,
        }
    }

    /// Start a new interval at `(t, x)`: freeze `u_held = g(x)`, zero the
    /// disturbance accumulator and its sup.
    pub fn reset(&mut self, t: f64, x: &[f64], sys: &ControlledSystem) -> Result<()> {
        sys.g_into(x, &mut self.u_held)?;
        self.t_k = t;
        self.t_last = t;
        self.x_k.clear();
        self.x_k.extend_from_slice(x);
        self.r.fill(0.0);
        self.r_sup = 0.0;
        self.xi_last = None;
        Ok(())
    }

    pub fn t_k(&self) -> f64 {
        self.t_k
    }

    pub fn x_k(&self) -> &[f64] {
        &self.x_k
    }

    pub fn u_held(&self) -> &[f64] {
        &self.u_held
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    /// The running sup `R`.
    pub fn r_sup(&self) -> f64 {
        self.r_sup
    }

    pub fn gamma_bar(&self) -> &GainFn {
        &self.gamma_bar
    }

    /// Integrator path: overwrite `r` with the augmented-state value after
    /// an accepted step and fold its norm into the running sup.
    pub fn sync_r(&mut self, r_new: &[f64], t: f64) {
        self.r.copy_from_slice(r_new);
        self.r_sup = self.r_sup.max(euclidean_norm(r_new));
        self.t_last = t;
    }

    /// Fold an interior-point `‖r‖` (integrator stage value) into the sup.
    pub fn observe_r_norm(&mut self, norm: f64) {
        self.r_sup = self.r_sup.max(norm);
    }

    /// Standalone path: integrate a list of `(time, ξ)` samples with the
    /// trapezoid rule, updating `r` and the sup at each sample. The first
    /// sample after a reset seeds the rule without integrating (supply a
    /// sample at `t_k` itself for exact handling of the initial stretch).
    pub fn accumulate(&mut self, samples: &[(f64, Vec<f64>)]) -> Result<()> {
        for (t, xi) in samples {
            if xi.len() != self.r.len() {
                return Err(Error::DimensionMismatch { expected: self.r.len(), actual: xi.len() });
            }
            if *t < self.t_last {
                return Err(Error::InvalidArgument(format!(
                    "samples must be time-ascending: got {t} after {}",
                    self.t_last
                )));
            }
            if let Some(prev) = &self.xi_last {
                let half_dt = 0.5 * (*t - self.t_last);
                for (ri, (a, b)) in self.r.iter_mut().zip(prev.iter().zip(xi.iter())) {
                    *ri += half_dt * (a + b);
                }
            }
            self.r_sup = self.r_sup.max(euclidean_norm(&self.r));
            self.t_last = *t;
            self.xi_last = Some(xi.clone());
        }
        Ok(())
    }

    /// The event function `h(t) = (t − t_k)·γ̄(R) − R` at the current `R`.
    pub fn event_fn(&self, t: f64) -> f64 {
        (t - self.t_k) * self.gamma_bar.eval_raw(self.r_sup) - self.r_sup
    }

    /// True at the first `t` with `h(t) ≥ 0` and `R > 0`.
    pub fn event_fired(&self, t: f64) -> bool {
        self.r_sup > 0.0 && self.event_fn(t) >= 0.0
    }

    /// The exact event time under a frozen sup: solving `h(t) = 0` for the
    /// current `R` gives `t_k + R/γ̄(R)`. `None` while `R = 0`.
    pub fn frozen_event_time(&self) -> Option<f64> {
        if self.r_sup > 0.0 {
            Some(self.t_k + self.r_sup / self.gamma_bar.eval_raw(self.r_sup))
        } else {
            None
        }
    }
}

/// The interval every inter-event gap converges to as the loop settles:
/// `T = 1/μ` with `μ = lim_{s→0+} γ̄(s)/s`.
///
/// Returns `None` when the limit is not a positive finite number — an
/// infinite slope drives the limit interval to zero, a zero slope means the
/// intervals grow without bound; neither yields a usable constant.
/// Slope-estimation failures for closures without analytic slopes propagate.
pub fn predicted_limit_interval(gamma_bar: &GainFn) -> Result<Option<f64>> {
    let slope = gamma_bar.slope_at_zero()?;
    if slope > 0.0 && slope.is_finite() {
        Ok(Some(1.0 / slope))
    } else {
        Ok(None)
    }
}

/// Result of [`interval_upper_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntervalBound {
    /// Every inter-event interval is at most this many seconds.
    Bounded(f64),
    /// `γ̄(s)/s` gets arbitrarily small on `(0, r_sup]`: no finite cap.
    Unbounded,
}

impl IntervalBound {
    pub fn as_bounded(&self) -> Option<f64> {
        match self {
            IntervalBound::Bounded(t) => Some(*t),
            IntervalBound::Unbounded => None,
        }
    }
}

/// Hard cap on inter-event intervals while `R` stays within `r_sup`:
/// `T_max = 1 / inf_{s ∈ (0, r_sup]} γ̄(s)/s`.
///
/// The infimum is taken over a geometric grid on `(0, r_sup]` together with
/// the slope at zero (analytic when recorded, numeric otherwise); a zero
/// slope — or a zero ratio anywhere — means no finite cap exists.
pub fn interval_upper_bound(gamma_bar: &GainFn, r_sup: f64) -> Result<IntervalBound> {
    if !(r_sup > 0.0 && r_sup.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "interval_upper_bound needs a positive finite r_sup, got {r_sup}"
        )));
    }
    let mut inf = f64::INFINITY;
    let points = 400;
    let lo = r_sup * 1e-8;
    let ratio_step = (r_sup / lo).ln() / (points - 1) as f64;
    for i in 0..points {
        let s = lo * (ratio_step * i as f64).exp();
        let q = gamma_bar.eval_raw(s) / s;
        if !q.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "trigger gain produced a non-finite value at s = {s}"
            )));
        }
        if q <= 0.0 {
            return Ok(IntervalBound::Unbounded);
        }
        inf = inf.min(q);
    }
    // The grid cannot see s → 0+, where polynomial-like gains attain their
    // infimum; the slope at zero covers that end.
    match gamma_bar.slope_at_zero() {
        Ok(slope) if slope == 0.0 => return Ok(IntervalBound::Unbounded),
        Ok(slope) if slope.is_finite() => inf = inf.min(slope),
        Ok(_) => {} // infinite slope: the grid end governs
        Err(_) => {} // no settled limit: fall back to the grid infimum
    }
    Ok(IntervalBound::Bounded(1.0 / inf))
}
