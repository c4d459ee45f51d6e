//! Fixed-step integration of the sampled-data loop with event detection.
//!
//! The simulator advances the augmented state `y = [x; r]` with classical
//! fourth-order Runge–Kutta: `ẋ = f(x, u_held)` and `ṙ = ξ(x, u_held)`
//! share stages, so the accumulated `r` tracks `g(x(t)) − g(x(t_k))` to the
//! integrator's order — the simulator verifies that identity against the
//! endpoint recomputation on every accepted step (the "dual-r" check).
//!
//! The running sup `R` is refreshed from `‖r‖` at the three interior stage
//! states and the step endpoint. When the event function crosses zero
//! within a step, the event time is bisected on a frozen-`R` model (`R`
//! held at the detected sup, making `h` linear and increasing in `t`), the
//! step is re-integrated up to that instant, and the trigger resets there.
//!
//! Fixed step, deterministic arithmetic, and hand-rolled CSV formatting
//! make every run byte-reproducible across platforms.

use crate::dynamics::ControlledSystem;
use crate::gains::GainFn;
use crate::trigger::{interval_upper_bound, IntervalBound, TriggerState};
use crate::{euclidean_norm, Error, Result};
use std::io::Write as IoWrite;

/// Integration and bookkeeping options for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    /// Fixed integrator step (s).
    pub step: f64,
    /// Final time (s); the last step is shortened to land on it exactly.
    pub horizon: f64,
    /// Time tolerance of the in-step event bisection (s).
    pub localization_tol: f64,
    /// Record every `sample_stride`-th accepted step (events and the first
    /// and last instants are always recorded).
    pub sample_stride: usize,
    /// Abort when the number of events exceeds this (runaway-trigger guard).
    pub max_events: usize,
    /// Abort when `‖x‖` exceeds this (instability guard).
    pub divergence_norm: f64,
    /// Abort on the first dual-r bound violation instead of recording it.
    ///
    /// The recorded-residual default keeps a run alive when the violation
    /// is a tolerance artifact (the bound is absolute and very tight; see
    /// [`DualRStats`]), which is the honest default for diagnostics.
    pub strict_dual_r: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            step: 1e-3,
            horizon: 10.0,
            localization_tol: 1e-9,
            sample_stride: 1,
            max_events: 1_000_000,
            divergence_norm: 1e6,
            strict_dual_r: false,
        }
    }
}

impl SimOptions {
    /// Reject settings the integrator cannot honor (callers building
    /// options from configuration run this before simulating).
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidArgument(format!("step must be positive, got {}", self.step)));
        }
        if !(self.horizon > self.step) {
            return Err(Error::InvalidArgument(format!(
                "horizon ({}) must exceed the step ({})",
                self.horizon, self.step
            )));
        }
        if !(self.localization_tol > 0.0 && self.localization_tol < self.step) {
            return Err(Error::InvalidArgument(format!(
                "localization tolerance ({}) must lie in (0, step)",
                self.localization_tol
            )));
        }
        if self.sample_stride == 0 {
            return Err(Error::InvalidArgument("sample_stride must be at least 1".into()));
        }
        Ok(())
    }
}

/// One recorded instant. Values at event instants are right-continuous:
/// the new held input, and the freshly reset `r`/`R`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub r_norm: f64,
    pub r_sup: f64,
    pub event: bool,
}

/// One completed inter-event interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    /// 1-based event index.
    pub k: usize,
    /// Time of the event (start of the next hold interval).
    pub t_k: f64,
    /// `t_k − t_{k−1}`.
    pub interval: f64,
    /// Running sup `R` at the event instant.
    pub r_sup: f64,
}

/// Outcome of the per-step `∫ξ` vs `g(x) − g(x_k)` comparison.
///
/// The bound is `10·step⁴·(1 + ‖x‖)` — an absolute tolerance that sits
/// below the double-precision rounding floor whenever `‖g‖` is large, so
/// violations of a few times the bound can be pure floating-point noise;
/// `max_residual` tells the two cases apart.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DualRStats {
    /// Accepted steps checked.
    pub checks: usize,
    /// Steps where the residual exceeded the bound.
    pub violations: usize,
    /// Largest residual/bound ratio seen.
    pub max_ratio: f64,
    /// Time of the largest ratio.
    pub worst_t: f64,
    /// Largest absolute residual seen.
    pub max_residual: f64,
}

/// Post-run scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub event_count: usize,
    pub min_interval: Option<f64>,
    pub mean_interval: Option<f64>,
    /// Mean over the last 20% of intervals (at least one).
    pub tail_mean_interval: Option<f64>,
    pub final_t: f64,
    pub final_state: Vec<f64>,
    pub final_norm: f64,
    /// No event ever fired (`R` stayed at zero or the horizon hit first).
    pub quiescent: bool,
    pub max_x_norm: f64,
    /// Largest event-function value seen at accepted non-event steps
    /// (≤ 0 by construction; its margin is a health indicator).
    pub max_h_between_events: f64,
    pub dual_r: DualRStats,
}

/// Full output of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub state_dim: usize,
    pub input_dim: usize,
    pub samples: Vec<Sample>,
    pub events: Vec<EventRecord>,
    pub summary: Summary,
}

/// Scratch buffers for one augmented RK4 step (no per-step allocation).
struct Rk4Workspace {
    n: usize,
    m: usize,
    k: [Vec<f64>; 4],
    ytmp: Vec<f64>,
    fx: Vec<f64>,
    jac: Vec<f64>,
}

impl Rk4Workspace {
    fn new(n: usize, m: usize) -> Self {
        let dim = n + m;
        Rk4Workspace {
            n,
            m,
            k: [vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]],
            ytmp: vec![0.0; dim],
            fx: vec![0.0; n],
            jac: vec![0.0; m * n],
        }
    }

    /// `out = d/dt [x; r]` at `y` under the held input.
    fn rhs(&mut self, sys: &ControlledSystem, y: &[f64], u_held: &[f64], out: &mut [f64]) -> Result<()> {
        let (x, _r) = y.split_at(self.n);
        let (ox, or) = out.split_at_mut(self.n);
        sys.xi_into(x, u_held, &mut self.fx, &mut self.jac, or)?;
        ox.copy_from_slice(&self.fx);
        Ok(())
    }

    /// One RK4 step of size `dt` from `y` into `y_out`; `stage_r_norms`
    /// receives `‖r‖` at the three interior stage states.
    fn step(
        &mut self,
        sys: &ControlledSystem,
        y: &[f64],
        u_held: &[f64],
        dt: f64,
        y_out: &mut [f64],
        stage_r_norms: &mut [f64; 3],
    ) -> Result<()> {
        let n = self.n;
        let dim = n + self.m;
        let mut k1 = std::mem::take(&mut self.k[0]);
        let mut k2 = std::mem::take(&mut self.k[1]);
        let mut k3 = std::mem::take(&mut self.k[2]);
        let mut k4 = std::mem::take(&mut self.k[3]);

        self.rhs(sys, y, u_held, &mut k1)?;
        for i in 0..dim {
            self.ytmp[i] = y[i] + 0.5 * dt * k1[i];
        }
        stage_r_norms[0] = euclidean_norm(&self.ytmp[n..]);
        let stage1 = self.ytmp.clone();
        self.rhs(sys, &stage1, u_held, &mut k2)?;
        for i in 0..dim {
            self.ytmp[i] = y[i] + 0.5 * dt * k2[i];
        }
        stage_r_norms[1] = euclidean_norm(&self.ytmp[n..]);
        let stage2 = self.ytmp.clone();
        self.rhs(sys, &stage2, u_held, &mut k3)?;
        for i in 0..dim {
            self.ytmp[i] = y[i] + dt * k3[i];
        }
        stage_r_norms[2] = euclidean_norm(&self.ytmp[n..]);
        let stage3 = self.ytmp.clone();
        self.rhs(sys, &stage3, u_held, &mut k4)?;
        let w = dt / 6.0;
        for i in 0..dim {
            y_out[i] = y[i] + w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        self.k = [k1, k2, k3, k4];
        Ok(())
    }
}

/// Run the sampled-data loop from `x0` to the horizon.
pub fn simulate(
    sys: &ControlledSystem,
    gamma_bar: &GainFn,
    x0: &[f64],
    opts: &SimOptions,
) -> Result<SimResult> {
    opts.validate()?;
    let n = sys.state_dim();
    let m = sys.input_dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: x0.len() });
    }

    let mut ws = Rk4Workspace::new(n, m);
    let mut trigger = TriggerState::new(gamma_bar.clone(), n, m);
    trigger.reset(0.0, x0, sys)?;

    let mut y = vec![0.0; n + m];
    y[..n].copy_from_slice(x0);
    let mut y_next = vec![0.0; n + m];
    let mut stage_norms = [0.0_f64; 3];

    let mut t = 0.0_f64;
    let mut samples: Vec<Sample> = Vec::new();
    let mut events: Vec<EventRecord> = Vec::new();
    let mut dual_r = DualRStats::default();
    let mut max_x_norm = euclidean_norm(&y[..n]);
    let mut max_h_between_events = f64::NEG_INFINITY;
    let mut accepted_steps: usize = 0;

    samples.push(Sample {
        t: 0.0,
        x: y[..n].to_vec(),
        u: trigger.u_held().to_vec(),
        r_norm: 0.0,
        r_sup: 0.0,
        event: true, // the initial hold is the zeroth update instant
    });

    let h = opts.step;
    let t_end = opts.horizon;
    let eps_t = 1e-12 * t_end.max(1.0);

    // Accept `y_new` at `t_new`, running the per-step diagnostics.
    // Returns the sample to record if the stride or event asks for one.
    #[allow(clippy::too_many_arguments)]
    fn accept_step(
        sys: &ControlledSystem,
        trigger: &TriggerState,
        dual_r: &mut DualRStats,
        opts: &SimOptions,
        t_new: f64,
        x_new: &[f64],
        r_new: &[f64],
    ) -> Result<()> {
        if x_new.iter().chain(r_new.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Divergence { t: trigger.t_k(), norm: f64::NAN });
        }
        let x_norm = euclidean_norm(x_new);
        if x_norm > opts.divergence_norm {
            return Err(Error::Divergence { t: t_new, norm: x_norm });
        }
        let direct = sys.r_direct(x_new, trigger.x_k())?;
        let residual: f64 = euclidean_norm(
            &r_new.iter().zip(direct.iter()).map(|(a, b)| a - b).collect::<Vec<_>>(),
        );
        let bound = 10.0 * opts.step.powi(4) * (1.0 + x_norm);
        dual_r.checks += 1;
        let ratio = residual / bound;
        if ratio > dual_r.max_ratio {
            dual_r.max_ratio = ratio;
            dual_r.worst_t = t_new;
        }
        dual_r.max_residual = dual_r.max_residual.max(residual);
        if residual > bound {
            dual_r.violations += 1;
            if opts.strict_dual_r {
                return Err(Error::DualR { t: t_new, residual, bound });
            }
        }
        Ok(())
    }

    while t < t_end - eps_t {
        let dt = h.min(t_end - t);
        ws.step(sys, &y, trigger.u_held(), dt, &mut y_next, &mut stage_norms)?;
        let t1 = t + dt;
        let r_end_norm = euclidean_norm(&y_next[n..]);
        let r_frozen = trigger
            .r_sup()
            .max(stage_norms[0])
            .max(stage_norms[1])
            .max(stage_norms[2])
            .max(r_end_norm);
        let h_end = (t1 - trigger.t_k()) * gamma_bar.eval_raw(r_frozen) - r_frozen;

        if r_frozen > 0.0 && h_end >= 0.0 {
            // Event inside (t, t1]: bisect h̃(τ) = (τ − t_k)·γ̄(R_f) − R_f,
            // the frozen-sup model, which is linear and increasing in τ.
            let g_rf = gamma_bar.eval_raw(r_frozen);
            let h_tilde = |tau: f64| (tau - trigger.t_k()) * g_rf - r_frozen;
            let t_star = if h_tilde(t) >= 0.0 {
                // The sup jumped mid-step past the overdue point; the
                // crossing predates the step, so clamp to its start.
                t
            } else {
                let (mut lo, mut hi) = (t, t1);
                while hi - lo > opts.localization_tol {
                    let mid = 0.5 * (lo + hi);
                    if h_tilde(mid) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                hi
            };

            // Re-integrate the truncated step to the event instant.
            let dt_star = t_star - t;
            let (x_event, r_event_norm, r_at_event, t_event) = if dt_star > 0.0 {
                ws.step(sys, &y, trigger.u_held(), dt_star, &mut y_next, &mut stage_norms)?;
                let r_norm = euclidean_norm(&y_next[n..]);
                let r_sup_partial = trigger
                    .r_sup()
                    .max(stage_norms[0])
                    .max(stage_norms[1])
                    .max(stage_norms[2])
                    .max(r_norm);
                (y_next[..n].to_vec(), r_sup_partial, y_next[n..].to_vec(), t_star)
            } else {
                (y[..n].to_vec(), trigger.r_sup(), y[n..].to_vec(), t_star)
            };

            if r_event_norm > 0.0 {
                accept_step(sys, &trigger, &mut dual_r, opts, t_event, &x_event, &r_at_event)?;
                max_x_norm = max_x_norm.max(euclidean_norm(&x_event));
                let interval = t_event - trigger.t_k();
                events.push(EventRecord {
                    k: events.len() + 1,
                    t_k: t_event,
                    interval,
                    r_sup: r_event_norm,
                });
                if events.len() > opts.max_events {
                    return Err(Error::InvalidArgument(format!(
                        "event budget of {} exhausted at t = {t_event}; \
                         suspiciously frequent triggering",
                        opts.max_events
                    )));
                }
                trigger.reset(t_event, &x_event, sys)?;
                y[..n].copy_from_slice(&x_event);
                y[n..].fill(0.0);
                t = t_event;
                accepted_steps += 1;
                samples.push(Sample {
                    t,
                    x: x_event,
                    u: trigger.u_held().to_vec(),
                    r_norm: 0.0,
                    r_sup: 0.0,
                    event: true,
                });
                continue;
            }
            // The sup was attained strictly after t_star (possible only
            // when the crossing clamped to the step start): fall through
            // and accept the full step, declaring the event at its end.
            ws.step(sys, &y, trigger.u_held(), dt, &mut y_next, &mut stage_norms)?;
            let x_full = y_next[..n].to_vec();
            let r_full = y_next[n..].to_vec();
            accept_step(sys, &trigger, &mut dual_r, opts, t1, &x_full, &r_full)?;
            max_x_norm = max_x_norm.max(euclidean_norm(&x_full));
            events.push(EventRecord {
                k: events.len() + 1,
                t_k: t1,
                interval: t1 - trigger.t_k(),
                r_sup: r_frozen,
            });
            trigger.reset(t1, &x_full, sys)?;
            y[..n].copy_from_slice(&x_full);
            y[n..].fill(0.0);
            t = t1;
            accepted_steps += 1;
            samples.push(Sample {
                t,
                x: x_full,
                u: trigger.u_held().to_vec(),
                r_norm: 0.0,
                r_sup: 0.0,
                event: true,
            });
            continue;
        }

        // No event: accept the full step.
        accept_step(sys, &trigger, &mut dual_r, opts, t1, &y_next[..n], &y_next[n..])?;
        for s in stage_norms {
            trigger.observe_r_norm(s);
        }
        let r_vec: Vec<f64> = y_next[n..].to_vec();
        trigger.sync_r(&r_vec, t1);
        std::mem::swap(&mut y, &mut y_next);
        t = t1;
        accepted_steps += 1;
        max_x_norm = max_x_norm.max(euclidean_norm(&y[..n]));
        max_h_between_events = max_h_between_events.max(trigger.event_fn(t));
        if accepted_steps % opts.sample_stride == 0 {
            samples.push(Sample {
                t,
                x: y[..n].to_vec(),
                u: trigger.u_held().to_vec(),
                r_norm: euclidean_norm(&y[n..]),
                r_sup: trigger.r_sup(),
                event: false,
            });
        }
    }

    // Final instant, if the stride didn't just record it.
    if samples.last().map(|s| s.t) != Some(t) {
        samples.push(Sample {
            t,
            x: y[..n].to_vec(),
            u: trigger.u_held().to_vec(),
            r_norm: euclidean_norm(&y[n..]),
            r_sup: trigger.r_sup(),
            event: false,
        });
    }

    let intervals: Vec<f64> = events.iter().map(|e| e.interval).collect();
    let (min_interval, mean_interval, tail_mean_interval) = if intervals.is_empty() {
        (None, None, None)
    } else {
        let min = intervals.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = intervals.iter().sum::<f64>() / intervals.len() as f64;
        let n_tail = (intervals.len() / 5).max(1);
        let tail = &intervals[intervals.len() - n_tail..];
        let tail_mean = tail.iter().sum::<f64>() / tail.len() as f64;
        (Some(min), Some(mean), Some(tail_mean))
    };

    let final_state = y[..n].to_vec();
    let final_norm = euclidean_norm(&final_state);
    let summary = Summary {
        event_count: events.len(),
        min_interval,
        mean_interval,
        tail_mean_interval,
        final_t: t,
        final_norm,
        final_state,
        quiescent: events.is_empty(),
        max_x_norm,
        max_h_between_events: if max_h_between_events.is_finite() {
            max_h_between_events
        } else {
            0.0
        },
        dual_r,
    };

    Ok(SimResult { state_dim: n, input_dim: m, samples, events, summary })
}

/// Outcome of [`zeno_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct ZenoReport {
    pub min_interval: Option<f64>,
    /// True when the last 10 intervals decrease monotonically and lose more
    /// than half their length — the signature of accumulating events.
    pub shrinking_trend: bool,
    pub note: String,
}

/// Scan a run for accumulating events: reports the minimum interval and a
/// shrinking-trend flag over the last 10 intervals.
pub fn zeno_check(res: &SimResult) -> ZenoReport {
    let intervals: Vec<f64> = res.events.iter().map(|e| e.interval).collect();
    if intervals.is_empty() {
        return ZenoReport {
            min_interval: None,
            shrinking_trend: false,
            note: "no events".into(),
        };
    }
    let min = intervals.iter().copied().fold(f64::INFINITY, f64::min);
    if intervals.len() < 10 {
        return ZenoReport {
            min_interval: Some(min),
            shrinking_trend: false,
            note: format!("only {} intervals; trend not assessed", intervals.len()),
        };
    }
    let tail = &intervals[intervals.len() - 10..];
    let monotone = tail.windows(2).all(|w| w[1] < w[0]);
    let shrinking_trend = monotone && tail[9] < 0.5 * tail[0];
    ZenoReport { min_interval: Some(min), shrinking_trend, note: String::new() }
}

/// Outcome of [`interval_convergence`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// False when the run has too few events to assess (< 10).
    pub sufficient: bool,
    pub tail_mean: Option<f64>,
    pub rel_error: Option<f64>,
    pub pass: bool,
    pub note: String,
}

/// Compare the tail-mean interval against a predicted limit interval.
pub fn interval_convergence(res: &SimResult, t_pred: f64, rel_tol: f64) -> ConvergenceReport {
    if res.events.len() < 10 {
        return ConvergenceReport {
            sufficient: false,
            tail_mean: res.summary.tail_mean_interval,
            rel_error: None,
            pass: false,
            note: format!("insufficient data: {} events (need 10)", res.events.len()),
        };
    }
    let tail_mean = res.summary.tail_mean_interval.expect("events imply intervals");
    let rel_error = (tail_mean - t_pred).abs() / t_pred;
    ConvergenceReport {
        sufficient: true,
        tail_mean: Some(tail_mean),
        rel_error: Some(rel_error),
        pass: rel_error <= rel_tol,
        note: String::new(),
    }
}

/// Check every recorded interval against the hard cap from the trigger gain
/// and the largest observed sup. Returns the cap used, when finite.
pub fn check_interval_cap(res: &SimResult, gamma_bar: &GainFn, slack: f64) -> Result<Option<f64>> {
    let max_r = res.events.iter().map(|e| e.r_sup).fold(0.0_f64, f64::max);
    if max_r == 0.0 {
        return Ok(None);
    }
    match interval_upper_bound(gamma_bar, max_r)? {
        IntervalBound::Unbounded => Ok(None),
        IntervalBound::Bounded(cap) => {
            for e in &res.events {
                if e.interval > cap + slack {
                    return Err(Error::InvalidArgument(format!(
                        "interval {} at event {} exceeds the cap {} (+{slack})",
                        e.interval, e.k, cap
                    )));
                }
            }
            Ok(Some(cap))
        }
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write the timeseries CSV: `t,x1..xn,u1..um,r_norm,R,event`.
pub fn write_timeseries_csv(res: &SimResult, out: &mut dyn IoWrite) -> Result<()> {
    let mut header = String::from("t");
    for i in 1..=res.state_dim {
        header.push_str(&format!(",x{i}"));
    }
    for i in 1..=res.input_dim {
        header.push_str(&format!(",u{i}"));
    }
    header.push_str(",r_norm,R,event");
    writeln!(out, "{header}")?;
    for s in &res.samples {
        let mut line = fmt_f64(s.t);
        for v in &s.x {
            line.push(',');
            line.push_str(&fmt_f64(*v));
        }
        for v in &s.u {
            line.push(',');
            line.push_str(&fmt_f64(*v));
        }
        line.push(',');
        line.push_str(&fmt_f64(s.r_norm));
        line.push(',');
        line.push_str(&fmt_f64(s.r_sup));
        line.push(',');
        line.push(if s.event { '1' } else { '0' });
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Write the event-log CSV: `k,t_k,interval,R`.
pub fn write_events_csv(res: &SimResult, out: &mut dyn IoWrite) -> Result<()> {
    writeln!(out, "k,t_k,interval,R")?;
    for e in &res.events {
        writeln!(
            out,
            "{},{},{},{}",
            e.k,
            fmt_f64(e.t_k),
            fmt_f64(e.interval),
            fmt_f64(e.r_sup)
        )?;
    }
    Ok(())
}

/// Write the summary as flat `key=value` lines. `prefix` entries (scenario
/// identity, configuration echoes) are emitted first, in the given order.
pub fn write_summary(
    summary: &Summary,
    prefix: &[(String, String)],
    out: &mut dyn IoWrite,
) -> Result<()> {
    for (k, v) in prefix {
        writeln!(out, "{k}={v}")?;
    }
    writeln!(out, "event_count={}", summary.event_count)?;
    writeln!(out, "quiescent={}", summary.quiescent)?;
    if let Some(v) = summary.min_interval {
        writeln!(out, "min_interval={}", fmt_f64(v))?;
    }
    if let Some(v) = summary.mean_interval {
        writeln!(out, "mean_interval={}", fmt_f64(v))?;
    }
    if let Some(v) = summary.tail_mean_interval {
        writeln!(out, "tail_mean_interval={}", fmt_f64(v))?;
    }
    writeln!(out, "final_t={}", fmt_f64(summary.final_t))?;
    for (i, v) in summary.final_state.iter().enumerate() {
        writeln!(out, "final_x{}={}", i + 1, fmt_f64(*v))?;
    }
    writeln!(out, "final_norm={}", fmt_f64(summary.final_norm))?;
    writeln!(out, "max_x_norm={}", fmt_f64(summary.max_x_norm))?;
    writeln!(out, "max_h_between_events={}", fmt_f64(summary.max_h_between_events))?;
    writeln!(out, "dual_r_checks={}", summary.dual_r.checks)?;
    writeln!(out, "dual_r_violations={}", summary.dual_r.violations)?;
    writeln!(out, "dual_r_max_ratio={}", fmt_f64(summary.dual_r.max_ratio))?;
    writeln!(out, "dual_r_worst_t={}", fmt_f64(summary.dual_r.worst_t))?;
    writeln!(out, "dual_r_max_residual={}", fmt_f64(summary.dual_r.max_residual))?;
    Ok(())
}
