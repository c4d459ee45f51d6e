//! Class-K gain-function algebra.
//!
//! A [`GainFn`] wraps a map `[0, ∞) → [0, ∞)` used as a comparison gain:
//! ISS gains, triggering gains `γ̄`, and every intermediate object produced
//! by small-gain composition or backstepping synthesis. The wrapper carries
//! two pieces of side information that the rest of the toolkit leans on:
//!
//! * `slope_at_zero` — the limit of `g(s)/s` as `s → 0+` when it is known in
//!   closed form (`+∞` is a legal value, e.g. for `√s`). The limit interval
//!   of the triggering law is `1 / slope`, so keeping this analytic whenever
//!   possible avoids stacking numerical estimates.
//! * `domain_hint` — the upper end of the argument range the function has
//!   been validated on; monotone inversion brackets against it.
//!
//! Class-K membership itself is *not* enforced at construction: the zero
//! map and other degenerate declarations are useful as absent couplings in
//! certificates. [`GainFn::check_k_infinity`] performs the grid validation
//! and rejects such degenerate members where strictness matters.

use crate::{Error, Result};
use std::sync::Arc;

/// Default upper end of the validated argument range.
pub const DEFAULT_DOMAIN_HINT: f64 = 1.0e2;

/// Default absolute bisection tolerance for [`GainFn::inverse_eval`].
pub const DEFAULT_INVERSE_TOL: f64 = 1.0e-10;

/// Bisection iteration cap for monotone inversion.
const MAX_BISECT_ITERS: usize = 200;

/// Probe arguments for the numeric slope-at-zero estimator: a geometric
/// ladder from 1e-1 down to 1e-8.
const SLOPE_PROBE: [f64; 8] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];

/// A geometric evaluation grid used by the desk-scale inequality checks.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { min: 1e-6, max: 1e2, points: 200 }
    }
}

impl Grid {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        if !(min > 0.0 && max > min && points >= 2) {
            return Err(Error::InvalidArgument(format!(
                "grid requires 0 < min < max and at least 2 points, got min={min} max={max} points={points}"
            )));
        }
        Ok(Grid { min, max, points })
    }

    /// The grid values, geometrically spaced from `min` to `max` inclusive.
    pub fn values(&self) -> Vec<f64> {
        let ratio = (self.max / self.min).ln() / (self.points - 1) as f64;
        (0..self.points).map(|i| self.min * (ratio * i as f64).exp()).collect()
    }
}

/// A nonnegative gain function on `s ≥ 0` with analytic slope bookkeeping.
///
/// Values are immutable and `Clone` is cheap (an `Arc` bump), so gains can be
/// shared freely across threads and composed without lifetime juggling.
#[derive(Clone)]
pub struct GainFn {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// `lim_{s→0+} g(s)/s` when analytically known; may be `f64::INFINITY`.
    slope: Option<f64>,
    domain_hint: f64,
}

impl std::fmt::Debug for GainFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GainFn")
            .field("slope_at_zero", &self.slope)
            .field("domain_hint", &self.domain_hint)
            .finish()
    }
}

impl GainFn {
    /// The zero map. Not class-K (see module docs); used for absent couplings.
    pub fn zero() -> Self {
        GainFn { f: Arc::new(|_| 0.0), slope: Some(0.0), domain_hint: DEFAULT_DOMAIN_HINT }
    }

    /// The identity `s ↦ s`.
    pub fn identity() -> Self {
        GainFn { f: Arc::new(|s| s), slope: Some(1.0), domain_hint: DEFAULT_DOMAIN_HINT }
    }

    /// `s ↦ slope · s` with `slope > 0`.
    pub fn linear(slope: f64) -> Result<Self> {
        if !(slope > 0.0 && slope.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "linear gain needs a positive finite slope, got {slope}"
            )));
        }
        Ok(GainFn {
            f: Arc::new(move |s| slope * s),
            slope: Some(slope),
            domain_hint: DEFAULT_DOMAIN_HINT,
        })
    }

    /// Polynomial with nonnegative coefficients, ascending powers starting at
    /// `s^1`: `coeffs = [c1, c2, ...]` gives `c1·s + c2·s² + ...`.
    ///
    /// Nonnegative coefficients (with at least one positive) guarantee a
    /// strictly increasing, unbounded map, i.e. class-K∞.
    pub fn polynomial(coeffs: &[f64]) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::InvalidArgument(
                "polynomial gain needs finite nonnegative coefficients".into(),
            ));
        }
        if coeffs.iter().all(|c| *c == 0.0) {
            return Err(Error::InvalidArgument(
                "polynomial gain must have a positive coefficient; use GainFn::zero for the zero map".into(),
            ));
        }
        let cs: Vec<f64> = coeffs.to_vec();
        let slope = cs[0];
        Ok(GainFn {
            f: Arc::new(move |s| {
                // Horner evaluation of c1·s + c2·s² + ...; exact 0 at s = 0.
                let mut acc = 0.0;
                for c in cs.iter().rev() {
                    acc = acc * s + c;
                }
                acc * s
            }),
            slope: Some(slope),
            domain_hint: DEFAULT_DOMAIN_HINT,
        })
    }

    /// Power law `s ↦ s^p` with `p > 0`.
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "power gain needs a positive finite exponent, got {p}"
            )));
        }
        let slope = if p < 1.0 {
            f64::INFINITY
        } else if p == 1.0 {
            1.0
        } else {
            0.0
        };
        Ok(GainFn {
            f: Arc::new(move |s| if s == 0.0 { 0.0 } else { s.powf(p) }),
            slope: Some(slope),
            domain_hint: DEFAULT_DOMAIN_HINT,
        })
    }

    /// Wrap an arbitrary map. The caller asserts `f(0) = 0`, `f ≥ 0`, and
    /// monotonicity; [`GainFn::check_k_infinity`] validates on a grid.
    pub fn from_fn(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        slope_at_zero: Option<f64>,
        domain_hint: f64,
    ) -> Self {
        GainFn { f: Arc::new(f), slope: slope_at_zero, domain_hint }
    }

    /// Replace the validated-range hint (used by inversion as the bracket).
    pub fn with_domain_hint(mut self, hint: f64) -> Self {
        self.domain_hint = hint;
        self
    }

    pub fn domain_hint(&self) -> f64 {
        self.domain_hint
    }

    /// Evaluate at `s ≥ 0`. Negative arguments are a domain error; `s = 0`
    /// returns exactly `0` for every built-in constructor.
    pub fn eval(&self, s: f64) -> Result<f64> {
        if s < 0.0 || s.is_nan() {
            return Err(Error::NegativeArgument { value: s });
        }
        Ok((self.f)(s))
    }

    /// Unchecked evaluation for internal hot paths where `s ≥ 0` holds by
    /// construction (norms, outputs of other gains).
    pub(crate) fn eval_raw(&self, s: f64) -> f64 {
        (self.f)(s)
    }

    /// Composition `self ∘ inner`, i.e. `s ↦ self(inner(s))`.
    ///
    /// The slope at zero multiplies through when that product is determinate;
    /// `0 · ∞` (e.g. `s² ∘ √s`) is left unknown rather than guessed.
    pub fn compose(&self, inner: &GainFn) -> GainFn {
        let of = Arc::clone(&self.f);
        let inf = Arc::clone(&inner.f);
        let slope = match (self.slope, inner.slope) {
            (Some(a), Some(b)) => {
                let indeterminate = (a == 0.0 && b.is_infinite()) || (a.is_infinite() && b == 0.0);
                if indeterminate {
                    None
                } else {
                    Some(a * b)
                }
            }
            _ => None,
        };
        GainFn {
            f: Arc::new(move |s| of(inf(s))),
            slope,
            domain_hint: inner.domain_hint,
        }
    }

    /// Pointwise maximum of a nonempty list of gains.
    pub fn max_of(members: &[GainFn]) -> Result<GainFn> {
        if members.is_empty() {
            return Err(Error::InvalidArgument("max_of needs at least one gain".into()));
        }
        let fs: Vec<Arc<dyn Fn(f64) -> f64 + Send + Sync>> =
            members.iter().map(|g| Arc::clone(&g.f)).collect();
        let slope = members
            .iter()
            .try_fold(0.0_f64, |acc, g| g.slope.map(|s| acc.max(s)));
        let domain_hint = members
            .iter()
            .map(|g| g.domain_hint)
            .fold(f64::INFINITY, f64::min);
        Ok(GainFn {
            f: Arc::new(move |s| fs.iter().map(|f| f(s)).fold(0.0_f64, f64::max)),
            slope,
            domain_hint,
        })
    }

    /// Scaling `s ↦ c · self(s)` with `c > 0`.
    pub fn scale(&self, c: f64) -> Result<GainFn> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "scale factor must be positive and finite, got {c}"
            )));
        }
        let f = Arc::clone(&self.f);
        Ok(GainFn {
            f: Arc::new(move |s| c * f(s)),
            slope: self.slope.map(|s| c * s),
            domain_hint: self.domain_hint,
        })
    }

    /// Monotone inversion by bisection on `[0, domain_hint]`.
    ///
    /// Returns `s` with `g(s) ≈ y`; iteration stops once the bracket is
    /// narrower than `tol` *and* the residual `|g(s) − y|` is below `tol`,
    /// or earlier at the floating-point floor (adjacent bracket endpoints).
    /// Pass `tol <= 0` to run straight to that floor. Capped at 200 rounds.
    pub fn inverse_eval(&self, y: f64, tol: f64) -> Result<f64> {
        if y.is_nan() {
            return Err(Error::InvalidArgument("inverse_eval of NaN".into()));
        }
        if y < 0.0 {
            return Err(Error::OutOfRange { value: y, max: self.eval_raw(self.domain_hint) });
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        let mut lo = 0.0_f64;
        let mut hi = self.domain_hint;
        let g_hi = self.eval_raw(hi);
        if !(g_hi.is_finite() && y <= g_hi * (1.0 + 1e-12)) {
            return Err(Error::OutOfRange { value: y, max: g_hi });
        }
        let mut mid = 0.5 * (lo + hi);
        for _ in 0..MAX_BISECT_ITERS {
            mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break; // bracket endpoints adjacent: full f64 resolution
            }
            let v = self.eval_raw(mid);
            if v < y {
                lo = mid;
            } else {
                hi = mid;
            }
            if tol > 0.0 && hi - lo <= tol && (self.eval_raw(mid) - y).abs() <= tol {
                break;
            }
        }
        Ok(mid)
    }

    /// The analytic slope at zero when one was recorded or propagated.
    pub fn analytic_slope_at_zero(&self) -> Option<f64> {
        self.slope
    }

    /// `lim_{s→0+} g(s)/s`: the recorded analytic value when available,
    /// otherwise the numeric estimate of [`GainFn::slope_at_zero_numeric`].
    pub fn slope_at_zero(&self) -> Result<f64> {
        match self.slope {
            Some(s) => Ok(s),
            None => self.slope_at_zero_numeric(),
        }
    }

    /// Numeric slope-at-zero estimate on the fixed geometric probe grid
    /// (1e-1 down to 1e-8) with a Richardson-style trend check.
    ///
    /// Ratios that settle are extrapolated; a monotone blow-up is reported
    /// as `+∞`; anything else (oscillation, overflow) is an estimation
    /// error carrying the probe ratios as diagnostics.
    pub fn slope_at_zero_numeric(&self) -> Result<f64> {
        let q: Vec<f64> = SLOPE_PROBE.iter().map(|&s| self.eval_raw(s) / s).collect();
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::SlopeEstimation {
                reason: "non-finite ratio g(s)/s on the probe grid".into(),
                ratios: q,
            });
        }
        let n = q.len();
        let (q_last, q_prev, q_prev2) = (q[n - 1], q[n - 2], q[n - 3]);
        if q.iter().all(|v| *v == 0.0) {
            return Ok(0.0);
        }
        let scale = q_last.abs().max(1.0);
        // Settled: the last two decade-to-decade changes are already in the
        // noise, so a two-point Richardson step removes the O(s) remainder.
        if (q_last - q_prev).abs() <= 1e-5 * scale && (q_prev - q_prev2).abs() <= 1e-4 * scale {
            let extrapolated = (10.0 * q_last - q_prev) / 9.0;
            return Ok(extrapolated.max(0.0));
        }
        // Diverging: strictly growing toward s = 0 with at least a decade of
        // total growth over the last half of the ladder.
        let tail_increasing = (n - 5..n - 1).all(|i| q[i + 1] > q[i] * (1.0 + 1e-12));
        if tail_increasing && q_last >= 10.0 * q[n - 5] {
            return Ok(f64::INFINITY);
        }
        Err(Error::SlopeEstimation {
            reason: "ratio trend neither settles nor diverges monotonically".into(),
            ratios: q,
        })
    }

    /// Grid validation of class-K∞ membership: exact zero at zero, strict
    /// monotonicity across the grid, and continued growth at the top end.
    pub fn check_k_infinity(&self, grid: &Grid) -> KInfinityReport {
        let zero_at_zero = self.eval_raw(0.0) == 0.0;
        let values = grid.values();
        let mut strictly_increasing = true;
        let mut monotonicity_witness = None;
        let mut prev_s = 0.0;
        let mut prev_v = self.eval_raw(0.0);
        for &s in &values {
            let v = self.eval_raw(s);
            if v <= prev_v {
                strictly_increasing = false;
                monotonicity_witness = Some((prev_s, s));
                break;
            }
            prev_s = s;
            prev_v = v;
        }
        let growth_ok = self.eval_raw(grid.max) > self.eval_raw(grid.max / 2.0);
        KInfinityReport { zero_at_zero, strictly_increasing, monotonicity_witness, growth_ok }
    }
}

/// Result of [`GainFn::check_k_infinity`].
#[derive(Debug, Clone, PartialEq)]
pub struct KInfinityReport {
    pub zero_at_zero: bool,
    pub strictly_increasing: bool,
    /// Bracketing pair `(s_prev, s)` where monotonicity first failed.
    pub monotonicity_witness: Option<(f64, f64)>,
    pub growth_ok: bool,
}

impl KInfinityReport {
    pub fn passed(&self) -> bool {
        self.zero_at_zero && self.strictly_increasing && self.growth_ok
    }
}

/// Result of [`check_small_gain`].
#[derive(Debug, Clone, PartialEq)]
pub struct SmallGainCheck {
    pub holds: bool,
    /// First grid point where `g1(g2(s)) ≥ s`, if any.
    pub witness: Option<f64>,
}

/// Grid check of the small-gain contraction `g1(g2(s)) < s`.
pub fn check_small_gain(g1: &GainFn, g2: &GainFn, grid: &Grid) -> SmallGainCheck {
    for s in grid.values() {
        let v = g1.eval_raw(g2.eval_raw(s));
        if v >= s {
            return SmallGainCheck { holds: false, witness: Some(s) };
        }
    }
    SmallGainCheck { holds: true, witness: None }
}

/// Build a triggering gain `γ̄(s) = eps1 · γ(s) + eps2 · s`.
///
/// Requires `eps1 > 1` and `eps2 > 0`; the additive linear term guarantees
/// `lim inf γ̄(s)/s ≥ eps2 > 0`, which rules out accumulation of events, and
/// `γ̄ ≥ eps1 · γ` holds by construction (asserted on a small-argument grid
/// as a guard against pathological wrapped closures).
pub fn build_gamma_bar(gamma: &GainFn, eps1: f64, eps2: f64) -> Result<GainFn> {
    if !(eps1 > 1.0 && eps1.is_finite()) {
        return Err(Error::InvalidArgument(format!("eps1 must exceed 1, got {eps1}")));
    }
    if !(eps2 > 0.0 && eps2.is_finite()) {
        return Err(Error::InvalidArgument(format!("eps2 must be positive, got {eps2}")));
    }
    let f = Arc::clone(&gamma.f);
    let slope = gamma.slope.map(|s| eps1 * s + eps2);
    let bar = GainFn {
        f: Arc::new(move |s| eps1 * f(s) + eps2 * s),
        slope,
        domain_hint: gamma.domain_hint,
    };
    for &s in &SLOPE_PROBE {
        let lhs = bar.eval_raw(s);
        if lhs < eps1 * gamma.eval_raw(s) || lhs / s < eps2 * (1.0 - 1e-9) {
            return Err(Error::InvalidArgument(format!(
                "gamma produced a negative or non-finite value near s = {s}; cannot form a triggering gain"
            )));
        }
    }
    Ok(bar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Coefficients of the quintic trigger gain used by the built-in
    /// fourth-order demo design: 70s + 40s² + 15s³ + 3.56s⁴ + 0.27s⁵.
    pub(crate) const DEMO_QUINTIC: [f64; 5] = [70.0, 40.0, 15.0, 3.56, 0.27];

    fn quintic() -> GainFn {
        GainFn::polynomial(&DEMO_QUINTIC).unwrap()
    }

    #[test]
    fn eval_is_exactly_zero_at_zero() {
        for g in [
            GainFn::zero(),
            GainFn::identity(),
            GainFn::linear(2.0).unwrap(),
            quintic(),
            GainFn::power(0.5).unwrap(),
            quintic().compose(&GainFn::linear(3.0).unwrap()),
            build_gamma_bar(&quintic(), 1.5, 0.1).unwrap(),
        ] {
            assert_eq!(g.eval(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn eval_rejects_negative_arguments() {
        let g = GainFn::identity();
        assert!(matches!(g.eval(-1.0), Err(Error::NegativeArgument { .. })));
    }

    #[test]
    fn linear_gain_evaluates() {
        let g = GainFn::linear(2.0).unwrap();
        assert_eq!(g.eval(3.0).unwrap(), 6.0);
    }

    #[test]
    fn quintic_matches_hand_sum_at_one() {
        // 0.27 + 3.56 + 15 + 40 + 70 = 128.83
        let v = quintic().eval(1.0).unwrap();
        assert!((v - 128.83).abs() < 1e-12, "quintic(1) = {v}, expected 128.83");
    }

    #[test]
    fn compose_order_matters() {
        let sq = GainFn::polynomial(&[0.0, 1.0]).unwrap(); // s²
        let lin = GainFn::linear(2.0).unwrap();
        assert_eq!(sq.compose(&lin).eval(3.0).unwrap(), 36.0); // (2s)²
        assert_eq!(lin.compose(&sq).eval(3.0).unwrap(), 18.0); // 2s²
    }

    #[test]
    fn compose_slope_products() {
        let sq = GainFn::polynomial(&[0.0, 1.0]).unwrap(); // slope 0
        let lin = GainFn::linear(2.0).unwrap(); // slope 2
        let sqrt = GainFn::power(0.5).unwrap(); // slope inf
        assert_eq!(sq.compose(&lin).analytic_slope_at_zero(), Some(0.0));
        assert_eq!(lin.compose(&sqrt).analytic_slope_at_zero(), Some(f64::INFINITY));
        // s² ∘ √s = s has slope 1; the product 0·∞ is indeterminate, so the
        // algebra must refuse to guess.
        assert_eq!(sq.compose(&sqrt).analytic_slope_at_zero(), None);
        let numeric = sq.compose(&sqrt).slope_at_zero().unwrap();
        assert!((numeric - 1.0).abs() < 1e-6, "numeric fallback gave {numeric}");
    }

    #[test]
    fn max_of_tracks_the_crossover() {
        let lin = GainFn::linear(2.0).unwrap();
        let sq = GainFn::polynomial(&[0.0, 1.0]).unwrap();
        let m = GainFn::max_of(&[lin, sq]).unwrap();
        assert_eq!(m.eval(1.0).unwrap(), 2.0); // 2s wins below s = 2
        assert_eq!(m.eval(2.0).unwrap(), 4.0); // tie
        assert_eq!(m.eval(3.0).unwrap(), 9.0); // s² wins above
        assert_eq!(m.analytic_slope_at_zero(), Some(2.0));
    }

    #[test]
    fn max_of_rejects_empty_input() {
        assert!(matches!(GainFn::max_of(&[]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn scale_carries_the_slope() {
        let g = quintic().scale(1.0 / 0.99).unwrap();
        let slope = g.analytic_slope_at_zero().unwrap();
        assert!((slope - 70.0 / 0.99).abs() < 1e-12, "slope {slope}");
        assert!(quintic().scale(0.0).is_err());
        assert!(quintic().scale(-1.0).is_err());
    }

    #[test]
    fn inverse_eval_square() {
        let sq = GainFn::polynomial(&[0.0, 1.0]).unwrap();
        let s = sq.inverse_eval(4.0, 1e-10).unwrap();
        assert!((s - 2.0).abs() < 1e-9, "inverse of 4 under s² gave {s}");
        assert_eq!(sq.inverse_eval(0.0, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn inverse_eval_quintic_recovers_one() {
        let s = quintic().inverse_eval(128.83, 1e-10).unwrap();
        assert!((s - 1.0).abs() < 1e-9, "inverse of 128.83 gave {s}");
    }

    #[test]
    fn inverse_eval_range_errors() {
        let g = GainFn::identity().with_domain_hint(10.0);
        assert!(matches!(g.inverse_eval(11.0, 1e-10), Err(Error::OutOfRange { .. })));
        assert!(matches!(g.inverse_eval(-1.0, 1e-10), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn inverse_eval_full_precision_mode() {
        // tol <= 0 bisects to the floating-point floor; relative error at
        // small arguments must track machine epsilon, not an absolute tol.
        let rho = GainFn::polynomial(&[0.0, 12.2]).unwrap(); // 12.2 s²
        let y = 12.2 * 1e-12; // rho(1e-6)
        let s = rho.inverse_eval(y, 0.0).unwrap();
        assert!(((s - 1e-6) / 1e-6).abs() < 1e-12, "relative error too large: {s}");
    }

    #[test]
    fn slope_estimator_settles_on_polynomials() {
        let gbar = quintic().scale(1.0 / 0.99).unwrap();
        let est = gbar.slope_at_zero_numeric().unwrap();
        let exact = 70.0 / 0.99; // 70.7070...
        assert!(
            ((est - exact) / exact).abs() < 1e-9,
            "estimated {est}, exact {exact}"
        );
        let affine = GainFn::polynomial(&[3.0, 1.0]).unwrap();
        assert!((affine.slope_at_zero_numeric().unwrap() - 3.0).abs() < 1e-10);
    }

    #[test]
    fn slope_estimator_flags_sqrt_as_infinite() {
        let sqrt = GainFn::power(0.5).unwrap();
        assert_eq!(sqrt.slope_at_zero_numeric().unwrap(), f64::INFINITY);
    }

    #[test]
    fn slope_estimator_rejects_oscillation() {
        // s · (2 + sin(ln s)) oscillates between decades and never settles.
        let wobble = GainFn::from_fn(
            |s| if s == 0.0 { 0.0 } else { s * (2.0 + (s.ln()).sin()) },
            None,
            DEFAULT_DOMAIN_HINT,
        );
        match wobble.slope_at_zero_numeric() {
            Err(Error::SlopeEstimation { ratios, .. }) => assert_eq!(ratios.len(), 8),
            other => panic!("expected estimation error, got {other:?}"),
        }
    }

    #[test]
    fn k_infinity_accepts_strictly_increasing_maps() {
        let grid = Grid::default();
        assert!(GainFn::identity().check_k_infinity(&grid).passed());
        assert!(GainFn::polynomial(&[5.0, 1.0]).unwrap().check_k_infinity(&grid).passed());
        assert!(quintic().check_k_infinity(&grid).passed());
    }

    #[test]
    fn k_infinity_rejects_zero_map_and_oscillation() {
        let grid = Grid::default();
        let zero_report = GainFn::zero().check_k_infinity(&grid);
        assert!(!zero_report.passed());
        assert!(!zero_report.strictly_increasing);
        let sine = GainFn::from_fn(|s| s.sin().abs(), None, DEFAULT_DOMAIN_HINT);
        let r = sine.check_k_infinity(&grid);
        assert!(!r.passed());
        assert!(r.monotonicity_witness.is_some());
    }

    #[test]
    fn small_gain_contraction_and_witness() {
        let grid = Grid::default();
        let half = GainFn::linear(0.5).unwrap();
        let id = GainFn::identity();
        assert!(check_small_gain(&half, &id, &grid).holds);
        // (2s) ∘ (2s) = 4s ≥ s everywhere: fails at the first grid point.
        let double = GainFn::linear(2.0).unwrap();
        let r = check_small_gain(&double, &double, &grid);
        assert!(!r.holds);
        assert_eq!(r.witness, Some(grid.values()[0]));
    }

    #[test]
    fn gamma_bar_construction() {
        let sq = GainFn::polynomial(&[0.0, 1.0]).unwrap();
        let bar = build_gamma_bar(&sq, 2.0, 0.1).unwrap();
        assert!((bar.eval(1.0).unwrap() - 2.1).abs() < 1e-15);
        assert_eq!(bar.analytic_slope_at_zero(), Some(0.1));
        assert!(build_gamma_bar(&sq, 1.0, 0.1).is_err()); // eps1 must exceed 1
        assert!(build_gamma_bar(&sq, 2.0, 0.0).is_err()); // eps2 must be positive
        let sqrt = GainFn::power(0.5).unwrap();
        let bar = build_gamma_bar(&sqrt, 1.5, 0.2).unwrap();
        assert_eq!(bar.analytic_slope_at_zero(), Some(f64::INFINITY));
    }

    /// Strategy: random gain built from polynomials with small positive
    /// coefficients, enough to exercise compose/max/scale algebra.
    fn poly_gain() -> impl Strategy<Value = GainFn> {
        proptest::collection::vec(0.0_f64..4.0, 1..4).prop_filter_map(
            "needs a positive coefficient",
            |mut cs| {
                if cs.iter().all(|c| *c == 0.0) {
                    cs[0] = 1.0;
                }
                GainFn::polynomial(&cs).ok()
            },
        )
    }

    proptest! {
        #[test]
        fn prop_compose_is_associative(a in poly_gain(), b in poly_gain(), c in poly_gain(),
                                       s in 0.0_f64..10.0) {
            let left = a.compose(&b).compose(&c).eval(s).unwrap();
            let right = a.compose(&b.compose(&c)).eval(s).unwrap();
            let tol = 1e-12 * left.abs().max(1.0);
            prop_assert!((left - right).abs() <= tol);
        }

        #[test]
        fn prop_max_is_idempotent_and_commutative(a in poly_gain(), b in poly_gain(),
                                                  s in 0.0_f64..10.0) {
            let aa = GainFn::max_of(&[a.clone(), a.clone()]).unwrap();
            prop_assert_eq!(aa.eval(s).unwrap(), a.eval(s).unwrap());
            let ab = GainFn::max_of(&[a.clone(), b.clone()]).unwrap();
            let ba = GainFn::max_of(&[b, a]).unwrap();
            prop_assert_eq!(ab.eval(s).unwrap(), ba.eval(s).unwrap());
        }

        #[test]
        fn prop_inverse_is_right_inverse(g in poly_gain(), frac in 0.01_f64..1.0) {
            let y = frac * g.eval(10.0).unwrap();
            let s = g.inverse_eval(y, 1e-10).unwrap();
            let back = g.eval(s).unwrap();
            prop_assert!((back - y).abs() <= 1e-10 * y.abs().max(1.0),
                         "g(inverse({})) = {} drifted", y, back);
        }

        #[test]
        fn prop_compose_slope_is_product(a in poly_gain(), b in poly_gain()) {
            let sa = a.analytic_slope_at_zero().unwrap();
            let sb = b.analytic_slope_at_zero().unwrap();
            prop_assert_eq!(a.compose(&b).analytic_slope_at_zero(), Some(sa * sb));
        }

        #[test]
        fn prop_gamma_bar_dominates(g in poly_gain(), eps1 in 1.01_f64..3.0, eps2 in 0.01_f64..2.0,
                                    s in 0.0_f64..50.0) {
            let bar = build_gamma_bar(&g, eps1, eps2).unwrap();
            prop_assert!(bar.eval(s).unwrap() >= eps1 * g.eval(s).unwrap());
            prop_assert!(bar.eval(s).unwrap() >= eps2 * s);
        }
    }
}
