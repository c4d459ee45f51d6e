//! Plant and feedback-law definitions.
//!
//! A [`ControlledSystem`] bundles the open-loop vector field `f(x, u)`, the
//! feedback law `g(x)`, and the analytic Jacobian `∇g(x)`. Under sampled
//! actuation the loop runs `ẋ = f(x, u_held)` with `u_held = g(x(t_k))`
//! frozen between events; the induced input disturbance is
//! `r(t) = g(x(t)) − g(x(t_k))`, and its derivative along the flow is the
//! auxiliary signal `ξ = ∇g(x) · f(x, u_held)` that the simulator integrates
//! as augmented state. [`ControlledSystem::r_direct`] recomputes `r` from the
//! endpoint states, giving an independent oracle for that accumulation.
//!
//! Systems are registered in code under string names and selected by name
//! from scenario files; parameters are resolved to plain numbers at
//! construction so evaluation closures never consult a lookup table.
//! `∇g` must be supplied analytically — it drives the triggering law — and a
//! finite-difference validator cross-checks it at registration.

use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Named real parameters of a system (uncertainty values, coefficients).
pub type Params = BTreeMap<String, f64>;

type FieldFn = dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync;
type OutputFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// Relative tolerance for the analytic-vs-finite-difference Jacobian check.
const GRAD_CHECK_REL_TOL: f64 = 1e-5;
/// Number of random probe points for the Jacobian check.
const GRAD_CHECK_POINTS: usize = 20;
/// Seed for the (deterministic) Jacobian-check probe points.
const GRAD_CHECK_SEED: u64 = 0x5ec4;

/// A plant `ẋ = f(x, u)` with feedback law `u = g(x)` and analytic `∇g`.
#[derive(Clone)]
pub struct ControlledSystem {
    name: String,
    state_dim: usize,
    input_dim: usize,
    f: Arc<FieldFn>,
    g: Arc<OutputFn>,
    /// Row-major `input_dim × state_dim` Jacobian of `g`.
    grad_g: Arc<OutputFn>,
    params: Params,
}

impl std::fmt::Debug for ControlledSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ControlledSystem")
            .field("name", &self.name)
            .field("state_dim", &self.state_dim)
            .field("input_dim", &self.input_dim)
            .field("params", &self.params)
            .finish()
    }
}

impl ControlledSystem {
    /// Assemble a system from closures. The caller asserts `f(0,0) = 0` and
    /// `g(0) = 0`; [`ControlledSystem::validate`] checks those equilibrium
    /// conditions and the Jacobian against finite differences.
    pub fn new(
        name: impl Into<String>,
        state_dim: usize,
        input_dim: usize,
        f: impl Fn(&[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
        g: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        grad_g: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        params: Params,
    ) -> Result<Self> {
        if state_dim == 0 || input_dim == 0 {
            return Err(Error::InvalidArgument(
                "state and input dimensions must be positive".into(),
            ));
        }
        Ok(ControlledSystem {
            name: name.into(),
            state_dim,
            input_dim,
            f: Arc::new(f),
            g: Arc::new(g),
            grad_g: Arc::new(grad_g),
            params,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    fn check_dims(&self, x: &[f64], u: Option<&[f64]>) -> Result<()> {
        if x.len() != self.state_dim {
            return Err(Error::DimensionMismatch { expected: self.state_dim, actual: x.len() });
        }
        if let Some(u) = u {
            if u.len() != self.input_dim {
                return Err(Error::DimensionMismatch {
                    expected: self.input_dim,
                    actual: u.len(),
                });
            }
        }
        Ok(())
    }

    /// Open-loop vector field into a caller-provided buffer.
    pub fn f_into(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_dims(x, Some(u))?;
        if out.len() != self.state_dim {
            return Err(Error::DimensionMismatch { expected: self.state_dim, actual: out.len() });
        }
        (self.f)(x, u, out);
        Ok(())
    }

    /// Feedback law `g(x)` into a caller-provided buffer.
    pub fn g_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_dims(x, None)?;
        if out.len() != self.input_dim {
            return Err(Error::DimensionMismatch { expected: self.input_dim, actual: out.len() });
        }
        (self.g)(x, out);
        Ok(())
    }

    /// Row-major `input_dim × state_dim` Jacobian of `g` at `x`.
    pub fn grad_g_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_dims(x, None)?;
        let want = self.input_dim * self.state_dim;
        if out.len() != want {
            return Err(Error::DimensionMismatch { expected: want, actual: out.len() });
        }
        (self.grad_g)(x, out);
        Ok(())
    }

    /// Allocating convenience wrapper around [`ControlledSystem::g_into`].
    pub fn g_eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.input_dim];
        self.g_into(x, &mut out)?;
        Ok(out)
    }

    /// The sampled-data closed loop `f(x, u_held)`: the plant driven by the
    /// zero-order-held input. Equivalent to `f(x, g(x) − r)` with
    /// `r = g(x) − u_held`.
    pub fn closed_loop_rhs(&self, x: &[f64], u_held: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.state_dim];
        self.f_into(x, u_held, &mut out)?;
        Ok(out)
    }

    /// The auxiliary signal `ξ = ∇g(x) · f(x, u_held)` — the time derivative
    /// of the feedback law along the held-input flow.
    pub fn xi(&self, x: &[f64], u_held: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.input_dim];
        let mut fx = vec![0.0; self.state_dim];
        let mut jac = vec![0.0; self.input_dim * self.state_dim];
        self.xi_into(x, u_held, &mut fx, &mut jac, &mut out)?;
        Ok(out)
    }

    /// Non-allocating `ξ` evaluation for the integrator hot path. `fx` and
    /// `jac` are scratch buffers of size `state_dim` and
    /// `input_dim·state_dim`; `fx` additionally returns `f(x, u_held)`.
    pub fn xi_into(
        &self,
        x: &[f64],
        u_held: &[f64],
        fx: &mut [f64],
        jac: &mut [f64],
        out: &mut [f64],
    ) -> Result<()> {
        self.f_into(x, u_held, fx)?;
        self.grad_g_into(x, jac)?;
        if out.len() != self.input_dim {
            return Err(Error::DimensionMismatch { expected: self.input_dim, actual: out.len() });
        }
        for i in 0..self.input_dim {
            let row = &jac[i * self.state_dim..(i + 1) * self.state_dim];
            out[i] = row.iter().zip(fx.iter()).map(|(a, b)| a * b).sum();
        }
        Ok(())
    }

    /// Endpoint recomputation of the sampling disturbance,
    /// `r = g(x) − g(x_k)` — the oracle the integrated `∫ξ` is checked
    /// against on every accepted step.
    pub fn r_direct(&self, x: &[f64], x_k: &[f64]) -> Result<Vec<f64>> {
        let mut gx = vec![0.0; self.input_dim];
        let mut gxk = vec![0.0; self.input_dim];
        self.g_into(x, &mut gx)?;
        self.g_into(x_k, &mut gxk)?;
        for (a, b) in gx.iter_mut().zip(gxk.iter()) {
            *a -= b;
        }
        Ok(gx)
    }

    /// Equilibrium and Jacobian validation: `f(0,0) = 0`, `g(0) = 0`, and
    /// `∇g` against central finite differences at deterministic random
    /// points (components in `[−2, 2]`), to 1e−5 relative.
    pub fn validate(&self) -> Result<()> {
        let zero_x = vec![0.0; self.state_dim];
        let zero_u = vec![0.0; self.input_dim];
        let f0 = self.closed_loop_rhs(&zero_x, &zero_u)?;
        if f0.iter().any(|v| *v != 0.0) {
            return Err(Error::InvalidArgument(format!(
                "system '{}': f(0, 0) must vanish, got {f0:?}",
                self.name
            )));
        }
        let g0 = self.g_eval(&zero_x)?;
        if g0.iter().any(|v| *v != 0.0) {
            return Err(Error::InvalidArgument(format!(
                "system '{}': g(0) must vanish, got {g0:?}",
                self.name
            )));
        }

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(GRAD_CHECK_SEED);
        let mut jac = vec![0.0; self.input_dim * self.state_dim];
        let mut gp = vec![0.0; self.input_dim];
        let mut gm = vec![0.0; self.input_dim];
        for _ in 0..GRAD_CHECK_POINTS {
            let x: Vec<f64> = (0..self.state_dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
            self.grad_g_into(&x, &mut jac)?;
            for j in 0..self.state_dim {
                let h = 1e-6 * x[j].abs().max(1.0);
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                self.g_into(&xp, &mut gp)?;
                self.g_into(&xm, &mut gm)?;
                for i in 0..self.input_dim {
                    let fd = (gp[i] - gm[i]) / (2.0 * h);
                    let analytic = jac[i * self.state_dim + j];
                    let scale = analytic.abs().max(fd.abs()).max(1.0);
                    if (fd - analytic).abs() > GRAD_CHECK_REL_TOL * scale {
                        return Err(Error::Calibration {
                            witness: x.clone(),
                            value: analytic,
                            bound: fd,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

type CoupledFieldFn = dyn Fn(&[f64], &[f64], &[f64], &mut [f64]) + Send + Sync;

/// A plant split into an unmeasured subsystem `ż = q(z, x, u)` and a
/// measured subsystem `ẋ = f_x(z, x, u)` whose feedback law `g` reads `x`
/// only. Used by the interconnection analysis, which needs the two blocks
/// separately; [`InterconnectedSystem::flatten`] stacks them back into a
/// plain [`ControlledSystem`] over `[z; x]` for simulation.
#[derive(Clone)]
pub struct InterconnectedSystem {
    name: String,
    z_dim: usize,
    x_dim: usize,
    input_dim: usize,
    q_dyn: Arc<CoupledFieldFn>,
    f_x: Arc<CoupledFieldFn>,
    g_x: Arc<OutputFn>,
    /// Row-major `input_dim × x_dim` Jacobian of `g_x`.
    grad_g_x: Arc<OutputFn>,
    params: Params,
}

impl std::fmt::Debug for InterconnectedSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InterconnectedSystem")
            .field("name", &self.name)
            .field("z_dim", &self.z_dim)
            .field("x_dim", &self.x_dim)
            .field("input_dim", &self.input_dim)
            .field("params", &self.params)
            .finish()
    }
}

impl InterconnectedSystem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        z_dim: usize,
        x_dim: usize,
        input_dim: usize,
        q_dyn: impl Fn(&[f64], &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
        f_x: impl Fn(&[f64], &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
        g_x: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        grad_g_x: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        params: Params,
    ) -> Result<Self> {
        if z_dim == 0 || x_dim == 0 || input_dim == 0 {
            return Err(Error::InvalidArgument(
                "interconnected system dimensions must be positive".into(),
            ));
        }
        let sys = InterconnectedSystem {
            name: name.into(),
            z_dim,
            x_dim,
            input_dim,
            q_dyn: Arc::new(q_dyn),
            f_x: Arc::new(f_x),
            g_x: Arc::new(g_x),
            grad_g_x: Arc::new(grad_g_x),
            params,
        };
        let (z0, x0, u0) = (vec![0.0; z_dim], vec![0.0; x_dim], vec![0.0; input_dim]);
        let dz = sys.q_eval(&z0, &x0, &u0)?;
        let dx = sys.f_x_eval(&z0, &x0, &u0)?;
        if dz.iter().chain(dx.iter()).any(|v| *v != 0.0) {
            return Err(Error::InvalidArgument(format!(
                "interconnected system '{}': the origin must be an equilibrium",
                sys.name
            )));
        }
        Ok(sys)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn z_dim(&self) -> usize {
        self.z_dim
    }

    pub fn x_dim(&self) -> usize {
        self.x_dim
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// Unmeasured-subsystem vector field `q(z, x, u)`.
    pub fn q_eval(&self, z: &[f64], x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        self.check_dims(z, x, u)?;
        let mut out = vec![0.0; self.z_dim];
        (self.q_dyn)(z, x, u, &mut out);
        Ok(out)
    }

    /// Measured-subsystem vector field `f_x(z, x, u)`.
    pub fn f_x_eval(&self, z: &[f64], x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        self.check_dims(z, x, u)?;
        let mut out = vec![0.0; self.x_dim];
        (self.f_x)(z, x, u, &mut out);
        Ok(out)
    }

    /// Feedback law over the measured part only.
    pub fn g_x_eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.x_dim {
            return Err(Error::DimensionMismatch { expected: self.x_dim, actual: x.len() });
        }
        let mut out = vec![0.0; self.input_dim];
        (self.g_x)(x, &mut out);
        Ok(out)
    }

    /// Row-major `input_dim × x_dim` Jacobian of the feedback law.
    pub fn grad_g_x_eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.x_dim {
            return Err(Error::DimensionMismatch { expected: self.x_dim, actual: x.len() });
        }
        let mut out = vec![0.0; self.input_dim * self.x_dim];
        (self.grad_g_x)(x, &mut out);
        Ok(out)
    }

    /// The auxiliary signal `ξ = ∇g(x)·f_x(z, x, u)` at a frozen point —
    /// the measured-block analogue of [`ControlledSystem::xi`], used by the
    /// certificate falsifier to probe declared `ξ`-bounds pointwise.
    pub fn xi_pointwise(&self, z: &[f64], x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        let fx = self.f_x_eval(z, x, u)?;
        let jac = self.grad_g_x_eval(x)?;
        let mut out = vec![0.0; self.input_dim];
        for i in 0..self.input_dim {
            let row = &jac[i * self.x_dim..(i + 1) * self.x_dim];
            out[i] = row.iter().zip(fx.iter()).map(|(a, b)| a * b).sum();
        }
        Ok(out)
    }

    fn check_dims(&self, z: &[f64], x: &[f64], u: &[f64]) -> Result<()> {
        if z.len() != self.z_dim {
            return Err(Error::DimensionMismatch { expected: self.z_dim, actual: z.len() });
        }
        if x.len() != self.x_dim {
            return Err(Error::DimensionMismatch { expected: self.x_dim, actual: x.len() });
        }
        if u.len() != self.input_dim {
            return Err(Error::DimensionMismatch { expected: self.input_dim, actual: u.len() });
        }
        Ok(())
    }

    /// Stack `[z; x]` into a single [`ControlledSystem`]; `g` reads the `x`
    /// block and `∇g` is zero-padded over the `z` columns.
    pub fn flatten(&self) -> Result<ControlledSystem> {
        let (zd, xd, m) = (self.z_dim, self.x_dim, self.input_dim);
        let q = Arc::clone(&self.q_dyn);
        let fx = Arc::clone(&self.f_x);
        let g = Arc::clone(&self.g_x);
        let grad = Arc::clone(&self.grad_g_x);
        ControlledSystem::new(
            self.name.clone(),
            zd + xd,
            m,
            move |state, u, out| {
                let (z, x) = state.split_at(zd);
                let (dz, dx) = out.split_at_mut(zd);
                q(z, x, u, dz);
                fx(z, x, u, dx);
            },
            move |state, out| g(&state[zd..], out),
            move |state, out| {
                let mut jx = vec![0.0; m * xd];
                grad(&state[zd..], &mut jx);
                out.fill(0.0);
                for i in 0..m {
                    out[i * (zd + xd) + zd..(i + 1) * (zd + xd)]
                        .copy_from_slice(&jx[i * xd..(i + 1) * xd]);
                }
            },
            self.params.clone(),
        )
    }
}

/// Names accepted by [`registry`].
pub fn registered_systems() -> &'static [&'static str] {
    &["paper_sec4", "scalar_demo", "interconnected_demo"]
}

/// Build a registered system by name, applying parameter overrides, and run
/// the registration-time validation (equilibrium + Jacobian checks).
pub fn registry(name: &str, overrides: &Params) -> Result<ControlledSystem> {
    let sys = match name {
        "paper_sec4" => fourth_order_parts(overrides)?.interleaved()?,
        "scalar_demo" => scalar_demo(overrides)?,
        "interconnected_demo" => second_order_parts(overrides)?.flatten()?,
        other => {
            return Err(Error::Config(format!(
                "unknown system '{other}'; registered systems: {:?}",
                registered_systems()
            )))
        }
    };
    sys.validate()?;
    Ok(sys)
}

fn resolve_params(defaults: &[(&str, f64)], overrides: &Params) -> Result<Params> {
    let mut params: Params =
        defaults.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    for (k, v) in overrides {
        if !params.contains_key(k) {
            return Err(Error::Config(format!(
                "unknown parameter '{k}'; this system accepts {:?}",
                defaults.iter().map(|(n, _)| *n).collect::<Vec<_>>()
            )));
        }
        if !v.is_finite() {
            return Err(Error::Config(format!("parameter '{k}' must be finite, got {v}")));
        }
        params.insert(k.clone(), *v);
    }
    Ok(params)
}

/// Scalar integrator `ẋ = u` with `g(x) = −x`.
///
/// Under the held input the loop steps `x ↦ (1 − T)·x` for linear trigger
/// gains `γ̄(s) = s/T`, which makes every interval analytically known — the
/// workhorse for interval-law tests.
fn scalar_demo(overrides: &Params) -> Result<ControlledSystem> {
    let params = resolve_params(&[], overrides)?;
    ControlledSystem::new(
        "scalar_demo",
        1,
        1,
        |_x, u, out| out[0] = u[0],
        |x, out| out[0] = -x[0],
        |_x, out| out[0] = -1.0,
        params,
    )
}

/// The fourth-order demo plant in its split (z, x) form, z = (z₁, z₂),
/// x = (x₁, x₂):
///
/// ```text
/// ż₁ = −z₁³             ẋ₁ = w₁·z₁ + x₂
/// ż₂ = −z₂ + x₁         ẋ₂ = −w₂·x₁·x₂ + x₁ + 3u
/// ```
///
/// with feedback `u = g(x) = −(0.3·v² + 5)·v`, `v = x₂ + 2.5·x₁`, the law
/// produced by the shipped backstepping design. `w₁, w₂ ∈ [0, 1]` are
/// uncertainty parameters (defaults 0.5).
pub fn fourth_order_parts(overrides: &Params) -> Result<InterconnectedSystem> {
    let params = resolve_params(&[("w1", 0.5), ("w2", 0.5)], overrides)?;
    let w1 = params["w1"];
    let w2 = params["w2"];
    InterconnectedSystem::new(
        "paper_sec4",
        2,
        2,
        1,
        move |z, x, _u, out| {
            out[0] = -z[0] * z[0] * z[0];
            out[1] = -z[1] + x[0];
        },
        move |z, x, u, out| {
            out[0] = w1 * z[0] + x[1];
            out[1] = -w2 * x[0] * x[1] + x[0] + 3.0 * u[0];
        },
        |x, out| {
            let v = x[1] + 2.5 * x[0];
            out[0] = -(0.3 * v * v + 5.0) * v;
        },
        |x, out| {
            let v = x[1] + 2.5 * x[0];
            let alpha = -(0.9 * v * v + 5.0);
            out[0] = 2.5 * alpha;
            out[1] = alpha;
        },
        params,
    )
}

impl InterconnectedSystem {
    /// The fourth-order demo's canonical simulation ordering interleaves the
    /// blocks as (z₁, x₁, z₂, x₂) — each unmeasured state next to the
    /// measured state it feeds. Only meaningful for `z_dim = x_dim = 2`.
    fn interleaved(&self) -> Result<ControlledSystem> {
        if self.z_dim != 2 || self.x_dim != 2 {
            return Err(Error::InvalidArgument(
                "interleaved ordering is defined for 2+2 systems only".into(),
            ));
        }
        let m = self.input_dim;
        let q = Arc::clone(&self.q_dyn);
        let fx = Arc::clone(&self.f_x);
        let g = Arc::clone(&self.g_x);
        let grad = Arc::clone(&self.grad_g_x);
        ControlledSystem::new(
            self.name.clone(),
            4,
            m,
            move |state, u, out| {
                let z = [state[0], state[2]];
                let x = [state[1], state[3]];
                let mut dz = [0.0; 2];
                let mut dx = [0.0; 2];
                q(&z, &x, u, &mut dz);
                fx(&z, &x, u, &mut dx);
                out[0] = dz[0];
                out[1] = dx[0];
                out[2] = dz[1];
                out[3] = dx[1];
            },
            move |state, out| g(&[state[1], state[3]], out),
            move |state, out| {
                let mut jx = vec![0.0; m * 2];
                grad(&[state[1], state[3]], &mut jx);
                out.fill(0.0);
                for i in 0..m {
                    out[i * 4 + 1] = jx[i * 2];
                    out[i * 4 + 3] = jx[i * 2 + 1];
                }
            },
            self.params.clone(),
        )
    }
}

/// A minimal two-block interconnection used by the interconnection-analysis
/// examples: `ż = −z + 0.5·x`, `ẋ = −2x + u`, feedback `g(x) = −x`.
pub fn second_order_parts(overrides: &Params) -> Result<InterconnectedSystem> {
    let params = resolve_params(&[], overrides)?;
    InterconnectedSystem::new(
        "interconnected_demo",
        1,
        1,
        1,
        |z, x, _u, out| out[0] = -z[0] + 0.5 * x[0],
        |_z, x, u, out| out[0] = -2.0 * x[0] + u[0],
        |x, out| out[0] = -x[0],
        |_x, out| out[0] = -1.0,
        params,
    )
}
