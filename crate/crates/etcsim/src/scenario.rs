//! Scenario, design, and certificate configuration.
//!
//! Everything the command-line front end runs is described by a small
//! TOML document (or an equivalent built-in): which registered system to
//! integrate, from where, under which trigger gain, and with what solver
//! settings. Gains are written as composable [`GainTemplate`] trees, so a
//! configuration can express the same algebra the library builds in code
//! (`max`, `compose`, `scale` over linear/polynomial/power atoms).
//!
//! Three scenarios ship built in — `paper_sec4`, `scalar_demo`, and
//! `interconnected_demo` — together with TOML files under `scenarios/`
//! that parse to exactly the same configurations (a parity test keeps
//! them honest). Designs for the synthesis route and certificates for the
//! interconnection route follow the same pattern.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::backstepping::{
    fourth_order_design, fourth_order_xi_gains, Envelope, LevelSpec, LevelZCert, LtsDesign,
    XiGains,
};
use crate::dynamics::{registry, ControlledSystem, Params};
use crate::gains::{build_gamma_bar, GainFn, Grid};
use crate::interconnect::{fourth_order_certificate, second_order_certificate, IssCertificate};
use crate::simulator::{simulate, SimOptions, SimResult};
use crate::{Error, Result};

/// A composable description of a class-K∞ gain.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum GainTemplate {
    Zero,
    Identity,
    /// `slope·s`.
    Linear { slope: f64 },
    /// `coeffs[0]·s + coeffs[1]·s² + …` (ascending powers, no constant term).
    Polynomial { coeffs: Vec<f64> },
    /// `s^exponent`.
    Power { exponent: f64 },
    /// `factor·inner(s)`.
    Scale { factor: f64, inner: Box<GainTemplate> },
    /// `outer(inner(s))`.
    Compose { outer: Box<GainTemplate>, inner: Box<GainTemplate> },
    /// Pointwise maximum.
    Max { parts: Vec<GainTemplate> },
}

impl GainTemplate {
    pub fn build(&self) -> Result<GainFn> {
        match self {
            GainTemplate::Zero => Ok(GainFn::zero()),
            GainTemplate::Identity => Ok(GainFn::identity()),
            GainTemplate::Linear { slope } => GainFn::linear(*slope),
            GainTemplate::Polynomial { coeffs } => GainFn::polynomial(coeffs),
            GainTemplate::Power { exponent } => GainFn::power(*exponent),
            GainTemplate::Scale { factor, inner } => inner.build()?.scale(*factor),
            GainTemplate::Compose { outer, inner } => Ok(outer.build()?.compose(&inner.build()?)),
            GainTemplate::Max { parts } => {
                if parts.is_empty() {
                    return Err(Error::Config("max needs at least one part".into()));
                }
                let built: Vec<GainFn> =
                    parts.iter().map(|p| p.build()).collect::<Result<_>>()?;
                GainFn::max_of(&built)
            }
        }
    }
}

/// How the triggering gain `γ̄` derives from the base gain `γ`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, tag = "mode", rename_all = "snake_case")]
pub enum GammaBarSpec {
    /// `γ̄ = γ` — the margin is already folded into the base gain.
    Direct,
    /// `γ̄ = factor·γ` with `factor > 1`.
    Scale { factor: f64 },
    /// `γ̄(s) = eps1·γ(s) + eps2·s` with `eps1 > 1`, `eps2 > 0`.
    Affine { eps1: f64, eps2: f64 },
}

impl GammaBarSpec {
    pub fn apply(&self, gamma: &GainFn) -> Result<GainFn> {
        match self {
            GammaBarSpec::Direct => Ok(gamma.clone()),
            GammaBarSpec::Scale { factor } => {
                if !(*factor > 1.0) {
                    return Err(Error::Config(format!(
                        "margin scale factor must exceed 1, got {factor}"
                    )));
                }
                gamma.scale(*factor)
            }
            GammaBarSpec::Affine { eps1, eps2 } => build_gamma_bar(gamma, *eps1, *eps2),
        }
    }
}

fn default_gamma_bar() -> GammaBarSpec {
    GammaBarSpec::Direct
}

/// Solver settings as they appear in a scenario file; every field is
/// optional and falls back to the library default.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptionsTemplate {
    pub step: f64,
    pub horizon: f64,
    pub localization_tol: f64,
    pub sample_stride: usize,
    pub max_events: usize,
    pub divergence_norm: f64,
    pub strict_dual_r: bool,
}

impl Default for OptionsTemplate {
    fn default() -> Self {
        let o = SimOptions::default();
        OptionsTemplate {
            step: o.step,
            horizon: o.horizon,
            localization_tol: o.localization_tol,
            sample_stride: o.sample_stride,
            max_events: o.max_events,
            divergence_norm: o.divergence_norm,
            strict_dual_r: o.strict_dual_r,
        }
    }
}

impl OptionsTemplate {
    pub fn to_options(&self) -> SimOptions {
        SimOptions {
            step: self.step,
            horizon: self.horizon,
            localization_tol: self.localization_tol,
            sample_stride: self.sample_stride,
            max_events: self.max_events,
            divergence_norm: self.divergence_norm,
            strict_dual_r: self.strict_dual_r,
        }
    }
}

/// One runnable simulation setup.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// A name from the system registry.
    pub system: String,
    #[serde(default)]
    pub description: String,
    pub x0: Vec<f64>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Base trigger gain `γ`.
    pub gamma: GainTemplate,
    #[serde(default = "default_gamma_bar")]
    pub gamma_bar: GammaBarSpec,
    #[serde(default)]
    pub options: OptionsTemplate,
}

impl Scenario {
    /// Build the registered system with this scenario's parameter overrides.
    pub fn build_system(&self) -> Result<ControlledSystem> {
        let params: Params = self.params.clone();
        registry(&self.system, &params)
    }

    /// Build the margin-scaled triggering gain `γ̄`.
    pub fn build_gamma_bar(&self) -> Result<GainFn> {
        let gamma = self.gamma.build()?;
        self.gamma_bar.apply(&gamma)
    }

    /// Full validation: the system must exist and accept the parameters,
    /// the initial state must match its dimension, and the solver options
    /// and gain templates must be well-formed.
    pub fn validate(&self) -> Result<()> {
        let sys = self.build_system()?;
        if self.x0.len() != sys.state_dim() {
            return Err(Error::Config(format!(
                "initial state has {} entries but '{}' has {} states",
                self.x0.len(),
                self.system,
                sys.state_dim()
            )));
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("initial state must be finite".into()));
        }
        self.build_gamma_bar()?;
        self.options.to_options().validate()?;
        Ok(())
    }

    /// Validate, build, and simulate.
    pub fn run(&self) -> Result<SimResult> {
        self.validate()?;
        let sys = self.build_system()?;
        let gamma_bar = self.build_gamma_bar()?;
        simulate(&sys, &gamma_bar, &self.x0, &self.options.to_options())
    }
}

/// Names accepted by [`builtin_scenario`].
pub fn scenario_names() -> &'static [&'static str] {
    &["paper_sec4", "scalar_demo", "interconnected_demo"]
}

/// A built-in scenario, byte-identical to its shipped TOML counterpart.
pub fn builtin_scenario(name: &str) -> Result<Scenario> {
    match name {
        "paper_sec4" => Ok(Scenario {
            name: "paper_sec4".into(),
            system: "paper_sec4".into(),
            description: "fourth-order demo plant under the shipped quintic trigger gain".into(),
            x0: vec![1.0, 1.0, -1.0, 1.0],
            params: BTreeMap::from([("w1".into(), 0.5), ("w2".into(), 0.5)]),
            gamma: GainTemplate::Polynomial { coeffs: vec![70.0, 40.0, 15.0, 3.56, 0.27] },
            gamma_bar: GammaBarSpec::Scale { factor: 1.0101010101010102 },
            options: OptionsTemplate {
                step: 1e-4,
                horizon: 20.0,
                sample_stride: 20,
                ..OptionsTemplate::default()
            },
        }),
        "scalar_demo" => Ok(Scenario {
            name: "scalar_demo".into(),
            system: "scalar_demo".into(),
            description: "scalar integrator with an exactly periodic trigger".into(),
            x0: vec![1.0],
            params: BTreeMap::new(),
            gamma: GainTemplate::Linear { slope: 10.0 },
            gamma_bar: GammaBarSpec::Direct,
            options: OptionsTemplate {
                step: 1e-3,
                horizon: 5.0,
                sample_stride: 10,
                ..OptionsTemplate::default()
            },
        }),
        "interconnected_demo" => Ok(Scenario {
            name: "interconnected_demo".into(),
            system: "interconnected_demo".into(),
            description: "two-block demo plant under its certificate-derived trigger gain".into(),
            x0: vec![0.5, 1.0],
            params: BTreeMap::new(),
            gamma: GainTemplate::Linear { slope: 2.4 },
            gamma_bar: GammaBarSpec::Scale { factor: 1.05 },
            options: OptionsTemplate {
                step: 1e-3,
                horizon: 12.0,
                sample_stride: 10,
                ..OptionsTemplate::default()
            },
        }),
        other => Err(Error::Config(format!(
            "unknown scenario '{other}'; built-ins: {:?}",
            scenario_names()
        ))),
    }
}

/// Parse a scenario from TOML text and validate it.
pub fn scenario_from_toml(text: &str) -> Result<Scenario> {
    let sc: Scenario = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    sc.validate()?;
    Ok(sc)
}

/// Load and validate a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    scenario_from_toml(&text)
}

/// A nonnegative coefficient function in a design file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum EnvelopeTemplate {
    Constant { value: f64 },
    /// `coeffs[0] + coeffs[1]·s + …` (ascending powers, constant included).
    Polynomial { coeffs: Vec<f64> },
}

impl EnvelopeTemplate {
    pub fn build(&self) -> Result<Envelope> {
        match self {
            EnvelopeTemplate::Constant { value } => Envelope::constant(*value),
            EnvelopeTemplate::Polynomial { coeffs } => Envelope::polynomial(coeffs),
        }
    }
}

/// Unmeasured-component gains declared per level.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZCertTemplate {
    pub gamma_z_x: GainTemplate,
    pub gamma_z_z: GainTemplate,
}

/// One synthesis level in a design file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelTemplate {
    pub b: f64,
    pub c: f64,
    pub k: f64,
    pub iota: EnvelopeTemplate,
    pub m_self: EnvelopeTemplate,
    pub m_cross: EnvelopeTemplate,
    pub psi: EnvelopeTemplate,
    pub z_cert: ZCertTemplate,
}

/// Declared auxiliary-signal gains in a design file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XiTemplate {
    pub gamma_xi_z: GainTemplate,
    pub gamma_xi_x: GainTemplate,
    pub gamma_xi_r: GainTemplate,
}

/// A complete synthesis input: levels plus auxiliary-signal gains.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub levels: Vec<LevelTemplate>,
    pub xi: XiTemplate,
}

impl DesignConfig {
    pub fn build(&self) -> Result<(LtsDesign, XiGains)> {
        let mut levels = Vec::with_capacity(self.levels.len());
        for lt in &self.levels {
            levels.push(LevelSpec {
                b: lt.b,
                c: lt.c,
                k: lt.k,
                iota: lt.iota.build()?,
                m_self: lt.m_self.build()?,
                m_cross: lt.m_cross.build()?,
                psi: lt.psi.build()?,
                z_cert: LevelZCert {
                    gamma_z_x: lt.z_cert.gamma_z_x.build()?,
                    gamma_z_z: lt.z_cert.gamma_z_z.build()?,
                },
            });
        }
        let xi = XiGains {
            gamma_xi_z: self.xi.gamma_xi_z.build()?,
            gamma_xi_x: self.xi.gamma_xi_x.build()?,
            gamma_xi_r: self.xi.gamma_xi_r.build()?,
        };
        Ok((LtsDesign { levels }, xi))
    }
}

/// The design shipped for the fourth-order demo plant.
pub fn builtin_design(name: &str) -> Result<(LtsDesign, XiGains)> {
    match name {
        "paper_sec4" => Ok((fourth_order_design(), fourth_order_xi_gains())),
        other => Err(Error::Config(format!(
            "unknown design '{other}'; built-ins: [\"paper_sec4\"]"
        ))),
    }
}

pub fn design_from_toml(text: &str) -> Result<DesignConfig> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

pub fn load_design(path: &Path) -> Result<DesignConfig> {
    let text = std::fs::read_to_string(path)?;
    design_from_toml(&text)
}

/// Declared block and auxiliary gains in a certificate file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub gamma_z_x: GainTemplate,
    pub gamma_z_r: GainTemplate,
    pub gamma_x_z: GainTemplate,
    pub gamma_x_r: GainTemplate,
    pub gamma_xi_z: GainTemplate,
    pub gamma_xi_x: GainTemplate,
    pub gamma_xi_r: GainTemplate,
    #[serde(default)]
    pub beta_note: String,
}

impl CertificateConfig {
    pub fn build(&self) -> Result<IssCertificate> {
        Ok(IssCertificate {
            gamma_z_x: self.gamma_z_x.build()?,
            gamma_z_r: self.gamma_z_r.build()?,
            gamma_x_z: self.gamma_x_z.build()?,
            gamma_x_r: self.gamma_x_r.build()?,
            gamma_xi_z: self.gamma_xi_z.build()?,
            gamma_xi_x: self.gamma_xi_x.build()?,
            gamma_xi_r: self.gamma_xi_r.build()?,
            beta_note: self.beta_note.clone(),
        })
    }
}

/// Certificates shipped with the demo plants.
pub fn builtin_certificate(name: &str) -> Result<IssCertificate> {
    match name {
        "paper_sec4" => Ok(fourth_order_certificate()),
        "interconnected_demo" => Ok(second_order_certificate()),
        other => Err(Error::Config(format!(
            "unknown certificate '{other}'; built-ins: [\"paper_sec4\", \"interconnected_demo\"]"
        ))),
    }
}

pub fn certificate_from_toml(text: &str) -> Result<CertificateConfig> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

pub fn load_certificate(path: &Path) -> Result<CertificateConfig> {
    let text = std::fs::read_to_string(path)?;
    certificate_from_toml(&text)
}

/// Grid settings in analysis configs.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        let g = Grid::default();
        GridSpec { min: g.min, max: g.max, points: g.points }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.min, self.max, self.points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backstepping::synthesize;
    use crate::trigger::predicted_limit_interval;

    fn workspace_file(rel: &str) -> std::path::PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
    }

    #[test]
    fn builtin_scenarios_validate_and_carry_the_right_settling_intervals() {
        for name in scenario_names() {
            let sc = builtin_scenario(name).unwrap();
            sc.validate().unwrap_or_else(|e| panic!("builtin {name} invalid: {e}"));
        }
        let quintic = builtin_scenario("paper_sec4").unwrap();
        let gbar = quintic.build_gamma_bar().unwrap();
        let t = predicted_limit_interval(&gbar).unwrap().expect("finite slope");
        assert!((t - 0.99 / 70.0).abs() < 1e-15, "quintic settling interval {t}");
        let scalar = builtin_scenario("scalar_demo").unwrap();
        let t = predicted_limit_interval(&scalar.build_gamma_bar().unwrap()).unwrap().unwrap();
        assert!((t - 0.1).abs() < 1e-15, "scalar settling interval {t}");
        let demo = builtin_scenario("interconnected_demo").unwrap();
        let t = predicted_limit_interval(&demo.build_gamma_bar().unwrap()).unwrap().unwrap();
        assert!((t - 1.0 / 2.52).abs() < 1e-12, "demo settling interval {t}");
    }

    #[test]
    fn gain_templates_build_the_full_algebra() {
        let tpl = GainTemplate::Max {
            parts: vec![
                GainTemplate::Compose {
                    outer: Box::new(GainTemplate::Linear { slope: 2.0 }),
                    inner: Box::new(GainTemplate::Polynomial { coeffs: vec![1.0, 0.5] }),
                },
                GainTemplate::Scale {
                    factor: 3.0,
                    inner: Box::new(GainTemplate::Power { exponent: 2.0 }),
                },
            ],
        };
        let g = tpl.build().unwrap();
        // At s = 1: max{2·(1 + 0.5), 3·1} = 3; at s = 2: max{2·3, 12} = 12.
        assert!((g.eval(1.0).unwrap() - 3.0).abs() < 1e-12);
        assert!((g.eval(2.0).unwrap() - 12.0).abs() < 1e-12);
        assert!(matches!(
            GainTemplate::Max { parts: vec![] }.build(),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn malformed_scenarios_are_config_errors() {
        // Unknown field.
        let err = scenario_from_toml(
            r#"
            name = "x"
            system = "scalar_demo"
            x0 = [1.0]
            gamma = { kind = "linear", slope = 1.0 }
            surprise = 3
            "#,
        )
        .unwrap_err();
        assert_eq!(err.kind(), "config", "unknown field: {err}");
        // Missing gamma.
        let err = scenario_from_toml(
            r#"
            name = "x"
            system = "scalar_demo"
            x0 = [1.0]
            "#,
        )
        .unwrap_err();
        assert_eq!(err.kind(), "config", "missing field: {err}");
        // Wrong state dimension.
        let err = scenario_from_toml(
            r#"
            name = "x"
            system = "scalar_demo"
            x0 = [1.0, 2.0]
            gamma = { kind = "linear", slope = 1.0 }
            "#,
        )
        .unwrap_err();
        assert_eq!(err.kind(), "config");
        assert!(err.to_string().contains("states"), "got: {err}");
        // Unknown system.
        let err = scenario_from_toml(
            r#"
            name = "x"
            system = "mystery"
            x0 = [1.0]
            gamma = { kind = "linear", slope = 1.0 }
            "#,
        )
        .unwrap_err();
        assert_eq!(err.kind(), "config");
        // Margin factor at or below 1.
        let err = scenario_from_toml(
            r#"
            name = "x"
            system = "scalar_demo"
            x0 = [1.0]
            gamma = { kind = "linear", slope = 1.0 }
            gamma_bar = { mode = "scale", factor = 1.0 }
            "#,
        )
        .unwrap_err();
        assert_eq!(err.kind(), "config");
        // Unknown parameter for the system.
        let err = scenario_from_toml(
            r#"
            name = "x"
            system = "paper_sec4"
            x0 = [1.0, 1.0, -1.0, 1.0]
            gamma = { kind = "linear", slope = 1.0 }
            [params]
            w9 = 0.5
            "#,
        )
        .unwrap_err();
        assert_eq!(err.kind(), "config");
    }

    #[test]
    fn shipped_scenario_files_parse_to_the_builtins() {
        for name in scenario_names() {
            let path = workspace_file(&format!("scenarios/{name}.toml"));
            let parsed = load_scenario(&path)
                .unwrap_or_else(|e| panic!("shipped scenario {name} failed to load: {e}"));
            let builtin = builtin_scenario(name).unwrap();
            assert_eq!(parsed, builtin, "shipped {name}.toml drifted from the builtin");
        }
    }

    #[test]
    fn shipped_design_file_parses_to_the_builtin() {
        let cfg = load_design(&workspace_file("designs/paper_sec4_design.toml")).unwrap();
        let (design, xi) = cfg.build().unwrap();
        let (builtin, builtin_xi) = builtin_design("paper_sec4").unwrap();
        assert_eq!(design.levels.len(), builtin.levels.len());
        // Constants are data; compare them directly…
        for (a, b) in design.levels.iter().zip(builtin.levels.iter()) {
            assert_eq!((a.b, a.c, a.k), (b.b, b.c, b.k));
        }
        // …and compare the function-valued parts through the synthesis
        // output and gain evaluations.
        let grid = Grid::default();
        let ra = synthesize(&design, &grid).unwrap();
        let rb = synthesize(&builtin, &grid).unwrap();
        for s in [1e-6, 0.037, 1.0, 42.0] {
            assert_eq!(ra.gamma_z_chain.eval_raw(s), rb.gamma_z_chain.eval_raw(s));
            assert_eq!(ra.gamma_x_chain.eval_raw(s), rb.gamma_x_chain.eval_raw(s));
            assert_eq!(ra.controllers[1].eval(s), rb.controllers[1].eval(s));
            assert_eq!(xi.gamma_xi_x.eval_raw(s), builtin_xi.gamma_xi_x.eval_raw(s));
            assert_eq!(xi.gamma_xi_z.eval_raw(s), builtin_xi.gamma_xi_z.eval_raw(s));
            assert_eq!(xi.gamma_xi_r.eval_raw(s), builtin_xi.gamma_xi_r.eval_raw(s));
        }
    }

    #[test]
    fn certificate_config_builds_and_feeds_the_analysis() {
        let cfg = certificate_from_toml(
            r#"
            name = "demo"
            gamma_z_x = { kind = "linear", slope = 0.6 }
            gamma_z_r = { kind = "zero" }
            gamma_x_z = { kind = "zero" }
            gamma_x_r = { kind = "linear", slope = 0.4 }
            gamma_xi_z = { kind = "zero" }
            gamma_xi_x = { kind = "linear", slope = 6.0 }
            gamma_xi_r = { kind = "linear", slope = 2.0 }
            "#,
        )
        .unwrap();
        let cert = cfg.build().unwrap();
        let rep = crate::interconnect::trigger_gain(&cert, &Grid::default()).unwrap();
        let slope = rep.gamma.analytic_slope_at_zero().expect("analytic");
        assert!((slope - 2.4).abs() < 1e-12, "slope {slope}");
        // The builtin by the same name matches the library constructor.
        let builtin = builtin_certificate("interconnected_demo").unwrap();
        for s in [0.1, 1.0, 10.0] {
            assert_eq!(cert.gamma_z_x.eval_raw(s), builtin.gamma_z_x.eval_raw(s));
        }
    }

    #[test]
    fn scalar_scenario_runs_with_exactly_periodic_events() {
        let mut sc = builtin_scenario("scalar_demo").unwrap();
        sc.options.horizon = 0.55;
        let res = sc.run().unwrap();
        assert_eq!(res.summary.event_count, 5, "events in 0.55 s at period 0.1");
        for ev in &res.events {
            assert!((ev.interval - 0.1).abs() < 1e-7, "interval {}", ev.interval);
        }
    }

    #[test]
    fn grid_spec_round_trips_and_rejects_nonsense() {
        let spec = GridSpec::default();
        let grid = spec.build().unwrap();
        assert_eq!(grid.points, 200);
        let bad = GridSpec { min: 1.0, max: 0.5, points: 10 };
        assert!(bad.build().is_err());
    }
}
