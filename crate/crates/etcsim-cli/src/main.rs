//! Scenario-driven command line for the event-triggered control toolkit.
//!
//! `simulate` runs a scenario (builtin name, TOML file, or a directory of
//! TOML files) and writes time-series CSV, event CSV, and a key=value
//! summary; `synthesize` runs the recursive controller synthesis from a
//! design config and reports margins and chain slopes; `analyze` reports
//! interval predictions for a scenario's triggering gain.
//!
//! Exit status: 0 on success; 1 when a validated configuration fails
//! during the run (divergence, event overflow, a failed synthesis margin);
//! 2 when the command line or a configuration cannot be parsed or
//! validated. Every failure prints one machine-readable line on stderr:
//! `error kind=<token> msg="<message>"`.

use std::fs;
use std::fs::File;
use std::io::Write as IoWrite;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};

use etcsim::backstepping::{synthesize, to_certificate, SynthesisReport, XiGains};
use etcsim::gains::{GainFn, Grid};
use etcsim::interconnect::trigger_gain;
use etcsim::scenario::{
    builtin_design, builtin_scenario, load_design, load_scenario, scenario_names, Scenario,
};
use etcsim::simulator::{write_events_csv, write_summary, write_timeseries_csv, zeno_check, SimResult};
use etcsim::trigger::{interval_upper_bound, predicted_limit_interval, IntervalBound};
use etcsim::Error;

#[derive(Parser)]
#[command(
    name = "etcsim",
    version,
    about = "Event-triggered control: simulate scenarios, synthesize gain chains, analyze trigger laws"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write CSV + summary artifacts
    Simulate(SimulateArgs),
    /// Run the recursive controller synthesis and report gains and margins
    Synthesize(SynthesizeArgs),
    /// Report interval predictions for a scenario's triggering gain
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Builtin scenario name, scenario TOML file, or directory of TOML files
    scenario: String,
    /// Directory for artifacts (created if missing)
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override a scenario field (repeatable): params.<name>=<v>,
    /// options.<field>=<v>, or x0.<index>=<v>
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads when the scenario argument is a directory
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct SynthesizeArgs {
    /// Builtin design name or design TOML file
    design: String,
    /// Directory for the report file (stdout only when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Lower end of the validation grid
    #[arg(long, default_value_t = Grid::default().min)]
    grid_min: f64,
    /// Upper end of the validation grid
    #[arg(long, default_value_t = Grid::default().max)]
    grid_max: f64,
    /// Number of geometric grid points
    #[arg(long, default_value_t = Grid::default().points)]
    grid_points: usize,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Builtin scenario name or scenario TOML file
    scenario: String,
    /// Directory for the report file (stdout only when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a scenario field (repeatable), as in `simulate`
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

/// One failure, carrying the exit status owed by the phase that raised
/// it: 2 for anything raised while loading or validating configuration,
/// 1 for anything raised by the run itself.
struct Failure {
    status: u8,
    kind: String,
    msg: String,
}

impl Failure {
    fn parse(e: Error) -> Self {
        Failure { status: 2, kind: e.kind().to_string(), msg: e.to_string() }
    }

    fn run(e: Error) -> Self {
        Failure { status: 1, kind: e.kind().to_string(), msg: e.to_string() }
    }

    fn zeno(msg: String) -> Self {
        Failure { status: 1, kind: "zeno".to_string(), msg }
    }

    fn report(&self) {
        eprintln!("error kind={} msg={:?}", self.kind, self.msg);
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            let first = e.to_string().lines().next().unwrap_or("bad arguments").to_string();
            Failure { status: 2, kind: "usage".to_string(), msg: first }.report();
            return ExitCode::from(2);
        }
    };
    let outcome = match cli.command {
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Synthesize(args) => cmd_synthesize(&args),
        Command::Analyze(args) => cmd_analyze(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            f.report();
            ExitCode::from(f.status)
        }
    }
}

/// Full precision so determinism checks on the artifacts are meaningful.
fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Slope at zero as a report token: a number, `inf`, or `unsettled` when
/// the numeric estimator cannot classify the trend.
fn slope_token(g: &GainFn) -> String {
    match g.slope_at_zero() {
        Ok(v) if v.is_finite() => fmt(v),
        Ok(_) => "inf".to_string(),
        Err(_) => "unsettled".to_string(),
    }
}

/// File-name stem for artifacts: the file stem when the input was a path,
/// the builtin name otherwise, with anything exotic mapped to '_'.
fn sanitize_stem(raw: &str) -> String {
    let cleaned: String = raw
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    if cleaned.is_empty() {
        "scenario".to_string()
    } else {
        cleaned
    }
}

/// Resolve a scenario argument to (artifact stem, scenario): an existing
/// file wins, then the builtin registry.
fn resolve_scenario(arg: &str) -> Result<(String, Scenario), Error> {
    let path = Path::new(arg);
    if path.is_file() {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
        return Ok((sanitize_stem(stem), load_scenario(path)?));
    }
    if scenario_names().contains(&arg) {
        return Ok((sanitize_stem(arg), builtin_scenario(arg)?));
    }
    Err(Error::Config(format!(
        "'{arg}' is neither a scenario file nor a builtin (builtins: {})",
        scenario_names().join(", ")
    )))
}

/// Apply `--set key=value` overrides onto a loaded scenario.
fn apply_overrides(sc: &mut Scenario, sets: &[String]) -> Result<(), Error> {
    for spec in sets {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{spec}' is not of the form key=value")))?;
        let float = || -> Result<f64, Error> {
            value
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("override '{key}' needs a number, got '{value}'")))
        };
        let integer = || -> Result<usize, Error> {
            value
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("override '{key}' needs an integer, got '{value}'")))
        };
        match key.split_once('.') {
            Some(("params", name)) => {
                sc.params.insert(name.to_string(), float()?);
            }
            Some(("options", field)) => match field {
                "step" => sc.options.step = float()?,
                "horizon" => sc.options.horizon = float()?,
                "localization_tol" => sc.options.localization_tol = float()?,
                "divergence_norm" => sc.options.divergence_norm = float()?,
                "sample_stride" => sc.options.sample_stride = integer()?,
                "max_events" => sc.options.max_events = integer()?,
                "strict_dual_r" => {
                    sc.options.strict_dual_r = value.parse::<bool>().map_err(|_| {
                        Error::Config(format!("override '{key}' needs true/false, got '{value}'"))
                    })?
                }
                other => {
                    return Err(Error::Config(format!("unknown options override '{other}'")));
                }
            },
            Some(("x0", index)) => {
                let i: usize = index
                    .parse()
                    .map_err(|_| Error::Config(format!("bad x0 index in override '{key}'")))?;
                if i >= sc.x0.len() {
                    return Err(Error::Config(format!(
                        "x0 override index {i} out of range (state has {} entries)",
                        sc.x0.len()
                    )));
                }
                sc.x0[i] = float()?;
            }
            _ => {
                return Err(Error::Config(format!(
                    "unknown override key '{key}' (use params.*, options.*, or x0.*)"
                )));
            }
        }
    }
    Ok(())
}

/// Run one validated scenario and write its three artifacts. Returns the
/// summary text (also written to `<stem>_summary.txt`).
fn run_and_write(sc: &Scenario, stem: &str, out_dir: &Path) -> Result<(String, SimResult), Failure> {
    let res = sc.run().map_err(Failure::run)?;
    fs::create_dir_all(out_dir)
        .map_err(|e| Failure::run(Error::Io(format!("creating {}: {e}", out_dir.display()))))?;
    let write_file = |name: String, body: &dyn Fn(&mut File) -> Result<(), Error>| {
        let path = out_dir.join(name);
        let mut f = File::create(&path)
            .map_err(|e| Failure::run(Error::Io(format!("creating {}: {e}", path.display()))))?;
        body(&mut f).map_err(Failure::run)
    };
    write_file(format!("{stem}_timeseries.csv"), &|f| write_timeseries_csv(&res, f))?;
    write_file(format!("{stem}_events.csv"), &|f| write_events_csv(&res, f))?;
    let prefix = vec![
        ("name".to_string(), sc.name.clone()),
        ("system".to_string(), sc.system.clone()),
    ];
    let mut summary = Vec::new();
    write_summary(&res.summary, &prefix, &mut summary).map_err(Failure::run)?;
    let text = String::from_utf8(summary)
        .map_err(|e| Failure::run(Error::Io(format!("summary is not UTF-8: {e}"))))?;
    write_file(format!("{stem}_summary.txt"), &|f| {
        f.write_all(text.as_bytes()).map_err(|e| Error::Io(e.to_string()))
    })?;
    Ok((text, res))
}

/// Fail (status 1) when the inter-event intervals show a sustained
/// shrinking trend: the artifacts are already on disk for inspection.
fn check_zeno(res: &SimResult) -> Result<(), Failure> {
    let report = zeno_check(res);
    if report.shrinking_trend {
        return Err(Failure::zeno(format!(
            "inter-event intervals are trending toward zero: {}",
            report.note
        )));
    }
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let path = Path::new(&args.scenario);
    if path.is_dir() {
        return cmd_simulate_batch(path, args);
    }
    let (stem, mut sc) = resolve_scenario(&args.scenario).map_err(Failure::parse)?;
    apply_overrides(&mut sc, &args.set).map_err(Failure::parse)?;
    sc.validate().map_err(Failure::parse)?;
    let (summary, res) = run_and_write(&sc, &stem, &args.out)?;
    print!("{summary}");
    check_zeno(&res)
}

/// Batch mode: every `*.toml` in the directory, shared-index worker pool,
/// deterministic report order. Exit status is the worst phase seen.
fn cmd_simulate_batch(dir: &Path, args: &SimulateArgs) -> Result<(), Failure> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Failure::parse(Error::Io(format!("reading {}: {e}", dir.display()))))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|ext| ext == "toml"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Failure::parse(Error::Config(format!(
            "directory {} contains no .toml scenarios",
            dir.display()
        ))));
    }
    let jobs = args.jobs.max(1).min(files.len());
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<(usize, Result<String, Failure>)>> = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= files.len() {
                    break;
                }
                let outcome = (|| {
                    let (stem, mut sc) =
                        resolve_scenario(files[i].to_str().unwrap_or_default()).map_err(Failure::parse)?;
                    apply_overrides(&mut sc, &args.set).map_err(Failure::parse)?;
                    sc.validate().map_err(Failure::parse)?;
                    let (summary, res) = run_and_write(&sc, &stem, &args.out)?;
                    check_zeno(&res)?;
                    Ok(summary)
                })();
                results.lock().expect("result collector poisoned").push((i, outcome));
            });
        }
    });
    let mut collected = results.into_inner().expect("result collector poisoned");
    collected.sort_by_key(|(i, _)| *i);
    let mut worst: u8 = 0;
    for (i, outcome) in collected {
        match outcome {
            Ok(summary) => {
                println!("# {}", files[i].display());
                print!("{summary}");
            }
            Err(f) => {
                eprintln!("# {}", files[i].display());
                f.report();
                worst = worst.max(f.status);
            }
        }
    }
    match worst {
        0 => Ok(()),
        status => Err(Failure {
            status,
            kind: "batch".to_string(),
            msg: "one or more scenarios failed (see lines above)".to_string(),
        }),
    }
}

/// Render the synthesis report as key=value lines: per-level slopes and
/// margins, the composite chains, and the trigger gain they induce.
fn render_synthesis(name: &str, report: &SynthesisReport, xi: &XiGains, grid: &Grid) -> Result<String, Failure> {
    let mut text = String::new();
    text.push_str(&format!("design={name}\n"));
    text.push_str(&format!("levels={}\n", report.levels.len()));
    for vc in &report.controllers {
        text.push_str(&format!(
            "controller_{}_at_1={}\n",
            vc.level(),
            fmt(vc.eval(1.0))
        ));
    }
    for lv in &report.levels {
        text.push_str(&format!(
            "level_{}_gamma_x_z_slope={}\n",
            lv.level,
            slope_token(&lv.gamma_x_z)
        ));
        text.push_str(&format!(
            "level_{}_gamma_x_x_slope={}\n",
            lv.level,
            slope_token(&lv.gamma_x_x)
        ));
        text.push_str(&format!(
            "level_{}_gamma_x_next_slope={}\n",
            lv.level,
            slope_token(&lv.gamma_x_next)
        ));
        if let Some(zx) = &lv.gamma_zx {
            text.push_str(&format!("level_{}_gamma_zx_slope={}\n", lv.level, slope_token(zx)));
        }
        text.push_str(&format!(
            "level_{}_psi_margin={} at={}\n",
            lv.level,
            fmt(lv.psi_margin.margin),
            fmt(lv.psi_margin.at)
        ));
        if let Some(side) = lv.side {
            text.push_str(&format!(
                "level_{}_x_loop_margin={}\n",
                lv.level,
                fmt(side.x_loop)
            ));
            text.push_str(&format!(
                "level_{}_z_loop_margin={}\n",
                lv.level,
                fmt(side.z_loop)
            ));
        }
    }
    text.push_str(&format!("z_chain_slope={}\n", slope_token(&report.gamma_z_chain)));
    text.push_str(&format!("x_chain_slope={}\n", slope_token(&report.gamma_x_chain)));
    text.push_str(&format!("x_contraction_max={}\n", fmt(report.x_contraction_max)));
    let cert = to_certificate(report, xi);
    let trig = trigger_gain(&cert, grid).map_err(Failure::run)?;
    text.push_str(&format!(
        "trigger_gain_slope={}\n",
        if trig.finite_slope { fmt(trig.slope_at_zero) } else { "inf".to_string() }
    ));
    match predicted_limit_interval(&trig.gamma).map_err(Failure::run)? {
        Some(t) => text.push_str(&format!("limit_interval_unscaled={}\n", fmt(t))),
        None => text.push_str("limit_interval_unscaled=unbounded\n"),
    }
    Ok(text)
}

fn cmd_synthesize(args: &SynthesizeArgs) -> Result<(), Failure> {
    let path = Path::new(&args.design);
    let (stem, design, xi) = if path.is_file() {
        let cfg = load_design(path).map_err(Failure::parse)?;
        let (design, xi) = cfg.build().map_err(Failure::parse)?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("design");
        (sanitize_stem(stem), design, xi)
    } else {
        let (design, xi) = builtin_design(&args.design).map_err(Failure::parse)?;
        (sanitize_stem(&args.design), design, xi)
    };
    let grid = Grid::new(args.grid_min, args.grid_max, args.grid_points).map_err(Failure::parse)?;
    let report = synthesize(&design, &grid).map_err(Failure::run)?;
    let text = render_synthesis(&stem, &report, &xi, &grid)?;
    print!("{text}");
    if let Some(out) = &args.out {
        fs::create_dir_all(out)
            .map_err(|e| Failure::run(Error::Io(format!("creating {}: {e}", out.display()))))?;
        let path = out.join(format!("{stem}_synthesis.txt"));
        fs::write(&path, &text)
            .map_err(|e| Failure::run(Error::Io(format!("writing {}: {e}", path.display()))))?;
    }
    Ok(())
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), Failure> {
    let (stem, mut sc) = resolve_scenario(&args.scenario).map_err(Failure::parse)?;
    apply_overrides(&mut sc, &args.set).map_err(Failure::parse)?;
    sc.validate().map_err(Failure::parse)?;
    let gamma_bar = sc.build_gamma_bar().map_err(Failure::parse)?;
    let mut text = String::new();
    text.push_str(&format!("scenario={}\n", sc.name));
    text.push_str(&format!("system={}\n", sc.system));
    text.push_str(&format!("gamma_bar_slope={}\n", slope_token(&gamma_bar)));
    match predicted_limit_interval(&gamma_bar).map_err(Failure::run)? {
        Some(t) => text.push_str(&format!("predicted_limit_interval={}\n", fmt(t))),
        None => text.push_str("predicted_limit_interval=unbounded\n"),
    }
    for r_sup in [1e-2, 1e-1, 1e0, 1e1] {
        let cap = interval_upper_bound(&gamma_bar, r_sup).map_err(Failure::run)?;
        let token = match cap {
            IntervalBound::Bounded(t) => fmt(t),
            IntervalBound::Unbounded => "unbounded".to_string(),
        };
        text.push_str(&format!("interval_cap_r_sup_{r_sup:e}={token}\n"));
    }
    print!("{text}");
    if let Some(out) = &args.out {
        fs::create_dir_all(out)
            .map_err(|e| Failure::run(Error::Io(format!("creating {}: {e}", out.display()))))?;
        let path = out.join(format!("{stem}_analysis.txt"));
        fs::write(&path, &text)
            .map_err(|e| Failure::run(Error::Io(format!("writing {}: {e}", path.display()))))?;
    }
    Ok(())
}
