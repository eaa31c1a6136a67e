//! Command-line front end.
//!
//! Exit codes: 0 success, 2 domain or configuration error, 3 tolerance or
//! convergence failure, 64 unknown subcommand, 66 unreadable config or
//! missing artifacts, 74 output write failure.

use std::f64::consts::{FRAC_1_PI, PI};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::export::{curve_table, json_number, roots_table, snapshot_table, trajectory_table, Table};
use crate::frequency::{
    beta_sup, crossing_omega0, m_of_q, nyquist_curve, popov_axis_crossings, popov_curve, transfer, transfer_nloc_series,
    Loop, OmegaGrid, PopovTable,
};
use crate::kernel::{kernel_a, kernel_as_prime, laplace_a, shifted_kernel_as, InitialData, LaplaceMode};
use crate::pde::{integrate, SimConfig, SpectralState, Stepper};
use crate::series::{log_space, SeriesPolicy};
use crate::spectrum::{linearized_eigenvalues, lyapunov_threshold, lyapunov_verdict, SearchRegion};
use crate::volterra::{
    decay_diagnostic, energy_ledger, mean_identity_residual, solve_volterra, tail_oscillation, VolterraProblem,
    DEFAULT_DECAY_THRESHOLD, DEFAULT_TAIL_FRACTION,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_TOLERANCE: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_NO_INPUT: i32 = 66;
pub const EXIT_IO: i32 = 74;

pub const SUBCOMMANDS: [&str; 12] = [
    "kernel",
    "transfer",
    "nyquist",
    "popov",
    "beta0",
    "mq",
    "volterra",
    "simulate",
    "lyapunov",
    "eigenvalues",
    "sweep",
    "report",
];

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain { .. } | Error::Config(_) | Error::NoSignChange { .. } | Error::NotACrossing { .. } => EXIT_DOMAIN,
        Error::Tolerance { .. } | Error::NewtonFailed { .. } | Error::NonFinite { .. } => EXIT_TOLERANCE,
        Error::MissingArtifact(_) => EXIT_NO_INPUT,
    }
}

#[derive(Debug, Parser)]
#[command(name = "thermostat", version, about = "Stability analysis of the nonlocal thermostat heat equation")]
#[command(args_override_self = true)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct GlobalArgs {
    /// Flat JSON file with a `subcommand` key and parameters; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Artifact path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Tolerance for root finding and residual checks.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    Nloc,
    Loc,
}

impl From<Which> for Loop {
    fn from(w: Which) -> Self {
        match w {
            Which::Nloc => Loop::Nonlocal,
            Which::Loc => Loop::Local,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum StepperArg {
    ImexEuler,
    ImexTrapezoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Observable {
    TailSup,
    Decayed,
    SignChanges,
    W1Final,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Boundary kernel a, a_s and a_s' on a log grid.
    #[command(args_override_self = true)]
    Kernel(KernelArgs),
    /// Transfer function at one complex point.
    #[command(args_override_self = true)]
    Transfer(TransferArgs),
    /// Nyquist curve with the detour around s = 0.
    #[command(args_override_self = true)]
    Nyquist(NyquistArgs),
    /// Popov curve and its real-axis crossings.
    #[command(args_override_self = true)]
    Popov(CurveArgs),
    /// Crossing frequency and critical gain.
    #[command(args_override_self = true)]
    Beta0(Beta0Args),
    /// M(q) on a log grid and its maximiser.
    #[command(args_override_self = true)]
    Mq(MqArgs),
    /// Boundary-trace integral equation with the energy ledger.
    #[command(args_override_self = true)]
    Volterra(VolterraArgs),
    /// Spectral Galerkin simulation of the full problem.
    #[command(args_override_self = true)]
    Simulate(SimulateArgs),
    /// Fixed points of the Lyapunov characteristic equation.
    #[command(args_override_self = true)]
    Lyapunov(LyapunovArgs),
    /// Roots of the linearised characteristic equation.
    #[command(args_override_self = true)]
    Eigenvalues(EigenArgs),
    /// Integral-equation runs over a range of gains.
    #[command(args_override_self = true)]
    Sweep(SweepArgs),
    /// Aggregated JSON report.
    #[command(args_override_self = true)]
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
struct InitialArgs {
    /// Spatial mean of the initial profile.
    #[arg(long, default_value_t = 0.0)]
    mean: f64,
    /// Cosine modes as `k:amp` pairs separated by commas.
    #[arg(long, default_value = "1:1")]
    cos: String,
}

impl InitialArgs {
    fn parse(&self) -> Result<InitialData> {
        let mut terms = Vec::new();
        for part in self.cos.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, a) = part
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("bad cosine term '{part}', expected k:amp")))?;
            let k: usize = k.trim().parse().map_err(|_| Error::Config(format!("bad mode index '{k}'")))?;
            let a: f64 = a.trim().parse().map_err(|_| Error::Config(format!("bad amplitude '{a}'")))?;
            terms.push((k, a));
        }
        Ok(InitialData::from_cosines(self.mean, &terms))
    }
}

#[derive(Debug, Clone, Args)]
struct KernelArgs {
    #[arg(long, default_value_t = 1e-4)]
    t_min: f64,
    #[arg(long, default_value_t = 50.0)]
    t_max: f64,
    #[arg(long, default_value_t = 200)]
    n: usize,
}

#[derive(Debug, Clone, Args)]
struct TransferArgs {
    #[arg(long, default_value_t = 0.0)]
    re: f64,
    #[arg(long, default_value_t = 1.0)]
    im: f64,
    #[arg(long, value_enum, default_value_t = Which::Nloc)]
    which: Which,
}

#[derive(Debug, Clone, Args)]
struct NyquistArgs {
    #[arg(long, default_value_t = 0.2)]
    omega_min: f64,
    #[arg(long, default_value_t = 50.0)]
    omega_max: f64,
    #[arg(long, default_value_t = 2000)]
    n: usize,
    /// Detour radius; defaults to omega-min.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, value_enum, default_value_t = Which::Nloc)]
    which: Which,
}

#[derive(Debug, Clone, Args)]
struct CurveArgs {
    #[arg(long, default_value_t = 0.2)]
    omega_min: f64,
    #[arg(long, default_value_t = 50.0)]
    omega_max: f64,
    #[arg(long, default_value_t = 2000)]
    n: usize,
}

#[derive(Debug, Clone, Args)]
struct Beta0Args {
    #[arg(long, default_value_t = 0.5)]
    lo: f64,
    #[arg(long, default_value_t = 2.0)]
    hi: f64,
}

#[derive(Debug, Clone, Args)]
struct GridArgs {
    #[arg(long, default_value_t = 1e-3)]
    grid_min: f64,
    #[arg(long, default_value_t = 1e4)]
    grid_max: f64,
    #[arg(long, default_value_t = 2000)]
    grid_n: usize,
}

impl GridArgs {
    fn grid(&self) -> OmegaGrid {
        OmegaGrid {
            min: self.grid_min,
            max: self.grid_max,
            n: self.grid_n,
            ..OmegaGrid::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
struct MqArgs {
    #[arg(long, default_value_t = 1e-3)]
    q_min: f64,
    #[arg(long, default_value_t = 1e3)]
    q_max: f64,
    #[arg(long, default_value_t = 121)]
    n: usize,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Debug, Clone, Args)]
struct VolterraArgs {
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 40.0)]
    horizon: f64,
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    /// Popov multiplier used by the energy ledger.
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    #[arg(long, default_value_t = DEFAULT_DECAY_THRESHOLD)]
    threshold: f64,
    #[arg(long, default_value_t = DEFAULT_TAIL_FRACTION)]
    tail_fraction: f64,
    #[command(flatten)]
    initial: InitialArgs,
}

#[derive(Debug, Clone, Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 20.0)]
    horizon: f64,
    #[arg(long, default_value_t = 0.005)]
    dt: f64,
    #[arg(long, default_value_t = 64)]
    k: usize,
    #[arg(long, value_enum, default_value_t = StepperArg::ImexTrapezoid)]
    stepper: StepperArg,
    /// Steps between snapshots.
    #[arg(long, default_value_t = 1)]
    every: usize,
    /// Also solve the integral equation and report the trace difference.
    #[arg(long)]
    compare_volterra: bool,
    #[command(flatten)]
    initial: InitialArgs,
}

#[derive(Debug, Clone, Args)]
struct LyapunovArgs {
    /// Single α; without it a scan over [alpha-min, alpha-max] is emitted.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    alpha_min: f64,
    #[arg(long, default_value_t = 2.0)]
    alpha_max: f64,
    #[arg(long, default_value_t = 40)]
    n: usize,
}

#[derive(Debug, Clone, Args)]
struct EigenArgs {
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
    re_min: f64,
    #[arg(long, default_value_t = 50.0, allow_hyphen_values = true)]
    re_max: f64,
    #[arg(long, default_value_t = -50.0, allow_hyphen_values = true)]
    im_min: f64,
    #[arg(long, default_value_t = 50.0, allow_hyphen_values = true)]
    im_max: f64,
}

#[derive(Debug, Clone, Args)]
struct SweepArgs {
    /// Gain range `start:stop:step`, endpoints included.
    #[arg(long, default_value = "0.5:7:0.5")]
    beta: String,
    #[arg(long, value_enum, default_value_t = Observable::TailSup)]
    observable: Observable,
    #[arg(long, default_value_t = 300.0)]
    horizon: f64,
    #[arg(long, default_value_t = 0.02)]
    dt: f64,
    #[arg(long, default_value_t = DEFAULT_DECAY_THRESHOLD)]
    threshold: f64,
    #[arg(long, default_value_t = DEFAULT_TAIL_FRACTION)]
    tail_fraction: f64,
    #[command(flatten)]
    initial: InitialArgs,
}

#[derive(Debug, Clone, Args)]
struct ReportArgs {
    /// Directory holding beta0.json, mq.json, lyapunov.json and simulate.json.
    #[arg(long)]
    inputs: Option<PathBuf>,
    /// Recompute every quantity instead of reading artifacts.
    #[arg(long)]
    regenerate: bool,
}

enum Artifact {
    Table { table: Table, summary: Value },
    Document(Value),
}

struct Outcome {
    artifact: Artifact,
    line: String,
}

/// Runs the CLI with process stdout and stderr.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_io(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the CLI; `argv[0]` is the program name.
pub fn run_with_io<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let argv = match merge_config(argv) {
        Ok(a) => a,
        Err((code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            return code;
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    return EXIT_OK;
                }
                ErrorKind::InvalidSubcommand
                | ErrorKind::MissingSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => EXIT_USAGE,
                _ => EXIT_DOMAIN,
            };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    if !(cli.global.tol > 0.0) || !cli.global.tol.is_finite() {
        let _ = writeln!(err, "error: --tol must be positive");
        return EXIT_DOMAIN;
    }
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit_code(&e);
        }
    };
    let body = match &outcome.artifact {
        Artifact::Table { table, summary } => match cli.global.format {
            Format::Csv => table.to_csv(),
            Format::Json => pretty(&table.to_json(summary.clone())),
        },
        Artifact::Document(v) => pretty(v),
    };
    match &cli.global.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, body) {
                let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
                return EXIT_IO;
            }
            let _ = writeln!(out, "{}", outcome.line);
        }
        None => {
            let _ = out.write_all(body.as_bytes());
            let _ = writeln!(err, "{}", outcome.line);
        }
    }
    EXIT_OK
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_default();
    s.push('\n');
    s
}

/// Splices `--config` values into argv: subcommand first, then the config
/// parameters, then the user's flags so that they take precedence.
fn merge_config(argv: Vec<String>) -> std::result::Result<Vec<String>, (i32, String)> {
    let mut rest = Vec::new();
    let mut config = None;
    let mut it = argv.into_iter();
    let prog = it.next().unwrap_or_else(|| "thermostat".into());
    while let Some(a) = it.next() {
        if a == "--config" {
            match it.next() {
                Some(p) => config = Some(PathBuf::from(p)),
                None => return Err((EXIT_DOMAIN, "--config needs a path".into())),
            }
        } else if let Some(p) = a.strip_prefix("--config=") {
            config = Some(PathBuf::from(p));
        } else {
            rest.push(a);
        }
    }
    let Some(path) = config else {
        let mut v = vec![prog];
        v.extend(rest);
        return Ok(v);
    };
    let map = read_config(&path)?;

    let user_sub = rest.iter().position(|a| SUBCOMMANDS.contains(&a.as_str()));
    let sub = match (user_sub, map.get("subcommand")) {
        (Some(i), _) => rest.remove(i),
        (None, Some(Value::String(s))) => s.clone(),
        (None, Some(_)) => return Err((EXIT_DOMAIN, "config key 'subcommand' must be a string".into())),
        (None, None) => return Err((EXIT_USAGE, "no subcommand given".into())),
    };
    let mut merged = vec![prog, sub];
    for (key, value) in &map {
        if key == "subcommand" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => merged.push(flag),
            Value::Number(n) => merged.push(format!("{flag}={n}")),
            Value::String(s) => merged.push(format!("{flag}={s}")),
            _ => return Err((EXIT_DOMAIN, format!("config key '{key}' must be a scalar"))),
        }
    }
    merged.extend(rest);
    Ok(merged)
}

fn read_config(path: &Path) -> std::result::Result<Map<String, Value>, (i32, String)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| (EXIT_NO_INPUT, format!("cannot read config {}: {e}", path.display())))?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err((EXIT_NO_INPUT, format!("config {} is not a JSON object", path.display()))),
        Err(e) => Err((EXIT_NO_INPUT, format!("cannot parse config {}: {e}", path.display()))),
    }
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let tol = cli.global.tol;
    let policy = SeriesPolicy::default();
    match &cli.command {
        Command::Kernel(a) => cmd_kernel(a, &policy),
        Command::Transfer(a) => cmd_transfer(a, &policy),
        Command::Nyquist(a) => cmd_nyquist(a),
        Command::Popov(a) => cmd_popov(a, tol),
        Command::Beta0(a) => cmd_beta0(a, tol, &policy),
        Command::Mq(a) => cmd_mq(a, tol, &policy),
        Command::Volterra(a) => cmd_volterra(a, &policy),
        Command::Simulate(a) => cmd_simulate(a, &policy),
        Command::Lyapunov(a) => cmd_lyapunov(a, tol),
        Command::Eigenvalues(a) => cmd_eigenvalues(a, tol),
        Command::Sweep(a) => cmd_sweep(a, &policy),
        Command::Report(a) => cmd_report(a, tol, &policy),
    }
}

fn table(table: Table, summary: Value, line: String) -> Result<Outcome> {
    Ok(Outcome {
        artifact: Artifact::Table { table, summary },
        line,
    })
}

fn cmd_kernel(a: &KernelArgs, policy: &SeriesPolicy) -> Result<Outcome> {
    if !(a.t_min > 0.0 && a.t_min < a.t_max) || a.n < 2 {
        return Err(Error::Config("need 0 < t-min < t-max and n >= 2".into()));
    }
    let ts = log_space(a.t_min, a.t_max, a.n);
    let rows = ts
        .par_iter()
        .map(|&t| Ok((kernel_a(t, policy)?.value, shifted_kernel_as(t, policy)?, kernel_as_prime(t, policy)?)))
        .collect::<Result<Vec<_>>>()?;
    let a_small = kernel_a(1e-6, policy)?.value;
    let a_large = kernel_a(50.0, policy)?.value;
    let summary = json!({ "a_1e-6": a_small, "a_50_plus_inv_pi": a_large + FRAC_1_PI });
    let line = format!("kernel: {} samples, a(1e-6) = {a_small:e}, a(50) + 1/pi = {:e}", a.n, a_large + FRAC_1_PI);
    table(
        Table::new()
            .with("t", ts)
            .with("a", rows.iter().map(|r| r.0).collect())
            .with("a_s", rows.iter().map(|r| r.1).collect())
            .with("a_s_prime", rows.iter().map(|r| r.2).collect()),
        summary,
        line,
    )
}

fn cmd_transfer(a: &TransferArgs, policy: &SeriesPolicy) -> Result<Outcome> {
    let s = Complex64::new(a.re, a.im);
    let g = transfer(s, a.which.into())?;
    let mut t = Table::new()
        .with("s_re", vec![a.re])
        .with("s_im", vec![a.im])
        .with("re", vec![g.re])
        .with("im", vec![g.im]);
    if a.which == Which::Nloc && a.re > 0.0 {
        let series = transfer_nloc_series(s, policy)?;
        t = t.with("series_re", vec![series.re]).with("series_im", vec![series.im]);
    }
    table(t, json!({}), format!("transfer: G({s}) = {g}"))
}

fn cmd_nyquist(a: &NyquistArgs) -> Result<Outcome> {
    let radius = a.radius.unwrap_or(a.omega_min);
    let curve = nyquist_curve(a.omega_min, a.omega_max, a.n, radius, a.which.into())?;
    let min_re = curve.points.iter().fold(f64::INFINITY, |m, p| m.min(p.re));
    let summary = json!({ "min_re": min_re, "detour_start": curve.detour.0, "detour_end": curve.detour.1 });
    let line = format!("nyquist: {} points, min Re = {min_re:e}", curve.points.len());
    table(curve_table(&curve), summary, line)
}

fn cmd_popov(a: &CurveArgs, tol: f64) -> Result<Outcome> {
    let curve = popov_curve(a.omega_min, a.omega_max, a.n)?;
    let crossings = popov_axis_crossings(a.omega_min, a.omega_max, a.n, tol)?;
    let leftmost = crossings.iter().fold(f64::INFINITY, |m, c| m.min(c.re));
    let summary = json!({
        "crossings": crossings.iter().map(|c| json!({"omega": c.omega, "re": c.re})).collect::<Vec<_>>(),
        "leftmost_crossing": json_number(leftmost),
    });
    let line = format!("popov: {} crossings, leftmost at {leftmost}", crossings.len());
    table(curve_table(&curve), summary, line)
}

fn cmd_beta0(a: &Beta0Args, tol: f64, policy: &SeriesPolicy) -> Result<Outcome> {
    let c = crossing_omega0(a.lo, a.hi, tol, policy)?;
    let summary = json!({
        "omega0": c.omega0,
        "beta0": c.beta0,
        "g_at_crossing": c.g_at_crossing,
        "nycond_residual": c.nycond_residual,
    });
    let line = format!("omega0 = {:.12} beta0 = {:.12}", c.omega0, c.beta0);
    table(
        Table::new()
            .with("omega0", vec![c.omega0])
            .with("beta0", vec![c.beta0])
            .with("g", vec![c.g_at_crossing])
            .with("nycond_residual", vec![c.nycond_residual]),
        summary,
        line,
    )
}

fn cmd_mq(a: &MqArgs, tol: f64, policy: &SeriesPolicy) -> Result<Outcome> {
    if !(a.q_min > 0.0 && a.q_min < a.q_max) || a.n < 2 {
        return Err(Error::Config("need 0 < q-min < q-max and n >= 2".into()));
    }
    let tbl = PopovTable::new(a.grid.grid(), *policy)?;
    let qs = log_space(a.q_min, a.q_max, a.n);
    let ms = qs.iter().map(|&q| m_of_q(q, &tbl)).collect::<Result<Vec<_>>>()?;
    let opt = beta_sup(a.q_min, a.q_max, tol.max(1e-10), &tbl)?;
    let summary = json!({
        "q_star": opt.q_star,
        "beta_star": json_number(opt.beta_star),
        "omega_star": json_number(opt.omega_star),
        "m_at_zero": m_of_q(0.0, &tbl)?.value(),
    });
    let line = format!("sup_q M(q) = {:.12} at q = {:.9}", opt.beta_star, opt.q_star);
    let omega_star = ms
        .iter()
        .map(|m| match m {
            crate::frequency::MOfQ::Bounded { omega_star, .. } => *omega_star,
            crate::frequency::MOfQ::Unbounded { .. } => f64::NAN,
        })
        .collect();
    table(
        Table::new()
            .with("q", qs)
            .with("m", ms.iter().map(|m| m.value()).collect())
            .with("omega_star", omega_star),
        summary,
        line,
    )
}

fn cmd_volterra(a: &VolterraArgs, policy: &SeriesPolicy) -> Result<Outcome> {
    let u0 = a.initial.parse()?;
    let traj = solve_volterra(&VolterraProblem::new(a.beta, u0, a.horizon, a.dt, *policy)?)?;
    let ledger = energy_ledger(&traj, a.q)?;
    let decay = decay_diagnostic(&traj, a.tail_fraction, a.threshold);
    let osc = tail_oscillation(&traj.y, a.tail_fraction);
    let summary = json!({
        "beta": a.beta,
        "q": a.q,
        "decayed": decay.decayed,
        "tail_sup": decay.tail_sup,
        "w1_final": decay.w1_final,
        "tail_sign_changes": osc.sign_changes,
        "max_abs_residual": ledger.max_abs_residual(),
        "mean_identity_residual": mean_identity_residual(&traj),
    });
    let line = format!(
        "volterra: beta = {} decayed = {} tail_sup = {:e} max|residual| = {:e}",
        a.beta,
        decay.decayed,
        decay.tail_sup,
        ledger.max_abs_residual()
    );
    table(trajectory_table(&traj, &ledger), summary, line)
}

fn two_route_error(
    beta: f64,
    u0: &InitialData,
    cfg: &SimConfig,
    snapshots: &[SpectralState],
    policy: &SeriesPolicy,
) -> Result<f64> {
    let traj = solve_volterra(&VolterraProblem::new(beta, u0.clone(), cfg.horizon, cfg.dt, *policy)?)?;
    Ok(snapshots
        .iter()
        .enumerate()
        .map(|(i, s)| (s.trace_pi() - traj.y[i * cfg.snapshot_every]).abs())
        .fold(0.0, f64::max))
}

fn cmd_simulate(a: &SimulateArgs, policy: &SeriesPolicy) -> Result<Outcome> {
    let u0 = a.initial.parse()?;
    let cfg = SimConfig {
        k: a.k,
        dt: a.dt,
        horizon: a.horizon,
        stepper: match a.stepper {
            StepperArg::ImexEuler => Stepper::ImexEuler,
            StepperArg::ImexTrapezoid => Stepper::ImexTrapezoid,
        },
        snapshot_every: a.every,
    };
    let snaps = integrate(&SpectralState::from_initial(&u0, a.beta, a.k), &cfg)?;
    let mut summary = Map::new();
    summary.insert("beta".into(), json!(a.beta));
    summary.insert("final_trace_pi".into(), json!(snaps.last().map_or(0.0, |s| s.trace_pi())));
    let mut line = format!("simulate: beta = {} K = {} {} snapshots", a.beta, a.k, snaps.len());
    if a.compare_volterra {
        if !(a.beta > 0.0) {
            return Err(Error::Config("--compare-volterra needs beta > 0".into()));
        }
        let e = two_route_error(a.beta, &u0, &cfg, &snaps, policy)?;
        summary.insert("two_route_error".into(), json!(e));
        line.push_str(&format!(" two-route error = {e:e}"));
    }
    table(snapshot_table(&snaps), Value::Object(summary), line)
}

fn cmd_lyapunov(a: &LyapunovArgs, tol: f64) -> Result<Outcome> {
    let alphas = match a.alpha {
        Some(x) => vec![x],
        None => {
            if !(a.alpha_min > 0.0 && a.alpha_min < a.alpha_max) || a.n < 2 {
                return Err(Error::Config("need 0 < alpha-min < alpha-max and n >= 2".into()));
            }
            (0..a.n)
                .map(|i| a.alpha_min + (a.alpha_max - a.alpha_min) * i as f64 / (a.n - 1) as f64)
                .collect()
        }
    };
    let verdicts = alphas.iter().map(|&x| lyapunov_verdict(x, tol.max(1e-14))).collect::<Result<Vec<_>>>()?;
    let threshold = lyapunov_threshold(2.0, 1e-6)?;
    let summary = json!({ "threshold": threshold, "four_over_pi": 4.0 / PI });
    let line = format!("lyapunov: threshold alpha = {threshold:.6} (4/pi = {:.6})", 4.0 / PI);
    table(
        Table::new()
            .with("alpha", alphas)
            .with("fixed_point", verdicts.iter().map(|v| v.fixed_point.unwrap_or(f64::NAN)).collect())
            .with("r_prime_at_zero", verdicts.iter().map(|v| v.r_prime_at_zero).collect())
            .with("concave", verdicts.iter().map(|v| f64::from(u8::from(v.concave_on_interval))).collect()),
        summary,
        line,
    )
}

fn cmd_eigenvalues(a: &EigenArgs, tol: f64) -> Result<Outcome> {
    let region = SearchRegion {
        re_min: a.re_min,
        re_max: a.re_max,
        im_min: a.im_min,
        im_max: a.im_max,
    };
    let roots = linearized_eigenvalues(a.beta, region, tol.max(1e-14))?;
    let min_re = roots.iter().fold(f64::INFINITY, |m, r| m.min(r.lambda.re));
    let summary = json!({ "beta": a.beta, "count": roots.len(), "min_re": json_number(min_re) });
    let line = format!("eigenvalues: {} roots, min Re = {min_re}", roots.len());
    table(roots_table(&roots), summary, line)
}

fn parse_range(range: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = range.split(':').collect();
    let nums = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::Config(format!("bad range '{range}', expected start:stop:step")))?;
    let [start, stop, step] = nums[..] else {
        return Err(Error::Config(format!("bad range '{range}', expected start:stop:step")));
    };
    if !(step > 0.0) || stop < start {
        return Err(Error::Config(format!("bad range '{range}'")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

fn cmd_sweep(a: &SweepArgs, policy: &SeriesPolicy) -> Result<Outcome> {
    let betas = parse_range(&a.beta)?;
    let u0 = a.initial.parse()?;
    let cells = betas
        .par_iter()
        .map(|&beta| {
            let traj = solve_volterra(&VolterraProblem::new(beta, u0.clone(), a.horizon, a.dt, *policy)?)?;
            let d = decay_diagnostic(&traj, a.tail_fraction, a.threshold);
            let osc = tail_oscillation(&traj.y, a.tail_fraction);
            Ok((d, osc))
        })
        .collect::<Result<Vec<_>>>()?;
    let values = cells
        .iter()
        .map(|(d, o)| match a.observable {
            Observable::TailSup => d.tail_sup,
            Observable::Decayed => f64::from(u8::from(d.decayed)),
            Observable::SignChanges => o.sign_changes as f64,
            Observable::W1Final => d.w1_final,
        })
        .collect();
    let decayed: Vec<bool> = cells.iter().map(|c| c.0.decayed).collect();
    let monotone = decayed.windows(2).all(|w| w[0] || !w[1]);
    let last_stable = betas.iter().zip(&decayed).filter(|p| *p.1).map(|p| *p.0).fold(f64::NAN, f64::max);
    let first_unstable = betas.iter().zip(&decayed).filter(|p| !*p.1).map(|p| *p.0).fold(f64::NAN, f64::min);
    let summary = json!({
        "monotone": monotone,
        "last_decayed_beta": json_number(last_stable),
        "first_persistent_beta": json_number(first_unstable),
    });
    let line = format!("sweep: {} cells, monotone = {monotone}, split between {last_stable} and {first_unstable}", betas.len());
    table(
        Table::new()
            .with("beta", betas)
            .with("value", values)
            .with("decayed", decayed.iter().map(|&d| f64::from(u8::from(d))).collect()),
        summary,
        line,
    )
}

pub const REPORT_INPUTS: [&str; 4] = ["beta0.json", "mq.json", "lyapunov.json", "simulate.json"];

fn summary_field(dir: &Path, file: &str, key: &str) -> Result<f64> {
    let path = dir.join(file);
    let text = std::fs::read_to_string(&path).map_err(|_| Error::MissingArtifact(vec![file.to_string()]))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    v["summary"][key]
        .as_f64()
        .ok_or_else(|| Error::Config(format!("{} has no numeric summary.{key}", path.display())))
}

fn check(name: &str, pass: bool, value: f64) -> Value {
    json!({ "name": name, "pass": pass, "value": json_number(value) })
}

fn cmd_report(a: &ReportArgs, tol: f64, policy: &SeriesPolicy) -> Result<Outcome> {
    let (omega0, beta0_crossing, nycond, beta0_popov, q_star, threshold, two_route) = if a.regenerate {
        let c = crossing_omega0(0.5, 2.0, tol, policy)?;
        let tbl = PopovTable::new(OmegaGrid::default(), *policy)?;
        let opt = beta_sup(1e-3, 1e3, 1e-10, &tbl)?;
        let threshold = lyapunov_threshold(2.0, 1e-6)?;
        let u0 = InitialData::cosine(1, 1.0);
        let cfg = SimConfig::default();
        let snaps = integrate(&SpectralState::from_initial(&u0, 1.0, cfg.k), &cfg)?;
        let two = two_route_error(1.0, &u0, &cfg, &snaps, policy)?;
        (c.omega0, c.beta0, c.nycond_residual, opt.beta_star, opt.q_star, threshold, two)
    } else {
        let Some(dir) = &a.inputs else {
            return Err(Error::MissingArtifact(REPORT_INPUTS.iter().map(|s| s.to_string()).collect()));
        };
        let missing: Vec<String> =
            REPORT_INPUTS.iter().filter(|f| !dir.join(f).is_file()).map(|f| f.to_string()).collect();
        if !missing.is_empty() {
            return Err(Error::MissingArtifact(missing));
        }
        let omega0 = summary_field(dir, "beta0.json", "omega0")?;
        (
            omega0,
            summary_field(dir, "beta0.json", "beta0")?,
            summary_field(dir, "beta0.json", "nycond_residual")?,
            summary_field(dir, "mq.json", "beta_star")?,
            summary_field(dir, "mq.json", "q_star")?,
            summary_field(dir, "lyapunov.json", "threshold")?,
            summary_field(dir, "simulate.json", "two_route_error")?,
        )
    };

    let a_small = kernel_a(1e-6, policy)?.value;
    let a_large = kernel_a(50.0, policy)?.value + FRAC_1_PI;
    let laplace_err = [Complex64::new(1.0, 0.0), Complex64::new(4.0, 0.0), Complex64::new(0.1, 2.0)]
        .iter()
        .map(|&s| Ok((laplace_a(s, LaplaceMode::Series, policy)? - laplace_a(s, LaplaceMode::ClosedForm, policy)?).norm()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let loc = nyquist_curve(0.2, 50.0, 2000, 0.2, Loop::Local)?;
    let loc_min = loc.points.iter().fold(f64::INFINITY, |m, p| m.min(p.re));

    let invariants = vec![
        check("beta0_routes_agree", (beta0_crossing - beta0_popov).abs() <= 1e-3, beta0_crossing - beta0_popov),
        check("nyquist_condition", nycond <= 1e-8, nycond),
        check("lyapunov_threshold", (threshold - 4.0 / PI).abs() <= 0.01, threshold - 4.0 / PI),
        check("two_route_trace", two_route <= 2e-3, two_route),
        check("kernel_small_time", a_small.abs() <= 1e-6, a_small),
        check("kernel_large_time", a_large.abs() <= 1e-12, a_large),
        check("laplace_series_closed_form", laplace_err <= 1e-10, laplace_err),
        check("local_loop_positive_real", loc_min > 0.0, loc_min),
    ];
    let all_pass = invariants.iter().all(|c| c["pass"] == Value::Bool(true));
    let doc = json!({
        "omega0": omega0,
        "beta0_crossing": beta0_crossing,
        "beta0_popov": json_number(beta0_popov),
        "q_star": q_star,
        "lyapunov_threshold": threshold,
        "two_route_error": two_route,
        "invariants": invariants,
        "all_pass": all_pass,
    });
    Ok(Outcome {
        artifact: Artifact::Document(doc),
        line: format!("report: beta0 = {beta0_crossing:.6} / {beta0_popov:.6}, all invariants pass = {all_pass}"),
    })
}
