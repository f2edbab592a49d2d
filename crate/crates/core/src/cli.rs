//! Command-line front end and sweep serialization.
//!
//! Exit codes: 0 success, 1 solver or I/O failure, 2 usage error or
//! singular parameters.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analytic::{
    amplitudes_closed_form, blockade_conditions, g2_analytic, interference_residual, optimal_g,
};
use crate::error::Error;
use crate::model::{energy_levels, SystemParams};
use crate::steady::{converged_steady_state_with, Convergence};
use crate::sweep::{
    preset, run_sweep, GridAxis, PointStatus, PresetId, SweepMetadata, SweepOptions, SweepResult,
    SweepRow,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable capping sweep parallelism.
pub const THREADS_ENV: &str = "BLOCKADE_THREADS";

pub const CSV_HEADER: &str = "axis1_name,axis1_value,axis2_name,axis2_value,delta,u,g,f,phi,kappa,dim,n_mean,g2,lg_n,lg_g2,status";
const NA: &str = "NA";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Analytic,
    Optimal,
    Spectrum,
    Sweep,
}

/// Explicitly supplied physical parameters, from flags or a config file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Args)]
pub struct ParamOverrides {
    /// Detuning in units of kappa
    #[arg(long)]
    pub delta: Option<f64>,
    /// Kerr strength
    #[arg(long)]
    pub u: Option<f64>,
    /// Parametric coefficient
    #[arg(long)]
    pub g: Option<f64>,
    /// Drive strength
    #[arg(long)]
    pub f: Option<f64>,
    /// Drive phase in radians
    #[arg(long)]
    pub phi: Option<f64>,
    /// Decay rate
    #[arg(long)]
    pub kappa: Option<f64>,
}

impl ParamOverrides {
    fn or(self, fallback: Self) -> Self {
        Self {
            delta: self.delta.or(fallback.delta),
            u: self.u.or(fallback.u),
            g: self.g.or(fallback.g),
            f: self.f.or(fallback.f),
            phi: self.phi.or(fallback.phi),
            kappa: self.kappa.or(fallback.kappa),
        }
    }

    pub fn apply(&self, base: SystemParams) -> SystemParams {
        SystemParams {
            delta: self.delta.unwrap_or(base.delta),
            u: self.u.unwrap_or(base.u),
            g: self.g.unwrap_or(base.g),
            f: self.f.unwrap_or(base.f),
            phi: self.phi.unwrap_or(base.phi),
            kappa: self.kappa.unwrap_or(base.kappa),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
struct Options {
    #[command(flatten)]
    params: ParamOverrides,
    /// Convergence tolerance on lg N and lg g2 between truncations
    #[arg(long)]
    tol: Option<f64>,
    /// Largest Fock truncation tried
    #[arg(long = "max-dim", alias = "max_dim")]
    max_dim: Option<usize>,
    /// Sweep preset (fig1a, fig1b, fig2a..fig2d, fig3a..fig3f, fig4a..fig4d)
    #[arg(long)]
    preset: Option<String>,
    /// First sweep axis as param:min:max:count
    #[arg(long)]
    axis1: Option<String>,
    /// Second sweep axis as param:min:max:count
    #[arg(long)]
    axis2: Option<String>,
    /// Output file (default: standard output)
    #[arg(long)]
    output: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Cavity frequency for the spectrum, in units of kappa
    #[arg(long = "omega-a", alias = "omega_a")]
    omega_a: Option<f64>,
    /// Highest photon number in the spectrum
    #[arg(long = "n-max", alias = "n_max")]
    n_max: Option<usize>,
    /// Add the weak-drive analytic g2 to JSON sweep rows
    #[arg(long = "analytic", alias = "with-analytic", num_args = 0..=1, default_missing_value = "true")]
    with_analytic: Option<bool>,
    /// JSON config file with the same field names as the flags
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Config-file schema: the flag names, with `_` or `-` as separator.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    delta: Option<f64>,
    u: Option<f64>,
    g: Option<f64>,
    f: Option<f64>,
    phi: Option<f64>,
    kappa: Option<f64>,
    tol: Option<f64>,
    #[serde(alias = "max-dim")]
    max_dim: Option<usize>,
    preset: Option<String>,
    axis1: Option<String>,
    axis2: Option<String>,
    output: Option<PathBuf>,
    format: Option<Format>,
    #[serde(alias = "omega-a")]
    omega_a: Option<f64>,
    #[serde(alias = "n-max")]
    n_max: Option<usize>,
    #[serde(alias = "analytic")]
    with_analytic: Option<bool>,
}

impl From<ConfigFile> for Options {
    fn from(c: ConfigFile) -> Self {
        Self {
            params: ParamOverrides {
                delta: c.delta,
                u: c.u,
                g: c.g,
                f: c.f,
                phi: c.phi,
                kappa: c.kappa,
            },
            tol: c.tol,
            max_dim: c.max_dim,
            preset: c.preset,
            axis1: c.axis1,
            axis2: c.axis2,
            output: c.output,
            format: c.format,
            omega_a: c.omega_a,
            n_max: c.n_max,
            with_analytic: c.with_analytic,
            config: None,
        }
    }
}

impl Options {
    fn or(self, fallback: Self) -> Self {
        Self {
            params: self.params.or(fallback.params),
            tol: self.tol.or(fallback.tol),
            max_dim: self.max_dim.or(fallback.max_dim),
            preset: self.preset.or(fallback.preset),
            axis1: self.axis1.or(fallback.axis1),
            axis2: self.axis2.or(fallback.axis2),
            output: self.output.or(fallback.output),
            format: self.format.or(fallback.format),
            omega_a: self.omega_a.or(fallback.omega_a),
            n_max: self.n_max.or(fallback.n_max),
            with_analytic: self.with_analytic.or(fallback.with_analytic),
            config: self.config.or(fallback.config),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "blockade",
    about = "Steady-state photon blockade in a Kerr cavity with parametric amplification",
    allow_negative_numbers = true
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Debug, Subcommand)]
enum CliCommand {
    /// Solve the master equation at one parameter point
    #[command(allow_negative_numbers = true)]
    Solve(Options),
    /// Weak-drive amplitudes and blockade residuals
    #[command(allow_negative_numbers = true)]
    Analytic(Options),
    /// Optimal parametric coefficient for the given F, phi, delta, kappa
    #[command(allow_negative_numbers = true)]
    Optimal(Options),
    /// Bare Kerr energy levels
    #[command(allow_negative_numbers = true)]
    Spectrum(Options),
    /// Evaluate a 1-D or 2-D parameter grid
    #[command(allow_negative_numbers = true)]
    Sweep(Options),
}

/// Fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Defaults merged with explicit overrides.
    pub params: SystemParams,
    pub overrides: ParamOverrides,
    pub preset: Option<PresetId>,
    pub axes: Vec<GridAxis>,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub tol: f64,
    pub max_dim: usize,
    pub omega_a: f64,
    pub n_max: usize,
    pub with_analytic: bool,
}

impl RunConfig {
    pub fn convergence(&self) -> Convergence {
        Convergence {
            tol: self.tol,
            max_dim: self.max_dim,
            ..Convergence::default()
        }
    }

    /// Base parameters and axes of a sweep: preset values first, explicit
    /// overrides on top.
    pub fn sweep_plan(&self) -> (SystemParams, Vec<GridAxis>) {
        match self.preset {
            Some(id) => {
                let p = preset(id);
                let axes = if self.axes.is_empty() {
                    p.axes
                } else {
                    self.axes.clone()
                };
                (self.overrides.apply(p.base), axes)
            }
            None => (self.params, self.axes.clone()),
        }
    }
}

/// Rejected command line. `help` is set when the user asked for help or
/// version text, which is then the message.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError {
    pub message: String,
    pub help: bool,
}

fn usage(message: String) -> UsageError {
    UsageError {
        message,
        help: false,
    }
}

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for UsageError {}

/// Path given with `--config`, if any, so the caller can read it before
/// [`parse_config`].
pub fn config_path(argv: &[String]) -> Option<PathBuf> {
    let mut it = argv.iter();
    while let Some(arg) = it.next() {
        if arg == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(path) = arg.strip_prefix("--config=") {
            return Some(PathBuf::from(path));
        }
    }
    None
}

/// Flags override config-file values, which override defaults.
pub fn parse_config(argv: &[String], config: Option<&str>) -> Result<RunConfig, UsageError> {
    let cli = Cli::try_parse_from(argv).map_err(|e| UsageError {
        help: matches!(
            e.kind(),
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
        ),
        message: e.to_string(),
    })?;
    let (command, flags) = match cli.command {
        CliCommand::Solve(o) => (Command::Solve, o),
        CliCommand::Analytic(o) => (Command::Analytic, o),
        CliCommand::Optimal(o) => (Command::Optimal, o),
        CliCommand::Spectrum(o) => (Command::Spectrum, o),
        CliCommand::Sweep(o) => (Command::Sweep, o),
    };
    let file: Options = match config {
        Some(text) => serde_json::from_str::<ConfigFile>(text)
            .map_err(|e| usage(format!("invalid config file: {e}")))?
            .into(),
        None => Options::default(),
    };
    let opts = flags.or(file);

    let preset = opts
        .preset
        .as_deref()
        .map(str::parse::<PresetId>)
        .transpose()
        .map_err(|e| usage(e.to_string()))?;
    let axes = [&opts.axis1, &opts.axis2]
        .into_iter()
        .flatten()
        .map(|s| GridAxis::parse(s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| usage(e.to_string()))?;
    if opts.axis2.is_some() && opts.axis1.is_none() {
        return Err(usage("--axis2 requires --axis1".into()));
    }

    if command == Command::Sweep {
        if preset.is_none() && axes.is_empty() {
            return Err(usage("sweep needs --preset or --axis1".into()));
        }
        if axes.len() == 2 && axes[0].param == axes[1].param {
            return Err(usage(format!("both axes sweep '{}'", axes[0].param)));
        }
    } else if preset.is_some() || !axes.is_empty() {
        return Err(usage(
            "--preset and --axis1/--axis2 are only valid for sweep".into(),
        ));
    }

    let tol = opts.tol.unwrap_or(1e-3);
    if !(tol >= 0.0) {
        return Err(usage(format!("tolerance must be non-negative, got {tol}")));
    }
    let max_dim = opts.max_dim.unwrap_or(60);
    if max_dim < Convergence::default().start_dim {
        return Err(usage(format!(
            "max-dim must be at least {}",
            Convergence::default().start_dim
        )));
    }

    let params = opts.params.apply(SystemParams::default());
    if command != Command::Spectrum && command != Command::Optimal {
        let checked = match (command, preset) {
            (Command::Sweep, Some(id)) => opts.params.apply(crate::sweep::preset(id).base),
            _ => params,
        };
        checked.validate().map_err(|e| usage(e.to_string()))?;
    }

    Ok(RunConfig {
        command,
        params,
        overrides: opts.params,
        preset,
        axes,
        output_path: opts.output,
        format: opts.format.unwrap_or(Format::Csv),
        tol,
        max_dim,
        omega_a: opts.omega_a.unwrap_or(1.0),
        n_max: opts.n_max.unwrap_or(4),
        with_analytic: opts.with_analytic.unwrap_or(false),
    })
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_else(|| NA.to_string())
}

/// CSV rendering with the fixed header and 17 significant digits.
pub fn to_csv(result: &SweepResult) -> String {
    let mut out = String::with_capacity(160 * (result.rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in &result.rows {
        let axis = |k: usize| -> (String, String) {
            match (result.axes.get(k), row.axis_values.get(k)) {
                (Some(a), Some(&v)) => (a.param.name().to_string(), num(v)),
                _ => (NA.to_string(), NA.to_string()),
            }
        };
        let (a1n, a1v) = axis(0);
        let (a2n, a2v) = axis(1);
        let p = &row.params;
        let _ = writeln!(
            out,
            "{a1n},{a1v},{a2n},{a2v},{},{},{},{},{},{},{},{},{},{},{},{}",
            num(p.delta),
            num(p.u),
            num(p.g),
            num(p.f),
            num(p.phi),
            num(p.kappa),
            row.dim
                .map(|d| d.to_string())
                .unwrap_or_else(|| NA.to_string()),
            opt_num(row.n_mean),
            opt_num(row.g2),
            opt_num(row.lg_n),
            opt_num(row.lg_g2),
            status_name(row.status),
        );
    }
    out
}

fn status_name(s: PointStatus) -> &'static str {
    match s {
        PointStatus::Ok => "ok",
        PointStatus::Fail => "FAIL",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct JsonRow {
    axis1_name: Option<String>,
    axis1_value: Option<f64>,
    axis2_name: Option<String>,
    axis2_value: Option<f64>,
    delta: f64,
    u: f64,
    g: f64,
    f: f64,
    phi: f64,
    kappa: f64,
    dim: Option<usize>,
    n_mean: Option<f64>,
    g2: Option<f64>,
    lg_n: Option<f64>,
    lg_g2: Option<f64>,
    status: PointStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g2_analytic: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct JsonMetadata {
    #[serde(flatten)]
    meta: SweepMetadata,
    axes: Vec<GridAxis>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct JsonDocument {
    metadata: JsonMetadata,
    rows: Vec<JsonRow>,
}

/// Single JSON document: metadata plus rows using the CSV field names.
/// Undefined values are `null`.
pub fn to_json(result: &SweepResult) -> String {
    let rows = result
        .rows
        .iter()
        .map(|row| {
            let axis = |k: usize| match (result.axes.get(k), row.axis_values.get(k)) {
                (Some(a), Some(&v)) => (Some(a.param.name().to_string()), Some(v)),
                _ => (None, None),
            };
            let (axis1_name, axis1_value) = axis(0);
            let (axis2_name, axis2_value) = axis(1);
            JsonRow {
                axis1_name,
                axis1_value,
                axis2_name,
                axis2_value,
                delta: row.params.delta,
                u: row.params.u,
                g: row.params.g,
                f: row.params.f,
                phi: row.params.phi,
                kappa: row.params.kappa,
                dim: row.dim,
                n_mean: row.n_mean,
                g2: row.g2,
                lg_n: row.lg_n,
                lg_g2: row.lg_g2,
                status: row.status,
                g2_analytic: row.g2_analytic,
                message: row.message.clone(),
            }
        })
        .collect();
    let doc = JsonDocument {
        metadata: JsonMetadata {
            meta: result.metadata.clone(),
            axes: result.axes.clone(),
        },
        rows,
    };
    serde_json::to_string_pretty(&doc).expect("sweep result serializes")
}

pub fn from_json(text: &str) -> Result<SweepResult, serde_json::Error> {
    let doc: JsonDocument = serde_json::from_str(text)?;
    let rows = doc
        .rows
        .into_iter()
        .map(|r| SweepRow {
            axis_values: [r.axis1_value, r.axis2_value]
                .into_iter()
                .flatten()
                .collect(),
            params: SystemParams {
                delta: r.delta,
                u: r.u,
                g: r.g,
                f: r.f,
                phi: r.phi,
                kappa: r.kappa,
            },
            dim: r.dim,
            n_mean: r.n_mean,
            g2: r.g2,
            lg_n: r.lg_n,
            lg_g2: r.lg_g2,
            g2_analytic: r.g2_analytic,
            status: r.status,
            message: r.message,
        })
        .collect();
    Ok(SweepResult {
        axes: doc.metadata.axes,
        metadata: doc.metadata.meta,
        rows,
    })
}

fn threads_from_env() -> Result<Option<usize>, UsageError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| {
                usage(format!(
                    "{THREADS_ENV} must be a positive integer, got '{v}'"
                ))
            }),
        Err(_) => Ok(None),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParams(_)
        | Error::InvalidAxis(_)
        | Error::UnknownPreset { .. }
        | Error::Singularity(_)
        | Error::Degenerate(_)
        | Error::InvalidDimension(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// Runs a command against standard output and standard error.
pub fn execute(cfg: &RunConfig) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    execute_with(cfg, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs a command, writing data to `out` and messages to `err`.
pub fn execute_with(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let report = |err: &mut dyn Write, msg: &str, code: i32| {
        let _ = writeln!(err, "error: {msg}");
        code
    };
    let text = match cfg.command {
        Command::Solve => match converged_steady_state_with(&cfg.params, cfg.convergence()) {
            Ok(state) => render_solve(&state, cfg.format),
            Err(e) => return report(err, &e.to_string(), exit_code(&e)),
        },
        Command::Analytic => match render_analytic(&cfg.params, cfg.format) {
            Ok(t) => t,
            Err(e) => return report(err, &e.to_string(), exit_code(&e)),
        },
        Command::Optimal => {
            let p = &cfg.params;
            match optimal_g(p.f, p.phi, p.delta, p.kappa) {
                Ok(g) => match cfg.format {
                    Format::Csv => format!("g_opt = {}\n", num(g)),
                    Format::Json => format!("{}\n", serde_json::json!({ "g_opt": g })),
                },
                Err(e) => return report(err, &e.to_string(), EXIT_USAGE),
            }
        }
        Command::Spectrum => {
            let levels = energy_levels(cfg.omega_a, cfg.params.u, cfg.n_max);
            match cfg.format {
                Format::Csv => {
                    let mut s = String::from("n,energy\n");
                    for l in &levels {
                        let _ = writeln!(s, "{},{}", l.n, num(l.energy));
                    }
                    s
                }
                Format::Json => format!(
                    "{}\n",
                    serde_json::to_string_pretty(&levels).expect("levels serialize")
                ),
            }
        }
        Command::Sweep => {
            let threads = match threads_from_env() {
                Ok(t) => t,
                Err(e) => return report(err, &e.message, EXIT_USAGE),
            };
            let (base, axes) = cfg.sweep_plan();
            let opts = SweepOptions {
                convergence: cfg.convergence(),
                threads,
                with_analytic: cfg.with_analytic,
                preset: cfg.preset.map(|p| p.name().to_string()),
            };
            let result = match run_sweep(&base, &axes, &opts) {
                Ok(r) => r,
                Err(e) => return report(err, &e.to_string(), exit_code(&e)),
            };
            let failed = result
                .rows
                .iter()
                .filter(|r| r.status == PointStatus::Fail)
                .count();
            if failed > 0 {
                let _ = writeln!(
                    err,
                    "warning: {failed} of {} grid points failed",
                    result.rows.len()
                );
            }
            match cfg.format {
                Format::Csv => to_csv(&result),
                Format::Json => to_json(&result),
            }
        }
    };

    let written = match &cfg.output_path {
        Some(path) => std::fs::write(path, text.as_bytes())
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => out
            .write_all(text.as_bytes())
            .and_then(|_| out.flush())
            .map_err(|e| format!("cannot write output: {e}")),
    };
    match written {
        Ok(()) => EXIT_OK,
        Err(msg) => report(err, &msg, EXIT_FAILURE),
    }
}

fn render_solve(state: &crate::steady::ConvergedState, format: Format) -> String {
    let obs = &state.observables;
    match format {
        Format::Csv => {
            let pops: Vec<String> = obs.populations.iter().map(|&p| num(p)).collect();
            format!(
                "dim_used = {}\nn_mean = {}\ng2 = {}\nlg_n = {}\nlg_g2 = {}\npopulations = {}\n",
                state.dim,
                num(obs.mean_photon),
                opt_num(obs.g2),
                opt_num(obs.lg_n),
                opt_num(obs.lg_g2),
                pops.join(" "),
            )
        }
        Format::Json => format!(
            "{}\n",
            serde_json::json!({
                "dim_used": state.dim,
                "n_mean": obs.mean_photon,
                "g2": obs.g2,
                "lg_n": obs.lg_n,
                "lg_g2": obs.lg_g2,
                "populations": obs.populations,
            })
        ),
    }
}

fn render_analytic(p: &SystemParams, format: Format) -> Result<String, Error> {
    let amps = amplitudes_closed_form(p)?;
    let g2 = g2_analytic(&amps);
    let (re, im) = blockade_conditions(p);
    let r = interference_residual(p);
    Ok(match format {
        Format::Csv => format!(
            "c1 = {} {}\nc2 = {} {}\ng2_analytic = {}\nreal_residual = {}\nimag_residual = {}\ninterference_residual = {} {}\n",
            num(amps.c1.re),
            num(amps.c1.im),
            num(amps.c2.re),
            num(amps.c2.im),
            opt_num(g2),
            num(re),
            num(im),
            num(r.re),
            num(r.im),
        ),
        Format::Json => format!(
            "{}\n",
            serde_json::json!({
                "c1": [amps.c1.re, amps.c1.im],
                "c2": [amps.c2.re, amps.c2.im],
                "g2_analytic": g2,
                "real_residual": re,
                "imag_residual": im,
                "interference_residual": [r.re, r.im],
            })
        ),
    })
}
