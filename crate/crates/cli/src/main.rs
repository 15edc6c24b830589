//! Command-line front end: scenario dispatch, CSV/JSON emission, exit codes.
//!
//! Exit codes: 0 success, 2 usage or parameter validation, 3 i/o failure,
//! 4 numerical guardrail (grid too narrow, misaligned or truncating shift).
//!
//! All frequencies are in units of the pointer sigma by default
//! (`--sigma` rescales); the physics depends only on `omega_f / sigma` and
//! the absorber amplitude. Identical invocations produce byte-identical
//! output; `--with-version` embeds the build version when wanted.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use darkport::scenarios::{
    alpha_sweep, convergence_sweep, run_direct_traced, run_mz_null, run_mz_traced, PipelineTrace,
    ScenarioConfig, ScenarioKind, ScenarioReport,
};
use darkport::selftest;

const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_NUMERIC: u8 = 4;

#[derive(Parser)]
#[command(
    name = "darkport",
    version,
    about = "Single-photon energy-pointer weak measurement simulator",
    after_help = "Frequencies are in pointer-sigma units unless --sigma is set. \
                  Outputs are deterministic: identical invocations write identical bytes."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Photon incident directly on the absorber, post-selected outside
    RunDirect(RunDirectArgs),
    /// Absorber on arm I of a tuned Mach-Zehnder, post-selected at the dark port
    RunMz(RunMzArgs),
    /// One interferometer run per absorber amplitude, as a table
    SweepAlpha(SweepAlphaArgs),
    /// Exact shift versus weak value over a list of measurement strengths
    SweepRatio(SweepRatioArgs),
    /// Run the built-in acceptance checks; nonzero exit on any failure
    Selftest,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Absorber in-path amplitude |alpha|, in [0, 1]
    #[arg(long)]
    alpha: Option<f64>,
    /// Phase of alpha in radians
    #[arg(long)]
    alpha_phase: Option<f64>,
    /// Absorber level splitting (requested; snapped to the grid)
    #[arg(long)]
    omega_f: Option<f64>,
    /// Pointer energy spread
    #[arg(long)]
    sigma: Option<f64>,
    /// Pointer center frequency
    #[arg(long)]
    center: Option<f64>,
    /// Number of frequency grid points
    #[arg(long)]
    grid_points: Option<usize>,
    /// Full grid width around the center
    #[arg(long)]
    grid_span: Option<f64>,
    /// Flat key=value defaults file; explicit flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output format (default: json for runs, csv for sweeps)
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Output path; stdout when omitted
    #[arg(long)]
    output: Option<PathBuf>,
    /// Embed the build version in the output
    #[arg(long)]
    with_version: bool,
    /// Worker threads for sweeps; output order is unaffected
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct RunDirectArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Also write the pipeline's intermediate joint states as JSON
    #[arg(long)]
    dump_states: Option<PathBuf>,
}

#[derive(Args)]
struct RunMzArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Remove the absorber entirely (tuned-interferometer null)
    #[arg(long)]
    no_absorber: bool,
    /// Also write the pipeline's intermediate joint states as JSON
    #[arg(long)]
    dump_states: Option<PathBuf>,
}

#[derive(Args)]
struct SweepAlphaArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated absorber amplitudes (default 0,0.1,…,1)
    #[arg(long)]
    alphas: Option<String>,
}

#[derive(Args)]
struct SweepRatioArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated omega_f/sigma ratios in (0,1)
    #[arg(long)]
    ratios: Option<String>,
    /// Which scenario to sweep
    #[arg(long, value_enum)]
    scenario: Option<SweepScenario>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepScenario {
    Direct,
    Mz,
}

struct CliError {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn core_error(e: darkport::Error) -> CliError {
    let code = if e.is_grid_guardrail() {
        EXIT_NUMERIC
    } else if matches!(e, darkport::Error::InvalidParameter(_)) {
        EXIT_USAGE
    } else {
        1
    };
    CliError {
        code,
        message: e.to_string(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::RunDirect(args) => run_direct_cmd(args),
        Command::RunMz(args) => run_mz_cmd(args),
        Command::SweepAlpha(args) => sweep_alpha_cmd(args),
        Command::SweepRatio(args) => sweep_ratio_cmd(args),
        Command::Selftest => selftest_cmd(),
    }
}

/// Flag values merged over the config file merged over defaults.
struct Resolved {
    config: ScenarioConfig<f64>,
    format: OutputFormat,
    jobs: usize,
    file: BTreeMap<String, String>,
}

const FILE_KEYS: &[&str] = &[
    "alpha",
    "alpha-phase",
    "omega-f",
    "sigma",
    "center",
    "grid-points",
    "grid-span",
    "format",
    "jobs",
    "alphas",
    "ratios",
    "scenario",
];

fn load_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError {
        code: EXIT_IO,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            usage(format!(
                "{}:{}: expected key=value",
                path.display(),
                lineno + 1
            ))
        })?;
        let key = key.trim();
        if !FILE_KEYS.contains(&key) {
            return Err(usage(format!(
                "{}:{}: unknown key '{key}'",
                path.display(),
                lineno + 1
            )));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_from_file<T: std::str::FromStr>(
    file: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, CliError> {
    match file.get(key) {
        Some(s) => s
            .parse::<T>()
            .map(Some)
            .map_err(|_| usage(format!("config key '{key}': cannot parse '{s}'"))),
        None => Ok(None),
    }
}

fn resolve(common: &CommonArgs, default_alpha: f64, sweep: bool) -> Result<Resolved, CliError> {
    let file = match &common.config {
        Some(path) => load_config_file(path)?,
        None => BTreeMap::new(),
    };

    let alpha = match common.alpha {
        Some(v) => v,
        None => parse_from_file(&file, "alpha")?.unwrap_or(default_alpha),
    };
    if !(0.0..=1.0).contains(&alpha) || !alpha.is_finite() {
        return Err(usage(format!("--alpha {alpha} out of range [0, 1]")));
    }
    let alpha_phase = match common.alpha_phase {
        Some(v) => v,
        None => parse_from_file(&file, "alpha-phase")?.unwrap_or(0.0),
    };
    let omega_f = match common.omega_f {
        Some(v) => v,
        None => parse_from_file(&file, "omega-f")?.unwrap_or(0.01),
    };
    if omega_f <= 0.0 || !omega_f.is_finite() {
        return Err(usage(format!("--omega-f {omega_f} must be positive")));
    }
    let sigma = match common.sigma {
        Some(v) => v,
        None => parse_from_file(&file, "sigma")?.unwrap_or(1.0),
    };
    if sigma <= 0.0 || !sigma.is_finite() {
        return Err(usage(format!("--sigma {sigma} must be positive")));
    }
    let center = match common.center {
        Some(v) => v,
        None => parse_from_file(&file, "center")?.unwrap_or(0.0),
    };
    let grid_points = match common.grid_points {
        Some(v) => v,
        None => parse_from_file(&file, "grid-points")?.unwrap_or(4096),
    };
    if grid_points < 2 {
        return Err(usage("--grid-points must be at least 2"));
    }
    let grid_span = match common.grid_span {
        Some(v) => v,
        None => parse_from_file(&file, "grid-span")?.unwrap_or(24.0 * sigma),
    };
    if grid_span <= 0.0 || !grid_span.is_finite() {
        return Err(usage(format!("--grid-span {grid_span} must be positive")));
    }
    let jobs = match common.jobs {
        Some(v) => v,
        None => parse_from_file(&file, "jobs")?.unwrap_or(1),
    };
    if jobs < 1 {
        return Err(usage("--jobs must be at least 1"));
    }
    let format = match common.format {
        Some(f) => f,
        None => match file.get("format").map(String::as_str) {
            Some("json") => OutputFormat::Json,
            Some("csv") => OutputFormat::Csv,
            Some(other) => return Err(usage(format!("config key 'format': unknown '{other}'"))),
            None => {
                if sweep {
                    OutputFormat::Csv
                } else {
                    OutputFormat::Json
                }
            }
        },
    };

    let beta = (1.0 - alpha * alpha).sqrt();
    let config = ScenarioConfig {
        alpha: num_complex::Complex::from_polar(alpha, alpha_phase),
        beta: num_complex::Complex::new(beta, 0.0),
        omega_f,
        sigma,
        center,
        n_points: grid_points,
        span: grid_span,
    };
    Ok(Resolved {
        config,
        format,
        jobs,
        file,
    })
}

fn write_output(path: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, content).map_err(|e| CliError {
            code: EXIT_IO,
            message: format!("cannot write {}: {e}", p.display()),
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn with_version(mut value: Value, wanted: bool) -> Value {
    if wanted {
        if let Value::Object(m) = &mut value {
            m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        }
    }
    value
}

fn version_banner(wanted: bool) -> String {
    if wanted {
        format!("# darkport {}\n", env!("CARGO_PKG_VERSION"))
    } else {
        String::new()
    }
}

fn render_report(
    report: &ScenarioReport<f64>,
    format: OutputFormat,
    versioned: bool,
) -> Result<String, CliError> {
    match format {
        OutputFormat::Json => {
            let v = with_version(report.to_json(), versioned);
            Ok(format!("{}\n", pretty(&v)?))
        }
        OutputFormat::Csv => Ok(format!("{}{}", version_banner(versioned), report.to_csv())),
    }
}

fn pretty(v: &Value) -> Result<String, CliError> {
    serde_json::to_string_pretty(v).map_err(|e| CliError {
        code: 1,
        message: format!("serialization failed: {e}"),
    })
}

fn dump_states(path: &Option<PathBuf>, trace: &PipelineTrace<f64>) -> Result<(), CliError> {
    if let Some(p) = path {
        let content = format!("{}\n", pretty(&trace.to_json())?);
        write_output(&Some(p.clone()), &content)?;
    }
    Ok(())
}

fn run_direct_cmd(args: RunDirectArgs) -> Result<(), CliError> {
    let resolved = resolve(&args.common, std::f64::consts::FRAC_1_SQRT_2, false)?;
    let (report, trace) = run_direct_traced(&resolved.config).map_err(core_error)?;
    dump_states(&args.dump_states, &trace)?;
    let content = render_report(&report, resolved.format, args.common.with_version)?;
    write_output(&args.common.output, &content)
}

fn run_mz_cmd(args: RunMzArgs) -> Result<(), CliError> {
    let resolved = resolve(&args.common, std::f64::consts::FRAC_1_SQRT_2, false)?;
    let report = if args.no_absorber {
        let report = run_mz_null(&resolved.config).map_err(core_error)?;
        if args.dump_states.is_some() {
            return Err(usage("--dump-states is not available with --no-absorber"));
        }
        report
    } else {
        let (report, trace) = run_mz_traced(&resolved.config).map_err(core_error)?;
        dump_states(&args.dump_states, &trace)?;
        report
    };
    let content = render_report(&report, resolved.format, args.common.with_version)?;
    write_output(&args.common.output, &content)
}

fn parse_list(list: &str, what: &str) -> Result<Vec<f64>, CliError> {
    list.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("{what}: cannot parse '{}'", s.trim())))
        })
        .collect()
}

fn sweep_alpha_cmd(args: SweepAlphaArgs) -> Result<(), CliError> {
    let resolved = resolve(&args.common, std::f64::consts::FRAC_1_SQRT_2, true)?;
    let alphas = match &args.alphas {
        Some(s) => parse_list(s, "--alphas")?,
        None => match resolved.file.get("alphas") {
            Some(s) => parse_list(s, "config key 'alphas'")?,
            None => (0..=10).map(|i| i as f64 / 10.0).collect(),
        },
    };
    let table = alpha_sweep(&resolved.config, &alphas, resolved.jobs).map_err(core_error)?;
    let content = match resolved.format {
        OutputFormat::Csv => format!(
            "{}{}",
            version_banner(args.common.with_version),
            table.to_csv()
        ),
        OutputFormat::Json => {
            let v = with_version(table.to_json(), args.common.with_version);
            format!("{}\n", pretty(&v)?)
        }
    };
    write_output(&args.common.output, &content)
}

fn sweep_ratio_cmd(args: SweepRatioArgs) -> Result<(), CliError> {
    // alpha^2 = 1/2 makes the discrepancy vanish identically, so the
    // convergence sweep defaults to alpha = 0.6
    let resolved = resolve(&args.common, 0.6, true)?;
    let ratios = match &args.ratios {
        Some(s) => parse_list(s, "--ratios")?,
        None => match resolved.file.get("ratios") {
            Some(s) => parse_list(s, "config key 'ratios'")?,
            None => vec![0.2, 0.1, 0.05, 0.02, 0.01],
        },
    };
    let scenario = match args.scenario {
        Some(SweepScenario::Direct) => ScenarioKind::Direct,
        Some(SweepScenario::Mz) => ScenarioKind::MachZehnder,
        None => match resolved.file.get("scenario").map(String::as_str) {
            Some("direct") => ScenarioKind::Direct,
            Some("mz") => ScenarioKind::MachZehnder,
            Some(other) => return Err(usage(format!("config key 'scenario': unknown '{other}'"))),
            None => ScenarioKind::MachZehnder,
        },
    };
    let table = convergence_sweep(&resolved.config, scenario, &ratios, resolved.jobs)
        .map_err(core_error)?;
    let content = match resolved.format {
        OutputFormat::Csv => format!(
            "{}{}",
            version_banner(args.common.with_version),
            table.to_csv()
        ),
        OutputFormat::Json => {
            let v = with_version(table.to_json(), args.common.with_version);
            format!("{}\n", pretty(&v)?)
        }
    };
    write_output(&args.common.output, &content)
}

fn selftest_cmd() -> Result<(), CliError> {
    let mut failures = 0;
    for check in selftest::run_all() {
        println!("{check}");
        if !check.passed {
            failures += 1;
        }
    }
    if failures > 0 {
        Err(CliError {
            code: 1,
            message: format!("{failures} acceptance check(s) failed"),
        })
    } else {
        Ok(())
    }
}
