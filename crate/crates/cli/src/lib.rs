//! `osclab` command-line front end: sweeps over registry cases, one CSV table
//! per run plus a gnuplot script next to it.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub mod commands;
pub mod output;
pub mod sweep;

pub use sweep::{Spacing, Sweep};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECTED: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_IO: i32 = 74;

pub const THREADS_ENV: &str = "OSC_THREADS";
pub const MIN_TOL: f64 = osclab::quadoracle::MIN_TOL;
/// Fewest sweep points accepted by subcommands that fit a slope.
pub const MIN_FIT_POINTS: usize = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] osclab::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) if e.is_rejection() => EXIT_REJECTED,
            CliError::Core(e) if e.is_non_convergence() => EXIT_NONCONVERGENCE,
            CliError::Core(_) => EXIT_USAGE,
            CliError::Io { .. } | CliError::Csv(_) => EXIT_IO,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "osclab", version, about = "Oscillatory integral experiments with CSV output")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Output CSV; a `.gp` script is written next to it
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// Quadrature tolerance (default adapts to λ)
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Worker threads (default: $OSC_THREADS, else all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// File of `key=value` lines using the long flag names
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Non-degenerate 1-D decomposition I = leading + R along a λ sweep
    Statphase1d(Statphase1dArgs),
    /// Degenerate critical point of order k, or the classical van der Corput check
    Vdc(VdcArgs),
    /// Two-dimensional non-degenerate decomposition
    StatphaseNd(StatphaseNdArgs),
    /// Morse normal form residuals on a grid
    MorseCheck(MorseArgs),
    /// Bessel J_ν decomposition table
    BesselTable(BesselArgs),
    /// Sup-in-x decay of a dispersive kernel
    DispersiveScan(DispersiveArgs),
    /// Log-log fit of two columns of an existing CSV
    DecayFit(DecayFitArgs),
    /// Hypothesis check of every registry case
    Selftest,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Statphase1d(_) => "statphase1d",
            Command::Vdc(_) => "vdc",
            Command::StatphaseNd(_) => "statphase-nd",
            Command::MorseCheck(_) => "morse-check",
            Command::BesselTable(_) => "bessel-table",
            Command::DispersiveScan(_) => "dispersive-scan",
            Command::DecayFit(_) => "decay-fit",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Statphase1dArgs {
    #[arg(long, default_value = "quad-cubic")]
    pub case: String,
    /// Amplitude case (default: the phase's own default)
    #[arg(long)]
    pub amp: Option<String>,
    #[arg(long, default_value = "50:3200:7:log")]
    pub lambda: Sweep,
    /// Exponents of the L^p bound, comma separated
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub p: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct VdcArgs {
    #[arg(long, default_value = "cubic-k2")]
    pub case: String,
    #[arg(long)]
    pub amp: Option<String>,
    #[arg(long, default_value = "1000:1000000:7:log")]
    pub lambda: Sweep,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Order of the critical point (default: from the case)
    #[arg(long)]
    pub k: Option<usize>,
    /// `a,b`: run the classical check on this interval instead
    #[arg(long, value_parser = parse_interval)]
    pub interval: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Args)]
pub struct StatphaseNdArgs {
    #[arg(long, default_value = "paraboloid-pert")]
    pub case: String,
    #[arg(long)]
    pub amp: Option<String>,
    #[arg(long, default_value = "25:800:6:log")]
    pub lambda: Sweep,
}

#[derive(Debug, Clone, Args)]
pub struct MorseArgs {
    #[arg(long, default_value = "paraboloid-pert")]
    pub case: String,
    /// Grid points per axis on the half-radius ball
    #[arg(long, default_value_t = 9)]
    pub points: usize,
}

#[derive(Debug, Clone, Args)]
pub struct BesselArgs {
    #[arg(long, default_value_t = 50.0)]
    pub nu: f64,
    #[arg(long, default_value_t = 60)]
    pub points: usize,
    /// Lower radius (default ν + ν^{1/3})
    #[arg(long)]
    pub lo: Option<f64>,
    /// Upper radius (default 10ν)
    #[arg(long)]
    pub hi: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct DispersiveArgs {
    /// Dispersion symbol case
    #[arg(long, default_value = "waterwave")]
    pub case: String,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value = "100:10000:9:log")]
    pub t: Sweep,
    #[arg(long)]
    pub rays: Option<usize>,
    #[arg(long)]
    pub padding: Option<usize>,
    #[arg(long)]
    pub refine: Option<usize>,
    /// Also write every kernel evaluation to this CSV
    #[arg(long)]
    pub rows: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DecayFitArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Abscissa column (default: first)
    #[arg(long)]
    pub x: Option<String>,
    /// Ordinate column, fitted in absolute value (default: second)
    #[arg(long)]
    pub y: Option<String>,
}

fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("interval '{s}' is not a,b"))?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("interval '{s}': {e}"));
    let (a, b) = (p(a)?, p(b)?);
    if !(a < b) {
        return Err(format!("interval '{s}': need a < b"));
    }
    Ok((a, b))
}

/// Result of a successful run.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub summary: String,
    pub output: PathBuf,
    pub code: i32,
}

/// Appends `--key value` for every config entry whose flag is not already given.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let strs: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let path = strs.iter().enumerate().find_map(|(i, a)| {
        if a == "--config" {
            strs.get(i + 1).cloned()
        } else {
            a.strip_prefix("--config=").map(str::to_string)
        }
    });
    let Some(path) = path else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(Path::new(&path), e))?;
    let mut out = args;
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{path}:{}: expected key=value", n + 1)))?;
        let key = k.trim().trim_start_matches('-');
        if key.is_empty() || key == "config" {
            return Err(CliError::Usage(format!("{path}:{}: bad key '{}'", n + 1, k.trim())));
        }
        let key = if key == "o" { "output" } else { key };
        let flag = format!("--{key}");
        let given = strs.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
            || (key == "output" && strs.iter().any(|a| a == "-o"));
        if !given {
            out.push(flag.into());
            out.push(v.trim().into());
        }
    }
    Ok(out)
}

/// Thread count from the flag, else `OSC_THREADS`, else `None` (all cores).
pub fn resolve_threads(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(s) if !s.trim().is_empty() => Some(
                s.trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("{THREADS_ENV}='{s}' is not a thread count")))?,
            ),
            _ => None,
        },
    };
    if n == Some(0) {
        return Err(CliError::Usage("thread count must be positive".into()));
    }
    Ok(n)
}

/// Parse and run; `Ok(None)` when help or version was printed.
pub fn execute<I, T>(args: I) -> Result<Option<Report>, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = expand_config(args.into_iter().map(Into::into).collect())?;
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return Ok(None);
            }
            return Err(CliError::Usage(e.render().to_string()));
        }
    };
    if let Some(tol) = cli.global.tol {
        if !(tol >= MIN_TOL) || !tol.is_finite() {
            return Err(CliError::Usage(format!("--tol {tol} is below {MIN_TOL:e}")));
        }
    }
    let threads = resolve_threads(cli.global.threads)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let output = cli
        .global
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", cli.command.name())));
    pool.install(|| commands::dispatch(&cli.command, &cli.global, &output)).map(Some)
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match execute(args) {
        Ok(None) => EXIT_OK,
        Ok(Some(r)) => {
            println!("{}", r.summary);
            r.code
        }
        Err(e) => {
            match &e {
                CliError::Usage(msg) => eprint!("{}{}", msg, if msg.ends_with('\n') { "" } else { "\n" }),
                other => eprintln!("osclab: {other}"),
            }
            e.exit_code()
        }
    }
}
