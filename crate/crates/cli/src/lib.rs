//! The `covario` command line: body specs in, CSV tables and JSON reports out.
//!
//! Exit codes: 0 on success, 1 when a check or validation fails, 2 on usage
//! errors (bad flags, unreadable or malformed input files).

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use covario::{Body, BodySpec, Direction, Error as CoreError, FamilyParams};
use serde_json::{json, Value};

mod commands;
pub mod verify;

/// Version of the JSON report layout printed by `--json`.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "COVARIO_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "covario",
    version,
    about = "Covariograms, chord transforms and zero branches of planar convex bodies"
)]
pub struct Cli {
    /// Print a machine-readable JSON report instead of the text summary.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a body spec.
    BodyValidate(BodyArgs),
    /// Sample the covariogram of a body on a centred grid.
    Covariogram(GridArgs),
    /// Sample the cross covariogram of two bodies or of a parallelogram family pair.
    Crosscov(CrosscovArgs),
    /// Tabulate the chord function in one direction.
    Radon(RadonArgs),
    /// Evaluate the Fourier-Laplace ray transform and its derivative.
    Flt(FltArgs),
    /// Track zero branches over directions and validate them.
    Zeros(ZerosArgs),
    /// Compare zero branches with their asymptotic centres.
    Kobayashi(ZerosArgs),
    /// Recover curvature pairs from covariogram values, optionally comparing two bodies.
    RecoverCurvature(RecoverArgs),
    /// Run a named verification suite and print a pass/fail table.
    Verify(verify::VerifyArgs),
}

#[derive(Debug, Args)]
pub struct BodyArgs {
    /// Body spec (JSON).
    #[arg(long)]
    pub body: PathBuf,
}

#[derive(Debug, Args)]
pub struct GridSpec {
    /// Grid size as NXxNY.
    #[arg(long, default_value = "41x41", value_parser = parse_grid)]
    pub grid: (usize, usize),
    /// Half-extents X,Y of the grid; defaults to the bounding box of the support.
    #[arg(long, value_parser = parse_pair)]
    pub extent: Option<(f64, f64)>,
    /// Output CSV (x,y,value); a JSON sidecar is written next to it. Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Body spec (JSON).
    #[arg(long)]
    pub body: PathBuf,
    #[command(flatten)]
    pub grid: GridSpec,
}

#[derive(Debug, Args)]
pub struct CrosscovArgs {
    /// First body H.
    #[arg(long, requires = "k", conflicts_with = "family")]
    pub h: Option<PathBuf>,
    /// Second body K.
    #[arg(long, requires = "h")]
    pub k: Option<PathBuf>,
    /// Parallelogram family 1..4; uses the default parameters unless --params is given.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4), required_unless_present = "h")]
    pub family: Option<u8>,
    /// Family parameters (JSON object with alpha, beta, gamma, delta, alpha_p, beta_p, gamma_p, delta_p, m, y, y_p).
    #[arg(long, requires = "family")]
    pub params: Option<PathBuf>,
    #[command(flatten)]
    pub grid: GridSpec,
}

#[derive(Debug, Args)]
pub struct DirectionArgs {
    /// Direction angle in radians; repeatable.
    #[arg(long = "u", allow_hyphen_values = true)]
    pub u: Vec<f64>,
    /// Use N equally spaced directions instead of --u.
    #[arg(long, conflicts_with = "u")]
    pub directions: Option<usize>,
}

impl DirectionArgs {
    fn grid(&self) -> Result<Vec<Direction>, Failure> {
        match self.directions {
            Some(0) => Err(Failure::Usage("--directions must be positive".into())),
            Some(n) => Ok(Direction::grid(n)),
            None if self.u.is_empty() => Ok(vec![Direction::new(0.0)]),
            None => Ok(self.u.iter().map(|&t| Direction::new(t)).collect()),
        }
    }
}

#[derive(Debug, Args)]
pub struct RadonArgs {
    /// Body spec (JSON).
    #[arg(long)]
    pub body: PathBuf,
    /// Direction angle in radians.
    #[arg(long = "u", default_value_t = 0.0, allow_hyphen_values = true)]
    pub u: f64,
    /// Number of equally spaced offsets across the support.
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
    /// Output CSV (t,chord). Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FltArgs {
    /// Body spec (JSON).
    #[arg(long)]
    pub body: PathBuf,
    /// Direction angle in radians.
    #[arg(long = "u", default_value_t = 0.0, allow_hyphen_values = true)]
    pub u: f64,
    /// Evaluation point RE[,IM]; repeatable.
    #[arg(long, required = true, value_parser = parse_complex, allow_hyphen_values = true)]
    pub zeta: Vec<(f64, f64)>,
    /// Largest |Re zeta| the quadrature resolves.
    #[arg(long)]
    pub band: Option<f64>,
    /// Output CSV (re_zeta,im_zeta,re_f,im_f,re_df,im_df). Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ZerosArgs {
    /// Body spec (JSON).
    #[arg(long)]
    pub body: PathBuf,
    #[command(flatten)]
    pub directions: DirectionArgs,
    /// Branch indices as A..B (inclusive) or a single index.
    #[arg(long, default_value = "1..10", value_parser = parse_range)]
    pub m: RangeInclusive<u32>,
    /// Output CSV. Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    /// Body spec (JSON).
    #[arg(long)]
    pub body: PathBuf,
    #[command(flatten)]
    pub directions: DirectionArgs,
    /// Second body: compare the two covariograms direction by direction.
    #[arg(long)]
    pub against: Option<PathBuf>,
    /// Output CSV (theta,low,high,sum,harmonic,residual,exact_low,exact_high). Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Why a command stopped.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or unreadable input; exit code 2.
    Usage(String),
    /// A check, validation or computation failed; exit code 1.
    Check(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Check(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Check(m) => f.write_str(m),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Json { .. }
            | CoreError::Io(_)
            | CoreError::InvalidArgument(_)
            | CoreError::InvalidFamilyParams(_)
            | CoreError::PrecisionLoss { .. }
            | CoreError::OutOfBand { .. }
            | CoreError::InvalidCap(_) => Failure::Usage(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

/// What a command produced: a JSON report and the text printed without `--json`.
pub struct Outcome {
    pub report: Value,
    pub text: String,
    /// Set when the command ran to completion but a check failed.
    pub failed: Option<String>,
}

/// Parse `argv` (including the program name) and run the command.
pub fn run<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Err(f) = configure_threads() {
        eprintln!("error: {f}");
        return ExitCode::from(f.exit_code());
    }
    let name = command_name(&cli.command);
    match commands::dispatch(&cli.command) {
        Ok(out) => {
            if cli.json {
                let mut report = json!({ "schema_version": SCHEMA_VERSION, "command": name });
                if let (Value::Object(dst), Value::Object(src)) = (&mut report, out.report) {
                    dst.extend(src);
                }
                emit(&(serde_json::to_string_pretty(&report).expect("reports serialize") + "\n"));
            } else {
                emit(&out.text);
            }
            match out.failed {
                Some(msg) => {
                    eprintln!("error: {msg}");
                    ExitCode::from(1)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(f) => {
            if cli.json {
                let report = json!({
                    "schema_version": SCHEMA_VERSION,
                    "command": name,
                    "error": f.to_string(),
                    "exit_code": f.exit_code(),
                });
                emit(&(serde_json::to_string_pretty(&report).expect("reports serialize") + "\n"));
            }
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}

// A closed pipe (`covario ... | head`) is not an error worth reporting.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // A pool may already exist when run() is called twice in one process.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::BodyValidate(_) => "body-validate",
        Command::Covariogram(_) => "covariogram",
        Command::Crosscov(_) => "crosscov",
        Command::Radon(_) => "radon",
        Command::Flt(_) => "flt",
        Command::Zeros(_) => "zeros",
        Command::Kobayashi(_) => "kobayashi",
        Command::RecoverCurvature(_) => "recover-curvature",
        Command::Verify(_) => "verify",
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

/// Parse a body spec file; JSON errors carry the file name, line and column.
pub fn load_spec(path: &Path) -> Result<BodySpec, Failure> {
    let text = read_input(path)?;
    BodySpec::parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

pub fn load_body(path: &Path) -> Result<Body, Failure> {
    load_spec(path)?
        .to_body()
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

pub fn load_params(path: &Path) -> Result<FamilyParams, Failure> {
    let text = read_input(path)?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {}", path.display(), CoreError::from(e))))
}

fn write_output(path: Option<&Path>, contents: &str, text: &mut String) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, contents).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            text.push_str(contents);
            Ok(())
        }
    }
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NXxNY, got {s:?}"))?;
    let n = |t: &str| {
        t.trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 2)
            .ok_or_else(|| format!("grid sizes must be integers ≥ 2, got {t:?}"))
    };
    Ok((n(a)?, n(b)?))
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected X,Y, got {s:?}"))?;
    let f = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok((f(a)?, f(b)?))
}

fn parse_complex(s: &str) -> Result<(f64, f64), String> {
    match s.split_once(',') {
        Some(_) => parse_pair(s),
        None => Ok((s.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}"))?, 0.0)),
    }
}

fn parse_range(s: &str) -> Result<RangeInclusive<u32>, String> {
    let n = |t: &str| t.trim().parse::<u32>().map_err(|e| format!("{t:?}: {e}"));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (n(a)?, n(b.trim_start_matches('='))?),
        None => (n(s)?, n(s)?),
    };
    if a == 0 || a > b {
        return Err(format!("expected 1 ≤ A ≤ B in A..B, got {s:?}"));
    }
    Ok(a..=b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_parsers() {
        assert_eq!(parse_grid("41x21").unwrap(), (41, 21));
        assert!(parse_grid("41").is_err());
        assert!(parse_grid("1x5").is_err());
        assert_eq!(parse_range("1..40").unwrap(), 1..=40);
        assert_eq!(parse_range("3..=5").unwrap(), 3..=5);
        assert_eq!(parse_range("7").unwrap(), 7..=7);
        assert!(parse_range("0..3").is_err());
        assert!(parse_range("5..3").is_err());
        assert_eq!(parse_complex("3").unwrap(), (3.0, 0.0));
        assert_eq!(parse_complex("3,-0.5").unwrap(), (3.0, -0.5));
    }

    #[test]
    fn error_classes() {
        assert_eq!(Failure::from(CoreError::InvalidCap(-1.0)).exit_code(), 2);
        assert_eq!(Failure::from(CoreError::FitFailed("x".into())).exit_code(), 1);
    }
}
