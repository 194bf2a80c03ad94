//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 every sample
//! degenerate, 3 usage or parse error, 4 domain error at every sample.

mod output;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::linalg::MAX_DIM;
use crate::verify::{Grid, VerifyOptions};
use crate::wronskian::FunctionSystem;

pub use output::{format_csv_number, format_json_number, split_top_level};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_DEGENERATE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;
pub const EXIT_DOMAIN: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "wronski",
    version,
    about = "Recover the ODE of a function system and check the Maurer-Cartan duality"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Recover the ODE coefficients p_1..p_n at every grid point
    Recover(CommonArgs),
    /// Print R = W'W^-1, L = W^-1 W' and the characteristic coefficients of R
    Cartan(CommonArgs),
    /// Run every check and report a verdict
    Verify(CommonArgs),
    /// Compare det W', (det W)', trace R, det R, p_1 and p_n
    ProbeAbel(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Comma-separated expressions in t, e.g. "exp(t),t^2"
    #[arg(long, required_unless_present = "input", conflicts_with = "input")]
    funcs: Option<String>,
    /// File with one expression per line
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    t0: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    t1: f64,
    #[arg(long, default_value_t = 17)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Multiplier applied to every verification tolerance
    #[arg(long, default_value_t = 1.0)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Recover,
    Cartan,
    Verify,
    ProbeAbel,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Recover => "recover",
            CommandKind::Cartan => "cartan",
            CommandKind::Verify => "verify",
            CommandKind::ProbeAbel => "probe-abel",
        }
    }
}

/// Validated invocation.
#[derive(Debug, Clone)]
pub struct CliConfig {
    pub command: CommandKind,
    pub funcs: Vec<String>,
    pub t0: f64,
    pub t1: f64,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
struct UsageError(String);

impl CliConfig {
    fn from_args(command: CommandKind, args: CommonArgs) -> Result<CliConfig, UsageError> {
        let funcs = match (&args.funcs, &args.input) {
            (Some(list), _) => split_top_level(list),
            (None, Some(path)) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
                text.lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .map(String::from)
                    .collect()
            }
            (None, None) => Vec::new(),
        };
        if funcs.is_empty() {
            return Err(UsageError("no functions given".into()));
        }
        if funcs.len() > MAX_DIM {
            return Err(UsageError(format!(
                "at most {MAX_DIM} functions are supported, got {}",
                funcs.len()
            )));
        }
        if let Some(i) = funcs.iter().position(|f| f.trim().is_empty()) {
            return Err(UsageError(format!("function {} is empty", i + 1)));
        }
        if !(args.tol.is_finite() && args.tol > 0.0) {
            return Err(UsageError("--tol must be a positive number".into()));
        }
        Grid::new(args.t0, args.t1, args.samples).map_err(|e| UsageError(e.to_string()))?;
        Ok(CliConfig {
            command,
            funcs,
            t0: args.t0,
            t1: args.t1,
            samples: args.samples,
            seed: args.seed,
            tol: args.tol,
            format: args.format,
            out: args.out,
        })
    }

    pub fn grid(&self) -> Grid {
        Grid {
            t0: self.t0,
            t1: self.t1,
            samples: self.samples,
        }
    }

    pub fn options(&self) -> VerifyOptions {
        VerifyOptions {
            tol_multiplier: self.tol,
        }
    }
}

/// Runs the CLI with the process's stdout and stderr.
pub fn run(argv: &[String]) -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the CLI against explicit output streams.
pub fn run_with(argv: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let (kind, args) = match cli.command {
        Command::Recover(a) => (CommandKind::Recover, a),
        Command::Cartan(a) => (CommandKind::Cartan, a),
        Command::Verify(a) => (CommandKind::Verify, a),
        Command::ProbeAbel(a) => (CommandKind::ProbeAbel, a),
    };
    let config = match CliConfig::from_args(kind, args) {
        Ok(c) => c,
        Err(UsageError(msg)) => return report_error(stderr, "usage", &msg),
    };
    let sys = match FunctionSystem::parse(&config.funcs) {
        Ok(sys) => sys,
        Err(e) => return report_error(stderr, "parse", &describe_parse_error(&config.funcs, &e)),
    };

    let rendered = output::render(&config, &sys);

    let written = match &config.out {
        Some(path) => fs::write(path, rendered.text.as_bytes()),
        None => stdout.write_all(rendered.text.as_bytes()),
    };
    if let Err(e) = written {
        return report_error(stderr, "io", &e.to_string());
    }
    rendered.exit_code
}

fn report_error(stderr: &mut dyn Write, kind: &str, message: &str) -> i32 {
    let _ = writeln!(stderr, "error[{kind}]: {message}");
    EXIT_USAGE
}

fn describe_parse_error(funcs: &[String], err: &crate::wronskian::WronskianError) -> String {
    use crate::wronskian::WronskianError;
    match err {
        WronskianError::Parse { index, source } => {
            let src = &funcs[*index];
            let pos = source.position();
            format!(
                "function {} `{src}`: {source}\n  {src}\n  {}^",
                index + 1,
                " ".repeat(pos)
            )
        }
        other => other.to_string(),
    }
}
