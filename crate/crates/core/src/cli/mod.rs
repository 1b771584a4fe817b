//! The `tfd` command line: every experiment as a subcommand that prints a
//! CSV or JSON table on stdout.

mod commands;
pub mod config;
pub mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::{OutputFormat, RunConfig, DEFAULT_N_MAX};
pub use table::{Cell, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERIC: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad arguments, bad input files, or a configuration that cannot work.
    Usage(String),
    /// A result outside its tolerance, or a solver that did not converge.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numeric(m) => m,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tfd", version, about = "Thermal vacua, Bogoliubov maps and black-box machines")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Fock truncation per mode [default: 60]
    #[arg(long, global = true, value_name = "N")]
    n_max: Option<usize>,
    /// Tolerance override: VALUE for the command's main check, or NAME=VALUE
    #[arg(long, global = true, value_name = "[NAME=]VALUE")]
    tol: Vec<String>,
    /// Output format [default: csv]
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Flat key=value file read before the flags
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for randomized sweeps [default: 0]
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Evaluate independent rows in parallel; row order is unchanged
    #[arg(long, global = true)]
    parallel: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FibMode {
    Tree,
    Counts,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minimize the free energy per mode and compare with the Bose distribution
    #[command(allow_negative_numbers = true)]
    Bose {
        #[arg(long)]
        beta: f64,
        /// Mode energies
        #[arg(required = true)]
        energies: Vec<f64>,
    },
    /// Thermal averages against thermal-vacuum expectations of N, N^2, a+a^dag
    #[command(name = "gibbs-vs-tfd", allow_negative_numbers = true)]
    GibbsVsTfd {
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        energy: f64,
    },
    /// Both sides of the KMS condition for H = E N
    #[command(allow_negative_numbers = true)]
    Kms {
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        energy: f64,
        #[arg(long, default_value_t = 1.0)]
        t_max: f64,
        /// Number of time points
        #[arg(long, default_value_t = 10)]
        points: usize,
    },
    /// Time evolution of the mixed two-level states
    #[command(allow_negative_numbers = true)]
    Qubit {
        #[arg(long)]
        omega1: f64,
        #[arg(long)]
        omega2: f64,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        t_max: f64,
        /// Number of time samples, at least 2
        #[arg(long)]
        steps: usize,
    },
    /// Per-depth census of the sigma-rule state tree
    Fibonacci {
        #[arg(long)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = FibMode::Tree)]
        mode: FibMode,
    },
    /// Behaviour stream of a colored machine read from a file
    Machine {
        file: PathBuf,
        /// Start state
        #[arg(long, required_unless_present = "equiv")]
        start: Option<String>,
        /// Prefix length
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Decide observational equivalence of two states
        #[arg(long, num_args = 2, value_names = ["X", "Y"], conflicts_with = "start")]
        equiv: Option<Vec<String>>,
        /// Look up the second --equiv state in this machine instead
        #[arg(long, requires = "equiv")]
        other: Option<PathBuf>,
    },
    /// The vacuum foliation read as a machine over a grid of angles
    #[command(allow_negative_numbers = true)]
    Foliation {
        #[arg(long)]
        theta_min: f64,
        #[arg(long)]
        theta_max: f64,
        /// Grid points, at least 2
        #[arg(long)]
        points: usize,
        #[arg(long, default_value_t = 1.0)]
        energy: f64,
        /// Inverse temperature for the free-energy column
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// Significant digits of the order-parameter labels
        #[arg(long, default_value_t = crate::coalgebra::DEFAULT_LABEL_DIGITS)]
        digits: usize,
    },
    /// Quick battery of the library's numerical identities
    Selfcheck,
}

/// Run `tfd` with `args` (including the program name). Data goes to `out`,
/// diagnostics to `err`; the return value is the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = resolve_config(&cli.global).and_then(|config| dispatch(&cli.command, &config, out, err));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.exit_code()
        }
    }
}

fn resolve_config(g: &GlobalArgs) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::default();
    if let Some(path) = &g.config {
        config.load_file(path)?;
    }
    if let Some(n) = g.n_max {
        config.set("n_max", &n.to_string()).map_err(|e| CliError::Usage(format!("--n-max: {e}")))?;
    }
    for spec in &g.tol {
        config.apply_tol(spec).map_err(|e| CliError::Usage(format!("--tol: {e}")))?;
    }
    if let Some(f) = g.format {
        config.format = match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        };
    }
    if let Some(s) = g.seed {
        config.seed = s;
    }
    if g.parallel {
        config.parallel = true;
    }
    Ok(config)
}

fn dispatch(cmd: &Command, config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Bose { beta, energies } => emit(commands::bose(config, *beta, energies), config, out),
        Command::GibbsVsTfd { beta, energy } => emit(commands::gibbs_vs_tfd(config, *beta, *energy), config, out),
        Command::Kms { beta, energy, t_max, points } => {
            emit(commands::kms(config, *beta, *energy, *t_max, *points), config, out)
        }
        Command::Qubit { omega1, omega2, theta, t_max, steps } => {
            emit(commands::qubit(config, *omega1, *omega2, *theta, *t_max, *steps), config, out)
        }
        Command::Fibonacci { depth, mode } => emit(commands::fibonacci(*depth, *mode), config, out),
        Command::Machine { file, start, n, equiv, other } => {
            let text = match (start, equiv) {
                (_, Some(pair)) => commands::machine_equiv(config, file, &pair[0], &pair[1], other.as_deref())?,
                (Some(s), None) => commands::machine_stream(config, file, s, *n)?,
                (None, None) => return Err(CliError::Usage("--start or --equiv is required".into())),
            };
            write_out(out, &text)
        }
        Command::Foliation { theta_min, theta_max, points, energy, beta, digits } => {
            emit(commands::foliation(config, *theta_min, *theta_max, *points, *energy, *beta, *digits), config, out)
        }
        Command::Selfcheck => emit(commands::selfcheck(config, err), config, out),
    }
}

/// Print the table even when a check failed, then report the failure.
fn emit(result: Result<commands::Outcome, CliError>, config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let outcome = result?;
    let text = match config.format {
        OutputFormat::Csv => outcome.table.to_csv(),
        OutputFormat::Json => outcome.table.to_json() + "\n",
    };
    write_out(out, &text)?;
    match outcome.failure {
        Some(msg) => Err(CliError::Numeric(msg)),
        None => Ok(()),
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::Usage(format!("cannot write output: {e}")))
}
