//! Command-line front end.
//!
//! Exit codes: 0 success or affirmative verdict, 1 negative verdict, 2 usage
//! error, 3 input or parse error.

mod commands;
mod events_file;
mod report;

use std::ffi::OsString;
use std::io::Write;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

pub use events_file::{parse_events, EventsFile};
pub use report::{fmt_num, num};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "relhist", version, about = "Consistent-histories checks for quantum scenarios")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: Global,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Built-in scenario: spin-half, wavepacket, epr, hardy.
    #[arg(long, global = true, conflicts_with = "file")]
    pub scenario: Option<String>,
    /// Model file (.fam), or an events file (JSON) for `embed`.
    #[arg(long, global = true)]
    pub file: Option<std::path::PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Relative consistency threshold.
    #[arg(long, global = true)]
    pub tol_rel: Option<f64>,
    /// Absolute consistency threshold.
    #[arg(long, global = true)]
    pub tol_abs: Option<f64>,
    /// Report wall time (outside the results object).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Consistency of one family.
    Check {
        #[arg(long)]
        family: Option<String>,
    },
    /// Probabilities of a consistent family, with optional event and conditional queries.
    Probs {
        #[arg(long)]
        family: Option<String>,
        /// Conditioning predicate, e.g. `t2=Xplus`.
        #[arg(long)]
        given: Option<String>,
        /// Target predicate, e.g. `t1=xplus`.
        #[arg(long)]
        target: Option<String>,
        /// Comma-separated labels; a history belongs to the event when each
        /// label matches one of its slots.
        #[arg(long)]
        event: Option<String>,
    },
    /// Compatibility classification of two families (`--family A --family B`).
    Compat {
        #[arg(long, num_args = 1)]
        family: Vec<String>,
    },
    /// Evaluates a scenario's registry of expected results.
    Scenario {
        /// Scenario name; defaults to `--scenario`.
        name: Option<String>,
        /// Also check step unitarity and local commutation of spacelike events.
        #[arg(long)]
        suite: bool,
    },
    /// Places events on spacelike surfaces respecting causal order.
    Embed {
        /// Comma-separated subset of event ids.
        #[arg(long)]
        events: Option<String>,
    },
}

/// Outcome of a command before rendering.
pub struct Outcome {
    pub code: i32,
    pub results: Value,
    pub text: String,
    pub csv: Vec<Vec<String>>,
}

/// Failure carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(m: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: m.into(),
        }
    }

    pub fn input(m: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: m.into(),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::input(e.to_string())
    }
}

/// Parses `args` (including the program name), runs the command and writes
/// the report. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{rendered}")
            } else {
                write!(err, "{rendered}")
            };
            return code;
        }
    };
    let echo: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let start = Instant::now();
    let outcome = commands::dispatch(&cli);
    let elapsed = cli.global.timing.then(|| start.elapsed().as_secs_f64());
    match outcome {
        Ok(o) => {
            let _ = render(&cli, &echo, &o, elapsed, out);
            o.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            if e.code == EXIT_USAGE {
                let _ = writeln!(err, "\nRun `relhist --help` for usage.");
            }
            if cli.global.format == Format::Json {
                let results = report::obj([("error", Value::String(e.message.clone()))]);
                let _ = writeln!(out, "{}", pretty(&report::envelope(&echo, results, elapsed)));
            }
            e.code
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values serialize")
}

fn render(cli: &Cli, echo: &[String], o: &Outcome, elapsed: Option<f64>, out: &mut dyn Write) -> std::io::Result<()> {
    match cli.global.format {
        Format::Json => writeln!(out, "{}", pretty(&report::envelope(echo, o.results.clone(), elapsed))),
        Format::Csv => {
            for row in &o.csv {
                writeln!(out, "{}", report::csv_row(row))?;
            }
            Ok(())
        }
        Format::Text => {
            write!(out, "{}", o.text)?;
            if let Some(t) = elapsed {
                writeln!(out, "wall time: {t:.3} s")?;
            }
            Ok(())
        }
    }
}
