//! The `frfm` command line.
//!
//! Exit codes: 0 on success, 1 when data could not be processed, 2 for
//! usage errors (bad flags, missing inputs, mismatched input kinds).

mod args;
mod commands;
mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Serialize;

pub use args::{Cli, Command, Figure};
pub use commands::{estimate_entry, feature_distance, load_model, ordered_dendrogram, overlay_svg};
pub use config::RunConfig;

use crate::error::Error;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) => m,
        }
    }
}

#[derive(Debug, Default, Serialize)]
struct Summary {
    command: String,
    status: String,
    exit_code: i32,
    outputs: Vec<PathBuf>,
    warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

/// Resolved configuration plus what the run has produced so far.
pub(crate) struct Context {
    pub config: RunConfig,
    outputs: Vec<PathBuf>,
    warnings: Vec<String>,
}

impl Context {
    pub fn wrote(&mut self, path: &Path) {
        log::info!("wrote {}", path.display());
        self.outputs.push(path.to_path_buf());
    }

    pub fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }
}

fn init_logging(cli: &Cli) {
    let level = if cli.quiet {
        log::LevelFilter::Error
    } else {
        match cli.verbose {
            0 => log::LevelFilter::Warn,
            1 => log::LevelFilter::Info,
            _ => log::LevelFilter::Debug,
        }
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .format_target(false)
        .target(env_logger::Target::Stderr)
        .try_init();
}

fn init_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("FRFM_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Usage(format!("FRFM_THREADS must be a positive integer, got '{value}'")))?;
    // A pool built earlier in the same process stays in place.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Synth(_) => "synth",
        Command::Estimate(_) => "estimate",
        Command::Extract(_) => "extract",
        Command::Distance(_) => "distance",
        Command::Cluster(_) => "cluster",
        Command::Report(_) => "report",
        Command::Pipeline(_) => "pipeline",
    }
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    init_logging(&cli);

    let mut ctx = Context {
        config: RunConfig::default(),
        outputs: Vec::new(),
        warnings: Vec::new(),
    };
    let result = init_threads()
        .and_then(|_| match &cli.config {
            Some(path) => RunConfig::load(path),
            None => Ok(RunConfig::default()),
        })
        .and_then(|config| {
            ctx.config = config;
            commands::dispatch(&cli.command, &mut ctx)
        });

    let code = match &result {
        Ok(()) => 0,
        Err(f) => {
            log::error!("{}", f.message());
            f.exit_code()
        }
    };
    if let Some(path) = &cli.summary {
        let summary = Summary {
            command: command_name(&cli.command).into(),
            status: if code == 0 { "ok" } else { "error" }.into(),
            exit_code: code,
            outputs: ctx.outputs,
            warnings: ctx.warnings,
            error: result.err().map(|f| f.message().to_string()),
        };
        let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
        text.push('\n');
        if let Err(e) = crate::io::write_atomic(path, text.as_bytes()) {
            log::error!("{e}");
            return code.max(1);
        }
    }
    code
}

/// Entry point of the `frfm` binary.
pub fn main() -> i32 {
    run(std::env::args_os())
}
