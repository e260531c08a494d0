use std::path::PathBuf;

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid frequency grid: {0}")]
    Grid(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate excitation: force spectrum carries no power")]
    DegenerateExcitation,

    #[error("degenerate response: response spectrum carries no power")]
    DegenerateResponse,

    #[error("coherence needs at least 2 averages, got {found}")]
    InsufficientAverages { found: usize },

    #[error("found {found} qualifying peaks, {required} required")]
    InsufficientPeaks { found: usize, required: usize },

    #[error("half-power level not reached around {f_hat_hz} Hz (searched {searched_hz} Hz)")]
    BandwidthUnresolved { f_hat_hz: f64, searched_hz: f64 },

    #[error("need at least 2 samples, got {found}")]
    InsufficientSamples { found: usize },

    #[error("invalid distance matrix: {}", .0.join("; "))]
    InvalidDistance(Vec<String>),

    #[error("feature extraction failed for {}", format_failures(.0))]
    Extraction(Vec<(String, Box<Error>)>),

    #[error("{}:{line}: {msg}", .path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{}: {msg}", .path.display())]
    Format { path: PathBuf, msg: String },

    #[error("length mismatch: {} has {a_len} samples, {} has {b_len}", .a.display(), .b.display())]
    LengthMismatch {
        a: PathBuf,
        a_len: usize,
        b: PathBuf,
        b_len: usize,
    },

    #[error("sample rate mismatch: {} at {a_fs} Hz, {} at {b_fs} Hz", .a.display(), .b.display())]
    SampleRateMismatch {
        a: PathBuf,
        a_fs: f64,
        b: PathBuf,
        b_fs: f64,
    },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn format_failures(failures: &[(String, Box<Error>)]) -> String {
    failures
        .iter()
        .map(|(label, err)| format!("{label} ({err})"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
