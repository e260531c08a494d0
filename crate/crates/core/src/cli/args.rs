use std::path::PathBuf;

use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::clustering::Linkage;
use crate::estimation::Estimator;
use crate::metrics::Metric;

fn estimator_parser() -> impl TypedValueParser<Value = Estimator> {
    PossibleValuesParser::new(["h1", "h2", "hv"]).map(|s| s.parse().expect("listed value"))
}

fn linkage_parser() -> impl TypedValueParser<Value = Linkage> {
    PossibleValuesParser::new(["single", "complete", "average"]).map(|s| s.parse().expect("listed value"))
}

fn metric_parser() -> impl TypedValueParser<Value = Metric> {
    PossibleValuesParser::new(["feature", "feature-f", "feature-p", "feature-q", "mse"])
        .map(|s| s.parse().expect("listed value"))
}

#[derive(Debug, Parser)]
#[command(name = "frfm", version, about = "Compare frequency response functions through modal features")]
pub struct Cli {
    /// Only report errors.
    #[arg(long, short, global = true, conflicts_with = "verbose")]
    pub quiet: bool,
    /// More log output (repeat for debug).
    #[arg(long, short, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// Write a JSON run summary to this file.
    #[arg(long, global = true, value_name = "PATH")]
    pub summary: Option<PathBuf>,
    /// JSON defaults for peak, band, estimator, linkage and output options.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize an FRF from a modal model.
    Synth(SynthArgs),
    /// Estimate FRFs from the time records of a manifest.
    Estimate(EstimateArgs),
    /// Extract the modal feature table.
    Extract(ExtractArgs),
    /// Compute a distance matrix.
    Distance(DistanceArgs),
    /// Cluster a distance matrix and order its leaves.
    Cluster(ClusterArgs),
    /// Draw an SVG figure.
    Report(ReportArgs),
    /// Run estimate, extract, distance, cluster and report on a manifest.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct PeakArgs {
    /// Number of resonances kept per FRF.
    #[arg(long)]
    pub n_peaks: Option<usize>,
    /// Lower edge of the analysis band in Hz.
    #[arg(long)]
    pub fmin: Option<f64>,
    /// Upper edge of the analysis band in Hz.
    #[arg(long)]
    pub fmax: Option<f64>,
    /// Minimum peak prominence in dB.
    #[arg(long)]
    pub prominence_db: Option<f64>,
    /// Minimum spacing between peaks in Hz (default: five grid steps).
    #[arg(long)]
    pub min_sep_hz: Option<f64>,
    /// Interference-removal passes after the peak-local estimate.
    #[arg(long)]
    pub passes: Option<usize>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct EstimatorArgs {
    #[arg(long, value_parser = estimator_parser())]
    pub estimator: Option<Estimator>,
    /// Exponential window time constant in seconds (rectangular if absent).
    #[arg(long, value_name = "SECONDS")]
    pub tau_s: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Model JSON: {"modes": [{"frequency_hz", "damping_ratio", "residue"}]}.
    pub model: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub f_min: f64,
    #[arg(long)]
    pub f_max: f64,
    #[arg(long, default_value_t = 1.0)]
    pub df: f64,
    /// Output FRF CSV.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Also write an impulse force/velocity pair and a manifest into this
    /// directory.
    #[arg(long, value_name = "DIR", requires = "fs")]
    pub records: Option<PathBuf>,
    /// Sample rate of the records.
    #[arg(long)]
    pub fs: Option<f64>,
    /// Record length in samples.
    #[arg(long, default_value_t = 8192)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    pub manifest: PathBuf,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    /// Output directory for `<label>.csv` and `<label>.coherence.csv`.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// FRF CSV files; labels are the file stems.
    pub frfs: Vec<PathBuf>,
    /// Manifest to read instead of (or besides) FRF files.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[command(flatten)]
    pub peaks: PeakArgs,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    /// Output features CSV.
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    /// FRF CSV files.
    pub frfs: Vec<PathBuf>,
    /// Features CSV to read instead of FRFs.
    #[arg(long, conflicts_with = "frfs")]
    pub features: Option<PathBuf>,
    #[arg(long, value_parser = metric_parser())]
    pub metric: Option<Metric>,
    #[command(flatten)]
    pub peaks: PeakArgs,
    /// Output distance CSV.
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    pub distance: PathBuf,
    #[arg(long, value_parser = linkage_parser())]
    pub linkage: Option<Linkage>,
    /// Directory for dendrogram.json, dendrogram.nwk and distance.ordered.csv.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    FrfOverlay,
    FeatureHeatmap,
    DistanceHeatmap,
    Dendrogram,
    PowerFraction,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long, value_enum)]
    pub figure: Figure,
    /// FRF CSV (frf-overlay, power-fraction; repeatable).
    #[arg(long)]
    pub frf: Vec<PathBuf>,
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long)]
    pub distance: Option<PathBuf>,
    /// Dendrogram JSON; heatmaps follow its leaf order.
    #[arg(long)]
    pub dendrogram: Option<PathBuf>,
    #[command(flatten)]
    pub peaks: PeakArgs,
    /// Smoothing width in bins of the power-fraction slope.
    #[arg(long)]
    pub smoothing: Option<usize>,
    #[arg(long)]
    pub title: Option<String>,
    /// Output SVG.
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    pub manifest: PathBuf,
    #[command(flatten)]
    pub peaks: PeakArgs,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    #[arg(long, value_parser = linkage_parser())]
    pub linkage: Option<Linkage>,
    #[arg(long)]
    pub smoothing: Option<usize>,
    /// Output directory.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}
