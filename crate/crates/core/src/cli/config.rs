use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::args::{EstimatorArgs, PeakArgs};
use super::Failure;
use crate::clustering::Linkage;
use crate::estimation::{Estimator, Window};
use crate::features::{Band, PeakConfig};
use crate::metrics::Metric;

/// Defaults read from `--config`; command-line flags take precedence.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n_peaks: Option<usize>,
    pub fmin: Option<f64>,
    pub fmax: Option<f64>,
    pub prominence_db: Option<f64>,
    pub min_sep_hz: Option<f64>,
    pub passes: Option<usize>,
    pub estimator: Option<Estimator>,
    pub tau_s: Option<f64>,
    pub linkage: Option<Linkage>,
    pub metric: Option<Metric>,
    pub smoothing: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
    }

    pub fn peak_config(&self, a: &PeakArgs) -> Result<PeakConfig, Failure> {
        let d = PeakConfig::default();
        let band = Band::new(
            a.fmin.or(self.fmin).unwrap_or(d.band.f_min()),
            a.fmax.or(self.fmax).unwrap_or(d.band.f_max()),
        )
        .map_err(|e| Failure::Usage(e.to_string()))?;
        let cfg = PeakConfig {
            n_peaks: a.n_peaks.or(self.n_peaks).unwrap_or(d.n_peaks),
            min_separation_hz: a.min_sep_hz.or(self.min_sep_hz),
            min_prominence_db: a.prominence_db.or(self.prominence_db).unwrap_or(d.min_prominence_db),
            band,
            interference_passes: a.passes.or(self.passes).unwrap_or(d.interference_passes),
        };
        cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        Ok(cfg)
    }

    pub fn band(&self, a: &PeakArgs) -> Result<Band, Failure> {
        Ok(self.peak_config(a)?.band)
    }

    pub fn estimator(&self, a: &EstimatorArgs) -> Estimator {
        a.estimator.or(self.estimator).unwrap_or_default()
    }

    pub fn window(&self, a: &EstimatorArgs) -> Result<Window, Failure> {
        match a.tau_s.or(self.tau_s) {
            None => Ok(Window::Rectangular),
            Some(tau_s) if tau_s > 0.0 => Ok(Window::Exponential { tau_s }),
            Some(tau_s) => Err(Failure::Usage(format!("--tau-s must be > 0, got {tau_s}"))),
        }
    }

    pub fn linkage(&self, flag: Option<Linkage>) -> Linkage {
        flag.or(self.linkage).unwrap_or_default()
    }

    pub fn metric(&self, flag: Option<Metric>) -> Metric {
        flag.or(self.metric).unwrap_or_default()
    }

    pub fn smoothing(&self, flag: Option<usize>) -> Result<usize, Failure> {
        match flag.or(self.smoothing).unwrap_or(11) {
            0 => Err(Failure::Usage("--smoothing must be at least 1".into())),
            s => Ok(s),
        }
    }

    pub fn output_dir(&self, flag: Option<&Path>) -> PathBuf {
        flag.map(Path::to_path_buf)
            .or_else(|| self.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("."))
    }
}
