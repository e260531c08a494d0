//! Distances between FRFs.
//!
//! The feature distance standardises every column of F, P and Q, takes
//! the Euclidean distance between rows in each subspace and adds the
//! three. The MSE of dB magnitudes and the cumulative power fraction are
//! provided as whole-spectrum baselines.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Band, FeatureMatrices};
use crate::frf::FrequencySeries;

/// Symmetric tolerance accepted by [`DistanceMatrix::new`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Labelled M x M distances: symmetric, zero diagonal, nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    d: Array2<f64>,
}

impl DistanceMatrix {
    pub fn new(labels: Vec<String>, d: Array2<f64>) -> Result<Self> {
        let violations = Self::violations(&labels, &d);
        if !violations.is_empty() {
            return Err(Error::InvalidDistance(violations));
        }
        Ok(Self { labels, d })
    }

    /// Everything that keeps `d` from being a valid distance matrix.
    pub fn violations(labels: &[String], d: &Array2<f64>) -> Vec<String> {
        let mut out = Vec::new();
        let (rows, cols) = d.dim();
        if rows != cols {
            out.push(format!("matrix is {rows}x{cols}, not square"));
            return out;
        }
        if labels.len() != rows {
            out.push(format!("{} labels for {rows} rows", labels.len()));
        }
        for i in 0..rows {
            if d[[i, i]] != 0.0 {
                out.push(format!("d[{i},{i}] = {} is not zero", d[[i, i]]));
            }
            for j in 0..cols {
                let v = d[[i, j]];
                if !v.is_finite() {
                    out.push(format!("d[{i},{j}] is not finite"));
                } else if v < 0.0 {
                    out.push(format!("d[{i},{j}] = {v} is negative"));
                }
                if j > i && (v - d[[j, i]]).abs() > SYMMETRY_TOLERANCE {
                    out.push(format!("d[{i},{j}] = {v} but d[{j},{i}] = {}", d[[j, i]]));
                }
            }
        }
        out
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.d
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[[i, j]]
    }

    /// Upper-triangle entries, row by row.
    pub fn off_diagonal(&self) -> Vec<f64> {
        let m = self.len();
        (0..m)
            .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
            .map(|(i, j)| self.d[[i, j]])
            .collect()
    }

    /// Ratio of the largest to the mean off-diagonal entry.
    pub fn contrast(&self) -> f64 {
        let off = self.off_diagonal();
        let max = off.iter().copied().fold(0.0, f64::max);
        let mean = off.iter().sum::<f64>() / off.len() as f64;
        max / mean
    }

    /// Pair `(i, j)`, `i < j`, with the smallest distance; ties go to the
    /// lowest indices.
    pub fn closest_pair(&self) -> Option<(usize, usize)> {
        let m = self.len();
        let mut best: Option<(usize, usize)> = None;
        for i in 0..m {
            for j in i + 1..m {
                if best.is_none_or(|(a, b)| self.d[[i, j]] < self.d[[a, b]]) {
                    best = Some((i, j));
                }
            }
        }
        best
    }

    /// Entrywise sum with a matrix over the same labels.
    pub fn add(&self, other: &DistanceMatrix) -> Result<DistanceMatrix> {
        if self.labels != other.labels {
            return Err(Error::Argument("distance matrices have different labels".into()));
        }
        Ok(DistanceMatrix {
            labels: self.labels.clone(),
            d: &self.d + &other.d,
        })
    }
}

/// Column-wise standardisation with the population standard deviation.
/// Columns whose entries are all equal become zero.
pub fn zscore_normalize(matrix: &Array2<f64>) -> Result<Array2<f64>> {
    let m = matrix.nrows();
    if m < 2 {
        return Err(Error::InsufficientSamples { found: m });
    }
    let mut out = Array2::zeros(matrix.dim());
    for (j, col) in matrix.columns().into_iter().enumerate() {
        let first = col[0];
        if col.iter().all(|&v| v == first) {
            continue;
        }
        let mean = col.sum() / m as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m as f64;
        let std = var.sqrt();
        for (i, v) in col.iter().enumerate() {
            out[[i, j]] = (v - mean) / std;
        }
    }
    Ok(out)
}

fn euclidean(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Euclidean distances between the rows of an (already normalised) matrix.
pub fn subspace_distance(matrix: &Array2<f64>, labels: &[String]) -> Result<DistanceMatrix> {
    let m = matrix.nrows();
    let mut d = Array2::zeros((m, m));
    for i in 0..m {
        for j in i + 1..m {
            let v = euclidean(matrix.row(i), matrix.row(j));
            d[[i, j]] = v;
            d[[j, i]] = v;
        }
    }
    DistanceMatrix::new(labels.to_vec(), d)
}

/// One of the three feature subspaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subspace {
    Frequency,
    Amplitude,
    Quality,
}

impl Subspace {
    pub const ALL: [Subspace; 3] = [Subspace::Frequency, Subspace::Amplitude, Subspace::Quality];

    pub fn select<'a>(&self, fm: &'a FeatureMatrices) -> &'a Array2<f64> {
        match self {
            Subspace::Frequency => fm.f(),
            Subspace::Amplitude => fm.p(),
            Subspace::Quality => fm.q(),
        }
    }
}

/// Distance restricted to one subspace, after standardisation.
pub fn feature_subspace_distance(fm: &FeatureMatrices, subspace: Subspace) -> Result<DistanceMatrix> {
    subspace_distance(&zscore_normalize(subspace.select(fm))?, fm.labels())
}

/// Per-subspace weights of the combined distance; all 1 by default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureWeights {
    pub frequency: f64,
    pub amplitude: f64,
    pub quality: f64,
}

impl Default for FeatureWeights {
    fn default() -> Self {
        Self {
            frequency: 1.0,
            amplitude: 1.0,
            quality: 1.0,
        }
    }
}

/// Sum of the frequency, amplitude and Q subspace distances.
pub fn combined_distance(fm: &FeatureMatrices) -> Result<DistanceMatrix> {
    combined_distance_weighted(fm, &FeatureWeights::default())
}

pub fn combined_distance_weighted(fm: &FeatureMatrices, w: &FeatureWeights) -> Result<DistanceMatrix> {
    if fm.n_rows() < 2 {
        return Err(Error::InsufficientSamples { found: fm.n_rows() });
    }
    let weights = [w.frequency, w.amplitude, w.quality];
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::Argument("feature weights must be finite and >= 0".into()));
    }
    let m = fm.n_rows();
    let mut d = Array2::zeros((m, m));
    for (subspace, weight) in Subspace::ALL.iter().zip(weights) {
        d = d + feature_subspace_distance(fm, *subspace)?.matrix() * weight;
    }
    DistanceMatrix::new(fm.labels().to_vec(), d)
}

/// Mean over usable in-band bins of the squared dB difference.
pub fn mse_distance(a: &FrequencySeries, b: &FrequencySeries, band: &Band) -> Result<f64> {
    if !a.same_grid(b) {
        return Err(Error::Grid(format!(
            "grids differ: (f0 {}, df {}, {} bins) vs (f0 {}, df {}, {} bins)",
            a.f0(),
            a.df(),
            a.len(),
            b.f0(),
            b.df(),
            b.len()
        )));
    }
    let range = band.index_range(a.f0(), a.df(), a.len())?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for k in range {
        if let (Some(x), Some(y)) = (a.db(k), b.db(k)) {
            sum += (x - y).powi(2);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Argument("no usable bins inside the band".into()));
    }
    Ok(sum / count as f64)
}

/// Pairwise MSE over a dataset sharing one grid.
pub fn mse_matrix(dataset: &[(String, FrequencySeries)], band: &Band) -> Result<DistanceMatrix> {
    let m = dataset.len();
    let mut d = Array2::zeros((m, m));
    for i in 0..m {
        for j in i + 1..m {
            let v = mse_distance(&dataset[i].1, &dataset[j].1, band)?;
            d[[i, j]] = v;
            d[[j, i]] = v;
        }
    }
    DistanceMatrix::new(dataset.iter().map(|(l, _)| l.clone()).collect(), d)
}

fn power_density(frf: &FrequencySeries) -> Vec<f64> {
    frf.values()
        .iter()
        .zip(frf.valid())
        .map(|(v, ok)| if *ok { v.norm_sqr() } else { 0.0 })
        .collect()
}

fn cumulative_power(frf: &FrequencySeries) -> Result<Vec<f64>> {
    let density = power_density(frf);
    let mut cum = Vec::with_capacity(density.len());
    let mut acc = 0.0;
    cum.push(0.0);
    for w in density.windows(2) {
        acc += 0.5 * (w[0] + w[1]) * frf.df();
        cum.push(acc);
    }
    if !(acc > 0.0) {
        return Err(Error::Domain("series carries no power".into()));
    }
    Ok(cum)
}

/// Fraction of the total `|H|^2` (trapezoidal) accumulated up to `f`.
pub fn power_fraction(frf: &FrequencySeries, f: f64) -> Result<f64> {
    let (start, end) = (frf.f0(), frf.last_frequency());
    if !(f >= start && f <= end) {
        return Err(Error::Argument(format!(
            "{f} Hz lies outside the grid [{start}, {end}]"
        )));
    }
    if frf.len() < 2 {
        return Err(Error::Argument("power fraction needs at least 2 bins".into()));
    }
    let cum = cumulative_power(frf)?;
    let total = *cum.last().unwrap();
    if f == end {
        return Ok(1.0);
    }
    let pos = (f - start) / frf.df();
    let k = (pos.floor() as usize).min(frf.len() - 2);
    let t = pos - k as f64;
    let density = power_density(frf);
    let at_f = density[k] + t * (density[k + 1] - density[k]);
    let partial = cum[k] + 0.5 * (density[k] + at_f) * t * frf.df();
    Ok((partial / total).clamp(0.0, 1.0))
}

/// Power fraction at every grid point; nondecreasing, ends at exactly 1.
pub fn power_fraction_curve(frf: &FrequencySeries) -> Result<Vec<f64>> {
    let cum = cumulative_power(frf)?;
    let total = *cum.last().unwrap();
    let mut out: Vec<f64> = cum.iter().map(|c| (c / total).min(1.0)).collect();
    *out.last_mut().unwrap() = 1.0;
    Ok(out)
}

/// Centred moving average; windows are truncated at the edges.
fn moving_average(x: &[f64], width: usize) -> Vec<f64> {
    let half = width / 2;
    (0..x.len())
        .map(|k| {
            let lo = k.saturating_sub(half);
            let hi = (k + (width - 1 - half)).min(x.len() - 1);
            x[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

/// Frequency where the smoothed slope of the power-fraction curve peaks.
///
/// The slope at a grid point is the central difference of the cumulative
/// trapezoidal power (one-sided at the ends). Values within a relative
/// 1e-9 of the maximum count as ties and resolve to the lowest frequency.
pub fn bridge_hill_indicator(frf: &FrequencySeries, smoothing: usize) -> Result<f64> {
    if smoothing == 0 {
        return Err(Error::Argument("smoothing width must be at least 1 bin".into()));
    }
    let curve = power_fraction_curve(frf)?;
    let n = curve.len();
    let df = frf.df();
    let slope: Vec<f64> = (0..n)
        .map(|k| match k {
            0 => (curve[1] - curve[0]) / df,
            k if k == n - 1 => (curve[k] - curve[k - 1]) / df,
            k => (curve[k + 1] - curve[k - 1]) / (2.0 * df),
        })
        .collect();
    let smooth = moving_average(&slope, smoothing);
    let max = smooth.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let k = smooth
        .iter()
        .position(|&v| v >= max - 1e-9 * max.abs())
        .unwrap_or(0);
    Ok(frf.frequency(k))
}

/// Which distance the command line computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    #[default]
    Feature,
    FeatureF,
    FeatureP,
    FeatureQ,
    Mse,
}

impl Metric {
    pub fn subspace(&self) -> Option<Subspace> {
        match self {
            Metric::FeatureF => Some(Subspace::Frequency),
            Metric::FeatureP => Some(Subspace::Amplitude),
            Metric::FeatureQ => Some(Subspace::Quality),
            _ => None,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Feature => "feature",
            Metric::FeatureF => "feature-f",
            Metric::FeatureP => "feature-p",
            Metric::FeatureQ => "feature-q",
            Metric::Mse => "mse",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "feature" => Ok(Metric::Feature),
            "feature-f" => Ok(Metric::FeatureF),
            "feature-p" => Ok(Metric::FeatureP),
            "feature-q" => Ok(Metric::FeatureQ),
            "mse" => Ok(Metric::Mse),
            other => Err(Error::Argument(format!("unknown metric '{other}'"))),
        }
    }
}
