//! Modal feature extraction.
//!
//! For each FRF the first N resonances are located on the dB magnitude,
//! refined by three-point parabolic interpolation and characterised by the
//! half-power bandwidth. The results of M FRFs are stacked into the
//! frequency (F), amplitude (P) and quality-factor (Q) matrices.
//!
//! Neighbouring modes leak into each other's peaks: a mode ten bandwidths
//! away still adds a background of order 10% under a resonance, which
//! skews both the peak location and the half-power crossings. After the
//! first peak-local pass, [`extract_features`] therefore re-estimates every
//! peak on the FRF minus the modal terms of all the other extracted peaks,
//! for up to [`PeakConfig::interference_passes`] passes.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frf::{damping_from_q, DbSpectrum, FrequencySeries, ModalParameter, ModalPeak};

/// Half-power level below the peak, `10 log10 2` dB.
pub const HALF_POWER_DB: f64 = 3.010_299_956_639_812;

/// Analysis band in Hz, inclusive at both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    f_min: f64,
    f_max: f64,
}

impl Band {
    pub fn new(f_min: f64, f_max: f64) -> Result<Self> {
        if f_min.is_nan() || f_max.is_nan() || f_min >= f_max {
            return Err(Error::Argument(format!(
                "band needs f_min < f_max, got ({f_min}, {f_max})"
            )));
        }
        Ok(Self { f_min, f_max })
    }

    /// Everything the grid holds.
    pub fn full() -> Self {
        Self {
            f_min: 0.0,
            f_max: f64::INFINITY,
        }
    }

    /// Signature-mode region of violin bridge admittances.
    pub fn violin() -> Self {
        Self {
            f_min: 30.0,
            f_max: 1400.0,
        }
    }

    pub fn f_min(&self) -> f64 {
        self.f_min
    }

    pub fn f_max(&self) -> f64 {
        self.f_max
    }

    pub fn contains(&self, f: f64) -> bool {
        f >= self.f_min && f <= self.f_max
    }

    /// Grid indices inside the band, or an error when they do not overlap.
    pub fn index_range(&self, f0: f64, df: f64, len: usize) -> Result<RangeInclusive<usize>> {
        let lo = ((self.f_min - f0) / df).ceil().max(0.0);
        let hi = ((self.f_max - f0) / df).floor();
        if hi < lo || lo >= len as f64 {
            return Err(Error::Argument(format!(
                "band ({}, {}) Hz does not overlap the grid",
                self.f_min, self.f_max
            )));
        }
        let hi = if hi >= len as f64 { len - 1 } else { hi as usize };
        Ok(lo as usize..=hi)
    }
}

impl Default for Band {
    fn default() -> Self {
        Self::full()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakConfig {
    /// Number of resonances to keep (the lowest in frequency).
    pub n_peaks: usize,
    /// Minimum spacing between accepted peaks; `None` means five grid steps.
    pub min_separation_hz: Option<f64>,
    pub min_prominence_db: f64,
    pub band: Band,
    /// Interference-removal passes after the peak-local estimate; 0 keeps
    /// the plain peak-local result.
    pub interference_passes: usize,
}

impl Default for PeakConfig {
    fn default() -> Self {
        Self {
            n_peaks: 10,
            min_separation_hz: None,
            min_prominence_db: 3.0,
            band: Band::full(),
            interference_passes: 4,
        }
    }
}

impl PeakConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_peaks == 0 {
            return Err(Error::Argument("n_peaks must be at least 1".into()));
        }
        if let Some(sep) = self.min_separation_hz {
            if !(sep >= 0.0) {
                return Err(Error::Argument(format!(
                    "min_separation_hz must be >= 0, got {sep}"
                )));
            }
        }
        if !(self.min_prominence_db >= 0.0) {
            return Err(Error::Argument(format!(
                "min_prominence_db must be >= 0, got {}",
                self.min_prominence_db
            )));
        }
        Band::new(self.band.f_min, self.band.f_max).map(|_| ())
    }

    fn separation_hz(&self, df: f64) -> f64 {
        self.min_separation_hz.unwrap_or(5.0 * df)
    }
}

/// All maxima of the dB magnitude in the band that pass the prominence and
/// separation tests, ascending in frequency.
pub fn find_all_peaks(frf: &FrequencySeries, cfg: &PeakConfig) -> Result<Vec<usize>> {
    cfg.validate()?;
    let db = frf.magnitude_db();
    let range = cfg.band.index_range(frf.f0(), frf.df(), frf.len())?;
    let (lo, hi) = (*range.start(), *range.end());

    let mut candidates = Vec::new();
    let mut i = lo.max(1);
    while i < hi {
        let (Some(prev), Some(cur)) = (db.level(i - 1), db.level(i)) else {
            i += 1;
            continue;
        };
        if cur <= prev {
            i += 1;
            continue;
        }
        // Walk across a flat top; a plateau peak sits at its middle.
        let mut j = i + 1;
        while j <= hi && db.level(j) == Some(cur) {
            j += 1;
        }
        if j <= hi {
            if let Some(next) = db.level(j) {
                if next < cur {
                    candidates.push((i + j - 1) / 2);
                }
            }
        }
        i = j;
    }

    let prominent: Vec<usize> = candidates
        .into_iter()
        .filter(|&k| prominence(&db, k, lo, hi) >= cfg.min_prominence_db)
        .collect();

    let sep = cfg.separation_hz(frf.df());
    let mut by_height = prominent.clone();
    by_height.sort_by(|&a, &b| {
        let (ya, yb) = (db.level(a).unwrap(), db.level(b).unwrap());
        yb.total_cmp(&ya).then(a.cmp(&b))
    });
    let mut kept: Vec<usize> = Vec::new();
    for k in by_height {
        let fk = frf.frequency(k);
        if kept.iter().all(|&j| (frf.frequency(j) - fk).abs() >= sep) {
            kept.push(k);
        }
    }
    kept.sort_unstable();
    Ok(kept)
}

/// Height of a peak above the higher of the two lowest points reachable
/// on either side before meeting a higher sample, an unusable bin or the
/// band edge.
fn prominence(db: &DbSpectrum, k: usize, lo: usize, hi: usize) -> f64 {
    let peak = db.level(k).unwrap();
    let mut left_min = peak;
    let mut j = k;
    while j > lo {
        j -= 1;
        match db.level(j) {
            Some(v) if v <= peak => left_min = left_min.min(v),
            _ => break,
        }
    }
    let mut right_min = peak;
    let mut j = k;
    while j < hi {
        j += 1;
        match db.level(j) {
            Some(v) if v <= peak => right_min = right_min.min(v),
            _ => break,
        }
    }
    peak - left_min.max(right_min)
}

/// Indices of the lowest `cfg.n_peaks` qualifying maxima.
pub fn find_peaks(frf: &FrequencySeries, cfg: &PeakConfig) -> Result<Vec<usize>> {
    let mut all = find_all_peaks(frf, cfg)?;
    if all.len() < cfg.n_peaks {
        return Err(Error::InsufficientPeaks {
            found: all.len(),
            required: cfg.n_peaks,
        });
    }
    all.truncate(cfg.n_peaks);
    Ok(all)
}

/// Vertex of the parabola through three dB samples around a maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolicPeak {
    pub f_hat: f64,
    pub p_hat: f64,
    /// Offset of the vertex from the centre sample, in grid steps.
    pub offset: f64,
    /// Zero curvature: the centre sample is returned unrefined.
    pub degenerate: bool,
}

pub fn refine_peak_parabolic(db: &DbSpectrum, idx: usize) -> Result<ParabolicPeak> {
    if idx == 0 || idx + 1 >= db.len() {
        return Err(Error::Argument(format!(
            "peak index {idx} has no neighbour on both sides"
        )));
    }
    let (Some(ym), Some(y0), Some(yp)) = (db.level(idx - 1), db.level(idx), db.level(idx + 1))
    else {
        return Err(Error::Argument(format!(
            "levels around index {idx} are not all finite"
        )));
    };
    if y0 < ym || y0 < yp {
        return Err(Error::Argument(format!("index {idx} is not a local maximum")));
    }
    let curvature = ym - 2.0 * y0 + yp;
    if curvature == 0.0 {
        return Ok(ParabolicPeak {
            f_hat: db.frequency(idx),
            p_hat: y0,
            offset: 0.0,
            degenerate: true,
        });
    }
    let offset = (0.5 * (ym - yp) / curvature).clamp(-0.5, 0.5);
    Ok(ParabolicPeak {
        f_hat: db.frequency(idx) + offset * db.df,
        p_hat: y0 - 0.25 * (ym - yp) * offset,
        offset,
        degenerate: false,
    })
}

/// Peak level in dB from the parabola through `1 / |H|^2` at the three
/// samples around `idx`.
///
/// The reciprocal power of an isolated resonance is a polynomial of low
/// order around the peak, so this vertex stays accurate when the
/// half-power bandwidth spans only a couple of grid steps, where the dB
/// parabola falls short by several tenths of a dB.
pub fn peak_level_reciprocal(frf: &FrequencySeries, idx: usize) -> Option<f64> {
    if idx == 0 || idx + 1 >= frf.len() {
        return None;
    }
    let valid = frf.valid();
    if !(valid[idx - 1] && valid[idx] && valid[idx + 1]) {
        return None;
    }
    let p = |k: usize| {
        let m = frf.values()[k].norm_sqr();
        (m > 0.0).then(|| 1.0 / m)
    };
    let (pm, p0, pp) = (p(idx - 1)?, p(idx)?, p(idx + 1)?);
    let curvature = pm - 2.0 * p0 + pp;
    if !(curvature > 0.0) {
        return None;
    }
    let offset = 0.5 * (pm - pp) / curvature;
    if offset.abs() > 0.5 {
        return None;
    }
    let vertex = p0 - 0.25 * (pm - pp) * offset;
    (vertex > 0.0 && vertex.is_finite()).then(|| -10.0 * vertex.log10())
}

/// Half-power crossing frequencies around a peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPower {
    pub f_low: f64,
    pub f_high: f64,
}

impl HalfPower {
    pub fn bandwidth(&self) -> f64 {
        self.f_high - self.f_low
    }
}

/// Locates the frequencies where the dB magnitude falls `10 log10 2` below
/// `p_hat` on both sides of `f_hat`, searching only inside `limits`. Each
/// crossing is linearly interpolated between the bracketing samples.
pub fn half_power_crossings(
    frf: &FrequencySeries,
    f_hat: f64,
    p_hat: f64,
    limits: RangeInclusive<usize>,
) -> Result<HalfPower> {
    let db = frf.magnitude_db();
    let (lo, hi) = (*limits.start(), (*limits.end()).min(frf.len() - 1));
    let level = p_hat - HALF_POWER_DB;
    let above = |k: usize| db.level(k).is_some_and(|v| v >= level);

    let guess = frf.nearest_index(f_hat).clamp(lo, hi);
    let start = [guess, guess.saturating_sub(1), (guess + 1).min(hi)]
        .into_iter()
        .filter(|&k| k >= lo && above(k))
        .max_by(|&a, &b| db.level(a).unwrap().total_cmp(&db.level(b).unwrap()));
    let Some(start) = start else {
        return Err(Error::BandwidthUnresolved {
            f_hat_hz: f_hat,
            searched_hz: frf.df(),
        });
    };

    let mut left = start;
    while left > lo && above(left - 1) {
        left -= 1;
    }
    let mut right = start;
    while right < hi && above(right + 1) {
        right += 1;
    }

    let crossing = |below: usize, top: usize| -> Option<f64> {
        let yb = db.level(below)?;
        let yt = db.level(top)?;
        let t = (level - yb) / (yt - yb);
        Some(frf.frequency(below) + t * (frf.frequency(top) - frf.frequency(below)))
    };
    let f_low = (left > lo).then(|| crossing(left - 1, left)).flatten();
    let f_high = (right < hi).then(|| crossing(right + 1, right)).flatten();
    match (f_low, f_high) {
        (Some(f_low), Some(f_high)) => Ok(HalfPower { f_low, f_high }),
        (a, b) => {
            let low = a.unwrap_or_else(|| frf.frequency(left));
            let high = b.unwrap_or_else(|| frf.frequency(right));
            Err(Error::BandwidthUnresolved {
                f_hat_hz: f_hat,
                searched_hz: (high - low).max(frf.df()),
            })
        }
    }
}

/// Quality factor `f_hat / (f_high - f_low)` from the half-power crossings,
/// searching the whole grid.
pub fn estimate_q_half_power(frf: &FrequencySeries, f_hat: f64, p_hat: f64) -> Result<f64> {
    let hp = half_power_crossings(frf, f_hat, p_hat, 0..=frf.len() - 1)?;
    Ok(f_hat / hp.bandwidth())
}

/// Conditions met while extracting one peak.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PeakFlags {
    /// The half-power level was not reached on one side; Q was imputed as
    /// `f / searched width`.
    pub bandwidth_unresolved: bool,
    /// Zero curvature around the maximum; the grid sample was used as is.
    pub unrefined: bool,
}

impl PeakFlags {
    pub fn any(&self) -> bool {
        self.bandwidth_unresolved || self.unrefined
    }
}

/// Resonance triples of one FRF with their flags.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakExtraction {
    pub peaks: Vec<ModalPeak>,
    pub flags: Vec<PeakFlags>,
    /// Grid indices of the detected maxima.
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
struct PeakState {
    idx: usize,
    f_r: f64,
    p_r: f64,
    q_r: f64,
    sign: f64,
    flags: PeakFlags,
}

impl PeakState {
    fn modal_parameter(&self) -> Option<ModalParameter> {
        let xi = damping_from_q(self.q_r);
        let omega = 2.0 * PI * self.f_r;
        let phi = self.sign * 10f64.powf(self.p_r / 20.0) * 2.0 * xi * omega * omega;
        ModalParameter::new(omega, xi, phi).ok()
    }
}

/// Maps the maximum of a single modal term back to its natural frequency
/// and its level at that frequency. The maximum of
/// `phi / (w_r^2 + 2j w xi w_r - w^2)` lies at `w_r sqrt(1 - 2 xi^2)` with
/// height `phi / (2 xi w_r^2 sqrt(1 - xi^2))`.
fn natural_from_peak(f_peak: f64, level_db: f64, q: f64) -> (f64, f64) {
    let xi = damping_from_q(q);
    let shift = 1.0 - 2.0 * xi * xi;
    if shift <= 0.0 {
        return (f_peak, level_db);
    }
    (f_peak / shift.sqrt(), level_db + 10.0 * (1.0 - xi * xi).log10())
}

/// Peak-local estimate at `idx` of `frf`.
fn estimate_peak(frf: &FrequencySeries, idx: usize, limits: RangeInclusive<usize>) -> Result<PeakState> {
    let db = frf.magnitude_db();
    let refined = refine_peak_parabolic(&db, idx)?;
    let level = peak_level_reciprocal(frf, idx).unwrap_or(refined.p_hat);
    let mut flags = PeakFlags {
        unrefined: refined.degenerate,
        ..PeakFlags::default()
    };
    let q = match half_power_crossings(frf, refined.f_hat, level, limits) {
        Ok(hp) => refined.f_hat / hp.bandwidth(),
        Err(Error::BandwidthUnresolved { searched_hz, .. }) => {
            flags.bandwidth_unresolved = true;
            refined.f_hat / searched_hz
        }
        Err(e) => return Err(e),
    };
    let (f_r, p_r) = natural_from_peak(refined.f_hat, level, q);
    let sign = if frf.values()[idx].im > 0.0 { -1.0 } else { 1.0 };
    Ok(PeakState {
        idx,
        f_r,
        p_r,
        q_r: q,
        sign,
        flags,
    })
}

/// Climbs the dB magnitude from `start` to the nearest local maximum
/// without leaving `limits`.
fn climb(db: &DbSpectrum, start: usize, limits: &RangeInclusive<usize>) -> Option<usize> {
    let (lo, hi) = (*limits.start(), *limits.end());
    let mut k = start.clamp(lo, hi);
    let mut level = db.level(k)?;
    loop {
        let left = (k > lo && k > 0).then(|| db.level(k - 1)).flatten();
        let right = (k < hi).then(|| db.level(k + 1)).flatten();
        match (left, right) {
            (Some(l), r) if l > level && r.is_none_or(|r| l >= r) => {
                k -= 1;
                level = l;
            }
            (_, Some(r)) if r > level => {
                k += 1;
                level = r;
            }
            _ => return Some(k),
        }
    }
}

/// First `cfg.n_peaks` resonances of `frf` as (frequency, dB level, Q)
/// triples, ascending in frequency.
pub fn extract_features(frf: &FrequencySeries, cfg: &PeakConfig) -> Result<PeakExtraction> {
    let all = find_all_peaks(frf, cfg)?;
    if all.len() < cfg.n_peaks {
        return Err(Error::InsufficientPeaks {
            found: all.len(),
            required: cfg.n_peaks,
        });
    }
    let last = frf.len() - 1;
    let limits: Vec<RangeInclusive<usize>> = (0..cfg.n_peaks)
        .map(|r| {
            let lo = if r == 0 { 0 } else { all[r - 1] };
            let hi = all.get(r + 1).copied().unwrap_or(last);
            lo..=hi
        })
        .collect();

    let mut states = (0..cfg.n_peaks)
        .map(|r| estimate_peak(frf, all[r], limits[r].clone()))
        .collect::<Result<Vec<_>>>()?;

    let omegas: Vec<f64> = (0..frf.len()).map(|k| 2.0 * PI * frf.frequency(k)).collect();
    for _ in 0..cfg.interference_passes {
        let terms: Vec<Option<ModalParameter>> = states.iter().map(PeakState::modal_parameter).collect();
        let mut next = states.clone();
        for (r, state) in next.iter_mut().enumerate() {
            // Only the search window of peak r is needed.
            let (lo, hi) = (*limits[r].start(), *limits[r].end());
            let values: Vec<Complex64> = (lo..=hi)
                .map(|k| {
                    terms
                        .iter()
                        .enumerate()
                        .filter(|(s, _)| *s != r)
                        .filter_map(|(_, t)| t.as_ref())
                        .fold(frf.values()[k], |acc, t| acc - t.response(omegas[k]))
                })
                .collect();
            let residual = FrequencySeries::with_mask(
                frf.frequency(lo),
                frf.df(),
                values,
                frf.valid()[lo..=hi].to_vec(),
            )?;
            let window = 0..=hi - lo;
            let db = residual.magnitude_db();
            let Some(idx) = climb(&db, state.idx - lo, &window) else {
                continue;
            };
            if let Ok(mut s) = estimate_peak(&residual, idx, window) {
                s.idx += lo;
                *state = s;
            }
        }
        let converged = states.iter().zip(&next).all(|(a, b)| {
            (a.f_r - b.f_r).abs() <= 1e-12 * a.f_r
                && (a.q_r - b.q_r).abs() <= 1e-12 * a.q_r
                && (a.p_r - b.p_r).abs() <= 1e-10
        });
        states = next;
        if converged {
            break;
        }
    }

    if states.windows(2).any(|w| w[1].f_r <= w[0].f_r) {
        return Err(Error::Domain(
            "extracted resonance frequencies are not strictly increasing".into(),
        ));
    }
    let peaks = states
        .iter()
        .map(|s| ModalPeak::new(s.f_r, s.p_r, s.q_r))
        .collect::<Result<Vec<_>>>()?;
    Ok(PeakExtraction {
        peaks,
        flags: states.iter().map(|s| s.flags).collect(),
        indices: states.iter().map(|s| s.idx).collect(),
    })
}

/// The F, P and Q matrices of a dataset, one row per FRF.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrices {
    labels: Vec<String>,
    f: Array2<f64>,
    p: Array2<f64>,
    q: Array2<f64>,
    flags: Vec<Vec<PeakFlags>>,
}

impl FeatureMatrices {
    pub fn new(labels: Vec<String>, f: Array2<f64>, p: Array2<f64>, q: Array2<f64>) -> Result<Self> {
        let flags = vec![vec![PeakFlags::default(); f.ncols()]; f.nrows()];
        Self::with_flags(labels, f, p, q, flags)
    }

    pub fn with_flags(
        labels: Vec<String>,
        f: Array2<f64>,
        p: Array2<f64>,
        q: Array2<f64>,
        flags: Vec<Vec<PeakFlags>>,
    ) -> Result<Self> {
        if f.dim() != p.dim() || f.dim() != q.dim() {
            return Err(Error::Argument(format!(
                "F, P and Q shapes differ: {:?}, {:?}, {:?}",
                f.dim(),
                p.dim(),
                q.dim()
            )));
        }
        if labels.len() != f.nrows() || flags.len() != f.nrows() {
            return Err(Error::Argument(format!(
                "{} labels for {} rows",
                labels.len(),
                f.nrows()
            )));
        }
        if f.iter().chain(p.iter()).chain(q.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Domain("feature matrices must be finite".into()));
        }
        for (m, row) in f.rows().into_iter().enumerate() {
            if row.iter().zip(row.iter().skip(1)).any(|(a, b)| b <= a) {
                return Err(Error::Domain(format!(
                    "row '{}' of F is not strictly increasing",
                    labels[m]
                )));
            }
        }
        if q.iter().any(|&v| v <= 0.0) {
            return Err(Error::Domain("Q entries must be positive".into()));
        }
        Ok(Self {
            labels,
            f,
            p,
            q,
            flags,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn f(&self) -> &Array2<f64> {
        &self.f
    }

    pub fn p(&self) -> &Array2<f64> {
        &self.p
    }

    pub fn q(&self) -> &Array2<f64> {
        &self.q
    }

    pub fn flags(&self) -> &[Vec<PeakFlags>] {
        &self.flags
    }

    /// Number of FRFs M.
    pub fn n_rows(&self) -> usize {
        self.f.nrows()
    }

    /// Number of resonances N.
    pub fn n_peaks(&self) -> usize {
        self.f.ncols()
    }

    pub fn row(&self, m: usize) -> Vec<ModalPeak> {
        (0..self.n_peaks())
            .map(|n| ModalPeak {
                f_r: self.f[[m, n]],
                p_r: self.p[[m, n]],
                q_r: self.q[[m, n]],
            })
            .collect()
    }

    /// (label, column) of every flagged entry.
    pub fn flagged(&self) -> Vec<(String, usize, PeakFlags)> {
        self.flags
            .iter()
            .enumerate()
            .flat_map(|(m, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(_, f)| f.any())
                    .map(move |(n, f)| (self.labels[m].clone(), n, *f))
            })
            .collect()
    }
}

/// Extracts every member of a labelled dataset. Rows follow input order;
/// extraction runs in parallel.
pub fn build_feature_matrices(
    dataset: &[(String, FrequencySeries)],
    cfg: &PeakConfig,
) -> Result<FeatureMatrices> {
    if dataset.len() < 2 {
        return Err(Error::InsufficientSamples {
            found: dataset.len(),
        });
    }
    cfg.validate()?;
    let results: Vec<Result<PeakExtraction>> = dataset
        .par_iter()
        .map(|(_, frf)| extract_features(frf, cfg))
        .collect();

    let (m, n) = (dataset.len(), cfg.n_peaks);
    let mut f = Array2::zeros((m, n));
    let mut p = Array2::zeros((m, n));
    let mut q = Array2::zeros((m, n));
    let mut flags = Vec::with_capacity(m);
    let mut failures = Vec::new();
    for (row, ((label, _), result)) in dataset.iter().zip(results).enumerate() {
        match result {
            Ok(ex) => {
                for (col, peak) in ex.peaks.iter().enumerate() {
                    f[[row, col]] = peak.f_r;
                    p[[row, col]] = peak.p_r;
                    q[[row, col]] = peak.q_r;
                }
                flags.push(ex.flags);
            }
            Err(e) => {
                failures.push((label.clone(), Box::new(e)));
                flags.push(Vec::new());
            }
        }
    }
    if !failures.is_empty() {
        return Err(Error::Extraction(failures));
    }
    let labels = dataset.iter().map(|(l, _)| l.clone()).collect();
    FeatureMatrices::with_flags(labels, f, p, q, flags)
}
