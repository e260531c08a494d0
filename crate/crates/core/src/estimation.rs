//! FRF estimation from hammer-test time records.
//!
//! Each acquisition is transformed as a single record (no segmentation).
//! Auto- and cross-spectra are averaged over the acquisitions and combined
//! into the H1, H2 and Hv estimators. Bins where the averaged excitation
//! power falls below [`MASK_THRESHOLD`] times its maximum are masked.

use std::borrow::Cow;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frf::{FrequencySeries, ModalModel};

/// Relative power below which a bin is treated as unexcited.
pub const MASK_THRESHOLD: f64 = 1e-12;

/// Physical quantity carried by a [`TimeRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Force,
    Velocity,
    Acceleration,
}

impl fmt::Display for RecordKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RecordKind::Force => "force",
            RecordKind::Velocity => "velocity",
            RecordKind::Acceleration => "acceleration",
        })
    }
}

impl FromStr for RecordKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "force" => Ok(RecordKind::Force),
            "velocity" => Ok(RecordKind::Velocity),
            "acceleration" => Ok(RecordKind::Acceleration),
            other => Err(Error::Argument(format!("unknown record kind '{other}'"))),
        }
    }
}

/// Uniformly sampled signal.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeRecord {
    fs: f64,
    samples: Vec<f64>,
    kind: RecordKind,
}

impl TimeRecord {
    pub fn new(fs: f64, samples: Vec<f64>, kind: RecordKind) -> Result<Self> {
        if !fs.is_finite() || fs <= 0.0 {
            return Err(Error::Argument(format!("sample rate must be > 0, got {fs}")));
        }
        if samples.is_empty() {
            return Err(Error::Argument("time record must not be empty".into()));
        }
        if let Some(k) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::Domain(format!("non-finite sample at index {k}")));
        }
        Ok(Self { fs, samples, kind })
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn kind(&self) -> RecordKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Repeated (excitation, response) acquisitions sharing rate and length.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    pairs: Vec<(TimeRecord, TimeRecord)>,
}

impl MeasurementSet {
    pub fn new(pairs: Vec<(TimeRecord, TimeRecord)>) -> Result<Self> {
        let Some((first_f, first_x)) = pairs.first() else {
            return Err(Error::Argument("measurement set needs at least one pair".into()));
        };
        let (fs, len, response_kind) = (first_f.fs, first_f.len(), first_x.kind);
        if response_kind == RecordKind::Force {
            return Err(Error::Argument("response records cannot be forces".into()));
        }
        for (i, (f, x)) in pairs.iter().enumerate() {
            if f.kind != RecordKind::Force {
                return Err(Error::Argument(format!(
                    "pair {i}: excitation must be a force record, got {}",
                    f.kind
                )));
            }
            if x.kind != response_kind {
                return Err(Error::Argument(format!(
                    "pair {i}: response kind {} differs from {response_kind}",
                    x.kind
                )));
            }
            for r in [f, x] {
                if r.fs != fs {
                    return Err(Error::Argument(format!(
                        "pair {i}: sample rate {} differs from {fs}",
                        r.fs
                    )));
                }
                if r.len() != len {
                    return Err(Error::Argument(format!(
                        "pair {i}: {} samples, expected {len}",
                        r.len()
                    )));
                }
            }
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(TimeRecord, TimeRecord)] {
        &self.pairs
    }

    /// Number of averages K.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn fs(&self) -> f64 {
        self.pairs[0].0.fs
    }

    pub fn record_len(&self) -> usize {
        self.pairs[0].0.len()
    }

    pub fn response_kind(&self) -> RecordKind {
        self.pairs[0].1.kind
    }
}

/// Time window applied before transforming a record.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Window {
    #[default]
    Rectangular,
    /// `w(t) = exp(-t / tau_s)`; adds `1 / (tau_s * w_r)` to every damping
    /// ratio, see [`exponential_window_damping_correction`].
    Exponential { tau_s: f64 },
    /// Explicit weights; must match the record length.
    Custom(Vec<f64>),
}

impl Window {
    pub fn weights(&self, len: usize, fs: f64) -> Result<Cow<'_, [f64]>> {
        match self {
            Window::Rectangular => Ok(Cow::Owned(vec![1.0; len])),
            Window::Exponential { tau_s } => {
                if !(*tau_s > 0.0) {
                    return Err(Error::Argument(format!(
                        "exponential window needs tau > 0, got {tau_s}"
                    )));
                }
                Ok(Cow::Owned(
                    (0..len).map(|n| (-(n as f64) / (fs * tau_s)).exp()).collect(),
                ))
            }
            Window::Custom(w) => {
                if w.len() != len {
                    return Err(Error::Argument(format!(
                        "window has {} weights, record has {len} samples",
                        w.len()
                    )));
                }
                Ok(Cow::Borrowed(w))
            }
        }
    }
}

/// Removes the damping added by an exponential window of time constant
/// `tau_s` from a damping ratio measured at natural frequency `omega_r`.
pub fn exponential_window_damping_correction(xi_measured: f64, omega_r: f64, tau_s: f64) -> f64 {
    xi_measured - 1.0 / (tau_s * omega_r)
}

fn forward_fft(samples: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = samples.iter().map(|&s| Complex64::new(s, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf.truncate(samples.len() / 2 + 1);
    buf
}

/// One-sided DFT of a windowed record on the grid `f0 = 0, df = fs / L`.
pub fn spectrum(record: &TimeRecord, window: &Window) -> Result<FrequencySeries> {
    let w = window.weights(record.len(), record.fs)?;
    let windowed: Vec<f64> = record.samples.iter().zip(w.iter()).map(|(s, w)| s * w).collect();
    FrequencySeries::new(0.0, record.fs / record.len() as f64, forward_fft(&windowed))
}

/// Real signal of length `len` whose one-sided spectrum is `series`.
///
/// The imaginary parts of the DC bin and, for even `len`, of the Nyquist
/// bin cannot be represented by a real signal and are dropped.
pub fn inverse_spectrum(series: &FrequencySeries, len: usize) -> Result<Vec<f64>> {
    if len == 0 || series.len() != len / 2 + 1 {
        return Err(Error::Argument(format!(
            "{} one-sided bins cannot describe a {len}-sample record",
            series.len()
        )));
    }
    let half = series.values();
    let mut full = vec![Complex64::new(0.0, 0.0); len];
    full[0] = Complex64::new(half[0].re, 0.0);
    for k in 1..half.len() {
        if 2 * k == len {
            full[k] = Complex64::new(half[k].re, 0.0);
        } else {
            full[k] = half[k];
            full[len - k] = half[k].conj();
        }
    }
    FftPlanner::new().plan_fft_inverse(len).process(&mut full);
    Ok(full.iter().map(|v| v.re / len as f64).collect())
}

/// Velocity record whose DFT equals `model` sampled on the record's bins,
/// i.e. the response of the model to a unit impulse at sample 0.
pub fn synthetic_impulse_response(model: &ModalModel, fs: f64, len: usize) -> Result<TimeRecord> {
    let df = fs / len as f64;
    let values = (0..len / 2 + 1)
        .map(|k| model.response(2.0 * PI * k as f64 * df))
        .collect();
    let series = FrequencySeries::new(0.0, df, values)?;
    TimeRecord::new(fs, inverse_spectrum(&series, len)?, RecordKind::Velocity)
}

/// Unit impulse force record.
pub fn unit_impulse(fs: f64, len: usize, amplitude: f64) -> Result<TimeRecord> {
    let mut samples = vec![0.0; len];
    if let Some(s) = samples.first_mut() {
        *s = amplitude;
    }
    TimeRecord::new(fs, samples, RecordKind::Force)
}

fn check_pair(force: &TimeRecord, response: &TimeRecord) -> Result<()> {
    if force.fs != response.fs {
        return Err(Error::Argument(format!(
            "sample rates differ: {} vs {}",
            force.fs, response.fs
        )));
    }
    if force.len() != response.len() {
        return Err(Error::Argument(format!(
            "record lengths differ: {} vs {}",
            force.len(),
            response.len()
        )));
    }
    Ok(())
}

/// Spectral ratio `X / F` of a single impulse test with a rectangular window.
pub fn admittance_from_impulse(force: &TimeRecord, velocity: &TimeRecord) -> Result<FrequencySeries> {
    if velocity.kind != RecordKind::Velocity {
        return Err(Error::Argument(format!(
            "response must be a velocity record, got {}",
            velocity.kind
        )));
    }
    check_pair(force, velocity)?;
    let f = spectrum(force, &Window::Rectangular)?;
    let x = spectrum(velocity, &Window::Rectangular)?;
    let power: Vec<f64> = f.values().iter().map(|v| v.norm_sqr()).collect();
    let max = power.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Err(Error::DegenerateExcitation);
    }
    let valid: Vec<bool> = power.iter().map(|&p| p >= MASK_THRESHOLD * max).collect();
    let values = f
        .values()
        .iter()
        .zip(x.values())
        .zip(&valid)
        .map(|((f, x), ok)| if *ok { x / f } else { Complex64::new(0.0, 0.0) })
        .collect();
    FrequencySeries::with_mask(f.f0(), f.df(), values, valid)
}

/// Auto- and cross-spectra averaged over the pairs of a [`MeasurementSet`].
#[derive(Debug, Clone)]
pub struct SpectralAverages {
    f0: f64,
    df: f64,
    count: usize,
    response_kind: RecordKind,
    s_ff: Vec<f64>,
    s_xx: Vec<f64>,
    s_fx: Vec<Complex64>,
}

impl SpectralAverages {
    pub fn compute(set: &MeasurementSet, window: &Window) -> Result<Self> {
        let mut acc: Option<Self> = None;
        for (f, x) in set.pairs() {
            let fs = spectrum(f, window)?;
            let xs = spectrum(x, window)?;
            let avg = acc.get_or_insert_with(|| Self {
                f0: fs.f0(),
                df: fs.df(),
                count: 0,
                response_kind: set.response_kind(),
                s_ff: vec![0.0; fs.len()],
                s_xx: vec![0.0; fs.len()],
                s_fx: vec![Complex64::new(0.0, 0.0); fs.len()],
            });
            for (k, (fv, xv)) in fs.values().iter().zip(xs.values()).enumerate() {
                avg.s_ff[k] += fv.norm_sqr();
                avg.s_xx[k] += xv.norm_sqr();
                avg.s_fx[k] += fv.conj() * xv;
            }
            avg.count += 1;
        }
        let mut avg = acc.expect("measurement sets are never empty");
        let k = avg.count as f64;
        avg.s_ff.iter_mut().for_each(|v| *v /= k);
        avg.s_xx.iter_mut().for_each(|v| *v /= k);
        avg.s_fx.iter_mut().for_each(|v| *v /= k);
        Ok(avg)
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn auto_force(&self) -> &[f64] {
        &self.s_ff
    }

    pub fn auto_response(&self) -> &[f64] {
        &self.s_xx
    }

    pub fn cross(&self) -> &[Complex64] {
        &self.s_fx
    }

    fn excitation_mask(&self) -> Result<Vec<bool>> {
        let max = self.s_ff.iter().copied().fold(0.0, f64::max);
        if max == 0.0 {
            return Err(Error::DegenerateExcitation);
        }
        Ok(self.s_ff.iter().map(|&p| p >= MASK_THRESHOLD * max).collect())
    }

    /// Divides by `j w` for acceleration responses; the DC bin is masked.
    fn finish(&self, mut values: Vec<Complex64>, mut valid: Vec<bool>) -> Result<FrequencySeries> {
        if self.response_kind == RecordKind::Acceleration {
            for (k, (v, ok)) in values.iter_mut().zip(valid.iter_mut()).enumerate() {
                let omega = 2.0 * PI * (self.f0 + k as f64 * self.df);
                if omega == 0.0 {
                    *ok = false;
                } else {
                    *v /= Complex64::new(0.0, omega);
                }
            }
        }
        FrequencySeries::with_mask(self.f0, self.df, values, valid)
    }

    fn h1_raw(&self) -> Result<(Vec<Complex64>, Vec<bool>)> {
        let valid = self.excitation_mask()?;
        let values = self
            .s_fx
            .iter()
            .zip(&self.s_ff)
            .zip(&valid)
            .map(|((sfx, sff), ok)| if *ok { sfx / sff } else { Complex64::new(0.0, 0.0) })
            .collect();
        Ok((values, valid))
    }

    fn h2_raw(&self) -> Result<(Vec<Complex64>, Vec<bool>)> {
        if self.s_xx.iter().all(|&p| p == 0.0) {
            return Err(Error::DegenerateResponse);
        }
        let mut valid = self.excitation_mask()?;
        let max_cross = self.s_fx.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let values = self
            .s_fx
            .iter()
            .zip(&self.s_xx)
            .zip(valid.iter_mut())
            .map(|((sfx, sxx), ok)| {
                *ok = *ok && sfx.norm() >= MASK_THRESHOLD * max_cross && sfx.norm() > 0.0;
                if *ok {
                    Complex64::new(*sxx, 0.0) / sfx.conj()
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        Ok((values, valid))
    }

    pub fn h1(&self) -> Result<FrequencySeries> {
        let (values, valid) = self.h1_raw()?;
        self.finish(values, valid)
    }

    pub fn h2(&self) -> Result<FrequencySeries> {
        let (values, valid) = self.h2_raw()?;
        self.finish(values, valid)
    }

    /// Geometric-mean magnitude of H1 and H2 with the phase of H1.
    pub fn hv(&self) -> Result<FrequencySeries> {
        let (h1, v1) = self.h1_raw()?;
        let (h2, v2) = self.h2_raw()?;
        let mut valid = Vec::with_capacity(h1.len());
        let values = h1
            .iter()
            .zip(&h2)
            .zip(v1.iter().zip(&v2))
            .map(|((a, b), (ok1, ok2))| {
                let ok = *ok1 && *ok2 && a.norm() > 0.0;
                valid.push(ok);
                if ok {
                    a * (b.norm() / a.norm()).sqrt()
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        self.finish(values, valid)
    }

    /// Ordinary coherence `|S_fx|^2 / (S_ff S_xx)`, clamped to `[0, 1]`.
    pub fn coherence(&self) -> Result<FrequencySeries> {
        if self.count < 2 {
            return Err(Error::InsufficientAverages { found: self.count });
        }
        let mut valid = self.excitation_mask()?;
        let values = self
            .s_fx
            .iter()
            .zip(self.s_ff.iter().zip(&self.s_xx))
            .zip(valid.iter_mut())
            .map(|((sfx, (sff, sxx)), ok)| {
                *ok = *ok && *sxx > 0.0;
                if *ok {
                    (sfx.norm_sqr() / (sff * sxx)).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect();
        FrequencySeries::from_real(self.f0, self.df, values, valid)
    }
}

/// `H1 = sum S_fx / sum S_ff`, unbiased under output noise.
pub fn estimate_h1(set: &MeasurementSet, window: &Window) -> Result<FrequencySeries> {
    SpectralAverages::compute(set, window)?.h1()
}

/// `H2 = sum S_xx / sum S_xf`, unbiased under input noise.
pub fn estimate_h2(set: &MeasurementSet, window: &Window) -> Result<FrequencySeries> {
    SpectralAverages::compute(set, window)?.h2()
}

pub fn estimate_hv(set: &MeasurementSet, window: &Window) -> Result<FrequencySeries> {
    SpectralAverages::compute(set, window)?.hv()
}

pub fn coherence(set: &MeasurementSet, window: &Window) -> Result<FrequencySeries> {
    SpectralAverages::compute(set, window)?.coherence()
}

/// Estimator selector used by the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    #[default]
    H1,
    H2,
    Hv,
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Estimator::H1 => "h1",
            Estimator::H2 => "h2",
            Estimator::Hv => "hv",
        })
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "h1" => Ok(Estimator::H1),
            "h2" => Ok(Estimator::H2),
            "hv" => Ok(Estimator::Hv),
            other => Err(Error::Argument(format!("unknown estimator '{other}'"))),
        }
    }
}

impl Estimator {
    pub fn apply(&self, averages: &SpectralAverages) -> Result<FrequencySeries> {
        match self {
            Estimator::H1 => averages.h1(),
            Estimator::H2 => averages.h2(),
            Estimator::Hv => averages.hv(),
        }
    }
}
