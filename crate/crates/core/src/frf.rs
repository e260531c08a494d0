//! Frequency response functions and modal models.
//!
//! A [`FrequencySeries`] is a complex FRF sampled on a uniform grid. A
//! [`ModalModel`] is a sum of single-degree-of-freedom terms
//!
//! ```text
//! H(w) = sum_r phi_r / (w_r^2 + 2j w xi_r w_r - w^2)
//! ```
//!
//! whose magnitude at `w = w_r` is `phi_r / (2 xi_r w_r^2)` for an isolated
//! mode. That relation is what lets a model be rebuilt from the
//! (frequency, dB amplitude, Q) triples stored in [`ModalPeak`].

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniform frequency grid: sample `k` sits at `f0 + k * df` Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    f0: f64,
    df: f64,
    len: usize,
}

impl Grid {
    pub fn new(f0: f64, df: f64, len: usize) -> Result<Self> {
        if !f0.is_finite() || f0 < 0.0 {
            return Err(Error::Grid(format!("f0 must be finite and >= 0, got {f0}")));
        }
        if !df.is_finite() || df <= 0.0 {
            return Err(Error::Grid(format!("df must be finite and > 0, got {df}")));
        }
        if len < 2 {
            return Err(Error::Grid(format!("need at least 2 samples, got {len}")));
        }
        Ok(Self { f0, df, len })
    }

    /// Grid covering `[f_start, f_end]` inclusive with step `df`.
    pub fn span(f_start: f64, f_end: f64, df: f64) -> Result<Self> {
        if !(df > 0.0) || !(f_end > f_start) {
            return Err(Error::Grid(format!(
                "invalid span [{f_start}, {f_end}] with df = {df}"
            )));
        }
        let len = ((f_end - f_start) / df).round() as usize + 1;
        Self::new(f_start, df, len)
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    pub fn df(&self) -> f64 {
        self.df
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn frequency(&self, k: usize) -> f64 {
        self.f0 + k as f64 * self.df
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|k| self.frequency(k))
    }
}

/// Complex FRF on a uniform grid.
///
/// Bins can be masked (for instance where the excitation carried no
/// power). Masked bins hold zero and are skipped by feature extraction,
/// MSE and power integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySeries {
    f0: f64,
    df: f64,
    values: Vec<Complex64>,
    valid: Vec<bool>,
}

impl FrequencySeries {
    pub fn new(f0: f64, df: f64, values: Vec<Complex64>) -> Result<Self> {
        let valid = vec![true; values.len()];
        Self::with_mask(f0, df, values, valid)
    }

    /// Builds a series with an explicit validity mask. Masked values are
    /// zeroed.
    pub fn with_mask(
        f0: f64,
        df: f64,
        mut values: Vec<Complex64>,
        valid: Vec<bool>,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Grid("frequency series must not be empty".into()));
        }
        if !f0.is_finite() || f0 < 0.0 {
            return Err(Error::Grid(format!("f0 must be finite and >= 0, got {f0}")));
        }
        if !df.is_finite() || df <= 0.0 {
            return Err(Error::Grid(format!("df must be finite and > 0, got {df}")));
        }
        if valid.len() != values.len() {
            return Err(Error::Argument(format!(
                "mask length {} does not match {} values",
                valid.len(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Domain(format!("non-finite value at bin {k}")));
        }
        for (v, ok) in values.iter_mut().zip(&valid) {
            if !ok {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        Ok(Self {
            f0,
            df,
            values,
            valid,
        })
    }

    /// Real-valued series (imaginary parts zero), used for coherence.
    pub fn from_real(f0: f64, df: f64, values: Vec<f64>, valid: Vec<bool>) -> Result<Self> {
        let values = values.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        Self::with_mask(f0, df, values, valid)
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    pub fn df(&self) -> f64 {
        self.df
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn frequency(&self, k: usize) -> f64 {
        self.f0 + k as f64 * self.df
    }

    pub fn last_frequency(&self) -> f64 {
        self.frequency(self.len() - 1)
    }

    /// Index of the grid point nearest `f`, clamped to the grid.
    pub fn nearest_index(&self, f: f64) -> usize {
        let k = ((f - self.f0) / self.df).round();
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(self.len() - 1)
        }
    }

    pub fn grid(&self) -> Grid {
        Grid {
            f0: self.f0,
            df: self.df,
            len: self.len(),
        }
    }

    /// True when both series share f0, df and length (exactly).
    pub fn same_grid(&self, other: &FrequencySeries) -> bool {
        self.f0 == other.f0 && self.df == other.df && self.len() == other.len()
    }

    /// dB level `20 log10 |H|` of bin `k`, or `None` for masked or zero bins.
    pub fn db(&self, k: usize) -> Option<f64> {
        if !self.valid[k] {
            return None;
        }
        let mag = self.values[k].norm();
        (mag > 0.0).then(|| 20.0 * mag.log10())
    }

    pub fn magnitude_db(&self) -> DbSpectrum {
        DbSpectrum {
            f0: self.f0,
            df: self.df,
            levels: (0..self.len()).map(|k| self.db(k)).collect(),
        }
    }

    /// Every value multiplied by `c`.
    pub fn scaled(&self, c: f64) -> FrequencySeries {
        FrequencySeries {
            f0: self.f0,
            df: self.df,
            values: self.values.iter().map(|v| v * c).collect(),
            valid: self.valid.clone(),
        }
    }

    /// Pointwise sum; masks are combined.
    pub fn add(&self, other: &FrequencySeries) -> Result<FrequencySeries> {
        if !self.same_grid(other) {
            return Err(Error::Grid("series are on different grids".into()));
        }
        let valid: Vec<bool> = self.valid.iter().zip(&other.valid).map(|(a, b)| *a && *b).collect();
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Self::with_mask(self.f0, self.df, values, valid)
    }
}

/// Magnitude of a series in dB; `None` marks bins without a usable level.
#[derive(Debug, Clone, PartialEq)]
pub struct DbSpectrum {
    pub f0: f64,
    pub df: f64,
    pub levels: Vec<Option<f64>>,
}

impl DbSpectrum {
    pub fn from_levels(f0: f64, df: f64, levels: &[f64]) -> Self {
        Self {
            f0,
            df,
            levels: levels.iter().map(|&v| v.is_finite().then_some(v)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn frequency(&self, k: usize) -> f64 {
        self.f0 + k as f64 * self.df
    }

    pub fn level(&self, k: usize) -> Option<f64> {
        self.levels.get(k).copied().flatten()
    }
}

/// Damping ratio equivalent to a quality factor, `xi = 1 / (2 Q)`.
pub fn damping_from_q(q: f64) -> f64 {
    1.0 / (2.0 * q)
}

/// Quality factor equivalent to a damping ratio, `Q = 1 / (2 xi)`.
pub fn q_from_damping(xi: f64) -> f64 {
    1.0 / (2.0 * xi)
}

/// One mode of a [`ModalModel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModalParameter {
    omega_r: f64,
    xi_r: f64,
    phi_product: f64,
}

impl ModalParameter {
    /// `omega_r` in rad/s, `xi_r` the damping ratio, `phi_product` the
    /// residue numerator.
    pub fn new(omega_r: f64, xi_r: f64, phi_product: f64) -> Result<Self> {
        if !omega_r.is_finite() || omega_r <= 0.0 {
            return Err(Error::Domain(format!(
                "natural frequency must be > 0, got {omega_r} rad/s"
            )));
        }
        if !(xi_r > 0.0 && xi_r < 1.0) {
            return Err(Error::Domain(format!(
                "damping ratio must lie in (0, 1), got {xi_r}"
            )));
        }
        if !phi_product.is_finite() {
            return Err(Error::Domain("residue must be finite".into()));
        }
        Ok(Self {
            omega_r,
            xi_r,
            phi_product,
        })
    }

    pub fn from_hz(f_r: f64, xi_r: f64, phi_product: f64) -> Result<Self> {
        Self::new(2.0 * PI * f_r, xi_r, phi_product)
    }

    pub fn omega_r(&self) -> f64 {
        self.omega_r
    }

    pub fn frequency_hz(&self) -> f64 {
        self.omega_r / (2.0 * PI)
    }

    pub fn xi_r(&self) -> f64 {
        self.xi_r
    }

    pub fn phi_product(&self) -> f64 {
        self.phi_product
    }

    /// Single-mode term evaluated at angular frequency `omega`.
    pub fn response(&self, omega: f64) -> Complex64 {
        let wr = self.omega_r;
        let denom = Complex64::new(wr * wr - omega * omega, 2.0 * omega * self.xi_r * wr);
        self.phi_product / denom
    }
}

/// Modes sorted by strictly ascending natural frequency.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModalModel {
    modes: Vec<ModalParameter>,
}

impl ModalModel {
    /// Sorts `modes` by natural frequency. Repeated frequencies are rejected.
    pub fn new(mut modes: Vec<ModalParameter>) -> Result<Self> {
        modes.sort_by(|a, b| a.omega_r.total_cmp(&b.omega_r));
        if let Some(w) = modes.windows(2).find(|w| w[0].omega_r == w[1].omega_r) {
            return Err(Error::Domain(format!(
                "two modes share natural frequency {} rad/s",
                w[0].omega_r
            )));
        }
        Ok(Self { modes })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn modes(&self) -> &[ModalParameter] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Model holding the modes of both operands.
    pub fn union(&self, other: &ModalModel) -> Result<ModalModel> {
        let mut modes = self.modes.clone();
        modes.extend_from_slice(&other.modes);
        Self::new(modes)
    }

    /// Sum of all modal terms at angular frequency `omega`.
    pub fn response(&self, omega: f64) -> Complex64 {
        self.modes
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, m| acc + m.response(omega))
    }
}

/// Resonance triple: frequency in Hz, peak level in dB re 1 (m/s)/N, Q.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModalPeak {
    pub f_r: f64,
    pub p_r: f64,
    pub q_r: f64,
}

impl ModalPeak {
    pub fn new(f_r: f64, p_r: f64, q_r: f64) -> Result<Self> {
        if !f_r.is_finite() || f_r <= 0.0 {
            return Err(Error::Domain(format!("peak frequency must be > 0, got {f_r}")));
        }
        if !p_r.is_finite() {
            return Err(Error::Domain("peak amplitude must be finite".into()));
        }
        if !q_r.is_finite() || q_r <= 0.0 {
            return Err(Error::Domain(format!("Q must be > 0, got {q_r}")));
        }
        Ok(Self { f_r, p_r, q_r })
    }

    /// Positive-residue mode whose isolated peak has this level and Q.
    pub fn to_modal_parameter(&self) -> Result<ModalParameter> {
        if self.q_r <= 0.5 {
            return Err(Error::Domain(format!(
                "Q = {} implies a damping ratio >= 1",
                self.q_r
            )));
        }
        let xi = damping_from_q(self.q_r);
        let omega = 2.0 * PI * self.f_r;
        let phi = 10f64.powf(self.p_r / 20.0) * 2.0 * xi * omega * omega;
        ModalParameter::new(omega, xi, phi)
    }
}

/// Evaluates the modal sum on every grid point. An empty model yields zeros.
pub fn synthesize_frf(model: &ModalModel, grid: &Grid) -> FrequencySeries {
    let values = grid
        .frequencies()
        .map(|f| model.response(2.0 * PI * f))
        .collect();
    FrequencySeries {
        f0: grid.f0,
        df: grid.df,
        values,
        valid: vec![true; grid.len],
    }
}

/// Magnitude of an isolated mode at its natural frequency,
/// `phi / (2 xi w_r^2)`. Negative when the residue is.
pub fn peak_magnitude(mode: &ModalParameter) -> f64 {
    mode.phi_product / (2.0 * mode.xi_r * mode.omega_r * mode.omega_r)
}

/// Rebuilds an FRF from extracted resonance triples.
///
/// Every residue is taken positive: magnitude data cannot tell the sign.
pub fn reconstruct_from_features(peaks: &[ModalPeak], grid: &Grid) -> Result<FrequencySeries> {
    if peaks.is_empty() {
        return Err(Error::Argument("no peaks to reconstruct from".into()));
    }
    if peaks.windows(2).any(|w| w[1].f_r <= w[0].f_r) {
        return Err(Error::Argument(
            "peaks must be strictly ascending in frequency".into(),
        ));
    }
    let modes = peaks
        .iter()
        .map(ModalPeak::to_modal_parameter)
        .collect::<Result<Vec<_>>>()?;
    Ok(synthesize_frf(&ModalModel::new(modes)?, grid))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mode(f: f64, xi: f64, phi: f64) -> ModalParameter {
        ModalParameter::from_hz(f, xi, phi).unwrap()
    }

    #[test]
    fn empty_model_synthesizes_zeros() {
        let grid = Grid::new(0.0, 2.5, 17).unwrap();
        let h = synthesize_frf(&ModalModel::empty(), &grid);
        assert_eq!(h.len(), 17);
        assert!(h.values().iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn single_mode_at_resonance_matches_peak_magnitude() {
        let m = mode(100.0, 0.01, 1.0);
        let wr = m.omega_r();
        let grid = Grid::new(100.0, 1.0, 2).unwrap();
        let h = synthesize_frf(&ModalModel::new(vec![m]).unwrap(), &grid);
        let expected = 1.0 / (2.0 * 0.01 * wr * wr);
        assert!((h.values()[0].norm() - expected).abs() <= 1e-15 * expected);
        assert!((peak_magnitude(&m) - expected).abs() <= 1e-15 * expected);
    }

    #[test]
    fn two_modes_match_term_by_term_sum() {
        let model =
            ModalModel::new(vec![mode(100.0, 0.02, 1.0), mode(200.0, 0.02, 1.0)]).unwrap();
        let grid = Grid::new(150.0, 1.0, 2).unwrap();
        let h = synthesize_frf(&model, &grid);

        // Independent evaluation with explicit real/imag arithmetic.
        let w = 2.0 * PI * 150.0;
        let mut re = 0.0;
        let mut im = 0.0;
        for f in [100.0, 200.0] {
            let wr = 2.0 * PI * f;
            let a = wr * wr - w * w;
            let b = 2.0 * w * 0.02 * wr;
            let d = a * a + b * b;
            re += a / d;
            im += -b / d;
        }
        let v = h.values()[0];
        assert!((v.re - re).abs() <= 1e-12 * re.abs());
        assert!((v.im - im).abs() <= 1e-12 * im.abs());
    }

    #[test]
    fn peak_magnitude_examples() {
        let m = ModalParameter::new(1.0, 0.5, 1.0).unwrap();
        assert_eq!(peak_magnitude(&m), 1.0);
        let m = mode(100.0, 0.01, 1.0);
        let expected = 1.0 / (0.02 * (2.0 * PI * 100.0f64).powi(2));
        assert!((peak_magnitude(&m) - expected).abs() < 1e-18);
        assert!((peak_magnitude(&m) - 1.2665e-4).abs() < 1e-8);
        let neg = mode(100.0, 0.01, -1.0);
        assert!(peak_magnitude(&neg) < 0.0);
    }

    #[test]
    fn dense_grid_maximum_matches_peak_magnitude() {
        let m = mode(100.0, 0.01, 1.0);
        let grid = Grid::new(90.0, 0.001, 20_001).unwrap();
        let h = synthesize_frf(&ModalModel::new(vec![m]).unwrap(), &grid);
        let max = h.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        let expected = peak_magnitude(&m);
        assert!((max - expected).abs() / expected < 1e-3);
    }

    #[test]
    fn zero_db_peak_reconstructs_unit_magnitude() {
        let grid = Grid::new(0.0, 0.5, 801).unwrap();
        let peak = ModalPeak::new(100.0, 0.0, 50.0).unwrap();
        let h = reconstruct_from_features(&[peak], &grid).unwrap();
        let k = h.nearest_index(100.0);
        assert!((h.values()[k].norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn reconstruction_rejects_overdamped_q() {
        let grid = Grid::new(0.0, 1.0, 10).unwrap();
        let peak = ModalPeak::new(100.0, 0.0, 0.5).unwrap();
        assert!(matches!(
            reconstruct_from_features(&[peak], &grid),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn invalid_construction_is_rejected() {
        assert!(Grid::new(0.0, 0.0, 10).is_err());
        assert!(Grid::new(0.0, -1.0, 10).is_err());
        assert!(Grid::new(0.0, 1.0, 1).is_err());
        assert!(ModalParameter::new(0.0, 0.1, 1.0).is_err());
        assert!(ModalParameter::new(1.0, 1.0, 1.0).is_err());
        assert!(ModalParameter::new(1.0, 0.0, 1.0).is_err());
        assert!(ModalModel::new(vec![mode(10.0, 0.1, 1.0), mode(10.0, 0.2, 1.0)]).is_err());
        assert!(FrequencySeries::new(0.0, 1.0, vec![]).is_err());
        assert!(FrequencySeries::new(0.0, 1.0, vec![Complex64::new(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn union_is_pointwise_sum() {
        let a = ModalModel::new(vec![mode(120.0, 0.02, 1.5), mode(410.0, 0.01, 0.3)]).unwrap();
        let b = ModalModel::new(vec![mode(250.0, 0.05, -2.0)]).unwrap();
        let grid = Grid::new(0.0, 3.0, 300).unwrap();
        let ab = synthesize_frf(&a.union(&b).unwrap(), &grid);
        let sum = synthesize_frf(&a, &grid).add(&synthesize_frf(&b, &grid)).unwrap();
        for (x, y) in ab.values().iter().zip(sum.values()) {
            assert!((x - y).norm() <= 1e-12 * y.norm().max(1e-300));
        }
    }
}
