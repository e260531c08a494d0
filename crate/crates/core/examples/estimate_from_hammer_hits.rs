// Six simulated hammer hits on a two-mode structure with noise on the
// response, averaged into H1, H2 and Hv estimates plus coherence.

use std::f64::consts::PI;

use frfm::estimation::{
    inverse_spectrum, spectrum, Estimator, MeasurementSet, RecordKind, SpectralAverages, TimeRecord, Window,
};
use frfm::frf::{FrequencySeries, ModalModel, ModalParameter};
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

fn hit(fs: f64, len: usize, amplitude: f64) -> frfm::Result<TimeRecord> {
    let mut s = vec![0.0; len];
    for (n, v) in s.iter_mut().take(10).enumerate() {
        *v = amplitude * (PI * (n as f64 + 0.5) / 10.0).sin();
    }
    TimeRecord::new(fs, s, RecordKind::Force)
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (fs, len) = (4096.0, 4096);
    let model = ModalModel::new(vec![
        ModalParameter::from_hz(220.0, 0.015, 3.0e3)?,
        ModalParameter::from_hz(610.0, 0.010, 8.0e3)?,
    ])?;
    let noise = Normal::new(0.0, 2e-6).expect("valid sigma");
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);

    let mut pairs = Vec::new();
    for a in [1.0, 0.8, 1.2, 0.9, 1.1, 1.0] {
        let force = hit(fs, len, a)?;
        let f = spectrum(&force, &Window::Rectangular)?;
        let x: Vec<_> = (0..f.len())
            .map(|k| f.values()[k] * model.response(2.0 * PI * f.frequency(k)))
            .collect();
        let clean = inverse_spectrum(&FrequencySeries::new(0.0, f.df(), x)?, len)?;
        let noisy = clean.iter().map(|v| v + noise.sample(&mut rng)).collect();
        pairs.push((force, TimeRecord::new(fs, noisy, RecordKind::Velocity)?));
    }
    let set = MeasurementSet::new(pairs)?;
    let averages = SpectralAverages::compute(&set, &Window::Exponential { tau_s: 0.5 })?;
    let coherence = averages.coherence()?;

    for estimator in [Estimator::H1, Estimator::H2, Estimator::Hv] {
        let h = estimator.apply(&averages)?;
        let k = h.nearest_index(610.0);
        println!("{estimator}: |H(610 Hz)| = {:.4e}", h.values()[k].norm());
    }
    let k = coherence.nearest_index(610.0);
    println!("coherence at 610 Hz: {:.4} from {} averages", coherence.values()[k].re, averages.count());
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
