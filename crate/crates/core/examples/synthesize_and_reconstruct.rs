// Synthesize an FRF from a three-mode model, extract its resonances and
// rebuild the FRF from the extracted (f, p, Q) triples.

use frfm::features::{extract_features, Band, PeakConfig};
use frfm::frf::{reconstruct_from_features, synthesize_frf, Grid, ModalModel, ModalParameter};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let model = ModalModel::new(vec![
        ModalParameter::from_hz(280.0, 0.012, 4.0e3)?,
        ModalParameter::from_hz(460.0, 0.010, 9.0e3)?,
        ModalParameter::from_hz(1050.0, 0.020, 2.5e4)?,
    ])?;
    let grid = Grid::new(0.0, 1.0, 2001)?;
    let frf = synthesize_frf(&model, &grid);

    let cfg = PeakConfig {
        n_peaks: 3,
        band: Band::new(100.0, 1500.0)?,
        ..PeakConfig::default()
    };
    let extracted = extract_features(&frf, &cfg)?;
    let rebuilt = reconstruct_from_features(&extracted.peaks, &grid)?;

    for (peak, truth) in extracted.peaks.iter().zip(model.modes()) {
        let k = frf.nearest_index(peak.f_r);
        println!(
            "f {:8.2} Hz (true {:8.2})  Q {:6.1} (true {:6.1})  level {:6.2} dB, rebuilt {:6.2} dB",
            peak.f_r,
            truth.frequency_hz(),
            peak.q_r,
            1.0 / (2.0 * truth.xi_r()),
            frf.db(k).unwrap_or(f64::NAN),
            rebuilt.db(k).unwrap_or(f64::NAN),
        );
        assert!((peak.f_r - truth.frequency_hz()).abs() < 1e-3 * truth.frequency_hz());
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
