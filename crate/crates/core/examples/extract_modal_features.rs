// Builds the F, P and Q matrices for four synthetic plates whose modes
// drift slightly from one to the next.

use frfm::features::{build_feature_matrices, PeakConfig};
use frfm::frf::{synthesize_frf, Grid, ModalModel, ModalParameter};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new(0.0, 1.0, 3001)?;
    let base = [(180.0, 0.012), (390.0, 0.010), (620.0, 0.015), (940.0, 0.011), (1400.0, 0.018)];

    let mut dataset = Vec::new();
    for i in 0..4 {
        let shift = 1.0 + 0.004 * i as f64;
        let modes = base
            .iter()
            .map(|&(f, xi)| ModalParameter::from_hz(f * shift, xi, 1.0e4))
            .collect::<frfm::Result<Vec<_>>>()?;
        dataset.push((format!("plate-{i}"), synthesize_frf(&ModalModel::new(modes)?, &grid)));
    }

    let cfg = PeakConfig {
        n_peaks: 5,
        ..PeakConfig::default()
    };
    let fm = build_feature_matrices(&dataset, &cfg)?;
    for (i, label) in fm.labels().iter().enumerate() {
        let f: Vec<String> = fm.f().row(i).iter().map(|v| format!("{v:7.1}")).collect();
        let q: Vec<String> = fm.q().row(i).iter().map(|v| format!("{v:5.1}")).collect();
        println!("{label}: f [{}]  Q [{}]", f.join(" "), q.join(" "));
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
