// Feature distance, MSE and average-linkage clustering for five
// synthetic instruments, two of which share their low modes.

use frfm::clustering::{agglomerative_cluster, gw_leaf_order, Linkage};
use frfm::features::{build_feature_matrices, Band, PeakConfig};
use frfm::frf::{synthesize_frf, Grid, ModalModel, ModalParameter};
use frfm::metrics::{combined_distance, mse_matrix};

const BASE: [f64; 6] = [190.0, 280.0, 400.0, 470.0, 540.0, 650.0];

fn instrument(scale: &[f64; 6], xi: f64, grid: &Grid) -> frfm::Result<frfm::frf::FrequencySeries> {
    let modes = BASE
        .iter()
        .zip(scale)
        .map(|(f, s)| ModalParameter::from_hz(f * s, xi, 1.0e4))
        .collect::<frfm::Result<Vec<_>>>()?;
    Ok(synthesize_frf(&ModalModel::new(modes)?, grid))
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new(0.0, 1.0, 2001)?;
    let dataset = vec![
        ("A".to_string(), instrument(&[1.0; 6], 0.012, &grid)?),
        ("A-copy".to_string(), instrument(&[1.0, 1.001, 0.999, 1.0, 1.001, 1.0], 0.012, &grid)?),
        ("B".to_string(), instrument(&[1.03, 0.97, 1.02, 1.04, 0.98, 1.03], 0.015, &grid)?),
        ("C".to_string(), instrument(&[0.96, 1.02, 0.97, 1.01, 1.03, 0.97], 0.010, &grid)?),
        ("D".to_string(), instrument(&[1.02, 1.04, 0.96, 0.98, 1.02, 1.05], 0.018, &grid)?),
    ];

    let cfg = PeakConfig {
        n_peaks: 6,
        band: Band::violin(),
        ..PeakConfig::default()
    };
    let fm = build_feature_matrices(&dataset, &cfg)?;
    let d = combined_distance(&fm)?;
    let mse = mse_matrix(&dataset, &cfg.band)?;

    let dend = agglomerative_cluster(&d, Linkage::Average)?;
    let order = gw_leaf_order(&dend, &d)?;
    let first = dend.merges()[0];
    println!(
        "first merge: {} + {} at {:.3}",
        d.labels()[first.left],
        d.labels()[first.right],
        first.height
    );
    let names: Vec<&str> = order.iter().map(|&i| d.labels()[i].as_str()).collect();
    println!("leaf order: {}", names.join(", "));
    println!("MSE A vs A-copy: {:.3} dB^2, A vs B: {:.3} dB^2", mse.get(0, 1), mse.get(0, 2));
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
