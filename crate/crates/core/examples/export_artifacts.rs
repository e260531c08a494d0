// Writes every artifact of a small study into a temporary directory and
// reads the tables back.

use frfm::clustering::{agglomerative_cluster, gw_leaf_order, Linkage};
use frfm::features::{build_feature_matrices, extract_features, PeakConfig};
use frfm::frf::{reconstruct_from_features, synthesize_frf, Grid, ModalModel, ModalParameter};
use frfm::io;
use frfm::metrics::combined_distance;
use frfm::report;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new(0.0, 2.0, 1001)?;
    let dataset = (0..3)
        .map(|i| {
            let s = 1.0 + 0.01 * i as f64;
            let modes = [210.0, 430.0, 760.0, 1180.0]
                .iter()
                .map(|f| ModalParameter::from_hz(f * s, 0.012 + 0.002 * i as f64, 1.0e4))
                .collect::<frfm::Result<Vec<_>>>()?;
            Ok((format!("s{i}"), synthesize_frf(&ModalModel::new(modes)?, &grid)))
        })
        .collect::<frfm::Result<Vec<_>>>()?;

    let cfg = PeakConfig {
        n_peaks: 4,
        ..PeakConfig::default()
    };
    let fm = build_feature_matrices(&dataset, &cfg)?;
    let d = combined_distance(&fm)?;
    let dend = agglomerative_cluster(&d, Linkage::Average)?;
    let dend = dend.with_leaf_order(gw_leaf_order(&dend, &d)?)?;

    let dir = tempfile::tempdir()?;
    let out = dir.path();
    io::save_frf_csv(&dataset[0].1, &out.join("s0.csv"))?;
    io::save_features_csv(&fm, &out.join("features.csv"))?;
    io::save_distance_csv(&d, &out.join("distance.csv"))?;
    io::save_dendrogram_json(&dend, &out.join("dendrogram.json"))?;
    io::save_dendrogram_newick(&dend, &out.join("dendrogram.nwk"))?;

    let peaks = extract_features(&dataset[0].1, &cfg)?.peaks;
    let rebuilt = reconstruct_from_features(&peaks, &grid)?;
    let svg = report::frf_overlay(&dataset[0].1, Some(&rebuilt), &peaks, "s0")?;
    io::write_atomic(&out.join("s0.svg"), svg.as_bytes())?;

    assert_eq!(io::load_distance_csv(&out.join("distance.csv"))?, d);
    assert_eq!(io::load_features_csv(&out.join("features.csv"))?.f(), fm.f());
    println!("{}", io::render_newick(&dend).trim_end());
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
