// Cumulative power fraction of a body-plus-hill response and the
// frequency where it rises fastest.

use frfm::frf::{synthesize_frf, Grid, ModalModel, ModalParameter};
use frfm::metrics::{bridge_hill_indicator, power_fraction};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new(0.0, 1.0, 4001)?;
    let mut modes = vec![
        ModalParameter::from_hz(280.0, 0.015, 5.0e3)?,
        ModalParameter::from_hz(450.0, 0.012, 7.0e3)?,
    ];
    // A cluster of loud modes around 2.4 kHz.
    for (i, f) in [2250.0, 2400.0, 2550.0].iter().enumerate() {
        let gain = if i == 1 { 4.0 } else { 2.0 };
        let w = 2.0 * std::f64::consts::PI * f;
        modes.push(ModalParameter::from_hz(*f, 0.02, gain * 2.0 * 0.02 * w * w)?);
    }
    let frf = synthesize_frf(&ModalModel::new(modes)?, &grid);

    for f in [500.0, 2000.0, 3000.0, 4000.0] {
        println!("power below {f:6.0} Hz: {:.4}", power_fraction(&frf, f)?);
    }
    println!("steepest rise at {:.0} Hz", bridge_hill_indicator(&frf, 11)?);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
