//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if
//! any criterion fails. Set `FRFM_BLESS=1` to rewrite the SVG golden files.

mod common;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use frfm::clustering::{agglomerative_cluster, gw_leaf_order, Dendrogram, Linkage};
use frfm::estimation::{
    inverse_spectrum, spectrum, MeasurementSet, RecordKind, SpectralAverages, TimeRecord, Window,
};
use frfm::features::{build_feature_matrices, extract_features, Band, FeatureMatrices, PeakConfig};
use frfm::frf::{reconstruct_from_features, synthesize_frf, FrequencySeries, Grid, ModalModel, ModalParameter};
use frfm::metrics::{
    bridge_hill_indicator, combined_distance, feature_subspace_distance, mse_matrix, power_fraction_curve,
    DistanceMatrix, Subspace,
};
use frfm::{io, report};
use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use common::{integer_metric, labels, min_flip_adjacent_sum, mode_at_level, naive_merge_heights, random_ten_mode_model, rng};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// 1. Synthesize, extract and reconstruct 50 random ten-mode models.
fn round_trip() -> Outcome {
    let grid = Grid::new(0.0, 1.0, 5001).unwrap();
    let cfg = PeakConfig::default();
    let mut r = rng(1);
    // Rejection sampling of the models is not part of the timed pipeline.
    let models: Vec<ModalModel> = (0..50).map(|_| random_ten_mode_model(&mut r)).collect();
    let (mut worst_f, mut worst_q, mut worst_db) = (0.0f64, 0.0f64, 0.0f64);
    let start = Instant::now();
    for (trial, model) in models.iter().enumerate() {
        let h = synthesize_frf(model, &grid);
        let ex = extract_features(&h, &cfg).map_err(|e| format!("trial {trial}: {e}"))?;
        let rec = reconstruct_from_features(&ex.peaks, &grid).unwrap();
        for (mode, peak) in model.modes().iter().zip(&ex.peaks) {
            let f_err = (peak.f_r - mode.frequency_hz()).abs() / mode.frequency_hz();
            let q_true = 1.0 / (2.0 * mode.xi_r());
            let q_err = (peak.q_r - q_true).abs() / q_true;
            let k = h.nearest_index(peak.f_r);
            let db_err = (h.db(k).unwrap() - rec.db(k).unwrap()).abs();
            worst_f = worst_f.max(f_err);
            worst_q = worst_q.max(q_err);
            worst_db = worst_db.max(db_err);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let detail = format!(
        "max f error {:.4}%, max Q error {:.2}%, max level error {:.3} dB, {secs:.2} s",
        100.0 * worst_f,
        100.0 * worst_q,
        worst_db
    );
    check(worst_f <= 1e-3 && worst_q <= 0.05 && worst_db <= 1.0 && secs < 10.0, || detail.clone())?;
    Ok(detail)
}

/// Half-sine hammer pulse of `width` samples.
fn hammer(fs: f64, len: usize, width: usize, amplitude: f64) -> TimeRecord {
    let mut s = vec![0.0; len];
    for (n, v) in s.iter_mut().take(width).enumerate() {
        *v = amplitude * (PI * (n as f64 + 0.5) / width as f64).sin();
    }
    TimeRecord::new(fs, s, RecordKind::Force).unwrap()
}

/// Response of `model` to `force` (circular convolution, exact on bins).
fn respond(model: &ModalModel, force: &TimeRecord) -> Vec<f64> {
    let fs = force.fs();
    let len = force.len();
    let f = spectrum(force, &Window::Rectangular).unwrap();
    let x: Vec<Complex64> = (0..f.len())
        .map(|k| f.values()[k] * model.response(2.0 * PI * f.frequency(k)))
        .collect();
    let series = FrequencySeries::new(0.0, fs / len as f64, x).unwrap();
    inverse_spectrum(&series, len).unwrap()
}

fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

// 2. Estimators on noiseless and noisy synthetic hammer tests.
fn estimators() -> Outcome {
    let (fs, len) = (8192.0, 8192);
    let model = ModalModel::new(vec![
        mode_at_level(180.0, 0.02, 0.0),
        mode_at_level(410.0, 0.015, 3.0),
        mode_at_level(790.0, 0.01, -2.0),
        mode_at_level(1300.0, 0.02, 1.0),
    ])
    .unwrap();

    // Noiseless: three hits of different strength.
    let pairs: Vec<(TimeRecord, TimeRecord)> = [1.0, 0.7, 1.3]
        .iter()
        .map(|&a| {
            let f = hammer(fs, len, 12, a);
            let x = TimeRecord::new(fs, respond(&model, &f), RecordKind::Velocity).unwrap();
            (f, x)
        })
        .collect();
    let ratio = {
        let (f, x) = &pairs[0];
        let (fs_, xs) = (spectrum(f, &Window::Rectangular).unwrap(), spectrum(x, &Window::Rectangular).unwrap());
        (0..fs_.len()).map(|k| xs.values()[k] / fs_.values()[k]).collect::<Vec<_>>()
    };
    let avg = SpectralAverages::compute(&MeasurementSet::new(pairs).unwrap(), &Window::Rectangular).unwrap();
    let (h1, h2, hv, coh) = (avg.h1().unwrap(), avg.h2().unwrap(), avg.hv().unwrap(), avg.coherence().unwrap());
    let mut worst_rel = 0.0f64;
    let mut worst_coh = 0.0f64;
    // The hammer's usable band; above it the force spectrum has nulls.
    for k in 0..h1.len() {
        if !h1.valid()[k] || h1.frequency(k) > 2000.0 {
            continue;
        }
        for h in [&h1, &h2, &hv] {
            if h.valid()[k] {
                worst_rel = worst_rel.max((h.values()[k] - ratio[k]).norm() / ratio[k].norm());
            }
        }
        worst_coh = worst_coh.max((coh.values()[k].re - 1.0).abs());
    }
    check(worst_rel <= 1e-9, || format!("estimator vs spectral ratio: {worst_rel:e}"))?;
    check(worst_coh <= 1e-9, || format!("noiseless coherence off by {worst_coh:e}"))?;

    // 20 dB output SNR, K = 6 versus K = 1 over 100 trials.
    let force = hammer(fs, len, 12, 1.0);
    let clean = respond(&model, &force);
    let sigma = rms(&clean) / 10.0;
    let noise = Normal::new(0.0, sigma).unwrap();
    let truth = synthesize_frf(&model, &Grid::new(0.0, fs / len as f64, len / 2 + 1).unwrap());
    let band: Vec<usize> = (0..truth.len())
        .filter(|&k| (50.0..=2000.0).contains(&truth.frequency(k)))
        .collect();
    let mut r = rng(2);
    let mean_err = |k_avg: usize, r: &mut rand_chacha::ChaCha8Rng| {
        let pairs = (0..k_avg)
            .map(|_| {
                let noisy = clean.iter().map(|v| v + noise.sample(r)).collect();
                (force.clone(), TimeRecord::new(fs, noisy, RecordKind::Velocity).unwrap())
            })
            .collect();
        let h1 = frfm::estimation::estimate_h1(&MeasurementSet::new(pairs).unwrap(), &Window::Rectangular).unwrap();
        band.iter()
            .map(|&k| (h1.values()[k].norm() - truth.values()[k].norm()).abs() / truth.values()[k].norm())
            .sum::<f64>()
            / band.len() as f64
    };
    let (mut e1, mut e6) = (0.0, 0.0);
    for _ in 0..100 {
        e1 += mean_err(1, &mut r);
        e6 += mean_err(6, &mut r);
    }
    let (e1, e6) = (e1 / 100.0, e6 / 100.0);
    check(e6 < e1, || format!("K=6 error {e6:.4} not below K=1 error {e1:.4}"))?;
    Ok(format!(
        "max estimator deviation {worst_rel:.1e}, coherence deviation {worst_coh:.1e}, mean |H1| error K=1 {e1:.4} vs K=6 {e6:.4}"
    ))
}

fn random_features(r: &mut rand_chacha::ChaCha8Rng, m: usize, n: usize) -> FeatureMatrices {
    let mut f = Array2::zeros((m, n));
    let mut p = Array2::zeros((m, n));
    let mut q = Array2::zeros((m, n));
    for i in 0..m {
        let mut row: Vec<f64> = (0..n).map(|_| r.random_range(100.0..3000.0)).collect();
        row.sort_by(f64::total_cmp);
        for j in 0..n {
            f[[i, j]] = row[j] + j as f64 * 1e-6;
            p[[i, j]] = r.random_range(-40.0..10.0);
            q[[i, j]] = r.random_range(10.0..150.0);
        }
    }
    FeatureMatrices::new(labels("I", m), f, p, q).unwrap()
}

fn axiom_violations(d: &DistanceMatrix) -> Option<String> {
    let m = d.len();
    for i in 0..m {
        if d.get(i, i) != 0.0 {
            return Some(format!("diagonal {i} nonzero"));
        }
        for j in 0..m {
            if (d.get(i, j) - d.get(j, i)).abs() > 1e-12 {
                return Some(format!("asymmetric at ({i},{j})"));
            }
            if d.get(i, j) < 0.0 {
                return Some(format!("negative at ({i},{j})"));
            }
            for k in 0..m {
                if d.get(i, k) > d.get(i, j) + d.get(j, k) + 1e-12 {
                    return Some(format!("triangle ({i},{j},{k}) violated"));
                }
            }
        }
    }
    None
}

// 3. Metric axioms and additivity of the combined distance.
fn metric_axioms() -> Outcome {
    let mut r = rng(3);
    let mut worst_sum = 0.0f64;
    for trial in 0..100 {
        let fm = random_features(&mut r, 10, 10);
        let parts: Vec<DistanceMatrix> = Subspace::ALL
            .iter()
            .map(|s| feature_subspace_distance(&fm, *s).unwrap())
            .collect();
        let total = combined_distance(&fm).unwrap();
        for d in parts.iter().chain(std::iter::once(&total)) {
            if let Some(v) = axiom_violations(d) {
                return Err(format!("dataset {trial}: {v}"));
            }
        }
        let sum = parts[0].matrix() + parts[1].matrix() + parts[2].matrix();
        worst_sum = worst_sum.max((&sum - total.matrix()).iter().fold(0.0, |a, v| a.max(v.abs())));
    }
    check(worst_sum <= 1e-12, || format!("combined differs from subspace sum by {worst_sum:e}"))?;
    Ok(format!("100 datasets, all axioms hold, additivity error {worst_sum:.1e}"))
}

// 4. Two rows that differ in every feature.
fn forced_value() -> Outcome {
    let f = ndarray::array![[100.0, 200.0, 300.0, 400.0, 500.0, 600.0, 700.0, 800.0, 900.0, 1000.0]];
    let f = ndarray::concatenate![ndarray::Axis(0), f, &f + 7.0];
    let p = Array2::from_shape_fn((2, 10), |(i, j)| i as f64 * 3.0 - j as f64);
    let q = Array2::from_shape_fn((2, 10), |(i, j)| 20.0 + 5.0 * i as f64 + j as f64);
    let fm = FeatureMatrices::new(labels("I", 2), f, p, q).unwrap();
    let d = combined_distance(&fm).unwrap().get(0, 1);
    let expected = 6.0 * 10f64.sqrt();
    check((d - expected).abs() <= 1e-9, || format!("D[0,1] = {d}, expected {expected}"))?;
    Ok(format!("D[0,1] = {d:.12}"))
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, &x)| if x > b.1 { (i, x) } else { b })
        .0
}

// 5. Ten-step chain with one frequency step and one damping step; the
// other steps jitter every mode slightly.
fn discrimination() -> Outcome {
    const FREQ_STEP: usize = 2;
    const DAMP_STEP: usize = 6;
    let grid = Grid::new(0.0, 1.0, 5001).unwrap();
    let mut r = rng(5);
    let base_f = [240.0, 410.0, 560.0, 730.0, 980.0, 1240.0, 1530.0, 1870.0, 2250.0, 2680.0];
    let mut f: Vec<f64> = base_f.to_vec();
    let mut xi: Vec<f64> = (0..10).map(|_| r.random_range(0.008..0.02)).collect();
    let mut level: Vec<f64> = (0..10).map(|_| r.random_range(-3.0..3.0)).collect();
    let jitter = Normal::new(0.0, 1.0).unwrap();

    let mut dataset = Vec::new();
    for k in 0..10 {
        if k > 0 {
            let step = k - 1;
            if step == FREQ_STEP {
                for v in f.iter_mut().take(5) {
                    *v *= 1.02;
                }
            } else if step == DAMP_STEP {
                for v in xi.iter_mut() {
                    *v *= 1.5;
                }
            } else {
                for j in 0..10 {
                    f[j] *= 1.0 + 2e-4 * jitter.sample(&mut r);
                    xi[j] *= 1.0 + 0.01 * jitter.sample(&mut r);
                    level[j] += 0.1 * jitter.sample(&mut r);
                }
            }
        }
        let modes = (0..10).map(|j| mode_at_level(f[j], xi[j], level[j])).collect();
        let h = synthesize_frf(&ModalModel::new(modes).unwrap(), &grid);
        dataset.push((format!("S{k}"), h));
    }
    let fm = build_feature_matrices(&dataset, &PeakConfig::default()).map_err(|e| e.to_string())?;
    let transitions = |d: &DistanceMatrix| (0..9).map(|t| d.get(t, t + 1)).collect::<Vec<f64>>();
    let [df, dp, dq] = Subspace::ALL.map(|s| transitions(&feature_subspace_distance(&fm, s).unwrap()));
    check(argmax(&df) == FREQ_STEP, || format!("F ranks transition {} first", argmax(&df)))?;
    check(argmax(&dp) != FREQ_STEP && argmax(&dq) != FREQ_STEP, || {
        "frequency step ranked first outside F".into()
    })?;
    check(argmax(&dq) == DAMP_STEP, || format!("Q ranks transition {} first", argmax(&dq)))?;
    check(argmax(&df) != DAMP_STEP && argmax(&dp) != DAMP_STEP, || {
        "damping step ranked first outside Q".into()
    })?;

    let combined = combined_distance(&fm).unwrap();
    let mse = mse_matrix(&dataset, &Band::full()).unwrap();
    let (cf, cm) = (combined.contrast(), mse.contrast());
    check(cm < cf, || format!("MSE contrast {cm:.3} not below feature contrast {cf:.3}"))?;
    Ok(format!("steps ranked as built; contrast MSE {cm:.3} < feature {cf:.3}"))
}

// 6. Nine instruments, two sharing their signature modes.
fn strad_copy() -> Outcome {
    let grid = Grid::new(0.0, 1.0, 5001).unwrap();
    let mut r = rng(6);
    let sig_f = [190.0, 275.0, 390.0, 460.0, 530.0, 640.0, 760.0, 880.0, 1010.0, 1150.0, 1290.0];
    let sig_xi: Vec<f64> = sig_f.iter().map(|_| r.random_range(0.01..0.025)).collect();
    let sig_level: Vec<f64> = sig_f.iter().map(|_| 20.0 + r.random_range(-4.0..4.0)).collect();
    let hill = |r: &mut rand_chacha::ChaCha8Rng, centre: f64, gain: f64| -> Vec<ModalParameter> {
        (0..14)
            .map(|i| {
                let f = 1600.0 + 150.0 * i as f64 + r.random_range(-20.0..20.0);
                let bump = -((f - centre) / 500.0).powi(2);
                mode_at_level(f, r.random_range(0.01..0.02), gain + 8.0 * bump)
            })
            .collect()
    };
    let instrument = |r: &mut rand_chacha::ChaCha8Rng, f_jitter: f64, hill_modes: Vec<ModalParameter>| {
        let mut modes: Vec<ModalParameter> = (0..sig_f.len())
            .map(|i| {
                let f = sig_f[i] * (1.0 + r.random_range(-f_jitter..f_jitter));
                let xi = sig_xi[i] * (1.0 + r.random_range(-0.5..0.5) * f_jitter * 20.0);
                mode_at_level(f, xi, sig_level[i] + r.random_range(-1.0..1.0) * f_jitter * 200.0)
            })
            .collect();
        modes.extend(hill_modes);
        synthesize_frf(&ModalModel::new(modes).unwrap(), &grid)
    };
    let mut dataset = Vec::new();
    let strad_hill = hill(&mut r, 2300.0, 12.0);
    dataset.push(("Strad".to_string(), instrument(&mut r, 0.001, strad_hill)));
    for i in 1..9 {
        let h = hill(&mut r, 3000.0, 0.0);
        let jitter = if i == 1 { 0.001 } else { 0.04 };
        dataset.push((format!("V{i}"), instrument(&mut r, jitter, h)));
    }
    let cfg = PeakConfig {
        band: Band::violin(),
        ..PeakConfig::default()
    };
    let fm = build_feature_matrices(&dataset, &cfg).map_err(|e| e.to_string())?;
    let d = combined_distance(&fm).unwrap();
    let dend = agglomerative_cluster(&d, Linkage::Average).unwrap();
    let first = dend.merges()[0];
    check((first.left, first.right) == (0, 1), || {
        format!("first merge joins {} and {}", d.labels()[first.left.min(8)], d.labels()[first.right.min(8)])
    })?;
    let mse = mse_matrix(&dataset, &Band::full()).unwrap();
    let closest = mse.closest_pair().unwrap();
    check(closest != (0, 1), || "MSE ranks Strad and V1 closest".into())?;
    Ok(format!(
        "first merge Strad+V1 at {:.3}; MSE closest pair {}+{} (Strad-V1 MSE {:.1} dB^2 vs {:.1})",
        first.height,
        mse.labels()[closest.0],
        mse.labels()[closest.1],
        mse.get(0, 1),
        mse.get(closest.0, closest.1)
    ))
}

// 7. Clustering against a from-scratch oracle, GW against flip enumeration.
fn clustering_oracle() -> Outcome {
    let mut r = rng(7);
    let mut height_mismatch = 0;
    let mut gw_suboptimal = 0;
    let mut worst_gap = 0.0f64;
    let mut float_mismatch = 0;
    for _ in 0..200 {
        let m = r.random_range(2..=8);
        let d = DistanceMatrix::new(labels("L", m), integer_metric(&mut r, m)).unwrap();
        for linkage in [Linkage::Single, Linkage::Complete, Linkage::Average] {
            let t = agglomerative_cluster(&d, linkage).unwrap();
            if t.heights() != naive_merge_heights(d.matrix(), linkage) {
                height_mismatch += 1;
            }
        }
        let t = agglomerative_cluster(&d, Linkage::Average).unwrap();
        let gw = gw_leaf_order(&t, &d).unwrap();
        let gw_sum = frfm::clustering::adjacent_distance_sum(&d, &gw);
        let best = min_flip_adjacent_sum(&t, d.matrix());
        if gw_sum != best {
            gw_suboptimal += 1;
            worst_gap = worst_gap.max((gw_sum - best) / best);
        }
        // Real-valued Euclidean points, compared to 1e-12 relative.
        let pts: Vec<[f64; 3]> = (0..m).map(|_| [r.random(), r.random(), r.random()]).collect();
        let e = Array2::from_shape_fn((m, m), |(i, j)| {
            pts[i].iter().zip(&pts[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
        });
        let e = DistanceMatrix::new(labels("P", m), e).unwrap();
        let got = agglomerative_cluster(&e, Linkage::Average).unwrap().heights();
        let want = naive_merge_heights(e.matrix(), Linkage::Average);
        if got.iter().zip(&want).any(|(a, b)| (a - b).abs() > 1e-12 * b.max(1.0)) {
            float_mismatch += 1;
        }
    }
    let detail = format!(
        "merge-height mismatches {height_mismatch}/600 exact + {float_mismatch}/200 real-valued; \
         GW above flip optimum in {gw_suboptimal}/200 trials (worst +{:.1}%)",
        100.0 * worst_gap
    );
    check(height_mismatch == 0 && float_mismatch == 0 && gw_suboptimal == 0, || detail.clone())?;
    Ok(detail)
}

// 8. Power fraction and bridge-hill indicator.
fn power_fraction() -> Outcome {
    let mut r = rng(8);
    let grid = Grid::new(0.0, 1.0, 4001).unwrap();
    for trial in 0..20 {
        let h = synthesize_frf(&random_ten_mode_model(&mut r), &grid);
        let c = power_fraction_curve(&h).unwrap();
        check(c.windows(2).all(|w| w[1] >= w[0]), || format!("trial {trial}: curve decreases"))?;
        check(*c.last().unwrap() == 1.0, || format!("trial {trial}: terminal value {}", c.last().unwrap()))?;
    }
    let flat = FrequencySeries::new(20.0, 0.25, vec![Complex64::new(0.3, -0.4); 801]).unwrap();
    let c = power_fraction_curve(&flat).unwrap();
    let lin = c.iter().enumerate().map(|(k, v)| (v - k as f64 / 800.0).abs()).fold(0.0, f64::max);
    check(lin <= 1e-9, || format!("flat spectrum deviates by {lin:e}"))?;

    // The indicator reads the |H|^2 maximum, about f*xi^2 below the natural
    // frequency; xi <= 0.02 keeps that offset within 1 Hz below 2.5 kHz.
    let mut worst = 0.0f64;
    for trial in 0..50 {
        let xi = r.random_range(0.005..0.02);
        let (fa, fb) = loop {
            let a: f64 = r.random_range(300.0..2500.0);
            let b: f64 = r.random_range(300.0..2500.0);
            if (a - b).abs() > 20.0 * xi * a.max(b) {
                break (a, b);
            }
        };
        let loud = r.random_range(0.0..6.0);
        let h = synthesize_frf(
            &ModalModel::new(vec![mode_at_level(fa, xi, loud + 10.0), mode_at_level(fb, xi, loud)]).unwrap(),
            &grid,
        );
        let f = bridge_hill_indicator(&h, 11).unwrap();
        worst = worst.max((f - fa).abs());
        check((f - fa).abs() <= 2.0, || format!("trial {trial}: indicator {f} Hz, dominant mode {fa:.1} Hz"))?;
    }
    Ok(format!("monotone, terminal 1, linearity error {lin:.1e}, indicator within {worst:.1} Hz"))
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Small fixed dataset used for the golden figures.
fn golden_inputs() -> (Vec<(String, FrequencySeries)>, FeatureMatrices, DistanceMatrix, Dendrogram) {
    let grid = Grid::new(0.0, 2.0, 1001).unwrap();
    let spec = [
        ("alpha", [180.0, 420.0, 700.0, 1100.0], 0.0),
        ("beta", [185.0, 425.0, 690.0, 1120.0], 2.0),
        ("gamma", [200.0, 400.0, 760.0, 1050.0], -3.0),
        ("delta", [182.0, 418.0, 705.0, 1090.0], 1.0),
    ];
    let data: Vec<(String, FrequencySeries)> = spec
        .iter()
        .map(|(label, fs, gain)| {
            let modes = fs
                .iter()
                .enumerate()
                .map(|(i, f)| mode_at_level(*f, 0.015 + 0.002 * i as f64, gain - i as f64))
                .collect();
            (label.to_string(), synthesize_frf(&ModalModel::new(modes).unwrap(), &grid))
        })
        .collect();
    let cfg = PeakConfig { n_peaks: 4, ..PeakConfig::default() };
    let fm = build_feature_matrices(&data, &cfg).unwrap();
    let d = combined_distance(&fm).unwrap();
    let t = agglomerative_cluster(&d, Linkage::Average).unwrap();
    let order = gw_leaf_order(&t, &d).unwrap();
    (data, fm, d, t.with_leaf_order(order).unwrap())
}

fn golden_figures() -> Vec<(&'static str, String)> {
    let (data, fm, d, t) = golden_inputs();
    let cfg = PeakConfig { n_peaks: 4, ..PeakConfig::default() };
    let ex = extract_features(&data[0].1, &cfg).unwrap();
    let rec = reconstruct_from_features(&ex.peaks, &data[0].1.grid()).unwrap();
    vec![
        ("frf-overlay.svg", report::frf_overlay(&data[0].1, Some(&rec), &ex.peaks, "alpha").unwrap()),
        ("feature-heatmap.svg", report::feature_heatmap(&fm, Some(t.leaf_order()), "Features").unwrap()),
        ("distance-heatmap.svg", report::distance_heatmap(&d, Some(t.leaf_order()), "Distance").unwrap()),
        ("dendrogram.svg", report::dendrogram_svg(&t, "Dendrogram").unwrap()),
        ("power-fraction.svg", report::power_fraction_svg(&data, 11, "Power fraction").unwrap()),
    ]
}

// 9. Writers deterministic, loaders invert writers, golden SVGs stable.
fn io_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let (data, fm, d, t) = golden_inputs();
    let p = |name: &str| dir.path().join(name);

    for round in 0..2 {
        let suffix = format!(".{round}");
        io::save_frf_csv(&data[0].1, &p(&format!("frf.csv{suffix}"))).unwrap();
        io::save_features_csv(&fm, &p(&format!("features.csv{suffix}"))).unwrap();
        io::save_distance_csv(&d, &p(&format!("distance.csv{suffix}"))).unwrap();
        io::save_dendrogram_json(&t, &p(&format!("tree.json{suffix}"))).unwrap();
        io::save_dendrogram_newick(&t, &p(&format!("tree.nwk{suffix}"))).unwrap();
    }
    for name in ["frf.csv", "features.csv", "distance.csv", "tree.json", "tree.nwk"] {
        let a = std::fs::read(p(&format!("{name}.0"))).unwrap();
        let b = std::fs::read(p(&format!("{name}.1"))).unwrap();
        check(a == b, || format!("{name} differs between runs"))?;
    }

    let frf = io::load_frf_csv(&p("frf.csv.0")).unwrap();
    check(frf.values() == data[0].1.values(), || "FRF values do not round-trip".into())?;
    check(
        (frf.f0() - data[0].1.f0()).abs() <= 1e-12 && (frf.df() - data[0].1.df()).abs() <= 1e-12 * data[0].1.df(),
        || "FRF grid does not round-trip".into(),
    )?;
    let fm2 = io::load_features_csv(&p("features.csv.0")).unwrap();
    check(fm2.f() == fm.f() && fm2.p() == fm.p() && fm2.q() == fm.q() && fm2.labels() == fm.labels(), || {
        "features do not round-trip".into()
    })?;
    check(io::load_distance_csv(&p("distance.csv.0")).unwrap() == d, || "distance does not round-trip".into())?;
    check(io::load_dendrogram_json(&p("tree.json.0")).unwrap() == t, || "dendrogram does not round-trip".into())?;

    let record = TimeRecord::new(4096.0, (0..512).map(|n| (n as f64 * 0.37).sin() * 0.5).collect(), RecordKind::Force).unwrap();
    io::save_time_record_csv(&record, &p("rec.csv")).unwrap();
    check(io::load_time_record(&p("rec.csv"), RecordKind::Force).unwrap() == record, || {
        "time CSV does not round-trip".into()
    })?;
    let f32_record = TimeRecord::new(
        4096.0,
        record.samples().iter().map(|v| *v as f32 as f64).collect(),
        RecordKind::Force,
    )
    .unwrap();
    io::save_time_record_wav(&f32_record, &p("rec.wav")).unwrap();
    check(io::load_time_record(&p("rec.wav"), RecordKind::Force).unwrap() == f32_record, || {
        "WAV does not round-trip".into()
    })?;

    let bless = std::env::var_os("FRFM_BLESS").is_some();
    let golden = golden_dir();
    for (name, svg) in golden_figures() {
        let again = golden_figures().into_iter().find(|(n, _)| *n == name).unwrap().1;
        check(svg == again, || format!("{name} differs between runs"))?;
        let path = golden.join(name);
        if bless {
            std::fs::create_dir_all(&golden).unwrap();
            std::fs::write(&path, &svg).unwrap();
        }
        let stored = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        check(stored == svg, || format!("{name} no longer matches its golden file"))?;
    }
    Ok("5 writers byte-stable, 7 round trips exact, 5 golden SVGs match".into())
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("round-trip fidelity", round_trip),
        ("estimator correctness", estimators),
        ("metric axioms", metric_axioms),
        ("forced value 6*sqrt(10)", forced_value),
        ("discrimination chain", discrimination),
        ("shared signature modes", strad_copy),
        ("clustering oracle", clustering_oracle),
        ("power fraction", power_fraction),
        ("I/O determinism", io_determinism),
    ];
    let only: Option<usize> = std::env::args().nth(1).and_then(|a| a.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if only.is_some_and(|o| o != i + 1) {
            continue;
        }
        match f() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
