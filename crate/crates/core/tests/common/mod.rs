#![allow(dead_code)]

use std::f64::consts::PI;

use frfm::frf::{ModalModel, ModalParameter};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mode whose resonance peak reaches `level_db` (dB re 1).
pub fn mode_at_level(f_hz: f64, xi: f64, level_db: f64) -> ModalParameter {
    let w = 2.0 * PI * f_hz;
    let phi = 10f64.powf(level_db / 20.0) * 2.0 * xi * w * w;
    ModalParameter::from_hz(f_hz, xi, phi).unwrap()
}

/// Ten modes with f in 200-3000 Hz, damping 0.005-0.03, neighbours more
/// than ten half-power bandwidths apart and peak levels within +-3 dB.
pub fn random_ten_mode_model(rng: &mut ChaCha8Rng) -> ModalModel {
    loop {
        let mut f: Vec<f64> = (0..10).map(|_| rng.random_range(200.0..3000.0)).collect();
        f.sort_by(f64::total_cmp);
        let xi: Vec<f64> = (0..10).map(|_| rng.random_range(0.005..0.03)).collect();
        let spaced = (0..9).all(|i| f[i + 1] - f[i] > 10.0 * (xi[i] * f[i]).max(xi[i + 1] * f[i + 1]));
        if !spaced {
            continue;
        }
        let modes = (0..10)
            .map(|i| mode_at_level(f[i], xi[i], rng.random_range(-3.0..3.0)))
            .collect();
        return ModalModel::new(modes).unwrap();
    }
}

/// Symmetric matrix of random integers in [512, 1023]; any such matrix
/// satisfies the triangle inequality.
pub fn integer_metric(rng: &mut ChaCha8Rng, m: usize) -> ndarray::Array2<f64> {
    let mut d = ndarray::Array2::zeros((m, m));
    for i in 0..m {
        for j in i + 1..m {
            let v = rng.random_range(512..1024) as f64;
            d[[i, j]] = v;
            d[[j, i]] = v;
        }
    }
    d
}

pub fn labels(prefix: &str, m: usize) -> Vec<String> {
    (0..m).map(|i| format!("{prefix}{i}")).collect()
}

/// Merge heights of agglomerative clustering, recomputing every
/// cluster-to-cluster distance from the leaves at each step. Clusters are
/// ranked by their smallest leaf and ties go to the first pair found.
pub fn naive_merge_heights(d: &ndarray::Array2<f64>, linkage: frfm::clustering::Linkage) -> Vec<f64> {
    use frfm::clustering::Linkage;
    let mut clusters: Vec<Vec<usize>> = (0..d.nrows()).map(|i| vec![i]).collect();
    let mut heights = Vec::new();
    while clusters.len() > 1 {
        clusters.sort_by_key(|c| *c.iter().min().unwrap());
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let pairs = clusters[a]
                    .iter()
                    .flat_map(|&i| clusters[b].iter().map(move |&j| (i, j)));
                let v = match linkage {
                    Linkage::Single => pairs.map(|(i, j)| d[[i, j]]).fold(f64::INFINITY, f64::min),
                    Linkage::Complete => pairs.map(|(i, j)| d[[i, j]]).fold(f64::NEG_INFINITY, f64::max),
                    Linkage::Average => {
                        let s: f64 = pairs.map(|(i, j)| d[[i, j]]).sum();
                        s / (clusters[a].len() * clusters[b].len()) as f64
                    }
                };
                if best.is_none_or(|(_, _, bv)| v < bv) {
                    best = Some((a, b, v));
                }
            }
        }
        let (a, b, v) = best.unwrap();
        let merged = clusters.remove(b);
        clusters[a].extend(merged);
        heights.push(v);
    }
    heights
}

/// Smallest adjacent-leaf distance sum over every combination of
/// subtree flips of `dend`.
pub fn min_flip_adjacent_sum(dend: &frfm::clustering::Dendrogram, d: &ndarray::Array2<f64>) -> f64 {
    let m = dend.n_leaves();
    let internal = m - 1;
    let mut best = f64::INFINITY;
    for mask in 0u64..(1u64 << internal) {
        let mut seq: Vec<Vec<usize>> = (0..m).map(|i| vec![i]).collect();
        for (i, mg) in dend.merges().iter().enumerate() {
            let (mut l, mut r) = (seq[mg.left].clone(), seq[mg.right].clone());
            if mask >> i & 1 == 1 {
                std::mem::swap(&mut l, &mut r);
            }
            l.extend(r);
            seq.push(l);
        }
        let order = seq.last().unwrap();
        let s: f64 = order.windows(2).map(|w| d[[w[0], w[1]]]).sum();
        best = best.min(s);
    }
    best
}
