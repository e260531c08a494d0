use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use super::args::*;
use super::{Context, Failure};
use crate::clustering::{agglomerative_cluster, gw_leaf_order, reorder, Dendrogram};
use crate::error::{Error, Result};
use crate::estimation::{synthetic_impulse_response, unit_impulse, Estimator, SpectralAverages, Window};
use crate::features::{build_feature_matrices, extract_features, FeatureMatrices, PeakConfig};
use crate::frf::{reconstruct_from_features, synthesize_frf, FrequencySeries, Grid, ModalModel, ModalParameter};
use crate::io::{self, DatasetManifest, EntryKind, ManifestEntry};
use crate::metrics::{
    combined_distance, feature_subspace_distance, mse_matrix, DistanceMatrix, Metric,
};
use crate::report;

type CmdResult = std::result::Result<(), Failure>;

pub(super) fn dispatch(cmd: &Command, ctx: &mut Context) -> CmdResult {
    match cmd {
        Command::Synth(a) => synth(a, ctx),
        Command::Estimate(a) => estimate(a, ctx),
        Command::Extract(a) => extract(a, ctx),
        Command::Distance(a) => distance(a, ctx),
        Command::Cluster(a) => cluster(a, ctx),
        Command::Report(a) => report_cmd(a, ctx),
        Command::Pipeline(a) => pipeline(a, ctx),
    }
}

fn require_file(path: &Path) -> CmdResult {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{}: no such file", path.display())))
    }
}

fn ensure_dir(dir: &Path) -> CmdResult {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Data(format!("{}: {e}", dir.display())))
}

/// Label used for file names: anything outside `[A-Za-z0-9._-]` becomes `_`.
fn file_stem_for(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' })
        .collect()
}

fn label_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSpec {
    modes: Vec<ModeSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModeSpec {
    frequency_hz: f64,
    damping_ratio: f64,
    residue: f64,
}

/// Reads a model JSON file, reporting invalid values by field path.
pub fn load_model(path: &Path) -> Result<ModalModel> {
    let text = io::read_to_string(path)?;
    let spec: ModelSpec = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        msg: e.to_string(),
    })?;
    let mut modes = Vec::with_capacity(spec.modes.len());
    for (i, m) in spec.modes.iter().enumerate() {
        let field_err = |field: &str, msg: String| Error::format(path, format!("modes[{i}].{field}: {msg}"));
        if !(m.frequency_hz > 0.0) || !m.frequency_hz.is_finite() {
            return Err(field_err("frequency_hz", format!("must be > 0, got {}", m.frequency_hz)));
        }
        if !(m.damping_ratio > 0.0 && m.damping_ratio < 1.0) {
            return Err(field_err("damping_ratio", format!("must lie in (0, 1), got {}", m.damping_ratio)));
        }
        if !m.residue.is_finite() {
            return Err(field_err("residue", "must be finite".into()));
        }
        modes.push(ModalParameter::from_hz(m.frequency_hz, m.damping_ratio, m.residue)?);
    }
    ModalModel::new(modes).map_err(|e| Error::format(path, format!("modes: {e}")))
}

fn synth(a: &SynthArgs, ctx: &mut Context) -> CmdResult {
    require_file(&a.model)?;
    let grid = Grid::span(a.f_min, a.f_max, a.df).map_err(|e| Failure::Usage(e.to_string()))?;
    let model = load_model(&a.model)?;
    let frf = synthesize_frf(&model, &grid);
    io::save_frf_csv(&frf, &a.output)?;
    ctx.wrote(&a.output);

    if let (Some(dir), Some(fs)) = (&a.records, a.fs) {
        ensure_dir(dir)?;
        let velocity = synthetic_impulse_response(&model, fs, a.samples)?;
        let force = unit_impulse(fs, a.samples, 1.0)?;
        let (fp, vp) = (dir.join("force.csv"), dir.join("velocity.csv"));
        io::save_time_record_csv(&force, &fp)?;
        ctx.wrote(&fp);
        io::save_time_record_csv(&velocity, &vp)?;
        ctx.wrote(&vp);
        let manifest = DatasetManifest {
            entries: vec![ManifestEntry {
                label: label_of(&a.output),
                kind: EntryKind::ImpulsePair,
                paths: vec!["force.csv".into(), "velocity.csv".into()],
                metadata: Default::default(),
            }],
        };
        let mp = dir.join("manifest.json");
        manifest.save(&mp)?;
        ctx.wrote(&mp);
    }
    Ok(())
}

/// FRF estimate of one time-record entry, plus coherence when it holds
/// at least two averages.
pub fn estimate_entry(
    entry: &ManifestEntry,
    estimator: Estimator,
    window: &Window,
) -> Result<(FrequencySeries, Option<FrequencySeries>)> {
    let set = io::load_time_records(entry)?;
    let avg = SpectralAverages::compute(&set, window)?;
    let frf = estimator.apply(&avg)?;
    let coh = if avg.count() >= 2 { Some(avg.coherence()?) } else { None };
    Ok((frf, coh))
}

type Estimated = (String, Result<(FrequencySeries, Option<FrequencySeries>)>);

/// Loads or estimates every manifest entry, in manifest order.
fn manifest_frfs(manifest: &DatasetManifest, estimator: Estimator, window: &Window) -> Vec<Estimated> {
    manifest
        .entries
        .par_iter()
        .map(|e| {
            let r = match e.kind {
                EntryKind::FrfCsv => io::load_frf_csv(&e.paths[0]).map(|h| (h, None)),
                _ => estimate_entry(e, estimator, window),
            };
            (e.label.clone(), r)
        })
        .collect()
}

fn collect_failures(results: Vec<Estimated>) -> std::result::Result<Vec<(String, FrequencySeries, Option<FrequencySeries>)>, Failure> {
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for (label, r) in results {
        match r {
            Ok((h, c)) => ok.push((label, h, c)),
            Err(e) => failed.push(format!("{label} ({e})")),
        }
    }
    if failed.is_empty() {
        Ok(ok)
    } else {
        Err(Failure::Data(format!("could not load: {}", failed.join(", "))))
    }
}

fn load_manifest(path: &Path) -> std::result::Result<DatasetManifest, Failure> {
    require_file(path)?;
    DatasetManifest::load(path).map_err(|e| Failure::Usage(e.to_string()))
}

fn estimate(a: &EstimateArgs, ctx: &mut Context) -> CmdResult {
    let manifest = load_manifest(&a.manifest)?;
    let estimator = ctx.config.estimator(&a.estimator);
    let window = ctx.config.window(&a.estimator)?;
    let out = ctx.config.output_dir(a.output.as_deref());
    ensure_dir(&out)?;
    let entries: Vec<&ManifestEntry> = manifest
        .entries
        .iter()
        .filter(|e| e.kind != EntryKind::FrfCsv)
        .collect();
    if entries.is_empty() {
        return Err(Failure::Usage("manifest lists no time-record entries".into()));
    }
    let results: Vec<_> = entries
        .par_iter()
        .map(|e| (e.label.clone(), estimate_entry(e, estimator, &window)))
        .collect();
    let mut failed = Vec::new();
    for (label, r) in results {
        match r {
            Ok((frf, coh)) => {
                let stem = file_stem_for(&label);
                let p = out.join(format!("{stem}.csv"));
                io::save_frf_csv(&frf, &p)?;
                ctx.wrote(&p);
                if let Some(c) = coh {
                    let p = out.join(format!("{stem}.coherence.csv"));
                    io::save_frf_csv(&c, &p)?;
                    ctx.wrote(&p);
                }
            }
            Err(e) => {
                log::error!("{label}: {e}");
                failed.push(format!("{label} ({e})"));
            }
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Data(format!("estimation failed for {}", failed.join(", "))))
    }
}

/// FRF files first, then manifest entries.
fn gather_dataset(
    frfs: &[PathBuf],
    manifest: Option<&Path>,
    est: &EstimatorArgs,
    ctx: &Context,
) -> std::result::Result<Vec<(String, FrequencySeries)>, Failure> {
    for p in frfs {
        require_file(p)?;
    }
    let manifest = manifest.map(load_manifest).transpose()?;
    let mut data = Vec::new();
    let mut failed = Vec::new();
    let loaded: Vec<_> = frfs.par_iter().map(|p| (label_of(p), io::load_frf_csv(p))).collect();
    for (label, r) in loaded {
        match r {
            Ok(h) => data.push((label, h)),
            Err(e) => failed.push(e.to_string()),
        }
    }
    if !failed.is_empty() {
        return Err(Failure::Data(failed.join("; ")));
    }
    if let Some(m) = manifest {
        let window = ctx.config.window(est)?;
        let results = manifest_frfs(&m, ctx.config.estimator(est), &window);
        data.extend(collect_failures(results)?.into_iter().map(|(l, h, _)| (l, h)));
    }
    if data.len() < 2 {
        return Err(Failure::Usage(format!("need at least 2 FRFs, got {}", data.len())));
    }
    Ok(data)
}

fn features_of(dataset: &[(String, FrequencySeries)], cfg: &PeakConfig, ctx: &mut Context) -> std::result::Result<FeatureMatrices, Failure> {
    let fm = build_feature_matrices(dataset, cfg)?;
    for (label, k, flags) in fm.flagged() {
        let what = if flags.bandwidth_unresolved {
            "half-power bandwidth unresolved, Q imputed"
        } else {
            "peak not refined"
        };
        ctx.warn(format!("{label}: peak {}: {what}", k + 1));
    }
    Ok(fm)
}

fn extract(a: &ExtractArgs, ctx: &mut Context) -> CmdResult {
    if a.frfs.is_empty() && a.manifest.is_none() {
        return Err(Failure::Usage("give FRF files or --manifest".into()));
    }
    let cfg = ctx.config.peak_config(&a.peaks)?;
    let data = gather_dataset(&a.frfs, a.manifest.as_deref(), &a.estimator, ctx)?;
    let fm = features_of(&data, &cfg, ctx)?;
    io::save_features_csv(&fm, &a.output)?;
    ctx.wrote(&a.output);
    Ok(())
}

/// Distance of the chosen feature metric.
pub fn feature_distance(fm: &FeatureMatrices, metric: Metric) -> Result<DistanceMatrix> {
    match metric.subspace() {
        Some(s) => feature_subspace_distance(fm, s),
        None => combined_distance(fm),
    }
}

fn distance(a: &DistanceArgs, ctx: &mut Context) -> CmdResult {
    let metric = ctx.config.metric(a.metric);
    let d = match &a.features {
        Some(path) => {
            if metric == Metric::Mse {
                return Err(Failure::Usage("the mse metric needs FRF inputs, not a features table".into()));
            }
            require_file(path)?;
            feature_distance(&io::load_features_csv(path)?, metric)?
        }
        None => {
            if a.frfs.is_empty() {
                return Err(Failure::Usage("give FRF files or --features".into()));
            }
            let data = gather_dataset(&a.frfs, None, &EstimatorArgs::default(), ctx)?;
            if metric == Metric::Mse {
                let band = ctx.config.band(&a.peaks)?;
                mse_matrix(&data, &band)?
            } else {
                let cfg = ctx.config.peak_config(&a.peaks)?;
                feature_distance(&features_of(&data, &cfg, ctx)?, metric)?
            }
        }
    };
    io::save_distance_csv(&d, &a.output)?;
    ctx.wrote(&a.output);
    Ok(())
}

/// Clusters `d` and returns the tree in Gruvaeus–Wainer order.
pub fn ordered_dendrogram(d: &DistanceMatrix, linkage: crate::clustering::Linkage) -> Result<Dendrogram> {
    let dend = agglomerative_cluster(d, linkage)?;
    let order = gw_leaf_order(&dend, d)?;
    dend.with_leaf_order(order)
}

fn write_cluster_outputs(d: &DistanceMatrix, dend: &Dendrogram, out: &Path, ctx: &mut Context) -> CmdResult {
    let json = out.join("dendrogram.json");
    io::save_dendrogram_json(dend, &json)?;
    ctx.wrote(&json);
    let nwk = out.join("dendrogram.nwk");
    io::save_dendrogram_newick(dend, &nwk)?;
    ctx.wrote(&nwk);
    let ordered = out.join("distance.ordered.csv");
    io::save_distance_csv(&reorder(d, dend.leaf_order())?, &ordered)?;
    ctx.wrote(&ordered);
    Ok(())
}

fn cluster(a: &ClusterArgs, ctx: &mut Context) -> CmdResult {
    require_file(&a.distance)?;
    let out = ctx.config.output_dir(a.output.as_deref());
    ensure_dir(&out)?;
    let d = io::load_distance_csv(&a.distance)?;
    let dend = ordered_dendrogram(&d, ctx.config.linkage(a.linkage))?;
    write_cluster_outputs(&d, &dend, &out, ctx)
}

/// Leaf order of `dend` if it covers exactly `labels`, in their indexing.
fn order_for(dend: &Dendrogram, labels: &[String]) -> std::result::Result<Vec<usize>, Failure> {
    if dend.labels() != labels {
        return Err(Failure::Usage("dendrogram labels do not match the table".into()));
    }
    Ok(dend.leaf_order().to_vec())
}

fn write_svg(path: &Path, svg: &str, ctx: &mut Context) -> CmdResult {
    io::write_atomic(path, svg.as_bytes())?;
    ctx.wrote(path);
    Ok(())
}

/// Overlay of an FRF and the model rebuilt from its extracted features.
pub fn overlay_svg(frf: &FrequencySeries, cfg: &PeakConfig, title: &str) -> Result<String> {
    let ex = extract_features(frf, cfg)?;
    let rec = reconstruct_from_features(&ex.peaks, &frf.grid())?;
    report::frf_overlay(frf, Some(&rec), &ex.peaks, title)
}

fn report_cmd(a: &ReportArgs, ctx: &mut Context) -> CmdResult {
    let missing = |what: &str| Failure::Usage(format!("{:?} needs {what}", a.figure));
    let dend = match &a.dendrogram {
        Some(p) => {
            require_file(p)?;
            Some(io::load_dendrogram_json(p)?)
        }
        None => None,
    };
    for p in a.frf.iter().chain(&a.features).chain(&a.distance) {
        require_file(p)?;
    }
    let svg = match a.figure {
        Figure::FrfOverlay => {
            let [path] = a.frf.as_slice() else {
                return Err(missing("exactly one --frf"));
            };
            let cfg = ctx.config.peak_config(&a.peaks)?;
            let frf = io::load_frf_csv(path)?;
            let title = a.title.clone().unwrap_or_else(|| label_of(path));
            overlay_svg(&frf, &cfg, &title)?
        }
        Figure::FeatureHeatmap => {
            let path = a.features.as_ref().ok_or_else(|| missing("--features"))?;
            let fm = io::load_features_csv(path)?;
            let order = dend.as_ref().map(|t| order_for(t, fm.labels())).transpose()?;
            report::feature_heatmap(&fm, order.as_deref(), a.title.as_deref().unwrap_or("Features"))?
        }
        Figure::DistanceHeatmap => {
            let path = a.distance.as_ref().ok_or_else(|| missing("--distance"))?;
            let d = io::load_distance_csv(path)?;
            let order = dend.as_ref().map(|t| order_for(t, d.labels())).transpose()?;
            report::distance_heatmap(&d, order.as_deref(), a.title.as_deref().unwrap_or("Distance"))?
        }
        Figure::Dendrogram => {
            let t = dend.as_ref().ok_or_else(|| missing("--dendrogram"))?;
            report::dendrogram_svg(t, a.title.as_deref().unwrap_or("Dendrogram"))?
        }
        Figure::PowerFraction => {
            if a.frf.is_empty() {
                return Err(missing("at least one --frf"));
            }
            let series = a
                .frf
                .iter()
                .map(|p| Ok((label_of(p), io::load_frf_csv(p)?)))
                .collect::<Result<Vec<_>>>()?;
            let smoothing = ctx.config.smoothing(a.smoothing)?;
            report::power_fraction_svg(&series, smoothing, a.title.as_deref().unwrap_or("Power fraction"))?
        }
    };
    write_svg(&a.output, &svg, ctx)
}

fn pipeline(a: &PipelineArgs, ctx: &mut Context) -> CmdResult {
    let manifest = load_manifest(&a.manifest)?;
    let cfg = ctx.config.peak_config(&a.peaks)?;
    let window = ctx.config.window(&a.estimator)?;
    let estimator = ctx.config.estimator(&a.estimator);
    let linkage = ctx.config.linkage(a.linkage);
    let smoothing = ctx.config.smoothing(a.smoothing)?;
    let out = ctx.config.output_dir(a.output.as_deref());
    if manifest.entries.len() < 2 {
        return Err(Failure::Usage("the pipeline needs at least 2 manifest entries".into()));
    }
    let (frf_dir, report_dir) = (out.join("frf"), out.join("reports"));
    ensure_dir(&frf_dir)?;
    ensure_dir(&report_dir)?;

    let loaded = collect_failures(manifest_frfs(&manifest, estimator, &window))?;
    for (label, h, coh) in &loaded {
        let stem = file_stem_for(label);
        let p = frf_dir.join(format!("{stem}.csv"));
        io::save_frf_csv(h, &p)?;
        ctx.wrote(&p);
        if let Some(c) = coh {
            let p = frf_dir.join(format!("{stem}.coherence.csv"));
            io::save_frf_csv(c, &p)?;
            ctx.wrote(&p);
        }
    }
    let data: Vec<(String, FrequencySeries)> = loaded.into_iter().map(|(l, h, _)| (l, h)).collect();

    let fm = features_of(&data, &cfg, ctx)?;
    let p = out.join("features.csv");
    io::save_features_csv(&fm, &p)?;
    ctx.wrote(&p);

    let d = combined_distance(&fm)?;
    let p = out.join("distance.csv");
    io::save_distance_csv(&d, &p)?;
    ctx.wrote(&p);
    for metric in [Metric::FeatureF, Metric::FeatureP, Metric::FeatureQ] {
        let p = out.join(format!("distance.{metric}.csv"));
        io::save_distance_csv(&feature_distance(&fm, metric)?, &p)?;
        ctx.wrote(&p);
    }
    match mse_matrix(&data, &crate::features::Band::full()) {
        Ok(mse) => {
            let p = out.join("distance.mse.csv");
            io::save_distance_csv(&mse, &p)?;
            ctx.wrote(&p);
        }
        Err(e) => ctx.warn(format!("MSE matrix skipped: {e}")),
    }

    let dend = ordered_dendrogram(&d, linkage)?;
    write_cluster_outputs(&d, &dend, &out, ctx)?;

    let order = dend.leaf_order();
    write_svg(&report_dir.join("distance-heatmap.svg"), &report::distance_heatmap(&d, Some(order), "Distance")?, ctx)?;
    write_svg(&report_dir.join("feature-heatmap.svg"), &report::feature_heatmap(&fm, Some(order), "Features")?, ctx)?;
    write_svg(&report_dir.join("dendrogram.svg"), &report::dendrogram_svg(&dend, "Dendrogram")?, ctx)?;
    write_svg(
        &report_dir.join("power-fraction.svg"),
        &report::power_fraction_svg(&data, smoothing, "Power fraction")?,
        ctx,
    )?;
    for (label, h) in &data {
        let p = report_dir.join(format!("frf-overlay.{}.svg", file_stem_for(label)));
        write_svg(&p, &overlay_svg(h, &cfg, label)?, ctx)?;
    }
    Ok(())
}
