//! Static SVG figures.
//!
//! Output is plain text built with fixed coordinate precision, so equal
//! inputs always give byte-identical files.

use std::fmt::Write as _;

use crate::clustering::Dendrogram;
use crate::error::{Error, Result};
use crate::features::FeatureMatrices;
use crate::frf::{FrequencySeries, ModalPeak};
use crate::metrics::{bridge_hill_indicator, power_fraction_curve, zscore_normalize, DistanceMatrix};

const FONT: &str = "font-family=\"sans-serif\" font-size=\"11\"";
const SERIES_COLORS: [&str; 6] = ["#1f4e79", "#c0392b", "#27865f", "#8e44ad", "#d68910", "#5d6d7e"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Svg {
    body: String,
    width: f64,
    height: f64,
}

impl Svg {
    fn new(width: f64, height: f64) -> Self {
        Self {
            body: String::new(),
            width,
            height,
        }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, attrs: &str) {
        writeln!(
            self.body,
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" {attrs}/>"
        )
        .unwrap();
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, attrs: &str) {
        writeln!(
            self.body,
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" {attrs}/>"
        )
        .unwrap();
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, attrs: &str, content: &str) {
        writeln!(
            self.body,
            "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"{anchor}\" {FONT} {attrs}>{}</text>",
            escape(content)
        )
        .unwrap();
    }

    fn polyline(&mut self, points: &[(f64, f64)], attrs: &str) {
        let pts: Vec<String> = points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        writeln!(self.body, "<polyline points=\"{}\" fill=\"none\" {attrs}/>", pts.join(" ")).unwrap();
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n\
             <rect x=\"0\" y=\"0\" width=\"{w:.0}\" height=\"{h:.0}\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

/// Linear map from `[lo, hi]` onto `[a, b]`.
fn scale(v: f64, lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    if hi > lo {
        a + (v - lo) / (hi - lo) * (b - a)
    } else {
        (a + b) / 2.0
    }
}

/// Sequential colour ramp, `t` in `[0, 1]` from dark blue to pale yellow.
fn ramp(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 5] = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (94.0, 201.0, 98.0),
        (253.0, 231.0, 37.0),
    ];
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let x = t * (STOPS.len() - 1) as f64;
    let i = (x.floor() as usize).min(STOPS.len() - 2);
    let u = x - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |p: f64, q: f64| (p + (q - p) * u).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// "Nice" tick values covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let raw = (hi - lo) / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let start = (lo / step).ceil() as i64;
    let end = (hi / step).floor() as i64;
    (start..=end).map(|k| k as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    let r = (v * 1e6).round() / 1e6;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

struct Plot {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
    x: (f64, f64),
    y: (f64, f64),
}

impl Plot {
    fn px(&self, x: f64) -> f64 {
        scale(x, self.x.0, self.x.1, self.left, self.left + self.width)
    }

    fn py(&self, y: f64) -> f64 {
        scale(y, self.y.0, self.y.1, self.top + self.height, self.top)
    }

    fn axes(&self, svg: &mut Svg, x_label: &str, y_label: &str) {
        let (l, t, w, h) = (self.left, self.top, self.width, self.height);
        svg.rect(l, t, w, h, "fill=\"none\" stroke=\"#333\"");
        for v in ticks(self.x.0, self.x.1, 8) {
            let x = self.px(v);
            svg.line(x, t + h, x, t + h + 4.0, "stroke=\"#333\"");
            svg.text(x, t + h + 16.0, "middle", "", &fmt_tick(v));
        }
        for v in ticks(self.y.0, self.y.1, 6) {
            let y = self.py(v);
            svg.line(l - 4.0, y, l, y, "stroke=\"#333\"");
            svg.line(l, y, l + w, y, "stroke=\"#ddd\"");
            svg.text(l - 6.0, y + 4.0, "end", "", &fmt_tick(v));
        }
        svg.text(l + w / 2.0, t + h + 34.0, "middle", "", x_label);
        let (cx, cy) = (l - 44.0, t + h / 2.0);
        svg.text(cx, cy, "middle", &format!("transform=\"rotate(-90 {cx:.2} {cy:.2})\""), y_label);
    }
}

fn db_points(plot: &Plot, series: &FrequencySeries) -> Vec<Vec<(f64, f64)>> {
    // Masked bins split the curve.
    let mut runs = vec![Vec::new()];
    for k in 0..series.len() {
        match series.db(k) {
            Some(level) => runs
                .last_mut()
                .unwrap()
                .push((plot.px(series.frequency(k)), plot.py(level.max(plot.y.0)))),
            None if !runs.last().unwrap().is_empty() => runs.push(Vec::new()),
            None => {}
        }
    }
    runs.retain(|r| r.len() > 1);
    runs
}

/// dB magnitude of an FRF, optionally overlaid with its reconstruction,
/// with one marker per extracted peak.
pub fn frf_overlay(
    original: &FrequencySeries,
    reconstruction: Option<&FrequencySeries>,
    peaks: &[ModalPeak],
    title: &str,
) -> Result<String> {
    let levels: Vec<f64> = (0..original.len()).filter_map(|k| original.db(k)).collect();
    if levels.is_empty() {
        return Err(Error::Argument("FRF has no usable bins to draw".into()));
    }
    let hi = levels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = levels.iter().copied().fold(f64::INFINITY, f64::min).max(hi - 120.0);
    let pad = ((hi - lo) * 0.05).max(1.0);
    let plot = Plot {
        left: 70.0,
        top: 40.0,
        width: 700.0,
        height: 360.0,
        x: (original.f0(), original.last_frequency()),
        y: (lo - pad, hi + pad),
    };
    let mut svg = Svg::new(800.0, 460.0);
    svg.text(420.0, 24.0, "middle", "font-weight=\"bold\"", title);
    plot.axes(&mut svg, "Frequency (Hz)", "Magnitude (dB)");
    for run in db_points(&plot, original) {
        svg.polyline(&run, "class=\"original\" stroke=\"#1f4e79\" stroke-width=\"1.2\"");
    }
    if let Some(rec) = reconstruction {
        for run in db_points(&plot, rec) {
            svg.polyline(
                &run,
                "class=\"reconstruction\" stroke=\"#c0392b\" stroke-width=\"1\" stroke-dasharray=\"4 2\"",
            );
        }
    }
    for p in peaks {
        svg.body.push_str(&format!(
            "<circle class=\"peak-marker\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.5\" fill=\"none\" stroke=\"#c0392b\"/>\n",
            plot.px(p.f_r),
            plot.py(p.p_r.clamp(plot.y.0, plot.y.1))
        ));
    }
    let (lx, ly) = (plot.left + plot.width - 150.0, plot.top + 14.0);
    svg.line(lx, ly, lx + 20.0, ly, "stroke=\"#1f4e79\"");
    svg.text(lx + 26.0, ly + 4.0, "start", "", "measured");
    if reconstruction.is_some() {
        svg.line(lx, ly + 16.0, lx + 20.0, ly + 16.0, "stroke=\"#c0392b\" stroke-dasharray=\"4 2\"");
        svg.text(lx + 26.0, ly + 20.0, "start", "", "modal approximation");
    }
    Ok(svg.finish())
}

fn check_order(order: Option<&[usize]>, m: usize) -> Result<Vec<usize>> {
    match order {
        None => Ok((0..m).collect()),
        Some(o) => {
            let mut seen = vec![false; m];
            if o.len() != m || o.iter().any(|&i| i >= m || std::mem::replace(&mut seen[i], true)) {
                return Err(Error::Argument(format!("{o:?} is not a permutation of 0..{m}")));
            }
            Ok(o.to_vec())
        }
    }
}

/// M x M heatmap with labels on both axes, optionally in a leaf order.
pub fn distance_heatmap(d: &DistanceMatrix, order: Option<&[usize]>, title: &str) -> Result<String> {
    let m = d.len();
    let order = check_order(order, m)?;
    let cell = (480.0 / m as f64).clamp(8.0, 40.0);
    let (left, top) = (120.0, 60.0);
    let side = cell * m as f64;
    let mut svg = Svg::new(left + side + 110.0, top + side + 110.0);
    svg.text(left + side / 2.0, 24.0, "middle", "font-weight=\"bold\"", title);
    let max = d.off_diagonal().into_iter().fold(0.0, f64::max);
    for (i, &a) in order.iter().enumerate() {
        for (j, &b) in order.iter().enumerate() {
            let v = d.get(a, b);
            svg.rect(
                left + j as f64 * cell,
                top + i as f64 * cell,
                cell,
                cell,
                &format!("class=\"cell\" fill=\"{}\"", ramp(if max > 0.0 { v / max } else { 0.0 })),
            );
        }
    }
    for (i, &a) in order.iter().enumerate() {
        let label = &d.labels()[a];
        let c = (i as f64 + 0.5) * cell;
        svg.text(left - 6.0, top + c + 4.0, "end", "class=\"row-label\"", label);
        let (x, y) = (left + c + 4.0, top + side + 8.0);
        svg.text(x, y, "start", &format!("class=\"col-label\" transform=\"rotate(60 {x:.2} {y:.2})\""), label);
    }
    colorbar(&mut svg, left + side + 20.0, top, side, 0.0, max);
    Ok(svg.finish())
}

fn colorbar(svg: &mut Svg, x: f64, top: f64, height: f64, lo: f64, hi: f64) {
    let steps = 32;
    let h = height / steps as f64;
    for s in 0..steps {
        let t = 1.0 - (s as f64 + 0.5) / steps as f64;
        svg.rect(x, top + s as f64 * h, 14.0, h, &format!("fill=\"{}\"", ramp(t)));
    }
    svg.text(x + 18.0, top + 8.0, "start", "", &format!("{hi:.3}"));
    svg.text(x + 18.0, top + height, "start", "", &format!("{lo:.3}"));
}

/// Standardised features, one row per instrument and one column per
/// feature (F, then P, then Q).
pub fn feature_heatmap(fm: &FeatureMatrices, order: Option<&[usize]>, title: &str) -> Result<String> {
    let m = fm.n_rows();
    let n = fm.n_peaks();
    let order = check_order(order, m)?;
    let blocks = [zscore_normalize(fm.f())?, zscore_normalize(fm.p())?, zscore_normalize(fm.q())?];
    let cell_w = (720.0 / (3 * n) as f64).clamp(6.0, 28.0);
    let cell_h = (400.0 / m as f64).clamp(8.0, 28.0);
    let (left, top) = (120.0, 60.0);
    let (w, h) = (cell_w * (3 * n) as f64, cell_h * m as f64);
    let mut svg = Svg::new(left + w + 110.0, top + h + 60.0);
    svg.text(left + w / 2.0, 24.0, "middle", "font-weight=\"bold\"", title);
    let bound = blocks
        .iter()
        .flat_map(|b| b.iter().map(|v| v.abs()))
        .fold(0.0, f64::max)
        .max(1e-12);
    for (i, &row) in order.iter().enumerate() {
        for (s, block) in blocks.iter().enumerate() {
            for j in 0..n {
                let t = (block[[row, j]] / bound + 1.0) / 2.0;
                svg.rect(
                    left + (s * n + j) as f64 * cell_w,
                    top + i as f64 * cell_h,
                    cell_w,
                    cell_h,
                    &format!("class=\"cell\" fill=\"{}\"", ramp(t)),
                );
            }
        }
        svg.text(left - 6.0, top + (i as f64 + 0.5) * cell_h + 4.0, "end", "class=\"row-label\"", &fm.labels()[row]);
    }
    for (s, name) in ["F", "P", "Q"].iter().enumerate() {
        let x0 = left + (s * n) as f64 * cell_w;
        if s > 0 {
            svg.line(x0, top, x0, top + h, "stroke=\"white\" stroke-width=\"2\"");
        }
        svg.text(x0 + n as f64 * cell_w / 2.0, top + h + 18.0, "middle", "class=\"col-label\"", name);
    }
    colorbar(&mut svg, left + w + 20.0, top, h, -bound, bound);
    Ok(svg.finish())
}

/// Tree drawn with leaves left to right in the dendrogram's leaf order.
pub fn dendrogram_svg(dend: &Dendrogram, title: &str) -> Result<String> {
    let m = dend.n_leaves();
    let step = (640.0 / m as f64).clamp(12.0, 60.0);
    let (left, top, height) = (70.0, 50.0, 320.0);
    let width = step * m as f64;
    let mut svg = Svg::new(left + width + 40.0, top + height + 110.0);
    svg.text(left + width / 2.0, 24.0, "middle", "font-weight=\"bold\"", title);
    let max_h = dend.heights().into_iter().fold(0.0, f64::max);
    let plot = Plot {
        left,
        top,
        width,
        height,
        x: (0.0, m as f64),
        y: (0.0, if max_h > 0.0 { max_h * 1.05 } else { 1.0 }),
    };
    for v in ticks(plot.y.0, plot.y.1, 5) {
        let y = plot.py(v);
        svg.line(left - 4.0, y, left, y, "stroke=\"#333\"");
        svg.text(left - 6.0, y + 4.0, "end", "", &fmt_tick(v));
    }
    svg.line(left, top, left, top + height, "stroke=\"#333\"");
    let mut x = vec![0.0; 2 * m - 1];
    for (i, &leaf) in dend.leaf_order().iter().enumerate() {
        x[leaf] = plot.px(i as f64 + 0.5);
        let (lx, ly) = (x[leaf], top + height + 8.0);
        svg.text(lx - 4.0, ly, "start", &format!("class=\"leaf-label\" transform=\"rotate(60 {lx:.2} {ly:.2})\""), &dend.labels()[leaf]);
    }
    for (i, mg) in dend.merges().iter().enumerate() {
        let y = plot.py(mg.height);
        let (ya, yb) = (plot.py(dend.node_height(mg.left)), plot.py(dend.node_height(mg.right)));
        let (xa, xb) = (x[mg.left], x[mg.right]);
        let path = format!(
            "<path class=\"link\" d=\"M{xa:.2},{ya:.2} V{y:.2} H{xb:.2} V{yb:.2}\" fill=\"none\" stroke=\"#1f4e79\"/>\n"
        );
        svg.body.push_str(&path);
        x[m + i] = (xa + xb) / 2.0;
    }
    Ok(svg.finish())
}

/// Power-fraction curves, each with a marker at its bridge-hill indicator.
pub fn power_fraction_svg(series: &[(String, FrequencySeries)], smoothing: usize, title: &str) -> Result<String> {
    if series.is_empty() {
        return Err(Error::Argument("no series to draw".into()));
    }
    let f_lo = series.iter().map(|(_, s)| s.f0()).fold(f64::INFINITY, f64::min);
    let f_hi = series.iter().map(|(_, s)| s.last_frequency()).fold(f64::NEG_INFINITY, f64::max);
    let plot = Plot {
        left: 70.0,
        top: 40.0,
        width: 700.0,
        height: 360.0,
        x: (f_lo, f_hi),
        y: (0.0, 1.0),
    };
    let mut svg = Svg::new(800.0, 470.0 + 16.0 * series.len() as f64);
    svg.text(420.0, 24.0, "middle", "font-weight=\"bold\"", title);
    plot.axes(&mut svg, "Frequency (Hz)", "Fraction of the total power");
    for (i, (label, s)) in series.iter().enumerate() {
        let color = SERIES_COLORS[i % SERIES_COLORS.len()];
        let curve = power_fraction_curve(s)?;
        let pts: Vec<(f64, f64)> = curve
            .iter()
            .enumerate()
            .map(|(k, v)| (plot.px(s.frequency(k)), plot.py(*v)))
            .collect();
        svg.polyline(&pts, &format!("class=\"power-fraction\" stroke=\"{color}\" stroke-width=\"1.2\""));
        let f = bridge_hill_indicator(s, smoothing)?;
        let x = plot.px(f);
        svg.line(x, plot.top, x, plot.top + plot.height, &format!("class=\"indicator\" stroke=\"{color}\" stroke-dasharray=\"3 3\""));
        let ly = plot.top + plot.height + 50.0 + 16.0 * i as f64;
        svg.line(plot.left, ly - 4.0, plot.left + 20.0, ly - 4.0, &format!("stroke=\"{color}\""));
        svg.text(plot.left + 26.0, ly, "start", "", &format!("{label} (steepest rise at {f:.1} Hz)"));
    }
    Ok(svg.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frf::{synthesize_frf, Grid, ModalModel, ModalParameter};
    use ndarray::Array2;

    #[test]
    fn heatmap_has_one_cell_per_pair_and_labels_on_both_axes() {
        let m = 9;
        let d = Array2::from_shape_fn((m, m), |(i, j)| (i as f64 - j as f64).abs());
        let labels: Vec<String> = (0..m).map(|i| format!("V{i}")).collect();
        let d = DistanceMatrix::new(labels, d).unwrap();
        let svg = distance_heatmap(&d, None, "distances").unwrap();
        assert_eq!(svg.matches("class=\"cell\"").count(), 81);
        assert_eq!(svg.matches("class=\"row-label\"").count(), 9);
        assert_eq!(svg.matches("class=\"col-label\"").count(), 9);
        assert!(distance_heatmap(&d, Some(&[0, 1]), "x").is_err());
    }

    #[test]
    fn overlay_marks_every_peak() {
        let model = ModalModel::new(vec![
            ModalParameter::from_hz(100.0, 0.02, 1.0).unwrap(),
            ModalParameter::from_hz(250.0, 0.02, 1.0).unwrap(),
        ])
        .unwrap();
        let h = synthesize_frf(&model, &Grid::new(0.0, 1.0, 400).unwrap());
        let peaks = [ModalPeak::new(100.0, 0.0, 25.0).unwrap(), ModalPeak::new(250.0, 0.0, 25.0).unwrap()];
        let svg = frf_overlay(&h, Some(&h), &peaks, "t").unwrap();
        assert_eq!(svg.matches("class=\"peak-marker\"").count(), 2);
        assert_eq!(svg, frf_overlay(&h, Some(&h), &peaks, "t").unwrap());
    }

    #[test]
    fn escaping_and_ramp() {
        assert_eq!(escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
        assert_eq!(ramp(0.0), "#440154");
        assert_eq!(ramp(1.0), "#fde725");
        let t: Vec<String> = ticks(0.0, 1.0, 5).into_iter().map(fmt_tick).collect();
        assert_eq!(t, ["0", "0.2", "0.4", "0.6", "0.8", "1"]);
    }
}
