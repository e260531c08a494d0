use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;

use super::{fmt_f64, read_to_string, write_atomic};
use crate::error::{Error, Result};
use crate::features::FeatureMatrices;
use crate::frf::FrequencySeries;
use crate::metrics::DistanceMatrix;

/// Relative spread of frequency steps still treated as a uniform grid.
const STEP_JITTER: f64 = 1e-6;

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("writing to memory cannot fail");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

/// Rows as `(line number, fields)`; the first row is the header.
fn rows(text: &str, path: &Path) -> Result<Vec<(usize, Vec<String>)>> {
    let mut out = Vec::new();
    for rec in reader(text).records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        out.push((line, rec.iter().map(str::to_owned).collect()));
    }
    if out.is_empty() {
        return Err(parse_err(path, 1, "empty file"));
    }
    Ok(out)
}

fn expect_header(path: &Path, header: &(usize, Vec<String>), expected: &[&str]) -> Result<()> {
    if header.1.iter().map(String::as_str).ne(expected.iter().copied()) {
        return Err(parse_err(
            path,
            header.0,
            format!("expected header '{}', got '{}'", expected.join(","), header.1.join(",")),
        ));
    }
    Ok(())
}

pub(crate) fn parse_number(path: &Path, line: usize, field: &str, what: &str) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| parse_err(path, line, format!("{what}: '{field}' is not a number")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("{what}: non-finite value '{field}'")));
    }
    Ok(v)
}

fn check_width(path: &Path, line: usize, fields: &[String], width: usize) -> Result<()> {
    if fields.len() != width {
        return Err(parse_err(
            path,
            line,
            format!("expected {width} fields, found {}", fields.len()),
        ));
    }
    Ok(())
}

/// Writes `freq_hz,real,imag`. Masked bins are written as zero.
pub fn render_frf_csv(series: &FrequencySeries) -> String {
    let mut out = String::from("freq_hz,real,imag\n");
    for (k, v) in series.values().iter().enumerate() {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(series.frequency(k)),
            fmt_f64(v.re),
            fmt_f64(v.im)
        ));
    }
    out
}

pub fn save_frf_csv(series: &FrequencySeries, path: &Path) -> Result<()> {
    write_atomic(path, render_frf_csv(series).as_bytes())
}

pub fn load_frf_csv(path: &Path) -> Result<FrequencySeries> {
    parse_frf_csv(&read_to_string(path)?, path)
}

/// Parses FRF CSV text; `path` only labels errors.
///
/// Bins whose value is exactly zero load as masked. A grid whose steps
/// spread by more than 1e-6 relative is resampled by linear
/// interpolation onto the smallest step.
pub fn parse_frf_csv(text: &str, path: &Path) -> Result<FrequencySeries> {
    let rows = rows(text, path)?;
    expect_header(path, &rows[0], &["freq_hz", "real", "imag"])?;
    let mut freqs: Vec<f64> = Vec::with_capacity(rows.len() - 1);
    let mut values = Vec::with_capacity(rows.len() - 1);
    for (line, fields) in &rows[1..] {
        check_width(path, *line, fields, 3)?;
        let f = parse_number(path, *line, &fields[0], "freq_hz")?;
        let re = parse_number(path, *line, &fields[1], "real")?;
        let im = parse_number(path, *line, &fields[2], "imag")?;
        if let Some(&prev) = freqs.last() {
            if f <= prev {
                let kind = if f == prev { "duplicate" } else { "decreasing" };
                return Err(parse_err(path, *line, format!("{kind} frequency {f} Hz after {prev} Hz")));
            }
        } else if f < 0.0 {
            return Err(parse_err(path, *line, format!("negative frequency {f} Hz")));
        }
        freqs.push(f);
        values.push(Complex64::new(re, im));
    }
    if freqs.len() < 2 {
        return Err(parse_err(
            path,
            rows.last().map_or(1, |r| r.0),
            format!("need at least 2 bins, found {}", freqs.len()),
        ));
    }
    let n = freqs.len();
    let f0 = freqs[0];
    let mean_step = (freqs[n - 1] - f0) / (n - 1) as f64;
    let uniform = freqs
        .windows(2)
        .all(|w| ((w[1] - w[0]) - mean_step).abs() <= STEP_JITTER * mean_step);
    let (df, values) = if uniform {
        (mean_step, values)
    } else {
        let step = freqs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        log::warn!(
            "{}: non-uniform frequency grid, resampling onto {step} Hz steps",
            path.display()
        );
        (step, resample(&freqs, &values, step))
    };
    let valid = values.iter().map(|v| v.norm_sqr() > 0.0).collect();
    FrequencySeries::with_mask(f0, df, values, valid).map_err(|e| Error::format(path, e.to_string()))
}

fn resample(freqs: &[f64], values: &[Complex64], step: f64) -> Vec<Complex64> {
    let f0 = freqs[0];
    let last = freqs[freqs.len() - 1];
    let len = ((last - f0) / step + 1e-9).floor() as usize + 1;
    let mut j = 0;
    (0..len)
        .map(|k| {
            let f = f0 + k as f64 * step;
            while j + 2 < freqs.len() && freqs[j + 1] < f {
                j += 1;
            }
            let t = ((f - freqs[j]) / (freqs[j + 1] - freqs[j])).clamp(0.0, 1.0);
            values[j] + (values[j + 1] - values[j]) * t
        })
        .collect()
}

/// Header `label,<labels...>`, then one row per label.
pub fn render_distance_csv(d: &DistanceMatrix) -> String {
    let mut w = writer();
    let mut header = vec!["label".to_string()];
    header.extend(d.labels().iter().cloned());
    w.write_record(&header).expect("in-memory write");
    for (i, label) in d.labels().iter().enumerate() {
        let mut row = vec![label.clone()];
        row.extend((0..d.len()).map(|j| fmt_f64(d.get(i, j))));
        w.write_record(&row).expect("in-memory write");
    }
    finish(w)
}

pub fn save_distance_csv(d: &DistanceMatrix, path: &Path) -> Result<()> {
    write_atomic(path, render_distance_csv(d).as_bytes())
}

pub fn load_distance_csv(path: &Path) -> Result<DistanceMatrix> {
    let rows = rows(&read_to_string(path)?, path)?;
    let (hline, header) = &rows[0];
    if header.first().map(String::as_str) != Some("label") {
        return Err(parse_err(path, *hline, "header must start with 'label'"));
    }
    let labels: Vec<String> = header[1..].to_vec();
    let m = labels.len();
    if rows.len() - 1 != m {
        return Err(parse_err(
            path,
            rows.last().map_or(*hline, |r| r.0),
            format!("{m} labels in the header but {} rows", rows.len() - 1),
        ));
    }
    let mut d = Array2::zeros((m, m));
    for (i, (line, fields)) in rows[1..].iter().enumerate() {
        check_width(path, *line, fields, m + 1)?;
        if fields[0] != labels[i] {
            return Err(parse_err(
                path,
                *line,
                format!("row label '{}' does not match column '{}'", fields[0], labels[i]),
            ));
        }
        for j in 0..m {
            d[[i, j]] = parse_number(path, *line, &fields[j + 1], &labels[j])?;
        }
    }
    DistanceMatrix::new(labels, d)
}

fn feature_header(n: usize) -> Vec<String> {
    let mut h = vec!["label".to_string()];
    for prefix in ["f", "p", "q"] {
        h.extend((1..=n).map(|i| format!("{prefix}{i}")));
    }
    h
}

/// Header `label,f1..fN,p1..pN,q1..qN`.
pub fn render_features_csv(fm: &FeatureMatrices) -> String {
    let mut w = writer();
    w.write_record(feature_header(fm.n_peaks())).expect("in-memory write");
    for (m, label) in fm.labels().iter().enumerate() {
        let mut row = vec![label.clone()];
        for mat in [fm.f(), fm.p(), fm.q()] {
            row.extend(mat.row(m).iter().map(|v| fmt_f64(*v)));
        }
        w.write_record(&row).expect("in-memory write");
    }
    finish(w)
}

pub fn save_features_csv(fm: &FeatureMatrices, path: &Path) -> Result<()> {
    write_atomic(path, render_features_csv(fm).as_bytes())
}

pub fn load_features_csv(path: &Path) -> Result<FeatureMatrices> {
    let rows = rows(&read_to_string(path)?, path)?;
    let (hline, header) = &rows[0];
    if header.len() < 4 || (header.len() - 1) % 3 != 0 {
        return Err(parse_err(path, *hline, "expected 1 + 3N columns"));
    }
    let n = (header.len() - 1) / 3;
    let expected = feature_header(n);
    let expected: Vec<&str> = expected.iter().map(String::as_str).collect();
    expect_header(path, &rows[0], &expected)?;
    let m = rows.len() - 1;
    let mut labels = Vec::with_capacity(m);
    let mut mats = [Array2::zeros((m, n)), Array2::zeros((m, n)), Array2::zeros((m, n))];
    for (i, (line, fields)) in rows[1..].iter().enumerate() {
        check_width(path, *line, fields, 3 * n + 1)?;
        labels.push(fields[0].clone());
        for (s, mat) in mats.iter_mut().enumerate() {
            for j in 0..n {
                let col = 1 + s * n + j;
                mat[[i, j]] = parse_number(path, *line, &fields[col], expected[col])?;
            }
        }
    }
    let [f, p, q] = mats;
    FeatureMatrices::new(labels, f, p, q).map_err(|e| Error::format(path, e.to_string()))
}
