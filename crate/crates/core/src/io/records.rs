use std::path::Path;

use super::manifest::{EntryKind, ManifestEntry};
use super::tables::parse_number;
use super::{fmt_f64, read_to_string, write_atomic};
use crate::error::{Error, Result};
use crate::estimation::{MeasurementSet, RecordKind, TimeRecord};

const STEP_JITTER: f64 = 1e-6;

fn is_wav(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("wav"))
}

/// Loads a `time_s,value` CSV or a mono IEEE-float WAV.
pub fn load_time_record(path: &Path, kind: RecordKind) -> Result<TimeRecord> {
    let (fs, samples) = if is_wav(path) {
        read_wav(path)?
    } else {
        read_time_csv(path)?
    };
    TimeRecord::new(fs, samples, kind).map_err(|e| Error::format(path, e.to_string()))
}

fn read_time_csv(path: &Path) -> Result<(f64, Vec<f64>)> {
    let text = read_to_string(path)?;
    let perr = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, "time_s,value")) => {}
        Some((n, other)) => return Err(perr(n, format!("expected header 'time_s,value', got '{other}'"))),
        None => return Err(perr(1, "empty file".into())),
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (n, line) in lines.filter(|(_, l)| !l.is_empty()) {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(perr(n, format!("expected 2 fields, found {}", fields.len())));
        }
        let t = parse_number(path, n, fields[0], "time_s")?;
        let v = parse_number(path, n, fields[1], "value")?;
        if let Some(&prev) = times.last() {
            if t <= prev {
                return Err(perr(n, format!("time {t} s does not increase after {prev} s")));
            }
        }
        times.push(t);
        values.push(v);
    }
    if times.len() < 2 {
        return Err(perr(text.lines().count().max(1), format!("need at least 2 samples, found {}", times.len())));
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if let Some(i) = times
        .windows(2)
        .position(|w| ((w[1] - w[0]) - dt).abs() > STEP_JITTER * dt)
    {
        return Err(perr(i + 3, "time samples are not uniformly spaced".into()));
    }
    // Times are written at 17 digits; snap the rate back to whole Hz.
    let fs = 1.0 / dt;
    let fs = if (fs - fs.round()).abs() <= 1e-9 * fs { fs.round() } else { fs };
    Ok((fs, values))
}

fn read_wav(path: &Path) -> Result<(f64, Vec<f64>)> {
    let mut reader = hound::WavReader::open(path).map_err(|e| Error::format(path, e.to_string()))?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::format(path, format!("expected 1 channel, found {}", spec.channels)));
    }
    if spec.sample_format != hound::SampleFormat::Float || spec.bits_per_sample != 32 {
        return Err(Error::format(path, "expected 32-bit IEEE-float samples"));
    }
    let samples = reader
        .samples::<f32>()
        .map(|s| s.map(f64::from))
        .collect::<std::result::Result<Vec<f64>, _>>()
        .map_err(|e| Error::format(path, e.to_string()))?;
    if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
        return Err(Error::format(path, format!("non-finite sample at index {i}")));
    }
    Ok((f64::from(spec.sample_rate), samples))
}

/// Writes `time_s,value` with `time_s = n / fs`.
pub fn save_time_record_csv(record: &TimeRecord, path: &Path) -> Result<()> {
    let mut out = String::from("time_s,value\n");
    for (n, v) in record.samples().iter().enumerate() {
        out.push_str(&format!("{},{}\n", fmt_f64(n as f64 / record.fs()), fmt_f64(*v)));
    }
    write_atomic(path, out.as_bytes())
}

/// Writes a mono 32-bit float WAV. The sample rate must be a whole number
/// of Hz and samples are rounded to `f32`.
pub fn save_time_record_wav(record: &TimeRecord, path: &Path) -> Result<()> {
    let fs = record.fs();
    if fs.fract() != 0.0 || fs > f64::from(u32::MAX) {
        return Err(Error::Argument(format!("WAV needs an integer sample rate, got {fs}")));
    }
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: fs as u32,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let mut cursor = std::io::Cursor::new(Vec::new());
    {
        let mut w = hound::WavWriter::new(&mut cursor, spec).map_err(|e| Error::format(path, e.to_string()))?;
        for v in record.samples() {
            w.write_sample(*v as f32).map_err(|e| Error::format(path, e.to_string()))?;
        }
        w.finalize().map_err(|e| Error::format(path, e.to_string()))?;
    }
    write_atomic(path, &cursor.into_inner())
}

/// Assembles the force/response pairs of an `impulse_pair` or
/// `measurement_set` entry, in listed order.
pub fn load_time_records(entry: &ManifestEntry) -> Result<MeasurementSet> {
    if entry.kind == EntryKind::FrfCsv {
        return Err(Error::Argument(format!(
            "{}: entry holds an FRF, not time records",
            entry.label
        )));
    }
    let response = entry.response_kind()?;
    let mut records = Vec::with_capacity(entry.paths.len());
    for (i, path) in entry.paths.iter().enumerate() {
        let kind = if i % 2 == 0 { RecordKind::Force } else { response };
        let rec = load_time_record(path, kind)?;
        if let Some((first_path, first)) = records.first().map(|(p, r): &(&Path, TimeRecord)| (*p, r)) {
            if rec.fs() != first.fs() {
                return Err(Error::SampleRateMismatch {
                    a: first_path.to_path_buf(),
                    a_fs: first.fs(),
                    b: path.clone(),
                    b_fs: rec.fs(),
                });
            }
            if rec.len() != first.len() {
                return Err(Error::LengthMismatch {
                    a: first_path.to_path_buf(),
                    a_len: first.len(),
                    b: path.clone(),
                    b_len: rec.len(),
                });
            }
        }
        records.push((path.as_path(), rec));
    }
    let mut it = records.into_iter().map(|(_, r)| r);
    let mut pairs = Vec::with_capacity(entry.paths.len() / 2);
    while let (Some(f), Some(x)) = (it.next(), it.next()) {
        pairs.push((f, x));
    }
    MeasurementSet::new(pairs)
}
