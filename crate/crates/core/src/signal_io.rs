//! Recording and ground-truth CSV I/O, and analysis-window framing.
//!
//! A recording file has the header `t,ppg1,ppg2,acc_x,acc_y,acc_z`, one row
//! per sample. Columns are matched by name, so extra columns (for example a
//! preserved ECG trace) are ignored. Ground truth lives next to it in
//! `<id>.bpm.csv` with the header `bpm` and one value per analysis window.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_FS: f64 = 125.0;
pub const DEFAULT_WINDOW_S: f64 = 8.0;
pub const DEFAULT_HOP_S: f64 = 2.0;

const COLUMNS: [&str; 6] = ["t", "ppg1", "ppg2", "acc_x", "acc_y", "acc_z"];

/// Synchronized two-channel PPG and three-axis accelerometer streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecording {
    pub id: String,
    pub fs: f64,
    pub ppg1: Vec<f64>,
    pub ppg2: Vec<f64>,
    pub acc_x: Vec<f64>,
    pub acc_y: Vec<f64>,
    pub acc_z: Vec<f64>,
}

impl RawRecording {
    pub fn new(
        id: impl Into<String>,
        fs: f64,
        ppg1: Vec<f64>,
        ppg2: Vec<f64>,
        acc_x: Vec<f64>,
        acc_y: Vec<f64>,
        acc_z: Vec<f64>,
    ) -> Result<Self> {
        if !(fs > 0.0 && fs.is_finite()) {
            return Err(Error::Config(format!("sampling rate must be positive, got {fs}")));
        }
        let n = ppg1.len();
        let lens = [ppg2.len(), acc_x.len(), acc_y.len(), acc_z.len()];
        if lens.iter().any(|&l| l != n) {
            return Err(Error::ChannelMismatch(format!(
                "ppg1={n}, ppg2={}, acc_x={}, acc_y={}, acc_z={}",
                lens[0], lens[1], lens[2], lens[3]
            )));
        }
        Ok(Self { id: id.into(), fs, ppg1, ppg2, acc_x, acc_y, acc_z })
    }

    pub fn len(&self) -> usize {
        self.ppg1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ppg1.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.fs
    }

    /// Borrow the five channels of one analysis window.
    pub fn window(&self, frame: &WindowFrame) -> WindowView<'_> {
        let r = frame.start_sample..frame.start_sample + frame.len;
        WindowView {
            index: frame.index,
            ppg1: &self.ppg1[r.clone()],
            ppg2: &self.ppg2[r.clone()],
            acc_x: &self.acc_x[r.clone()],
            acc_y: &self.acc_y[r.clone()],
            acc_z: &self.acc_z[r],
        }
    }

    /// Every channel multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let s = |v: &[f64]| v.iter().map(|x| x * c).collect::<Vec<_>>();
        Self {
            id: self.id.clone(),
            fs: self.fs,
            ppg1: s(&self.ppg1),
            ppg2: s(&self.ppg2),
            acc_x: s(&self.acc_x),
            acc_y: s(&self.acc_y),
            acc_z: s(&self.acc_z),
        }
    }
}

/// Position of one analysis window inside a recording.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowFrame {
    pub index: usize,
    pub start_sample: usize,
    pub len: usize,
}

/// The five channel slices of one window.
#[derive(Debug, Clone, Copy)]
pub struct WindowView<'a> {
    pub index: usize,
    pub ppg1: &'a [f64],
    pub ppg2: &'a [f64],
    pub acc_x: &'a [f64],
    pub acc_y: &'a [f64],
    pub acc_z: &'a [f64],
}

/// Per-window reference heart rate in BPM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub bpm: Vec<f64>,
}

impl GroundTruth {
    pub fn len(&self) -> usize {
        self.bpm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bpm.is_empty()
    }

    /// Checks the series against the window count of its paired recording
    /// and the physiological range (30, 240) BPM.
    pub fn validate(&self, n_windows: usize) -> Result<()> {
        if self.bpm.len() != n_windows {
            return Err(Error::LengthMismatch { left: self.bpm.len(), right: n_windows });
        }
        if let Some((i, v)) = self.bpm.iter().enumerate().find(|(_, &v)| !(v > 30.0 && v < 240.0)) {
            return Err(Error::Config(format!("ground truth value {v} at window {i} outside (30, 240) BPM")));
        }
        Ok(())
    }
}

/// Samples per window and per hop for the given rate and durations.
pub fn frame_lengths(fs: f64, window_s: f64, hop_s: f64) -> Result<(usize, usize)> {
    let window = (fs * window_s).round();
    let hop = (fs * hop_s).round();
    if !(window >= 1.0 && hop >= 1.0) {
        return Err(Error::Config(format!(
            "window ({window_s} s) and hop ({hop_s} s) must span at least one sample at {fs} Hz"
        )));
    }
    Ok((window as usize, hop as usize))
}

/// Number of complete windows in `len` samples; trailing samples that do not
/// fill a window are dropped.
pub fn window_count(len: usize, window_len: usize, hop_len: usize) -> Result<usize> {
    if len < window_len {
        return Err(Error::TooShort { len, window: window_len });
    }
    Ok((len - window_len) / hop_len + 1)
}

/// Slices a recording into overlapping windows in temporal order.
pub fn window_frames(rec: &RawRecording, window_s: f64, hop_s: f64) -> Result<Vec<WindowFrame>> {
    let (window_len, hop_len) = frame_lengths(rec.fs, window_s, hop_s)?;
    let count = window_count(rec.len(), window_len, hop_len)?;
    Ok((0..count).map(|index| WindowFrame { index, start_sample: index * hop_len, len: window_len }).collect())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

/// Recording id derived from a file name: `rec01.csv` -> `rec01`.
pub fn recording_id(path: &Path) -> String {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    name.strip_suffix(".csv").unwrap_or(&name).to_string()
}

/// Path of the ground-truth file paired with a recording file.
pub fn ground_truth_path(recording: &Path) -> PathBuf {
    let id = recording_id(recording);
    recording.with_file_name(format!("{id}.bpm.csv"))
}

/// Loads a recording CSV. When `fs` is `None` the rate is inferred from the
/// `t` column, falling back to 125 Hz if it cannot be.
pub fn load_recording(path: &Path, fs: Option<f64>) -> Result<RawRecording> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(BufReader::new(file));
    let csv_err = |source: csv::Error| -> Error {
        if let csv::ErrorKind::UnequalLengths { pos, expected_len, len } = source.kind() {
            return Error::RaggedRow {
                path: path.to_path_buf(),
                line: pos.as_ref().map_or(0, |p| p.line()),
                expected: *expected_len,
                found: *len,
            };
        }
        Error::Csv { path: path.to_path_buf(), source }
    };

    let headers = rdr.headers().map_err(csv_err)?.clone();
    let mut idx = [0usize; 6];
    for (slot, name) in idx.iter_mut().zip(COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or(Error::MissingChannel { path: path.to_path_buf(), column: name })?;
    }

    let mut cols: [Vec<f64>; 6] = Default::default();
    let mut record = csv::StringRecord::new();
    while rdr.read_record(&mut record).map_err(csv_err)? {
        let line = record.position().map_or(0, |p| p.line());
        for (c, (&i, name)) in idx.iter().zip(COLUMNS).enumerate() {
            let cell = &record[i];
            let v: f64 = cell.parse().map_err(|_| Error::BadCell {
                path: path.to_path_buf(),
                line,
                column: name.to_string(),
                value: cell.to_string(),
            })?;
            cols[c].push(v);
        }
    }

    let fs = match fs {
        Some(fs) => fs,
        None => infer_fs(&cols[0]).unwrap_or(DEFAULT_FS),
    };
    let [_, ppg1, ppg2, acc_x, acc_y, acc_z] = cols;
    RawRecording::new(recording_id(path), fs, ppg1, ppg2, acc_x, acc_y, acc_z)
}

fn infer_fs(t: &[f64]) -> Option<f64> {
    let (first, last) = (*t.first()?, *t.last()?);
    let span = last - first;
    if t.len() < 2 || !(span > 0.0) {
        return None;
    }
    let fs = (t.len() - 1) as f64 / span;
    Some((fs * 1e3).round() / 1e3)
}

/// Writes a recording in the canonical layout. Values use shortest
/// round-trip formatting, so loading the file back is lossless.
pub fn write_recording(path: &Path, rec: &RawRecording) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(w, "{}", COLUMNS.join(","))?;
        for i in 0..rec.len() {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                i as f64 / rec.fs,
                rec.ppg1[i],
                rec.ppg2[i],
                rec.acc_x[i],
                rec.acc_y[i],
                rec.acc_z[i]
            )?;
        }
        w.flush()
    };
    write(&mut w).map_err(io_err(path))
}

/// Loads a ground-truth file: an optional `bpm` header, then one value per
/// line. Blank lines are skipped; errors cite 1-based file line numbers.
pub fn load_ground_truth(path: &Path) -> Result<GroundTruth> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut bpm = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let cell = line.trim();
        if cell.is_empty() || (i == 0 && cell.eq_ignore_ascii_case("bpm")) {
            continue;
        }
        let v: f64 = cell.parse().map_err(|_| Error::BadCell {
            path: path.to_path_buf(),
            line: i as u64 + 1,
            column: "bpm".into(),
            value: cell.to_string(),
        })?;
        bpm.push(v);
    }
    if bpm.is_empty() {
        return Err(Error::EmptyGroundTruth);
    }
    Ok(GroundTruth { bpm })
}

pub fn write_ground_truth(path: &Path, gt: &GroundTruth) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(w, "bpm")?;
        for v in &gt.bpm {
            writeln!(w, "{v}")?;
        }
        w.flush()
    };
    write(&mut w).map_err(io_err(path))
}
