//! Agreement metrics, dataset evaluation, parameter sweeps and timing.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::par::{map_slice, try_map_slice, Execution};
use crate::pipeline::estimate_recording;
use crate::signal_io::{ground_truth_path, load_ground_truth, load_recording, GroundTruth, RawRecording};

fn check_pair(est: &[f64], truth: &[f64], min_len: usize) -> Result<()> {
    if est.len() != truth.len() {
        return Err(Error::LengthMismatch { left: est.len(), right: truth.len() });
    }
    if est.len() < min_len {
        return Err(Error::MetricInput(format!("need at least {min_len} paired values, got {}", est.len())));
    }
    Ok(())
}

fn mean(v: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = v.len() as f64;
    v.sum::<f64>() / n
}

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
fn sample_std(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v.iter().copied());
    let ss: f64 = v.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (v.len() - 1) as f64).sqrt()
}

/// Average absolute error.
pub fn aae(est: &[f64], truth: &[f64]) -> Result<f64> {
    check_pair(est, truth, 1)?;
    Ok(mean(est.iter().zip(truth).map(|(e, t)| (e - t).abs())))
}

/// Sample standard deviation of the absolute errors.
pub fn abs_err_std(est: &[f64], truth: &[f64]) -> Result<f64> {
    check_pair(est, truth, 1)?;
    let errs: Vec<f64> = est.iter().zip(truth).map(|(e, t)| (e - t).abs()).collect();
    Ok(sample_std(&errs))
}

/// Product-moment correlation.
pub fn pearson(est: &[f64], truth: &[f64]) -> Result<f64> {
    check_pair(est, truth, 2)?;
    let me = mean(est.iter().copied());
    let mt = mean(truth.iter().copied());
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (e, t) in est.iter().zip(truth) {
        let (dx, dy) = (e - me, t - mt);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlandAltman {
    pub mu: f64,
    pub sigma: f64,
    pub loa_lo: f64,
    pub loa_hi: f64,
}

/// Mean and sample standard deviation of `est - truth`, with limits of
/// agreement at `mu ± 1.96 sigma`.
pub fn bland_altman(est: &[f64], truth: &[f64]) -> Result<BlandAltman> {
    check_pair(est, truth, 2)?;
    let d: Vec<f64> = est.iter().zip(truth).map(|(e, t)| e - t).collect();
    let mu = mean(d.iter().copied());
    let sigma = sample_std(&d);
    Ok(BlandAltman { mu, sigma, loa_lo: mu - 1.96 * sigma, loa_hi: mu + 1.96 * sigma })
}

/// One row of an evaluation report: a recording or a summary group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub id: String,
    pub n_windows: usize,
    pub aae: Option<f64>,
    pub abs_err_std: Option<f64>,
    pub pearson_r: Option<f64>,
    pub ba_mu: Option<f64>,
    pub ba_sigma: Option<f64>,
    pub loa_lo: Option<f64>,
    pub loa_hi: Option<f64>,
    pub runtime_s: Option<f64>,
}

impl EvalReport {
    /// Metrics for one estimate/truth pairing. Correlation is left empty when
    /// either series is constant.
    pub fn from_series(id: impl Into<String>, est: &[f64], truth: &[f64], runtime_s: Option<f64>) -> Result<Self> {
        let ba = if est.len() >= 2 { Some(bland_altman(est, truth)?) } else { None };
        Ok(Self {
            id: id.into(),
            n_windows: est.len(),
            aae: Some(aae(est, truth)?),
            abs_err_std: Some(abs_err_std(est, truth)?),
            pearson_r: pearson(est, truth).ok(),
            ba_mu: ba.map(|b| b.mu),
            ba_sigma: ba.map(|b| b.sigma),
            loa_lo: ba.map(|b| b.loa_lo),
            loa_hi: ba.map(|b| b.loa_hi),
            runtime_s,
        })
    }

    fn blank(id: impl Into<String>, n_windows: usize) -> Self {
        Self {
            id: id.into(),
            n_windows,
            aae: None,
            abs_err_std: None,
            pearson_r: None,
            ba_mu: None,
            ba_sigma: None,
            loa_lo: None,
            loa_hi: None,
            runtime_s: None,
        }
    }
}

/// A recording paired with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRecording {
    pub recording: RawRecording,
    pub truth: GroundTruth,
}

fn natural_key(id: &str) -> (String, u64, String) {
    let digits_at = id.find(|c: char| c.is_ascii_digit());
    match digits_at {
        Some(i) => {
            let rest = &id[i..];
            let end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
            let num = rest[..end].parse().unwrap_or(u64::MAX);
            (id[..i].to_string(), num, rest[end..].to_string())
        }
        None => (id.to_string(), 0, String::new()),
    }
}

/// Recording CSVs in `dir` (ground-truth and estimate files excluded),
/// ordered by id with embedded numbers compared numerically.
pub fn recording_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            name.ends_with(".csv") && !name.ends_with(".bpm.csv") && !name.ends_with(".est.csv")
        })
        .collect();
    paths.sort_by_key(|p| natural_key(&crate::signal_io::recording_id(p)));
    Ok(paths)
}

/// Loads every recording in `dir` that has a sibling `<id>.bpm.csv`.
pub fn load_dataset(dir: &Path, fs: Option<f64>) -> Result<Vec<LabeledRecording>> {
    recording_paths(dir)?
        .iter()
        .filter(|p| ground_truth_path(p).exists())
        .map(|p| {
            Ok(LabeledRecording { recording: load_recording(p, fs)?, truth: load_ground_truth(&ground_truth_path(p))? })
        })
        .collect()
}

/// Evaluation of a whole dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub config: PipelineConfig,
    pub recordings: Vec<EvalReport>,
    pub summary: Vec<EvalReport>,
    #[serde(skip)]
    pub estimates: Vec<Vec<f64>>,
}

/// Size of the first summary group; matches the original twelve-subject
/// release of the public dataset.
pub const FIRST_GROUP: usize = 12;

impl DatasetReport {
    pub fn summary_row(&self, id: &str) -> Option<&EvalReport> {
        self.summary.iter().find(|r| r.id == id)
    }

    /// Mean of the per-recording AAE values.
    pub fn mean_aae(&self) -> f64 {
        self.summary_row("mean_all").and_then(|r| r.aae).unwrap_or(f64::NAN)
    }

    /// CSV with one row per recording followed by the summary rows; numbers
    /// use four decimals and empty cells mark undefined values.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("id,n_windows,aae,abs_err_std,pearson_r,ba_mu,ba_sigma,loa_lo,loa_hi,runtime_s\n");
        let cell = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
        for r in self.recordings.iter().chain(&self.summary) {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                r.id,
                r.n_windows,
                cell(r.aae),
                cell(r.abs_err_std),
                cell(r.pearson_r),
                cell(r.ba_mu),
                cell(r.ba_sigma),
                cell(r.loa_lo),
                cell(r.loa_hi),
                cell(r.runtime_s),
            );
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn group_rows(label: &str, reports: &[EvalReport], est: &[&[f64]], truth: &[&[f64]]) -> Result<[EvalReport; 2]> {
    let pooled_est: Vec<f64> = est.iter().flat_map(|e| e.iter().copied()).collect();
    let pooled_truth: Vec<f64> = truth.iter().flat_map(|t| t.iter().copied()).collect();
    let mut m = EvalReport::from_series(format!("mean_{label}"), &pooled_est, &pooled_truth, None)?;
    m.aae = Some(mean(reports.iter().map(|r| r.aae.unwrap_or(0.0))));
    m.runtime_s = Some(mean(reports.iter().map(|r| r.runtime_s.unwrap_or(0.0))));
    let mut sd = EvalReport::blank(format!("std_{label}"), pooled_est.len());
    sd.aae = Some(abs_err_std(&pooled_est, &pooled_truth)?);
    Ok([m, sd])
}

/// Runs the pipeline on every recording and computes per-recording and
/// summary metrics. Pooled rows concatenate windows across recordings.
pub fn evaluate_dataset(data: &[LabeledRecording], cfg: &PipelineConfig, exec: Execution) -> Result<DatasetReport> {
    if data.is_empty() {
        return Err(Error::MetricInput("empty dataset".into()));
    }
    let runs = try_map_slice(data, exec, |d| -> Result<(Vec<f64>, f64)> {
        let t0 = Instant::now();
        let est = estimate_recording(&d.recording, cfg)?;
        Ok((est, t0.elapsed().as_secs_f64()))
    })?;
    let mut recordings = Vec::with_capacity(data.len());
    for (d, (est, secs)) in data.iter().zip(&runs) {
        d.truth.validate(est.len())?;
        recordings.push(EvalReport::from_series(d.recording.id.clone(), est, &d.truth.bpm, Some(*secs))?);
    }
    let est: Vec<&[f64]> = runs.iter().map(|(e, _)| e.as_slice()).collect();
    let truth: Vec<&[f64]> = data.iter().map(|d| d.truth.bpm.as_slice()).collect();

    let mut summary = Vec::new();
    if data.len() > FIRST_GROUP {
        let (a, b) = (0..FIRST_GROUP, FIRST_GROUP..data.len());
        let second = format!("{}", data.len() - FIRST_GROUP);
        summary.extend(group_rows("12", &recordings[a.clone()], &est[a.clone()], &truth[a])?);
        summary.extend(group_rows(&second, &recordings[b.clone()], &est[b.clone()], &truth[b])?);
    }
    summary.extend(group_rows("all", &recordings, &est, &truth)?);

    Ok(DatasetReport { config: *cfg, recordings, summary, estimates: runs.into_iter().map(|(e, _)| e).collect() })
}

/// Mean per-recording AAE without building the full report.
pub fn mean_aae(data: &[LabeledRecording], cfg: &PipelineConfig, exec: Execution) -> Result<f64> {
    let errs = try_map_slice(data, exec, |d| aae(&estimate_recording(&d.recording, cfg)?, &d.truth.bpm))?;
    if errs.is_empty() {
        return Err(Error::MetricInput("empty dataset".into()));
    }
    Ok(mean(errs.into_iter()))
}

/// Mean AAE over a grid of subtraction weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSweep {
    pub alpha1: Vec<f64>,
    pub alpha2: Vec<f64>,
    /// `mean_aae[i][j]` belongs to `alpha1[i]`, `alpha2[j]`.
    pub mean_aae: Vec<Vec<f64>>,
}

impl AlphaSweep {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("alpha1,alpha2,mean_aae\n");
        for (i, a1) in self.alpha1.iter().enumerate() {
            for (j, a2) in self.alpha2.iter().enumerate() {
                let _ = writeln!(s, "{a1:.4},{a2:.4},{:.4}", self.mean_aae[i][j]);
            }
        }
        s
    }

    /// AAE along `alpha1` with `alpha2` fixed at column `j`.
    pub fn alpha1_profile(&self, j: usize) -> Vec<f64> {
        self.mean_aae.iter().map(|row| row[j]).collect()
    }

    /// AAE along `alpha2` with `alpha1` fixed at row `i`.
    pub fn alpha2_profile(&self, i: usize) -> Vec<f64> {
        self.mean_aae[i].clone()
    }
}

fn dedup_values(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Evaluates every `(alpha1, alpha2)` pair; grid cells run in parallel.
pub fn sweep_alpha(
    data: &[LabeledRecording],
    base: &PipelineConfig,
    alpha1: &[f64],
    alpha2: &[f64],
    exec: Execution,
) -> Result<AlphaSweep> {
    if data.is_empty() {
        return Err(Error::MetricInput("dataset missing".into()));
    }
    let (a1s, a2s) = (dedup_values(alpha1), dedup_values(alpha2));
    let cells: Vec<(f64, f64)> = a1s.iter().flat_map(|&a| a2s.iter().map(move |&b| (a, b))).collect();
    let vals = try_map_slice(&cells, exec, |&(a, b)| mean_aae(data, &base.with_alphas(a, b), Execution::Sequential))?;
    let mean_aae = vals.chunks(a2s.len()).map(<[f64]>::to_vec).collect();
    Ok(AlphaSweep { alpha1: a1s, alpha2: a2s, mean_aae })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NfftPoint {
    pub n_fft: usize,
    pub mean_aae: f64,
}

/// Mean AAE for each transform length (deduplicated, ascending). Tracker
/// widths scale with the length.
pub fn sweep_nfft(
    data: &[LabeledRecording],
    base: &PipelineConfig,
    values: &[usize],
    exec: Execution,
) -> Result<Vec<NfftPoint>> {
    if data.is_empty() {
        return Err(Error::MetricInput("dataset missing".into()));
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    v.dedup();
    try_map_slice(&v, exec, |&n_fft| {
        Ok(NfftPoint { n_fft, mean_aae: mean_aae(data, &base.with_n_fft(n_fft), Execution::Sequential)? })
    })
}

pub fn nfft_csv(points: &[NfftPoint]) -> String {
    let mut s = String::from("n_fft,mean_aae\n");
    for p in points {
        let _ = writeln!(s, "{},{:.4}", p.n_fft, p.mean_aae);
    }
    s
}

/// True when `v` first never increases and then never decreases.
pub fn is_valley(v: &[f64]) -> bool {
    let mut rising = false;
    for w in v.windows(2) {
        if w[1] > w[0] {
            rising = true;
        } else if w[1] < w[0] && rising {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub id: String,
    pub n_windows: usize,
    pub runs_s: Vec<f64>,
    pub median_s: f64,
}

/// Wall-clock time of [`estimate_recording`] on an in-memory recording:
/// one discarded warm-up, then the median of `runs` (at least 5) timings.
pub fn benchmark(rec: &RawRecording, cfg: &PipelineConfig, runs: usize) -> Result<BenchResult> {
    let n_windows = estimate_recording(rec, cfg)?.len();
    let runs_s: Vec<f64> = (0..runs.max(5))
        .map(|_| {
            let t0 = Instant::now();
            let out = estimate_recording(rec, cfg);
            let dt = t0.elapsed().as_secs_f64();
            std::hint::black_box(out).map(|_| dt)
        })
        .collect::<Result<_>>()?;
    let mut sorted = runs_s.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median_s = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
    Ok(BenchResult { id: rec.id.clone(), n_windows, runs_s, median_s })
}

/// Per-recording timings for a batch, in input order.
pub fn benchmark_batch(
    recs: &[RawRecording],
    cfg: &PipelineConfig,
    runs: usize,
    exec: Execution,
) -> Vec<Result<BenchResult>> {
    map_slice(recs, exec, |r| benchmark(r, cfg, runs))
}
