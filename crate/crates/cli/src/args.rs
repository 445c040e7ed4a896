use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use specmar::tracker::SatisfyReference;
use specmar::{ClampMode, KappaMode, MotionComponent, PipelineConfig, PipelineMode, ReferenceMethod, SynthSpec};

use crate::ConfigError;

#[derive(Debug, Parser)]
#[command(name = "specmar", version, about = "PPG heart-rate estimation with motion-artifact subtraction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate heart rate for one or more recordings.
    Run {
        /// Recording CSV files or directories of them.
        #[arg(long, short, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Evaluate against ground truth and write CSV and JSON reports.
    Eval {
        /// Directory holding `<id>.csv` and `<id>.bpm.csv` pairs.
        #[arg(long, short)]
        data: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Mean AAE over a grid of subtraction weights.
    SweepAlpha {
        #[arg(long, short)]
        data: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        /// Comma list or `start:stop:step`.
        #[arg(long, default_value = "0.5:1.0:0.05")]
        alpha1_values: String,
        #[arg(long, default_value = "0.5:1.0:0.05")]
        alpha2_values: String,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Mean AAE for several transform lengths.
    SweepNfft {
        #[arg(long, short)]
        data: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1024,2048,4096,6144,8192")]
        values: Vec<usize>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Write a synthetic recording and its ground truth.
    Synth(SynthArgs),
    /// Time the pipeline on each recording.
    Bench {
        #[arg(long, short, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        /// Write `bench.csv` here; prints to stdout when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        runs: usize,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

/// Pipeline parameters. A `--config` file is read first, then `--mode`
/// applies its fixed settings, then individual flags override.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON file with a full parameter set (as written to `config.json`).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub mode: Option<PipelineMode>,
    /// Motion reference: min, max, x, y or z.
    #[arg(long)]
    pub reference: Option<ReferenceMethod>,
    #[arg(long)]
    pub alpha1: Option<f64>,
    #[arg(long)]
    pub alpha2: Option<f64>,
    #[arg(long)]
    pub p: Option<u8>,
    #[arg(long)]
    pub n_fft: Option<usize>,
    #[arg(long)]
    pub max_bpm: Option<f64>,
    #[arg(long)]
    pub band_lo_hz: Option<f64>,
    #[arg(long)]
    pub band_hi_hz: Option<f64>,
    #[arg(long)]
    pub window_s: Option<f64>,
    #[arg(long)]
    pub hop_s: Option<f64>,
    #[arg(long)]
    pub delta_s: Option<usize>,
    #[arg(long)]
    pub delta_t: Option<usize>,
    #[arg(long)]
    pub delta1: Option<usize>,
    #[arg(long)]
    pub delta2: Option<usize>,
    #[arg(long)]
    pub cand_thresh: Option<f64>,
    #[arg(long)]
    pub sat_thresh: Option<f64>,
    /// Spectrum whose dominant peak scales the satisfaction threshold: subtracted or ppg.
    #[arg(long)]
    pub sat_reference: Option<SatisfyReference>,
    /// literal or bounded.
    #[arg(long)]
    pub clamp_mode: Option<ClampMode>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_inc: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_dec: Option<f64>,
    /// Fixed closeness normalizer instead of the search-width default.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Sampling rate; inferred from the `t` column when omitted.
    #[arg(long)]
    pub fs: Option<f64>,
    /// Worker threads for recordings and sweep cells (1 = sequential).
    #[arg(long, short)]
    pub jobs: Option<usize>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> anyhow::Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                PipelineConfig::from_json(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?
            }
            None => PipelineConfig::default(),
        };
        if let Some(mode) = self.mode {
            cfg = cfg.resolve_mode(mode);
        }
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag { cfg.$($field).+ = v; })*
            };
        }
        set!(
            reference => reference,
            alpha1 => subtraction.alpha1,
            alpha2 => subtraction.alpha2,
            p => subtraction.p,
            n_fft => spectral.n_fft,
            max_bpm => spectral.max_bpm,
            band_lo_hz => spectral.band_lo_hz,
            band_hi_hz => spectral.band_hi_hz,
            window_s => window_s,
            hop_s => hop_s,
            delta_s => tracker.delta_s,
            delta_t => tracker.delta_t,
            delta1 => tracker.delta1,
            delta2 => tracker.delta2,
            cand_thresh => tracker.cand_thresh,
            sat_thresh => tracker.sat_thresh,
            sat_reference => tracker.sat_reference,
            clamp_mode => tracker.clamp_mode,
            lambda_inc => tracker.lambda_inc,
            lambda_dec => tracker.lambda_dec,
        );
        if let Some(k) = self.kappa {
            cfg.tracker.kappa_mode = KappaMode::Fixed(k);
        }
        if self.jobs == Some(0) {
            return Err(ConfigError("--jobs must be at least 1".into()).into());
        }
        // Early check at the nominal rate; recordings are re-checked at their own rate.
        cfg.validate(self.fs.unwrap_or(specmar::signal_io::DEFAULT_FS)).map_err(|e| ConfigError(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, default_value = "synth")]
    pub id: String,
    /// JSON synthesis spec; the other signal flags are ignored when given.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Constant heart rate.
    #[arg(long, conflicts_with = "hr_knots")]
    pub bpm: Option<f64>,
    /// Piecewise-linear heart rate as `time_s:bpm` pairs, e.g. `0:80,240:150`.
    #[arg(long, value_delimiter = ',')]
    pub hr_knots: Vec<String>,
    #[arg(long, default_value_t = 300.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 125.0)]
    pub fs: f64,
    /// Motion source `freq_hz:amp_x:amp_y:amp_z:ppg_leak`; repeatable.
    #[arg(long)]
    pub motion: Vec<String>,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SynthArgs {
    pub fn to_spec(&self) -> anyhow::Result<SynthSpec> {
        if let Some(path) = &self.spec {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            return Ok(serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?);
        }
        let hr_knots = if self.hr_knots.is_empty() {
            vec![(0.0, self.bpm.unwrap_or(75.0))]
        } else {
            self.hr_knots
                .iter()
                .map(|k| {
                    let v = numbers(k, 2, "hr knot time_s:bpm")?;
                    Ok((v[0], v[1]))
                })
                .collect::<anyhow::Result<_>>()?
        };
        let motion = self
            .motion
            .iter()
            .map(|m| {
                let v = numbers(m, 5, "motion freq_hz:amp_x:amp_y:amp_z:ppg_leak")?;
                Ok(MotionComponent { freq_hz: v[0], axis_amplitude: [v[1], v[2], v[3]], ppg_leak: v[4] })
            })
            .collect::<anyhow::Result<_>>()?;
        Ok(SynthSpec {
            id: self.id.clone(),
            duration_s: self.duration,
            fs: self.fs,
            hr_knots,
            motion,
            noise_std: self.noise,
            seed: self.seed,
        })
    }
}

fn numbers(text: &str, n: usize, what: &str) -> anyhow::Result<Vec<f64>> {
    let v: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| ConfigError(format!("bad {what}: {text:?}")))?;
    if v.len() != n {
        bail!(ConfigError(format!("bad {what}: {text:?}")));
    }
    Ok(v)
}

/// Parses `a,b,c` or `start:stop:step` (inclusive of `stop`).
pub fn parse_grid(text: &str) -> anyhow::Result<Vec<f64>> {
    let bad = || ConfigError(format!("bad grid {text:?}; use a,b,c or start:stop:step"));
    if text.contains(':') {
        let v = numbers(text, 3, "grid start:stop:step").map_err(|_| bad())?;
        let (start, stop, step) = (v[0], v[1], v[2]);
        if step.is_nan() || step <= 0.0 || stop < start {
            bail!(bad());
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        // Rounding keeps values like 0.7 from printing as 0.7000000000000001.
        return Ok((0..=n).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect());
    }
    let v: Vec<f64> = text.split(',').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    if v.is_empty() {
        bail!(bad());
    }
    Ok(v)
}
