//! Synthetic recordings with known heart rate.
//!
//! PPG is a sinusoid at the instantaneous heart rate plus a half-amplitude
//! second harmonic. Motion components are sinusoids on the accelerometer axes
//! that may also leak into both PPG channels. Independent white noise is
//! added per channel. Output is deterministic for a given seed.

use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal_io::{frame_lengths, window_count, GroundTruth, RawRecording, DEFAULT_HOP_S, DEFAULT_WINDOW_S};

/// One periodic motion source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionComponent {
    pub freq_hz: f64,
    /// Amplitude on the x, y and z axes.
    pub axis_amplitude: [f64; 3],
    /// Amplitude of the same oscillation added to the PPG channels.
    pub ppg_leak: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub id: String,
    pub duration_s: f64,
    pub fs: f64,
    /// Piecewise-linear heart rate as `(time_s, bpm)` knots, held constant
    /// before the first and after the last knot.
    pub hr_knots: Vec<(f64, f64)>,
    pub motion: Vec<MotionComponent>,
    pub noise_std: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn constant(bpm: f64, duration_s: f64) -> Self {
        Self {
            id: "synth".into(),
            duration_s,
            fs: 125.0,
            hr_knots: vec![(0.0, bpm)],
            motion: Vec::new(),
            noise_std: 0.0,
            seed: 0,
        }
    }

    pub fn ramp(from_bpm: f64, to_bpm: f64, duration_s: f64) -> Self {
        Self { hr_knots: vec![(0.0, from_bpm), (duration_s, to_bpm)], ..Self::constant(from_bpm, duration_s) }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn with_motion(mut self, m: MotionComponent) -> Self {
        self.motion.push(m);
        self
    }

    pub fn with_noise(mut self, std: f64) -> Self {
        self.noise_std = std;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Instantaneous heart rate at time `t`.
    pub fn bpm_at(&self, t: f64) -> f64 {
        let k = &self.hr_knots;
        if t <= k[0].0 {
            return k[0].1;
        }
        for w in k.windows(2) {
            let ((t0, b0), (t1, b1)) = (w[0], w[1]);
            if t <= t1 {
                return if t1 > t0 { b0 + (b1 - b0) * (t - t0) / (t1 - t0) } else { b1 };
            }
        }
        k[k.len() - 1].1
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.fs > 0.0 && self.duration_s > 0.0) {
            return bad("fs and duration must be positive".into());
        }
        if self.hr_knots.is_empty() {
            return bad("heart-rate trajectory needs at least one knot".into());
        }
        if self.hr_knots.windows(2).any(|w| w[1].0 < w[0].0) {
            return bad("heart-rate knots must be in time order".into());
        }
        if let Some(&(_, b)) = self.hr_knots.iter().find(|(_, b)| !(*b > 30.0 && *b < 210.0)) {
            return bad(format!("heart rate {b} BPM outside (30, 210)"));
        }
        if !(self.noise_std >= 0.0) {
            return bad("noise_std must be nonnegative".into());
        }
        let max_hr_hz = self.hr_knots.iter().map(|k| k.1).fold(0.0, f64::max) / 60.0;
        let max_hz = self.motion.iter().map(|m| m.freq_hz).fold(2.0 * max_hr_hz, f64::max);
        if self.fs <= 2.0 * max_hz {
            return bad(format!("fs = {} Hz does not exceed twice the highest component ({max_hz} Hz)", self.fs));
        }
        if self.motion.iter().any(|m| !(m.freq_hz > 0.0)) {
            return bad("motion frequencies must be positive".into());
        }
        Ok(())
    }
}

/// Renders the recording and its per-window ground truth (mean
/// instantaneous heart rate over each 8 s window, 2 s hop).
pub fn generate(spec: &SynthSpec) -> Result<(RawRecording, GroundTruth)> {
    spec.validate()?;
    let n = (spec.duration_s * spec.fs).round() as usize;
    let (window_len, hop_len) = frame_lengths(spec.fs, DEFAULT_WINDOW_S, DEFAULT_HOP_S)?;
    let n_windows = window_count(n, window_len, hop_len)?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = Normal::new(0.0, spec.noise_std.max(f64::MIN_POSITIVE)).map_err(|e| Error::Config(e.to_string()))?;
    let noise = |rng: &mut ChaCha8Rng| if spec.noise_std > 0.0 { normal.sample(rng) } else { 0.0 };

    let mut hr = Vec::with_capacity(n);
    let mut chans: [Vec<f64>; 5] = std::array::from_fn(|_| Vec::with_capacity(n));
    let axis_phase = [0.0, TAU / 6.0, TAU / 3.0];
    let mut phase = 0.0f64;
    for i in 0..n {
        let t = i as f64 / spec.fs;
        let bpm = spec.bpm_at(t);
        hr.push(bpm);
        let pulse = phase.sin() + 0.5 * (2.0 * phase).sin();
        phase = (phase + TAU * bpm / 60.0 / spec.fs) % TAU;

        let mut leak = 0.0;
        let mut acc = [0.0; 3];
        for m in &spec.motion {
            let arg = TAU * m.freq_hz * t;
            leak += m.ppg_leak * arg.sin();
            for (a, (amp, ph)) in acc.iter_mut().zip(m.axis_amplitude.iter().zip(axis_phase)) {
                *a += amp * (arg + ph).sin();
            }
        }
        chans[0].push(pulse + leak + noise(&mut rng));
        chans[1].push(pulse + leak + noise(&mut rng));
        for (c, a) in chans[2..].iter_mut().zip(acc) {
            c.push(a + noise(&mut rng));
        }
    }

    let bpm = (0..n_windows)
        .map(|w| {
            let s = &hr[w * hop_len..w * hop_len + window_len];
            s.iter().sum::<f64>() / s.len() as f64
        })
        .collect();
    let [ppg1, ppg2, acc_x, acc_y, acc_z] = chans;
    let rec = RawRecording::new(spec.id.clone(), spec.fs, ppg1, ppg2, acc_x, acc_y, acc_z)?;
    Ok((rec, GroundTruth { bpm }))
}
