//! Heart-rate tracking across windows.
//!
//! The first window takes the highest bin of the subtracted spectrum. After
//! that, each window selects a bin near the previous one:
//!
//! * candidates are PPG peaks within `±delta_s` of the previous bin that
//!   exceed `cand_thresh` of the PPG maximum;
//! * exactly one candidate: take the strongest subtracted-spectrum peak within
//!   `±delta1` of it (or the candidate itself if there is none);
//! * several candidates: if the PPG maximum lies within `±delta_t` of the
//!   previous bin, take the strongest subtracted-spectrum peak within
//!   `±delta2` of the previous bin that reaches `sat_thresh` of the dominant
//!   peak;
//! * otherwise score every subtracted-spectrum peak in the search region by
//!   `beta1 * amplitude + beta2 * closeness` and take the best.
//!
//! The selected bin is converted to BPM, smoothed with a three-point weighted
//! average and passed through a rate clamp. Bins are 0-based throughout; bin
//! `k` maps to `k * 60 * fs / n_fft` BPM. Every argmax breaks ties toward the
//! lowest bin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{argmax_lowest, MagnitudeSpectrum};

/// Transform length at which the bin-denominated defaults are stated.
pub const REFERENCE_N_FFT: usize = 4096;

/// Normalizer for the closeness score.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaMode {
    /// `kappa = delta_s / N0`: closeness falls linearly from 1 at the
    /// previous bin to 0 at the edge of the search region.
    #[default]
    SearchWidth,
    /// Fixed `kappa`; closeness is `1 - |s - N0| / (kappa * N0)` with `N0`
    /// 1-based, clipped to `[0, 1]`.
    Fixed(f64),
}

/// Rate clamp semantics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClampMode {
    /// Large rises get `+lambda_inc`, large drops get `+lambda_dec`, added to
    /// the smoothed estimate.
    #[default]
    Literal,
    /// Large steps are limited to `previous + lambda_inc` or
    /// `previous + lambda_dec`.
    Bounded,
}

impl std::str::FromStr for ClampMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(Self::Literal),
            "bounded" => Ok(Self::Bounded),
            other => Err(Error::Config(format!("unknown clamp mode {other:?}"))),
        }
    }
}

/// Which spectrum's dominant peak the several-candidate threshold refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SatisfyReference {
    #[default]
    Subtracted,
    Ppg,
}

impl std::str::FromStr for SatisfyReference {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "subtracted" => Ok(Self::Subtracted),
            "ppg" => Ok(Self::Ppg),
            other => Err(Error::Config(format!("unknown satisfaction reference {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackerParams {
    pub delta_s: usize,
    pub delta_t: usize,
    pub delta1: usize,
    pub delta2: usize,
    pub cand_thresh: f64,
    pub sat_thresh: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub gamma: [f64; 3],
    pub lambda_inc: f64,
    pub lambda_dec: f64,
    pub kappa_mode: KappaMode,
    pub clamp_mode: ClampMode,
    pub sat_reference: SatisfyReference,
}

impl Default for TrackerParams {
    fn default() -> Self {
        Self {
            delta_s: 30,
            delta_t: 30,
            delta1: 3,
            delta2: 3,
            cand_thresh: 0.25,
            sat_thresh: 0.10,
            beta1: 0.7,
            beta2: 0.3,
            gamma: [0.9, 0.05, 0.05],
            lambda_inc: 5.0,
            lambda_dec: -3.0,
            kappa_mode: KappaMode::SearchWidth,
            clamp_mode: ClampMode::Literal,
            sat_reference: SatisfyReference::Subtracted,
        }
    }
}

impl TrackerParams {
    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        for (name, w) in
            [("delta_s", self.delta_s), ("delta_t", self.delta_t), ("delta1", self.delta1), ("delta2", self.delta2)]
        {
            if w < 1 {
                return cfg(format!("{name} must be at least 1 bin"));
            }
        }
        for (name, t) in [("cand_thresh", self.cand_thresh), ("sat_thresh", self.sat_thresh)] {
            if !(t > 0.0 && t < 1.0) {
                return cfg(format!("{name} must lie in (0, 1), got {t}"));
            }
        }
        if !(self.beta1 >= 0.0 && self.beta2 >= 0.0) || (self.beta1 + self.beta2 - 1.0).abs() > 1e-9 {
            return cfg(format!("beta weights must be nonnegative and sum to 1, got {} + {}", self.beta1, self.beta2));
        }
        if self.gamma.iter().any(|&g| g < 0.0) || (self.gamma.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return cfg(format!("gamma weights must be nonnegative and sum to 1, got {:?}", self.gamma));
        }
        if !(self.lambda_inc > 0.0 && self.lambda_dec < 0.0) {
            return cfg(format!("need lambda_inc > 0 > lambda_dec, got {} and {}", self.lambda_inc, self.lambda_dec));
        }
        if let KappaMode::Fixed(k) = self.kappa_mode {
            if !(k > 0.0) {
                return cfg(format!("kappa must be positive, got {k}"));
            }
        }
        Ok(())
    }

    /// Bin-denominated widths rescaled from the 4096-point reference to
    /// `n_fft`, rounded to the nearest bin and kept at least 1.
    pub fn scaled_for(&self, n_fft: usize) -> Self {
        let scale = |w: usize| ((w as f64 * n_fft as f64 / REFERENCE_N_FFT as f64).round() as usize).max(1);
        Self {
            delta_s: scale(self.delta_s),
            delta_t: scale(self.delta_t),
            delta1: scale(self.delta1),
            delta2: scale(self.delta2),
            ..*self
        }
    }
}

/// Previous bin and the previous two BPM outputs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrackerState {
    pub n0: usize,
    pub b_minus1: f64,
    pub b_minus2: f64,
    pub initialized: bool,
}

impl TrackerState {
    /// State after the first window: both history slots hold the first estimate.
    pub fn bootstrap(n0: usize, first_bpm: f64) -> Self {
        Self { n0, b_minus1: first_bpm, b_minus2: first_bpm, initialized: true }
    }
}

/// Peak locations (strictly increasing) with their magnitudes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PeakSet {
    pub locations: Vec<usize>,
    pub magnitudes: Vec<f64>,
}

impl PeakSet {
    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    /// Location of the largest peak; ties go to the lowest location.
    pub fn strongest(&self) -> Option<usize> {
        argmax_lowest(&self.magnitudes).map(|i| self.locations[i])
    }

    fn retain(&mut self, mut keep: impl FnMut(usize, f64) -> bool) {
        let (mut locs, mut mags) = (Vec::new(), Vec::new());
        for (&l, &m) in self.locations.iter().zip(&self.magnitudes) {
            if keep(l, m) {
                locs.push(l);
                mags.push(m);
            }
        }
        self.locations = locs;
        self.magnitudes = mags;
    }
}

/// Local maxima whose first bin lies in `[lo, hi]`.
///
/// Neighbors are read from the whole spectrum, not just the region. A bin is
/// a peak when it rises above its left neighbor and the next differing value
/// to its right is lower, so a plateau reports its first bin. The first and
/// last bins of the spectrum count when they exceed their single neighbor.
/// A flat spectrum has no peaks.
pub fn find_peaks(spec: &[f64], lo: usize, hi: usize) -> PeakSet {
    let mut out = PeakSet::default();
    if spec.is_empty() || lo > hi {
        return out;
    }
    let hi = hi.min(spec.len() - 1);
    let mut k = lo;
    while k <= hi {
        let v = spec[k];
        let left_ok = k == 0 || spec[k - 1] < v;
        let mut j = k + 1;
        while j < spec.len() && spec[j] == v {
            j += 1;
        }
        if left_ok {
            let right_ok = if j < spec.len() { spec[j] < v } else { k > 0 };
            if right_ok {
                out.locations.push(k);
                out.magnitudes.push(v);
            }
        }
        k = if left_ok { j } else { k + 1 };
    }
    out
}

/// Highest bin of the subtracted spectrum.
pub fn initial_estimate(x_mss: &MagnitudeSpectrum) -> Result<usize> {
    x_mss.argmax().ok_or(Error::NoInitialEstimate)
}

/// Which branch produced a window's bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    Initial,
    SingleCandidate,
    MultipleCandidates,
    Scored,
    Hold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub bin: usize,
    pub case: Case,
}

fn region(center: usize, half: usize, m: usize) -> (usize, usize) {
    (center.saturating_sub(half), (center + half).min(m.saturating_sub(1)))
}

/// Closeness of `loc` to `n0` in `[0, 1]`.
pub fn closeness(loc: usize, n0: usize, params: &TrackerParams) -> f64 {
    let d = loc.abs_diff(n0) as f64;
    match params.kappa_mode {
        KappaMode::SearchWidth => 1.0 - d / params.delta_s as f64,
        KappaMode::Fixed(kappa) => (1.0 - d / (kappa * (n0 + 1) as f64)).clamp(0.0, 1.0),
    }
}

/// Picks the heart-rate bin for one window given the tracker history.
pub fn select_bin(
    x_ppg: &MagnitudeSpectrum,
    x_mss: &MagnitudeSpectrum,
    state: &TrackerState,
    params: &TrackerParams,
) -> Result<Selection> {
    if x_ppg.len() != x_mss.len() {
        return Err(Error::LengthMismatch { left: x_ppg.len(), right: x_mss.len() });
    }
    if !state.initialized {
        return Err(Error::Config("tracker state used before initialization".into()));
    }
    let m = x_ppg.len();
    let n0 = state.n0.min(m.saturating_sub(1));
    let (lo, hi) = region(n0, params.delta_s, m);

    let ppg_max = x_ppg.max();
    let mut candidates = find_peaks(&x_ppg.bins, lo, hi);
    candidates.retain(|_, mag| mag > params.cand_thresh * ppg_max);

    match candidates.len() {
        1 => {
            let d = candidates.locations[0];
            let (a, b) = region(d, params.delta1, m);
            let bin = find_peaks(&x_mss.bins, a, b).strongest().unwrap_or(d);
            return Ok(Selection { bin, case: Case::SingleCandidate });
        }
        0 => {}
        _ => {
            if let Some(dominant) = x_ppg.argmax() {
                if dominant.abs_diff(n0) <= params.delta_t {
                    let reference = match params.sat_reference {
                        SatisfyReference::Subtracted => x_mss.max(),
                        SatisfyReference::Ppg => ppg_max,
                    };
                    let (a, b) = region(n0, params.delta2, m);
                    let mut near = find_peaks(&x_mss.bins, a, b);
                    near.retain(|_, mag| mag >= params.sat_thresh * reference);
                    if let Some(bin) = near.strongest() {
                        return Ok(Selection { bin, case: Case::MultipleCandidates });
                    }
                }
            }
        }
    }

    let peaks = find_peaks(&x_mss.bins, lo, hi);
    let top = peaks.magnitudes.iter().copied().fold(0.0, f64::max);
    if peaks.is_empty() || !(top > 0.0) {
        return Ok(Selection { bin: n0, case: Case::Hold });
    }
    let scores: Vec<f64> = peaks
        .locations
        .iter()
        .zip(&peaks.magnitudes)
        .map(|(&loc, &mag)| params.beta1 * (mag / top) + params.beta2 * closeness(loc, n0, params))
        .collect();
    let i = argmax_lowest(&scores).expect("non-empty peak set");
    Ok(Selection { bin: peaks.locations[i], case: Case::Scored })
}

/// BPM at 0-based bin `k`.
pub fn bin_to_bpm(k: usize, n_fft: usize, fs: f64) -> f64 {
    k as f64 / n_fft as f64 * 60.0 * fs
}

/// Three-point weighted moving average with the previous two outputs.
pub fn smooth(b_hat: f64, state: &TrackerState, params: &TrackerParams) -> f64 {
    let [g1, g2, g3] = params.gamma;
    g1 * b_hat + g2 * state.b_minus1 + g3 * state.b_minus2
}

/// Rate clamp against the previous output.
pub fn clamp(b_prime: f64, b_minus1: f64, params: &TrackerParams) -> f64 {
    let step = b_prime - b_minus1;
    let base = match params.clamp_mode {
        ClampMode::Literal => b_prime,
        ClampMode::Bounded => b_minus1,
    };
    if step >= params.lambda_inc {
        base + params.lambda_inc
    } else if step <= params.lambda_dec {
        base + params.lambda_dec
    } else {
        b_prime
    }
}

/// Output of one tracker step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowEstimate {
    pub window: usize,
    pub bin: usize,
    pub case: Case,
    pub raw_bpm: f64,
    pub bpm: f64,
}

/// Sequential per-recording tracker.
#[derive(Debug, Clone)]
pub struct Tracker {
    params: TrackerParams,
    n_fft: usize,
    fs: f64,
    state: TrackerState,
    window: usize,
}

impl Tracker {
    /// `params` are taken as already scaled for `n_fft`.
    pub fn new(params: TrackerParams, n_fft: usize, fs: f64) -> Result<Self> {
        params.validate()?;
        Ok(Self { params, n_fft, fs, state: TrackerState::default(), window: 0 })
    }

    pub fn state(&self) -> &TrackerState {
        &self.state
    }

    /// Consumes one window's PPG and subtracted spectra.
    pub fn step(&mut self, x_ppg: &MagnitudeSpectrum, x_mss: &MagnitudeSpectrum) -> Result<WindowEstimate> {
        let window = self.window;
        self.window += 1;
        if !self.state.initialized {
            // A fully subtracted first window falls back to the PPG spectrum.
            let bin = initial_estimate(x_mss).or_else(|_| initial_estimate(x_ppg))?;
            let bpm = bin_to_bpm(bin, self.n_fft, self.fs);
            self.state = TrackerState::bootstrap(bin, bpm);
            return Ok(WindowEstimate { window, bin, case: Case::Initial, raw_bpm: bpm, bpm });
        }
        let sel = select_bin(x_ppg, x_mss, &self.state, &self.params)?;
        let raw_bpm = bin_to_bpm(sel.bin, self.n_fft, self.fs);
        let smoothed = smooth(raw_bpm, &self.state, &self.params);
        let bpm = clamp(smoothed, self.state.b_minus1, &self.params);
        self.state = TrackerState { n0: sel.bin, b_minus1: bpm, b_minus2: self.state.b_minus1, initialized: true };
        Ok(WindowEstimate { window, bin: sel.bin, case: sel.case, raw_bpm, bpm })
    }
}
