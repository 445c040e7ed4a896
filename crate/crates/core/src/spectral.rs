//! Per-window spectral preprocessing.
//!
//! Each window is zero-padded to `n_fft` points and transformed with a
//! rectangular window. Coefficients outside the heart-rate band are zeroed,
//! the spectrum is truncated to the first `M` bins (everything at or below
//! the BPM cap `H`), and finally scaled so its peak is 1. Bin `k` (0-based)
//! sits at `k * fs / n_fft` Hz.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal_io::WindowView;

/// Magnitudes of one spectrum together with its bin-to-frequency mapping.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeSpectrum {
    pub bins: Vec<f64>,
    pub n_fft: usize,
    pub fs: f64,
    pub normalized: bool,
}

impl MagnitudeSpectrum {
    pub fn new(bins: Vec<f64>, n_fft: usize, fs: f64) -> Self {
        Self { bins, n_fft, fs, normalized: false }
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// Center frequency of bin `k` in Hz.
    pub fn bin_hz(&self, k: usize) -> f64 {
        k as f64 * self.fs / self.n_fft as f64
    }

    pub fn max(&self) -> f64 {
        self.bins.iter().copied().fold(0.0, f64::max)
    }

    /// Index of the largest bin; ties go to the lowest index. `None` when
    /// every bin is zero.
    pub fn argmax(&self) -> Option<usize> {
        argmax_lowest(&self.bins).filter(|&k| self.bins[k] > 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.bins.iter().all(|&v| v == 0.0)
    }
}

pub(crate) fn argmax_lowest(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, &v) in values.iter().enumerate() {
        match best {
            Some(b) if values[b] >= v => {}
            _ => best = Some(k),
        }
    }
    best
}

/// Divides by the peak so the maximum becomes 1; an all-zero input is
/// returned unchanged.
pub fn normalize_peak(bins: &mut [f64]) {
    let peak = bins.iter().copied().fold(0.0, f64::max);
    if peak > 0.0 {
        for v in bins.iter_mut() {
            *v /= peak;
        }
    }
}

/// Preprocessing parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralParams {
    pub n_fft: usize,
    /// BPM cap `H` that sets the truncation length.
    pub max_bpm: f64,
    pub band_lo_hz: f64,
    pub band_hi_hz: f64,
}

impl Default for SpectralParams {
    fn default() -> Self {
        Self { n_fft: 4096, max_bpm: 240.0, band_lo_hz: 0.4, band_hi_hz: 3.5 }
    }
}

impl SpectralParams {
    pub fn validate(&self, fs: f64) -> Result<()> {
        if self.n_fft == 0 {
            return Err(Error::Config("n_fft must be positive".into()));
        }
        if !(self.band_lo_hz >= 0.0 && self.band_lo_hz < self.band_hi_hz && self.band_hi_hz <= fs / 2.0) {
            return Err(Error::Config(format!(
                "band [{}, {}] Hz must satisfy 0 <= lo < hi <= fs/2 = {}",
                self.band_lo_hz,
                self.band_hi_hz,
                fs / 2.0
            )));
        }
        truncation_bins(self.max_bpm, self.n_fft, fs).map(|_| ())
    }
}

/// Number of leading bins covering `0..=max_bpm`: `floor(H * n_fft / (60 fs))`.
pub fn truncation_bins(max_bpm: f64, n_fft: usize, fs: f64) -> Result<usize> {
    if !(max_bpm > 0.0 && fs > 0.0 && n_fft > 0) {
        return Err(Error::Config(format!("truncation needs positive H, n_fft and fs (got {max_bpm}, {n_fft}, {fs})")));
    }
    let m = (max_bpm * n_fft as f64 / (60.0 * fs)).floor();
    if m < 1.0 {
        return Err(Error::Config(format!(
            "degenerate truncation: H={max_bpm}, n_fft={n_fft}, fs={fs} leaves no bins"
        )));
    }
    Ok((m as usize).min(n_fft))
}

/// Reusable FFT plan for one transform length.
pub struct SpectrumAnalyzer {
    n_fft: usize,
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
}

impl std::fmt::Debug for SpectrumAnalyzer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectrumAnalyzer").field("n_fft", &self.n_fft).finish()
    }
}

impl SpectrumAnalyzer {
    pub fn new(n_fft: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(n_fft);
        let scratch = vec![Complex::default(); fft.get_inplace_scratch_len()];
        Self { n_fft, fft, buf: vec![Complex::default(); n_fft], scratch }
    }

    pub fn n_fft(&self) -> usize {
        self.n_fft
    }

    /// Full-length magnitude spectrum of `samples` zero-padded to `n_fft`.
    pub fn magnitude(&mut self, samples: &[f64], fs: f64) -> Result<MagnitudeSpectrum> {
        if samples.is_empty() {
            return Err(Error::EmptyWindow);
        }
        if samples.len() > self.n_fft {
            return Err(Error::Config(format!("window of {} samples exceeds n_fft = {}", samples.len(), self.n_fft)));
        }
        for (dst, &x) in self.buf.iter_mut().zip(samples) {
            *dst = Complex::new(x, 0.0);
        }
        self.buf[samples.len()..].fill(Complex::default());
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        let bins = self.buf.iter().map(|c| c.norm()).collect();
        Ok(MagnitudeSpectrum::new(bins, self.n_fft, fs))
    }
}

/// One-shot magnitude spectrum; plans a fresh FFT on every call.
pub fn magnitude_spectrum(samples: &[f64], n_fft: usize, fs: f64) -> Result<MagnitudeSpectrum> {
    SpectrumAnalyzer::new(n_fft).magnitude(samples, fs)
}

/// Zeroes every bin whose center frequency lies outside `[lo_hz, hi_hz]`.
pub fn band_zero(mut spec: MagnitudeSpectrum, lo_hz: f64, hi_hz: f64) -> Result<MagnitudeSpectrum> {
    if !(lo_hz < hi_hz && hi_hz <= spec.fs / 2.0) {
        return Err(Error::Config(format!("band [{lo_hz}, {hi_hz}] Hz invalid at fs = {}", spec.fs)));
    }
    let df = spec.fs / spec.n_fft as f64;
    for (k, v) in spec.bins.iter_mut().enumerate() {
        let f = k as f64 * df;
        if f < lo_hz || f > hi_hz {
            *v = 0.0;
        }
    }
    Ok(spec)
}

/// The four spectra of one analysis window, all `M` bins long.
#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessedFrame {
    pub window_index: usize,
    pub x_ppg: MagnitudeSpectrum,
    pub c_x: MagnitudeSpectrum,
    pub c_y: MagnitudeSpectrum,
    pub c_z: MagnitudeSpectrum,
}

impl PreprocessedFrame {
    pub fn bins(&self) -> usize {
        self.x_ppg.len()
    }
}

/// Window-to-spectra stage with its FFT plan cached.
#[derive(Debug)]
pub struct Preprocessor {
    params: SpectralParams,
    fs: f64,
    m: usize,
    analyzer: SpectrumAnalyzer,
    avg: Vec<f64>,
}

impl Preprocessor {
    pub fn new(params: SpectralParams, fs: f64) -> Result<Self> {
        params.validate(fs)?;
        let m = truncation_bins(params.max_bpm, params.n_fft, fs)?;
        Ok(Self { params, fs, m, analyzer: SpectrumAnalyzer::new(params.n_fft), avg: Vec::new() })
    }

    /// Truncated spectrum length `M`.
    pub fn bins(&self) -> usize {
        self.m
    }

    pub fn process(&mut self, view: &WindowView<'_>) -> Result<PreprocessedFrame> {
        self.avg.clear();
        self.avg.extend(view.ppg1.iter().zip(view.ppg2).map(|(a, b)| (a + b) / 2.0));
        let avg = std::mem::take(&mut self.avg);
        let x_ppg = self.channel(&avg);
        self.avg = avg;
        Ok(PreprocessedFrame {
            window_index: view.index,
            x_ppg: x_ppg?,
            c_x: self.channel(view.acc_x)?,
            c_y: self.channel(view.acc_y)?,
            c_z: self.channel(view.acc_z)?,
        })
    }

    fn channel(&mut self, samples: &[f64]) -> Result<MagnitudeSpectrum> {
        let spec = self.analyzer.magnitude(samples, self.fs)?;
        let mut spec = band_zero(spec, self.params.band_lo_hz, self.params.band_hi_hz)?;
        spec.bins.truncate(self.m);
        normalize_peak(&mut spec.bins);
        spec.normalized = true;
        Ok(spec)
    }
}

/// Convenience wrapper that plans a fresh FFT; use [`Preprocessor`] in loops.
pub fn preprocess_window(view: &WindowView<'_>, fs: f64, params: &SpectralParams) -> Result<PreprocessedFrame> {
    Preprocessor::new(*params, fs)?.process(view)
}
