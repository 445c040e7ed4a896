//! End-to-end estimation for whole recordings.

use crate::cmar::build_reference_variant;
use crate::config::PipelineConfig;
use crate::error::Result;
use crate::par::{try_map_slice, Execution};
use crate::signal_io::{window_frames, RawRecording};
use crate::spectral::{MagnitudeSpectrum, PreprocessedFrame, Preprocessor};
use crate::tracker::{Tracker, WindowEstimate};

/// Spectra of one window after every stage except tracking.
#[derive(Debug, Clone, PartialEq)]
pub struct StagedFrame {
    pub frame: PreprocessedFrame,
    pub x_mss: MagnitudeSpectrum,
}

/// Preprocessing, motion reference and subtraction for every window.
pub fn stage_recording(rec: &RawRecording, cfg: &PipelineConfig) -> Result<Vec<StagedFrame>> {
    cfg.validate(rec.fs)?;
    let frames = window_frames(rec, cfg.window_s, cfg.hop_s)?;
    let mut pre = Preprocessor::new(cfg.spectral, rec.fs)?;
    frames
        .iter()
        .map(|f| {
            let frame = pre.process(&rec.window(f))?;
            let reference = build_reference_variant(&frame.c_x, &frame.c_y, &frame.c_z, cfg.reference)?;
            let x_mss = cfg.subtraction.apply(&frame.x_ppg, &reference)?;
            Ok(StagedFrame { frame, x_mss })
        })
        .collect()
}

/// Per-window tracker output including the selected bin and branch.
pub fn estimate_recording_detailed(rec: &RawRecording, cfg: &PipelineConfig) -> Result<Vec<WindowEstimate>> {
    cfg.validate(rec.fs)?;
    let frames = window_frames(rec, cfg.window_s, cfg.hop_s)?;
    let mut pre = Preprocessor::new(cfg.spectral, rec.fs)?;
    let mut tracker = Tracker::new(cfg.effective_tracker(), cfg.spectral.n_fft, rec.fs)?;
    let mut out = Vec::with_capacity(frames.len());
    for f in &frames {
        let frame = pre.process(&rec.window(f))?;
        let reference = build_reference_variant(&frame.c_x, &frame.c_y, &frame.c_z, cfg.reference)?;
        let x_mss = cfg.subtraction.apply(&frame.x_ppg, &reference)?;
        out.push(tracker.step(&frame.x_ppg, &x_mss)?);
    }
    Ok(out)
}

/// One BPM estimate per window.
pub fn estimate_recording(rec: &RawRecording, cfg: &PipelineConfig) -> Result<Vec<f64>> {
    Ok(estimate_recording_detailed(rec, cfg)?.into_iter().map(|w| w.bpm).collect())
}

/// Runs [`estimate_recording`] over many recordings. Each recording keeps
/// its own tracker; recordings are independent and may run concurrently.
pub fn estimate_batch(recs: &[RawRecording], cfg: &PipelineConfig, exec: Execution) -> Result<Vec<Vec<f64>>> {
    try_map_slice(recs, exec, |r| estimate_recording(r, cfg))
}
