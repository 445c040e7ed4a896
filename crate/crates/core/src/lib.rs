//! Heart-rate estimation from wrist PPG and three-axis accelerometer data.
//!
//! Each 8 s window (2 s hop) goes through four stages:
//!
//! 1. [`spectral`]: average the two PPG channels, take magnitude spectra of
//!    the PPG average and each accelerometer axis, zero everything outside
//!    0.4–3.5 Hz, truncate at the BPM cap and peak-normalize.
//! 2. [`cmar`]: combine the three axis spectra by per-bin minimum into one
//!    motion reference.
//! 3. [`mss`]: subtract the weighted reference from the weighted PPG spectrum.
//! 4. [`tracker`]: pick a bin near the previous window's, convert to BPM,
//!    smooth and rate-limit.
//!
//! [`eval`] computes agreement metrics, sweeps and timings; [`synth`] builds
//! recordings with known heart rate. Batch entry points run in parallel when
//! the `parallel` feature is enabled (the default).

// Parameter checks are written as `!(x > lo)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cmar;
pub mod config;
pub mod error;
pub mod eval;
pub mod mss;
pub mod par;
pub mod pipeline;
pub mod signal_io;
pub mod spectral;
pub mod synth;
pub mod tracker;

pub use cmar::{build_cmar, build_reference_variant, Axis, MotionReference, ReferenceMethod};
pub use config::{PipelineConfig, PipelineMode};
pub use error::{Error, Result};
pub use eval::{aae, bland_altman, pearson, DatasetReport, EvalReport, LabeledRecording};
pub use mss::{generalized_ss, modified_ss, SubtractionMode, SubtractionParams};
pub use par::Execution;
pub use pipeline::{estimate_batch, estimate_recording, estimate_recording_detailed};
pub use signal_io::{load_ground_truth, load_recording, window_frames, GroundTruth, RawRecording, WindowFrame};
pub use spectral::{MagnitudeSpectrum, PreprocessedFrame, Preprocessor, SpectralParams};
pub use synth::{generate, MotionComponent, SynthSpec};
pub use tracker::{ClampMode, KappaMode, TrackerParams, TrackerState};
