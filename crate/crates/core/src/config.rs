use serde::{Deserialize, Serialize};

use crate::cmar::ReferenceMethod;
use crate::error::{Error, Result};
use crate::mss::{SubtractionMode, SubtractionParams};
use crate::signal_io::{DEFAULT_HOP_S, DEFAULT_WINDOW_S};
use crate::spectral::SpectralParams;
use crate::tracker::TrackerParams;

/// Named pipeline variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PipelineMode {
    /// Weighted subtraction of the min-composite reference.
    #[default]
    Specmar,
    /// Unweighted subtraction (`alpha1 = alpha2 = 1`).
    Specmarws,
    /// Weighted subtraction with an alternative reference (see `reference`).
    ReferenceVariant,
    /// No subtraction at all; the tracker sees the PPG spectrum twice.
    NoSubtraction,
}

impl std::str::FromStr for PipelineMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "specmar" => Ok(Self::Specmar),
            "specmarws" => Ok(Self::Specmarws),
            "reference-variant" => Ok(Self::ReferenceVariant),
            "no-subtraction" => Ok(Self::NoSubtraction),
            other => Err(Error::Config(format!("unknown mode {other:?}"))),
        }
    }
}

/// Every parameter of the pipeline. Bin-denominated tracker widths are
/// stated for a 4096-point transform and rescaled for other lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub mode: PipelineMode,
    pub window_s: f64,
    pub hop_s: f64,
    pub spectral: SpectralParams,
    pub reference: ReferenceMethod,
    pub subtraction: SubtractionParams,
    pub tracker: TrackerParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            mode: PipelineMode::Specmar,
            window_s: DEFAULT_WINDOW_S,
            hop_s: DEFAULT_HOP_S,
            spectral: SpectralParams::default(),
            reference: ReferenceMethod::Min,
            subtraction: SubtractionParams::default(),
            tracker: TrackerParams::default(),
        }
    }
}

impl PipelineConfig {
    pub fn with_mode(mode: PipelineMode) -> Self {
        Self::default().resolve_mode(mode)
    }

    /// Applies the fixed settings a mode implies.
    pub fn resolve_mode(mut self, mode: PipelineMode) -> Self {
        self.mode = mode;
        match mode {
            PipelineMode::Specmar => {
                self.reference = ReferenceMethod::Min;
                self.subtraction.mode = SubtractionMode::Modified;
            }
            PipelineMode::Specmarws => {
                self.reference = ReferenceMethod::Min;
                self.subtraction.alpha1 = 1.0;
                self.subtraction.alpha2 = 1.0;
                self.subtraction.mode = SubtractionMode::Generalized;
            }
            PipelineMode::ReferenceVariant => {
                self.subtraction.mode = SubtractionMode::Modified;
            }
            PipelineMode::NoSubtraction => {
                self.subtraction.mode = SubtractionMode::Disabled;
            }
        }
        self
    }

    pub fn with_n_fft(mut self, n_fft: usize) -> Self {
        self.spectral.n_fft = n_fft;
        self
    }

    pub fn with_alphas(mut self, alpha1: f64, alpha2: f64) -> Self {
        self.subtraction.alpha1 = alpha1;
        self.subtraction.alpha2 = alpha2;
        self
    }

    /// Tracker parameters rescaled for the configured transform length.
    pub fn effective_tracker(&self) -> TrackerParams {
        self.tracker.scaled_for(self.spectral.n_fft)
    }

    /// Checks every parameter constraint. `fs` is needed for the band and
    /// truncation checks.
    pub fn validate(&self, fs: f64) -> Result<()> {
        if !(self.window_s > 0.0 && self.hop_s > 0.0) {
            return Err(Error::Config("window and hop durations must be positive".into()));
        }
        let window_len = (fs * self.window_s).round() as usize;
        if window_len > self.spectral.n_fft {
            return Err(Error::Config(format!(
                "n_fft = {} is shorter than the {window_len}-sample window",
                self.spectral.n_fft
            )));
        }
        self.spectral.validate(fs)?;
        self.subtraction.validate()?;
        self.tracker.validate()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_parameters() {
        let c = PipelineConfig::default();
        assert_eq!(c.spectral.n_fft, 4096);
        assert_eq!(c.spectral.max_bpm, 240.0);
        assert_eq!((c.subtraction.alpha1, c.subtraction.alpha2, c.subtraction.p), (0.88, 0.70, 1));
        assert_eq!((c.tracker.delta_s, c.tracker.delta_t, c.tracker.delta1, c.tracker.delta2), (30, 30, 3, 3));
        assert_eq!((c.tracker.beta1, c.tracker.beta2), (0.7, 0.3));
        assert_eq!(c.tracker.gamma, [0.9, 0.05, 0.05]);
        assert_eq!((c.tracker.lambda_inc, c.tracker.lambda_dec), (5.0, -3.0));
        c.validate(125.0).unwrap();
    }

    #[test]
    fn specmarws_is_unweighted() {
        let c = PipelineConfig::with_mode(PipelineMode::Specmarws);
        assert_eq!((c.subtraction.alpha1, c.subtraction.alpha2), (1.0, 1.0));
    }

    #[test]
    fn json_round_trip() {
        let c = PipelineConfig::with_mode(PipelineMode::ReferenceVariant);
        assert_eq!(PipelineConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn rejects_window_longer_than_transform() {
        let c = PipelineConfig::default().with_n_fft(512);
        assert!(c.validate(125.0).is_err());
    }

    #[test]
    fn rejects_out_of_range_alpha() {
        let c = PipelineConfig::default().with_alphas(0.88, 1.5);
        assert!(c.validate(125.0).is_err());
    }
}
