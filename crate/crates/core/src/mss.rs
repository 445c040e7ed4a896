//! Spectral subtraction of the motion reference from the PPG spectrum.
//!
//! Both forms floor the result at zero. With exponent `p = 2` the
//! subtraction happens on powers and the square root is taken afterwards,
//! so the output is always a magnitude. The output is not renormalized.

use serde::{Deserialize, Serialize};

use crate::cmar::MotionReference;
use crate::error::{Error, Result};
use crate::spectral::MagnitudeSpectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubtractionMode {
    /// Weighted subtraction `a1*|Y|^p - a2*|N|^p`.
    #[default]
    Modified,
    /// Plain subtraction `|Y|^p - |N|^p`.
    Generalized,
    /// PPG spectrum passed through untouched.
    Disabled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubtractionParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub p: u8,
    pub mode: SubtractionMode,
}

impl Default for SubtractionParams {
    fn default() -> Self {
        Self { alpha1: 0.88, alpha2: 0.70, p: 1, mode: SubtractionMode::Modified }
    }
}

impl SubtractionParams {
    pub fn validate(&self) -> Result<()> {
        for (name, a) in [("alpha1", self.alpha1), ("alpha2", self.alpha2)] {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {a}")));
            }
        }
        if !matches!(self.p, 1 | 2) {
            return Err(Error::Config(format!("exponent p must be 1 or 2, got {}", self.p)));
        }
        Ok(())
    }

    /// Runs the configured subtraction.
    pub fn apply(&self, y: &MagnitudeSpectrum, n: &MotionReference) -> Result<MagnitudeSpectrum> {
        match self.mode {
            SubtractionMode::Modified => modified_ss(y, n, self),
            SubtractionMode::Generalized => generalized_ss(y, n, self.p),
            SubtractionMode::Disabled => {
                check(y, n)?;
                let mut out = y.clone();
                out.normalized = false;
                Ok(out)
            }
        }
    }
}

fn check(y: &MagnitudeSpectrum, n: &MotionReference) -> Result<()> {
    if y.len() != n.len() {
        return Err(Error::LengthMismatch { left: y.len(), right: n.len() });
    }
    Ok(())
}

fn subtract(y: &MagnitudeSpectrum, n: &MotionReference, a1: f64, a2: f64, p: u8) -> Result<MagnitudeSpectrum> {
    check(y, n)?;
    let bins = y
        .bins
        .iter()
        .zip(&n.bins)
        .map(|(&yk, &nk)| match p {
            1 => {
                let (s, r) = (a1 * yk, a2 * nk);
                if s > r {
                    s - r
                } else {
                    0.0
                }
            }
            _ => {
                let (s, r) = (a1 * yk * yk, a2 * nk * nk);
                if s > r {
                    (s - r).sqrt()
                } else {
                    0.0
                }
            }
        })
        .collect();
    Ok(MagnitudeSpectrum::new(bins, y.n_fft, y.fs))
}

/// `|X|^p = |Y|^p - |N|^p` where positive, else 0.
pub fn generalized_ss(y: &MagnitudeSpectrum, n: &MotionReference, p: u8) -> Result<MagnitudeSpectrum> {
    subtract(y, n, 1.0, 1.0, p)
}

/// `|X|^p = a1*|Y|^p - a2*|N|^p` where positive, else 0.
pub fn modified_ss(
    y: &MagnitudeSpectrum,
    n: &MotionReference,
    params: &SubtractionParams,
) -> Result<MagnitudeSpectrum> {
    params.validate()?;
    subtract(y, n, params.alpha1, params.alpha2, params.p)
}
