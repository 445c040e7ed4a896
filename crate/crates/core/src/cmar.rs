//! Composite motion-artifact reference.
//!
//! Motion shows up at the same frequencies on all three accelerometer axes,
//! while sensor noise rarely does, so the per-bin minimum of the three
//! normalized axis spectra isolates the shared motion component.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{normalize_peak, MagnitudeSpectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// How the three axis spectra are combined into one reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMethod {
    /// Per-bin minimum across axes.
    #[default]
    Min,
    /// Per-bin maximum across axes; kept for ablations.
    Max,
    /// One axis passed through unchanged.
    SingleAxis(Axis),
}

impl std::str::FromStr for ReferenceMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "min" => Ok(Self::Min),
            "max" => Ok(Self::Max),
            "x" => Ok(Self::SingleAxis(Axis::X)),
            "y" => Ok(Self::SingleAxis(Axis::Y)),
            "z" => Ok(Self::SingleAxis(Axis::Z)),
            other => Err(Error::Config(format!("unknown reference method {other:?} (expected min, max, x, y or z)"))),
        }
    }
}

impl std::fmt::Display for ReferenceMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::Min => "min",
            Self::Max => "max",
            Self::SingleAxis(Axis::X) => "x",
            Self::SingleAxis(Axis::Y) => "y",
            Self::SingleAxis(Axis::Z) => "z",
        };
        f.write_str(s)
    }
}

/// Motion reference spectrum, peak-normalized to 1 unless all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionReference {
    pub bins: Vec<f64>,
    pub method: ReferenceMethod,
}

impl MotionReference {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// All-zero reference of length `m`.
    pub fn zeros(m: usize) -> Self {
        Self { bins: vec![0.0; m], method: ReferenceMethod::Min }
    }
}

fn check_lengths(c_x: &MagnitudeSpectrum, c_y: &MagnitudeSpectrum, c_z: &MagnitudeSpectrum) -> Result<()> {
    for other in [c_y, c_z] {
        if other.len() != c_x.len() {
            return Err(Error::LengthMismatch { left: c_x.len(), right: other.len() });
        }
    }
    Ok(())
}

/// Per-bin combination of three spectra before renormalization.
pub fn combine_axes(
    c_x: &MagnitudeSpectrum,
    c_y: &MagnitudeSpectrum,
    c_z: &MagnitudeSpectrum,
    method: ReferenceMethod,
) -> Result<Vec<f64>> {
    check_lengths(c_x, c_y, c_z)?;
    let triples = c_x.bins.iter().zip(&c_y.bins).zip(&c_z.bins);
    Ok(match method {
        ReferenceMethod::Min => triples.map(|((&x, &y), &z)| x.min(y).min(z)).collect(),
        ReferenceMethod::Max => triples.map(|((&x, &y), &z)| x.max(y).max(z)).collect(),
        ReferenceMethod::SingleAxis(Axis::X) => c_x.bins.clone(),
        ReferenceMethod::SingleAxis(Axis::Y) => c_y.bins.clone(),
        ReferenceMethod::SingleAxis(Axis::Z) => c_z.bins.clone(),
    })
}

/// Composite reference: per-bin minimum, renormalized to peak 1.
pub fn build_cmar(
    c_x: &MagnitudeSpectrum,
    c_y: &MagnitudeSpectrum,
    c_z: &MagnitudeSpectrum,
) -> Result<MotionReference> {
    build_reference_variant(c_x, c_y, c_z, ReferenceMethod::Min)
}

pub fn build_reference_variant(
    c_x: &MagnitudeSpectrum,
    c_y: &MagnitudeSpectrum,
    c_z: &MagnitudeSpectrum,
    method: ReferenceMethod,
) -> Result<MotionReference> {
    let mut bins = combine_axes(c_x, c_y, c_z, method)?;
    normalize_peak(&mut bins);
    Ok(MotionReference { bins, method })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec(v: &[f64]) -> MagnitudeSpectrum {
        let mut s = MagnitudeSpectrum::new(v.to_vec(), 8, 1.0);
        s.normalized = true;
        s
    }

    #[test]
    fn min_reference_example() {
        let r = build_cmar(&spec(&[0.2, 0.9]), &spec(&[0.5, 0.3]), &spec(&[0.4, 0.6])).unwrap();
        assert_abs_diff_eq!(r.bins[0], 0.2 / 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(r.bins[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.bins[0], 0.6667, epsilon = 1e-4);
    }

    #[test]
    fn max_and_single_axis_variants() {
        let (x, y, z) = (spec(&[0.2, 0.9]), spec(&[0.5, 0.3]), spec(&[0.4, 0.6]));
        let r = build_reference_variant(&x, &y, &z, ReferenceMethod::Max).unwrap();
        assert_abs_diff_eq!(r.bins[0], 0.5556, epsilon = 1e-4);
        assert_abs_diff_eq!(r.bins[1], 1.0, epsilon = 1e-12);

        let y1 = spec(&[0.5, 1.0]);
        let r = build_reference_variant(&x, &y1, &z, ReferenceMethod::SingleAxis(Axis::Y)).unwrap();
        assert_eq!(r.bins, y1.bins);
    }

    #[test]
    fn identical_axes_give_identical_outputs() {
        let s = spec(&[0.1, 1.0, 0.3]);
        let base = build_cmar(&s, &s, &s).unwrap();
        assert_eq!(base.bins, s.bins);
        for m in ["max", "x", "y", "z"] {
            let r = build_reference_variant(&s, &s, &s, m.parse().unwrap()).unwrap();
            assert_eq!(r.bins, base.bins);
        }
    }

    #[test]
    fn zero_axis_gives_zero_reference() {
        let r = build_cmar(&spec(&[0.0, 0.0]), &spec(&[0.5, 1.0]), &spec(&[1.0, 0.2])).unwrap();
        assert_eq!(r.bins, vec![0.0, 0.0]);
    }

    #[test]
    fn length_mismatch() {
        let err = build_cmar(&spec(&[0.0, 1.0]), &spec(&[1.0]), &spec(&[1.0, 0.2])).unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { left: 2, right: 1 }));
    }

    #[test]
    fn method_round_trips_through_text() {
        for m in ["min", "max", "x", "y", "z"] {
            assert_eq!(m.parse::<ReferenceMethod>().unwrap().to_string(), m);
        }
        assert!("sum".parse::<ReferenceMethod>().is_err());
    }
}
