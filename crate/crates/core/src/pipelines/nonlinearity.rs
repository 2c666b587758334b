use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Result};

type ComplexMap = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Pointwise coefficient map `r` with `|r(c)| ≤ E|c|`.
#[derive(Clone)]
pub enum Nonlinearity {
    Identity,
    /// `r(|c|e^{iθ}) = |c|e^{iΔθ}`.
    VocoderPhase(u32),
    /// `r(c) = c·max(0, 1 − λ/|c|)`.
    SoftThreshold(f64),
    Custom { map: ComplexMap, growth: f64, name: String },
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Identity => write!(f, "Identity"),
            Self::VocoderPhase(d) => write!(f, "VocoderPhase({d})"),
            Self::SoftThreshold(l) => write!(f, "SoftThreshold({l})"),
            Self::Custom { growth, name, .. } => write!(f, "Custom({name}, E={growth})"),
        }
    }
}

impl Nonlinearity {
    pub fn custom<F>(name: &str, growth: f64, map: F) -> Result<Self>
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        if !(growth.is_finite() && growth >= 0.0) {
            return Err(invalid("growth constant must be finite and non-negative"));
        }
        Ok(Self::Custom { map: Arc::new(map), growth, name: name.to_string() })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::VocoderPhase(0) => Err(invalid("vocoder phase factor must be at least 1")),
            Self::SoftThreshold(l) if !(*l >= 0.0) => Err(invalid(format!("threshold must be >= 0, got {l}"))),
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn apply(&self, c: Complex64) -> Complex64 {
        match self {
            Self::Identity => c,
            Self::VocoderPhase(1) => c,
            Self::VocoderPhase(d) => {
                let m = c.norm();
                if m == 0.0 {
                    c
                } else {
                    Complex64::from_polar(m, *d as f64 * c.arg())
                }
            }
            Self::SoftThreshold(l) => {
                let m = c.norm();
                if m <= *l {
                    Complex64::new(0.0, 0.0)
                } else {
                    c * (1.0 - l / m)
                }
            }
            Self::Custom { map, .. } => map(c),
        }
    }

    /// `E` with `|r(c)| ≤ E|c|`.
    pub fn growth_constant(&self) -> f64 {
        match self {
            Self::Custom { growth, .. } => *growth,
            _ => 1.0,
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Self::Identity | Self::VocoderPhase(1)) || matches!(self, Self::SoftThreshold(l) if *l == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vocoder_phase_multiplies_angle() {
        let r = Nonlinearity::VocoderPhase(3);
        let c = Complex64::from_polar(2.0, 0.4);
        let out = r.apply(c);
        assert!((out.norm() - 2.0).abs() < 1e-15);
        assert!((out.arg() - 1.2).abs() < 1e-14);
        assert_eq!(r.apply(Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn soft_threshold() {
        let r = Nonlinearity::SoftThreshold(1.0);
        assert_eq!(r.apply(Complex64::new(0.5, 0.0)), Complex64::new(0.0, 0.0));
        assert!((r.apply(Complex64::new(3.0, 0.0)).re - 2.0).abs() < 1e-15);
        assert_eq!(Nonlinearity::SoftThreshold(f64::INFINITY).apply(Complex64::new(1e9, 1.0)), Complex64::new(0.0, 0.0));
        assert!(Nonlinearity::SoftThreshold(-1.0).validate().is_err());
        assert!(Nonlinearity::VocoderPhase(0).validate().is_err());
    }
}
