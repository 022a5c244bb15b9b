use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Power-law bath spectral density f(Ω) = A·Ω^k.
///
/// k = 1 is Ohmic, k = 0 white noise, k = −1 1/f noise. The amplitude is in
/// whatever unit system the surrounding bath uses, so that f is a frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity {
    amplitude: f64,
    exponent: f64,
}

impl SpectralDensity {
    pub fn new(amplitude: f64, exponent: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(invalid(format!("spectral amplitude must be > 0, got {amplitude}")));
        }
        if !exponent.is_finite() {
            return Err(invalid(format!("spectral exponent must be finite, got {exponent}")));
        }
        Ok(Self { amplitude, exponent })
    }

    pub fn ohmic(amplitude: f64) -> Result<Self> {
        Self::new(amplitude, 1.0)
    }

    pub fn white(amplitude: f64) -> Result<Self> {
        Self::new(amplitude, 0.0)
    }

    pub fn one_over_f(amplitude: f64) -> Result<Self> {
        Self::new(amplitude, -1.0)
    }

    /// f ≡ 0: a closed system. Only used for sanity runs of the oracles.
    pub fn decoupled() -> Self {
        Self { amplitude: 0.0, exponent: 1.0 }
    }

    pub fn is_decoupled(&self) -> bool {
        self.amplitude == 0.0
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// f(Ω) for Ω > 0. Callers handle Ω = 0 through the boundary limit.
    pub fn eval(&self, omega: f64) -> f64 {
        debug_assert!(omega > 0.0);
        self.amplitude * omega.powf(self.exponent)
    }

    /// γ = 2π f(Ω).
    pub fn rate(&self, omega: f64) -> f64 {
        2.0 * std::f64::consts::PI * self.eval(omega)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_positive_amplitude() {
        assert!(SpectralDensity::new(0.0, 1.0).is_err());
        assert!(SpectralDensity::new(-1.0, 1.0).is_err());
        assert!(SpectralDensity::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn named_families() {
        assert_eq!(SpectralDensity::ohmic(1e-3).unwrap().eval(2.0), 2e-3);
        assert_eq!(SpectralDensity::white(1e-3).unwrap().eval(7.0), 1e-3);
        assert_eq!(SpectralDensity::one_over_f(1e-3).unwrap().eval(0.5), 2e-3);
    }
}
