use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spectral::SpectralDensity;
use crate::units::UnitSystem;

/// Thermal state of the environment, carried as ħβ (a time).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Thermal {
    /// Finite temperature with the given ħβ > 0.
    HbarBeta(f64),
    ZeroTemperature,
}

impl Thermal {
    pub fn hbar_beta(hbar_beta: f64) -> Result<Self> {
        if hbar_beta == f64::INFINITY {
            return Ok(Thermal::ZeroTemperature);
        }
        if !(hbar_beta.is_finite() && hbar_beta > 0.0) {
            return Err(invalid(format!("inverse temperature must be > 0, got {hbar_beta}")));
        }
        Ok(Thermal::HbarBeta(hbar_beta))
    }

    /// ħβ, or +∞ at zero temperature.
    pub fn value(&self) -> f64 {
        match *self {
            Thermal::HbarBeta(b) => b,
            Thermal::ZeroTemperature => f64::INFINITY,
        }
    }

    /// Bose–Einstein occupation 1/(e^{ħβΩ} − 1) of a bath mode at Ω > 0.
    pub fn occupation(&self, omega: f64) -> Result<f64> {
        if !(omega > 0.0) {
            return Err(invalid(format!("occupation needs a positive frequency, got {omega}")));
        }
        Ok(match *self {
            Thermal::ZeroTemperature => 0.0,
            Thermal::HbarBeta(b) => 1.0 / (b * omega).exp_m1(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathContext {
    pub thermal: Thermal,
    pub spectral: SpectralDensity,
    pub units: UnitSystem,
}

impl BathContext {
    pub fn new(thermal: Thermal, spectral: SpectralDensity, units: UnitSystem) -> Self {
        Self { thermal, spectral, units }
    }

    /// Natural-unit bath with β in units of 1/ħω₀ (`f64::INFINITY` for T = 0).
    pub fn natural(beta: f64, spectral: SpectralDensity) -> Result<Self> {
        Ok(Self::new(Thermal::hbar_beta(beta)?, spectral, UnitSystem::Natural))
    }

    /// SI bath at a temperature in kelvin.
    pub fn si_kelvin(kelvin: f64, spectral: SpectralDensity) -> Result<Self> {
        if !(kelvin >= 0.0 && kelvin.is_finite()) {
            return Err(invalid(format!("temperature must be >= 0 K, got {kelvin}")));
        }
        let thermal = if kelvin == 0.0 {
            Thermal::ZeroTemperature
        } else {
            Thermal::HbarBeta(UnitSystem::Si.hbar_beta_from_temperature(kelvin))
        };
        Ok(Self::new(thermal, spectral, UnitSystem::Si))
    }

    pub fn occupation(&self, omega: f64) -> Result<f64> {
        self.thermal.occupation(omega)
    }

    /// Continuous extension of 2π f(Δ)·n̄(Δ) as Δ → 0⁺.
    ///
    /// Zero for super-Ohmic (k > 1), 2πA/ħβ for Ohmic, +∞ for sub-Ohmic
    /// (k < 1). At zero temperature n̄ vanishes identically, and the Ohmic
    /// term is zero; the sub-Ohmic limit is then 0·∞ and is taken along
    /// n̄ ≡ 0, i.e. zero as well.
    pub fn boundary_rate_term(&self) -> f64 {
        let s = &self.spectral;
        if s.is_decoupled() {
            return 0.0;
        }
        let hbar_beta = match self.thermal {
            Thermal::ZeroTemperature => return 0.0,
            Thermal::HbarBeta(b) => b,
        };
        let k = s.exponent();
        if k > 1.0 {
            0.0
        } else if k == 1.0 {
            2.0 * std::f64::consts::PI * s.amplitude() / hbar_beta
        } else {
            f64::INFINITY
        }
    }

    /// Spectral weight for the one-sided bath correlation at gap `nu`.
    ///
    /// Returns 2π f(|ν|)(n̄ + 1) for emission (ν > 0) and 2π f(|ν|) n̄ for
    /// absorption (ν < 0); ν = 0 uses the boundary limit.
    pub fn transition_rate(&self, nu: f64) -> Result<f64> {
        if self.spectral.is_decoupled() {
            return Ok(0.0);
        }
        if nu == 0.0 {
            let v = self.boundary_rate_term();
            return if v.is_finite() { Ok(v) } else { Err(Error::Diverged) };
        }
        let gap = nu.abs();
        let n = self.occupation(gap)?;
        let gamma = self.spectral.rate(gap);
        Ok(if nu > 0.0 { gamma * (n + 1.0) } else { gamma * n })
    }
}
