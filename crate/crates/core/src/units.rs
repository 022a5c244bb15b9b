//! Unit systems.
//!
//! Natural units set ħ = k_B = 1 and measure every frequency in units of the
//! reference frequency ω₀ (so times are in units of 1/ω₀). SI mode uses
//! angular frequencies in s⁻¹, temperatures in kelvin and CODATA constants.
//!
//! Internally the thermal state of the bath is always carried as ħβ, which
//! has the dimension of time in both systems.

use serde::{Deserialize, Serialize};

/// Reduced Planck constant, J·s (CODATA 2018, exact).
pub const HBAR_SI: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (CODATA 2018, exact).
pub const K_B_SI: f64 = 1.380_649e-23;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum UnitSystem {
    #[default]
    Natural,
    Si,
}

impl UnitSystem {
    pub fn hbar(self) -> f64 {
        match self {
            UnitSystem::Natural => 1.0,
            UnitSystem::Si => HBAR_SI,
        }
    }

    pub fn k_b(self) -> f64 {
        match self {
            UnitSystem::Natural => 1.0,
            UnitSystem::Si => K_B_SI,
        }
    }

    /// ħβ = ħ / (k_B T) for a temperature expressed in this system.
    ///
    /// In natural units the "temperature" is k_B T / ħω₀.
    pub fn hbar_beta_from_temperature(self, temperature: f64) -> f64 {
        self.hbar() / (self.k_b() * temperature)
    }

    pub fn temperature_from_hbar_beta(self, hbar_beta: f64) -> f64 {
        self.hbar() / (self.k_b() * hbar_beta)
    }

    pub fn label(self) -> &'static str {
        match self {
            UnitSystem::Natural => "natural",
            UnitSystem::Si => "si",
        }
    }
}

/// Conversion between natural units and SI for a given reference frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaturalScale {
    /// ω₀ in rad/s.
    omega0_si: f64,
}

impl NaturalScale {
    pub fn new(omega0_si: f64) -> Option<Self> {
        (omega0_si.is_finite() && omega0_si > 0.0).then_some(Self { omega0_si })
    }

    pub fn omega0_si(&self) -> f64 {
        self.omega0_si
    }

    pub fn frequency_to_si(&self, natural: f64) -> f64 {
        natural * self.omega0_si
    }

    pub fn frequency_from_si(&self, si: f64) -> f64 {
        si / self.omega0_si
    }

    pub fn time_to_si(&self, natural: f64) -> f64 {
        natural / self.omega0_si
    }

    pub fn time_from_si(&self, si: f64) -> f64 {
        si * self.omega0_si
    }

    /// Kelvin corresponding to a natural-unit inverse temperature β (in 1/ħω₀).
    pub fn temperature_from_beta(&self, beta: f64) -> f64 {
        HBAR_SI * self.omega0_si / (K_B_SI * beta)
    }

    pub fn beta_from_temperature(&self, kelvin: f64) -> f64 {
        HBAR_SI * self.omega0_si / (K_B_SI * kelvin)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn natural_hbar_beta_is_inverse_temperature() {
        assert_eq!(UnitSystem::Natural.hbar_beta_from_temperature(0.5), 2.0);
    }

    #[test]
    fn twenty_millikelvin_at_three_gigarad() {
        let hb = UnitSystem::Si.hbar_beta_from_temperature(0.020);
        let x = hb * 3e9;
        assert!((x - 1.1457).abs() < 1e-3, "{x}");
    }

    #[test]
    fn rejects_bad_scale() {
        assert!(NaturalScale::new(0.0).is_none());
        assert!(NaturalScale::new(f64::NAN).is_none());
    }

    proptest! {
        #[test]
        fn round_trips(omega0 in 1e3f64..1e12, x in 1e-6f64..1e6) {
            let s = NaturalScale::new(omega0).unwrap();
            let rel = |a: f64, b: f64| ((a - b) / b).abs();
            prop_assert!(rel(s.frequency_from_si(s.frequency_to_si(x)), x) < 1e-12);
            prop_assert!(rel(s.time_from_si(s.time_to_si(x)), x) < 1e-12);
            prop_assert!(rel(s.beta_from_temperature(s.temperature_from_beta(x)), x) < 1e-12);
        }
    }
}
