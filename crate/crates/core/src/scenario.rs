//! Superconducting flux-qubit worked examples in SI units.
//!
//! Quoted GHz values are angular frequencies (1 GHz = 10⁹ rad/s). The bath is
//! white with 2πf = 1/T₁ at the relevant gaps, and the signal is read out
//! under CPMG.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bath::BathContext;
use crate::error::{Error, Result};
use crate::estimation::{optimize, Optimum, ProbeSpec, SensingRun};
use crate::geometry::ClusterGeometry;
use crate::spectral::SpectralDensity;

pub const FLUX_TEMPERATURE_K: f64 = 0.020;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FluxVariant {
    Weak2,
    StrongFm2,
    Noninteracting4,
    StrongFm4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxParameters {
    pub spins: usize,
    /// ω₀ in rad/s.
    pub omega0: f64,
    /// Pairwise coupling J in rad/s (all-to-all).
    pub coupling: f64,
    /// T₁ in seconds.
    pub t1: f64,
    pub temperature: f64,
    pub cpmg: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxReport {
    pub variant: FluxVariant,
    pub parameters: FluxParameters,
    /// Collective coupling 𝒥 in rad/s.
    pub collective: f64,
    /// Γ in s⁻¹.
    pub gamma: f64,
    pub optimum: Optimum,
}

impl FluxVariant {
    pub const ALL: [FluxVariant; 4] =
        [FluxVariant::Weak2, FluxVariant::StrongFm2, FluxVariant::Noninteracting4, FluxVariant::StrongFm4];

    pub fn name(self) -> &'static str {
        match self {
            FluxVariant::Weak2 => "weak2",
            FluxVariant::StrongFm2 => "strongFM2",
            FluxVariant::Noninteracting4 => "noninteracting4",
            FluxVariant::StrongFm4 => "strongFM4",
        }
    }

    pub fn parameters(self) -> FluxParameters {
        let (spins, omega0, coupling, t1) = match self {
            FluxVariant::Weak2 => (2, 5e9, 0.0, 30e-6),
            FluxVariant::StrongFm2 => (2, 2e9, 5e9, 20e-6),
            FluxVariant::Noninteracting4 => (4, 5e9, 0.0, 30e-6),
            FluxVariant::StrongFm4 => (4, 2e9, 5e9, 2e-6),
        };
        FluxParameters { spins, omega0, coupling, t1, temperature: FLUX_TEMPERATURE_K, cpmg: true }
    }

    pub fn run(self) -> Result<SensingRun> {
        let p = self.parameters();
        let spectral = SpectralDensity::white(1.0 / (2.0 * PI * p.t1))?;
        let bath = BathContext::si_kelvin(p.temperature, spectral)?;
        let probe = ProbeSpec::single_cluster(p.spins, p.omega0)?;
        let geom = ClusterGeometry::all_to_all(p.spins, p.coupling)?;
        Ok(SensingRun::new(probe, geom, bath)?.with_cpmg(p.cpmg))
    }

    pub fn report(self) -> Result<FluxReport> {
        let run = self.run()?;
        let bundle = run.rates()?;
        Ok(FluxReport {
            variant: self,
            parameters: self.parameters(),
            collective: bundle.spins[0].collective,
            gamma: bundle.gamma,
            optimum: optimize(&run)?,
        })
    }
}

impl fmt::Display for FluxVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FluxVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FluxVariant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unknown { kind: "flux variant", name: s.to_string() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::Regime;
    use std::f64::consts::E;

    #[test]
    fn names_round_trip() {
        for v in FluxVariant::ALL {
            assert_eq!(v.name().parse::<FluxVariant>().unwrap(), v);
        }
        assert!("weak3".parse::<FluxVariant>().is_err());
    }

    #[test]
    fn weak_pair_matches_thermal_ramsey() {
        let r = FluxVariant::Weak2.report().unwrap();
        let x = crate::units::HBAR_SI * 5e9 / (crate::units::K_B_SI * 0.02);
        let n = 1.0 / x.exp_m1();
        let gamma = (2.0 * n + 1.0) / 30e-6;
        assert!((r.gamma / gamma - 1.0).abs() < 1e-12);
        assert!((r.gamma - 4.49e4).abs() < 0.01e4);
        let expected = (2.0 / PI).powi(2) * 2.0 / (E * gamma);
        assert!((r.optimum.s_max() / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn strong_variants_are_ferromagnetic() {
        for v in [FluxVariant::StrongFm2, FluxVariant::StrongFm4] {
            let run = v.run().unwrap();
            assert_eq!(run.rates().unwrap().shared_regime(), Some(Regime::StrongFerromagnetic));
        }
        assert_eq!(FluxVariant::StrongFm4.report().unwrap().collective, 15e9);
    }
}
