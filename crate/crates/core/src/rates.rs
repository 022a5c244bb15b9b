//! Closed-form decay rates of the GHZ coherence.
//!
//! Each spin i decays at ξᵢ, which depends on how its collective coupling 𝒥ᵢ
//! compares with the spin frequency ω:
//!
//! | regime            | condition     | ξᵢ                          |
//! |-------------------|---------------|-----------------------------|
//! | weak              | −ω < 𝒥ᵢ < ω   | γ⁻(n̄⁻ + 1) + γ⁺ n̄⁺          |
//! | strong AF         | 𝒥ᵢ < −ω       | γ⁻(n̄⁻ + 1) + γ⁺(n̄⁺ + 1)     |
//! | strong FM         | 𝒥ᵢ > ω        | γ⁻ n̄⁻ + γ⁺ n̄⁺               |
//!
//! with γ± = 2π f(|𝒥ᵢ ± ω|) and n̄± the thermal occupation at |𝒥ᵢ ± ω|.
//! The cluster decays at the average Γ = (1/𝒩) Σ ξᵢ.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bath::BathContext;
use crate::error::{invalid, Result};
use crate::geometry::ClusterGeometry;

/// Relative band around |𝒥ᵢ| = ω that is classified as the boundary.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    WeakCoupling,
    StrongAntiferromagnetic,
    StrongFerromagnetic,
    Boundary,
}

impl Regime {
    pub fn classify(collective: f64, omega: f64) -> Regime {
        let band = BOUNDARY_TOLERANCE * omega;
        if (collective.abs() - omega).abs() <= band {
            Regime::Boundary
        } else if collective > omega {
            Regime::StrongFerromagnetic
        } else if collective < -omega {
            Regime::StrongAntiferromagnetic
        } else {
            Regime::WeakCoupling
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Regime::WeakCoupling => "weak",
            Regime::StrongAntiferromagnetic => "strong_af",
            Regime::StrongFerromagnetic => "strong_fm",
            Regime::Boundary => "boundary",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Decay data for one spin. `xi` is `+∞` when the rate diverges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinRate {
    pub collective: f64,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub n_minus: f64,
    pub n_plus: f64,
    pub xi: f64,
    pub regime: Regime,
}

impl SpinRate {
    pub fn is_diverged(&self) -> bool {
        self.xi == f64::INFINITY
    }
}

fn gamma_at(bath: &BathContext, gap: f64) -> f64 {
    if bath.spectral.is_decoupled() {
        return 0.0;
    }
    2.0 * std::f64::consts::PI * bath.spectral.amplitude() * gap.powf(bath.spectral.exponent())
}

fn occupation_at(bath: &BathContext, gap: f64) -> Result<f64> {
    if gap == 0.0 {
        return Ok(if bath.thermal.value().is_infinite() { 0.0 } else { f64::INFINITY });
    }
    bath.occupation(gap)
}

/// ξᵢ for a spin with collective coupling `collective` at frequency `omega`.
pub fn xi(collective: f64, omega: f64, bath: &BathContext) -> Result<SpinRate> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(invalid(format!("spin frequency must be > 0, got {omega}")));
    }
    if !collective.is_finite() {
        return Err(invalid("collective coupling must be finite"));
    }
    let regime = Regime::classify(collective, omega);
    let mut gap_minus = (collective - omega).abs();
    let mut gap_plus = (collective + omega).abs();
    if regime == Regime::Boundary {
        if collective > 0.0 {
            gap_minus = 0.0;
        } else {
            gap_plus = 0.0;
        }
    }
    let gamma_minus = gamma_at(bath, gap_minus);
    let gamma_plus = gamma_at(bath, gap_plus);
    let n_minus = occupation_at(bath, gap_minus)?;
    let n_plus = occupation_at(bath, gap_plus)?;

    let xi = match regime {
        Regime::WeakCoupling => gamma_minus * (n_minus + 1.0) + gamma_plus * n_plus,
        Regime::StrongAntiferromagnetic => {
            gamma_minus * (n_minus + 1.0) + gamma_plus * (n_plus + 1.0)
        }
        Regime::StrongFerromagnetic => gamma_minus * n_minus + gamma_plus * n_plus,
        Regime::Boundary => {
            // the vanishing gap goes through its Δ → 0⁺ limit, the other gap is regular
            if collective > 0.0 {
                bath.boundary_rate_term() + gamma_plus * n_plus
            } else {
                gamma_minus * (n_minus + 1.0) + bath.boundary_rate_term()
            }
        }
    };
    Ok(SpinRate { collective, gamma_minus, gamma_plus, n_minus, n_plus, xi, regime })
}

/// Per-spin rates and their cluster average Γ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateBundle {
    pub spins: Vec<SpinRate>,
    /// Γ = (1/𝒩) Σ ξᵢ; `+∞` if any spin diverges.
    pub gamma: f64,
}

impl RateBundle {
    pub fn from_couplings(couplings: &[f64], omega: f64, bath: &BathContext) -> Result<Self> {
        if couplings.is_empty() {
            return Err(invalid("a cluster needs at least one spin"));
        }
        let spins = couplings
            .iter()
            .map(|&c| xi(c, omega, bath))
            .collect::<Result<Vec<_>>>()?;
        let gamma = spins.iter().map(|s| s.xi).sum::<f64>() / spins.len() as f64;
        Ok(Self { spins, gamma })
    }

    pub fn size(&self) -> usize {
        self.spins.len()
    }

    pub fn is_diverged(&self) -> bool {
        self.gamma == f64::INFINITY
    }

    /// The regime shared by every spin, or `None` for a mixed cluster.
    pub fn shared_regime(&self) -> Option<Regime> {
        let first = self.spins[0].regime;
        self.spins.iter().all(|s| s.regime == first).then_some(first)
    }

    pub fn is_mixed(&self) -> bool {
        self.shared_regime().is_none()
    }

    /// Label for tables: the shared regime or "mixed".
    pub fn regime_label(&self) -> &'static str {
        self.shared_regime().map_or("mixed", Regime::label)
    }
}

/// Γ from each spin's own row sum 𝒥ᵢ.
pub fn average_rate(geom: &ClusterGeometry, omega: f64, bath: &BathContext) -> Result<RateBundle> {
    RateBundle::from_couplings(&geom.collective_couplings(), omega, bath)
}

/// Γ with every spin assigned the chain's uniform collective coupling.
pub fn average_rate_uniform(
    geom: &ClusterGeometry,
    omega: f64,
    bath: &BathContext,
) -> Result<RateBundle> {
    let c = geom.collective_coupling_uniform();
    RateBundle::from_couplings(&vec![c; geom.size()], omega, bath)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DistanceConvention, RangeExponent};
    use crate::spectral::SpectralDensity;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn ohmic(beta: f64) -> BathContext {
        BathContext::natural(beta, SpectralDensity::ohmic(1e-3).unwrap()).unwrap()
    }

    #[test]
    fn classification() {
        assert_eq!(Regime::classify(0.0, 1.0), Regime::WeakCoupling);
        assert_eq!(Regime::classify(0.999, 1.0), Regime::WeakCoupling);
        assert_eq!(Regime::classify(-0.999, 1.0), Regime::WeakCoupling);
        assert_eq!(Regime::classify(5.0, 1.0), Regime::StrongFerromagnetic);
        assert_eq!(Regime::classify(-5.0, 1.0), Regime::StrongAntiferromagnetic);
        assert_eq!(Regime::classify(1.0, 1.0), Regime::Boundary);
        assert_eq!(Regime::classify(-1.0, 1.0), Regime::Boundary);
        assert_eq!(Regime::classify(1.0 + 1e-13, 1.0), Regime::Boundary);
        assert_eq!(Regime::classify(1.0 + 1e-9, 1.0), Regime::StrongFerromagnetic);
    }

    #[test]
    fn zero_temperature_spontaneous_emission() {
        let r = xi(0.0, 1.0, &ohmic(f64::INFINITY)).unwrap();
        assert_eq!(r.regime, Regime::WeakCoupling);
        assert_relative_eq!(r.xi, 2.0 * PI * 1e-3, max_relative = 1e-15);
    }

    #[test]
    fn zero_temperature_ferromagnet_is_frozen() {
        for spectral in [
            SpectralDensity::ohmic(1e-3).unwrap(),
            SpectralDensity::white(1e-3).unwrap(),
            SpectralDensity::one_over_f(1e-3).unwrap(),
        ] {
            let bath = BathContext::natural(f64::INFINITY, spectral).unwrap();
            assert_eq!(xi(5.0, 1.0, &bath).unwrap().xi, 0.0);
        }
    }

    #[test]
    fn strong_ferromagnet_at_unit_beta() {
        let r = xi(5.0, 1.0, &ohmic(1.0)).unwrap();
        let n4 = 1.0 / (4f64.exp() - 1.0);
        let n6 = 1.0 / (6f64.exp() - 1.0);
        let expected = 2.0 * PI * 1e-3 * (4.0 * n4 + 6.0 * n6);
        assert_relative_eq!(r.xi, expected, max_relative = 1e-14);
        assert_relative_eq!(r.xi, 5.625_895_725_052_307e-4, max_relative = 1e-12);
    }

    #[test]
    fn strong_antiferromagnet_at_unit_beta() {
        let r = xi(-5.0, 1.0, &ohmic(1.0)).unwrap();
        let n4 = 1.0 / (4f64.exp() - 1.0);
        let n6 = 1.0 / (6f64.exp() - 1.0);
        let expected = 2.0 * PI * 1e-3 * (6.0 * (n6 + 1.0) + 4.0 * (n4 + 1.0));
        assert_eq!(r.regime, Regime::StrongAntiferromagnetic);
        assert_relative_eq!(r.xi, expected, max_relative = 1e-14);
    }

    #[test]
    fn ohmic_boundary_matches_limit() {
        let bath = ohmic(1.0);
        let r = xi(1.0, 1.0, &bath).unwrap();
        assert_eq!(r.regime, Regime::Boundary);
        let expected = 2.0 * PI * 1e-3 / 1.0 + 2.0 * PI * 1e-3 * 2.0 / (2f64.exp() - 1.0);
        assert_relative_eq!(r.xi, expected, max_relative = 1e-12);
        // approach from the ferromagnetic side
        let near = xi(1.0 + 1e-6, 1.0, &bath).unwrap();
        assert_relative_eq!(near.xi, expected, max_relative = 1e-5);
        // antiferromagnetic boundary mirrors it with the emission term at 2ω
        let af = xi(-1.0, 1.0, &bath).unwrap();
        let expected_af = 2.0 * PI * 1e-3 + 2.0 * PI * 1e-3 * 2.0 * (1.0 / (2f64.exp() - 1.0) + 1.0);
        assert_relative_eq!(af.xi, expected_af, max_relative = 1e-12);
    }

    #[test]
    fn sub_ohmic_boundary_diverges() {
        let bath = BathContext::natural(1.0, SpectralDensity::white(1e-3).unwrap()).unwrap();
        let r = xi(1.0, 1.0, &bath).unwrap();
        assert!(r.is_diverged());
        let geom = ClusterGeometry::all_to_all(2, 1.0).unwrap();
        let b = average_rate(&geom, 1.0, &bath).unwrap();
        assert!(b.is_diverged());
        assert_eq!(b.shared_regime(), Some(Regime::Boundary));
    }

    #[test]
    fn rejects_bad_frequency() {
        assert!(xi(0.0, 0.0, &ohmic(1.0)).is_err());
        assert!(xi(0.0, -1.0, &ohmic(1.0)).is_err());
    }

    #[test]
    fn pair_bundle_matches_single_spin() {
        let geom = ClusterGeometry::all_to_all(2, 5.0).unwrap();
        let b = average_rate(&geom, 1.0, &ohmic(1.0)).unwrap();
        assert_eq!(b.gamma, xi(5.0, 1.0, &ohmic(1.0)).unwrap().xi);
        assert_eq!(b.shared_regime(), Some(Regime::StrongFerromagnetic));
    }

    #[test]
    fn single_spin_is_weak() {
        let geom = ClusterGeometry::all_to_all(1, 5.0).unwrap();
        let b = average_rate(&geom, 1.0, &ohmic(1.0)).unwrap();
        assert_eq!(b.spins[0].collective, 0.0);
        assert_eq!(b.spins[0].regime, Regime::WeakCoupling);
    }

    #[test]
    fn open_chain_can_mix_regimes() {
        // ends see J + J/8, the middle spin 2J
        let geom = ClusterGeometry::new(3, RangeExponent::Finite(3.0), 0.6, DistanceConvention::Linear).unwrap();
        let b = average_rate(&geom, 1.0, &ohmic(1.0)).unwrap();
        assert!(b.is_mixed());
        assert_eq!(b.regime_label(), "mixed");
        let mean = b.spins.iter().map(|s| s.xi).sum::<f64>() / 3.0;
        assert_eq!(b.gamma, mean);
        // the uniform profile replicates the reference spin (an end spin for 𝒩 = 3)
        let u = average_rate_uniform(&geom, 1.0, &ohmic(1.0)).unwrap();
        assert_eq!(u.shared_regime(), Some(Regime::WeakCoupling));
        assert!((u.spins[1].collective - 0.675).abs() < 1e-15);
    }

    fn any_bath() -> impl Strategy<Value = BathContext> {
        (prop_oneof![Just(1.0), Just(0.0), Just(-1.0), Just(2.0)], 0.05f64..20.0).prop_map(|(k, beta)| {
            BathContext::natural(beta, SpectralDensity::new(1e-3, k).unwrap()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn rates_are_non_negative(c in -20.0f64..20.0, omega in 0.1f64..3.0, bath in any_bath()) {
            let r = xi(c, omega, &bath).unwrap();
            prop_assert!(r.xi >= 0.0);
        }

        #[test]
        fn regime_ordering_at_fixed_gaps(gm in 0.01f64..10.0, gp in 0.01f64..10.0, bath in any_bath()) {
            // same gap frequencies, different occupation bookkeeping
            let g_m = bath.spectral.rate(gm);
            let g_p = bath.spectral.rate(gp);
            let n_m = bath.occupation(gm).unwrap();
            let n_p = bath.occupation(gp).unwrap();
            let fm = g_m * n_m + g_p * n_p;
            let weak = g_m * (n_m + 1.0) + g_p * n_p;
            let af = g_m * (n_m + 1.0) + g_p * (n_p + 1.0);
            prop_assert!(fm <= weak && weak <= af);
        }

        #[test]
        fn ferromagnet_cools_monotonically(c in 1.5f64..10.0, b1 in 0.1f64..10.0, db in 0.01f64..5.0) {
            let s = SpectralDensity::ohmic(1e-3).unwrap();
            let lo = xi(c, 1.0, &BathContext::natural(b1, s).unwrap()).unwrap().xi;
            let hi = xi(c, 1.0, &BathContext::natural(b1 + db, s).unwrap()).unwrap().xi;
            prop_assert!(hi < lo);
        }
    }

    #[test]
    fn ferromagnet_log_slope_tends_to_lower_gap() {
        let s = SpectralDensity::ohmic(1e-3).unwrap();
        let at = |b: f64| xi(5.0, 1.0, &BathContext::natural(b, s).unwrap()).unwrap().xi.ln();
        let slope = (at(30.0) - at(29.0)) / 1.0;
        assert_relative_eq!(slope, -4.0, max_relative = 1e-6);
    }

    #[test]
    fn zero_temperature_limits() {
        let bath = ohmic(f64::INFINITY);
        let weak = xi(0.3, 1.0, &bath).unwrap();
        assert_relative_eq!(weak.xi, weak.gamma_minus, max_relative = 1e-15);
        let af = xi(-4.0, 1.0, &bath).unwrap();
        assert_relative_eq!(af.xi, af.gamma_minus + af.gamma_plus, max_relative = 1e-15);
    }
}
