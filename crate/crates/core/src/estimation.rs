//! Measurement statistics of the GHZ Ramsey scheme.
//!
//! After a sensing time t the binary readout gives outcome 0 with
//!
//! ```text
//! p = 1/2 + 1/2 cos(𝒩ωt + φ) e^{−𝒩Γt/2}
//! ```
//!
//! and at the bias point φ = π/2 − 𝒩ω₀t the Fisher information is
//! F = 𝒩²t² e^{−𝒩Γt}. With M clusters and repetitions filling the total time,
//! the sensitivity is S = MF/t = N𝒩t e^{−𝒩Γt}, maximal at t_opt = 1/(𝒩Γ)
//! where S = N/(eΓ).
//!
//! Under a CPMG pulse train the probe senses an oscillating signal instead of
//! a static detuning. Averaged over the pulse sequence the closed form keeps
//! its shape with the detuning scaled by 2/π, so F and S pick up (2/π)².

use std::f64::consts::{E, FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::bath::BathContext;
use crate::error::{invalid, Error, Result};
use crate::geometry::ClusterGeometry;
use crate::rates::{average_rate, average_rate_uniform, RateBundle, Regime};

/// Sensitivity penalty of sensing an oscillating signal under CPMG.
pub const CPMG_FACTOR: f64 = 4.0 / (PI * PI);

/// Heuristic lower bound on ħβ(𝒥 − ω) for the high-β approximation.
pub const HIGH_BETA_VALIDITY: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    /// Total number of probe spins N.
    pub total: usize,
    /// Number of independent clusters M.
    pub clusters: usize,
    /// Known reference frequency ω₀.
    pub omega0: f64,
    /// Deviation Δω, so that ω = ω₀ + Δω.
    pub deviation: f64,
}

impl ProbeSpec {
    pub fn new(total: usize, clusters: usize, omega0: f64) -> Result<Self> {
        let p = Self { total, clusters, omega0, deviation: 0.0 };
        p.validate()?;
        Ok(p)
    }

    /// A single cluster holding every spin.
    pub fn single_cluster(size: usize, omega0: f64) -> Result<Self> {
        Self::new(size, 1, omega0)
    }

    pub fn with_deviation(mut self, deviation: f64) -> Result<Self> {
        self.deviation = deviation;
        self.validate()?;
        Ok(self)
    }

    pub fn omega(&self) -> f64 {
        self.omega0 + self.deviation
    }

    pub fn cluster_size(&self) -> usize {
        self.total / self.clusters
    }

    fn validate(&self) -> Result<()> {
        if self.total == 0 || self.clusters == 0 {
            return Err(invalid("spin and cluster counts must be positive"));
        }
        if !self.total.is_multiple_of(self.clusters) {
            return Err(invalid(format!(
                "{} spins cannot be split into {} identical clusters",
                self.total, self.clusters
            )));
        }
        if !(self.omega0 > 0.0 && self.omega0.is_finite()) {
            return Err(invalid(format!("reference frequency must be > 0, got {}", self.omega0)));
        }
        if !(self.omega() > 0.0) || !self.deviation.is_finite() {
            return Err(invalid(format!("spin frequency ω₀ + Δω must be > 0, got {}", self.omega())));
        }
        Ok(())
    }
}

/// How collective couplings are assigned to the spins of a cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum CouplingProfile {
    /// Each spin uses its own row sum 𝒥ᵢ.
    #[default]
    PerSpin,
    /// Every spin uses the chain's uniform collective coupling.
    Uniform,
}

impl CouplingProfile {
    pub fn rates(self, geom: &ClusterGeometry, omega: f64, bath: &BathContext) -> Result<RateBundle> {
        match self {
            CouplingProfile::PerSpin => average_rate(geom, omega, bath),
            CouplingProfile::Uniform => average_rate_uniform(geom, omega, bath),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingRun {
    pub probe: ProbeSpec,
    pub geom: ClusterGeometry,
    pub bath: BathContext,
    /// Sensing time t ≥ 0.
    pub time: f64,
    /// Bias phase φ; `None` selects π/2 − 𝒩ω₀t.
    pub bias: Option<f64>,
    pub cpmg: bool,
    pub profile: CouplingProfile,
}

impl SensingRun {
    pub fn new(probe: ProbeSpec, geom: ClusterGeometry, bath: BathContext) -> Result<Self> {
        if probe.cluster_size() != geom.size() {
            return Err(invalid(format!(
                "cluster geometry has {} spins but N/M = {}/{} = {}",
                geom.size(),
                probe.total,
                probe.clusters,
                probe.cluster_size()
            )));
        }
        Ok(Self {
            probe,
            geom,
            bath,
            time: 0.0,
            bias: None,
            cpmg: false,
            profile: CouplingProfile::PerSpin,
        })
    }

    pub fn at_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn with_bias(mut self, bias: f64) -> Self {
        self.bias = Some(bias);
        self
    }

    pub fn with_cpmg(mut self, cpmg: bool) -> Self {
        self.cpmg = cpmg;
        self
    }

    pub fn with_profile(mut self, profile: CouplingProfile) -> Self {
        self.profile = profile;
        self
    }

    pub fn cluster_size(&self) -> usize {
        self.geom.size()
    }

    pub fn bias_phase(&self) -> f64 {
        self.bias
            .unwrap_or(FRAC_PI_2 - self.cluster_size() as f64 * self.probe.omega0 * self.time)
    }

    pub fn rates(&self) -> Result<RateBundle> {
        self.rates_at(self.probe.omega())
    }

    fn rates_at(&self, omega: f64) -> Result<RateBundle> {
        self.profile.rates(&self.geom, omega, &self.bath)
    }

    fn signal_factor(&self) -> f64 {
        if self.cpmg {
            CPMG_FACTOR
        } else {
            1.0
        }
    }

    fn validate_time(&self) -> Result<()> {
        if !(self.time >= 0.0 && self.time.is_finite()) {
            return Err(invalid(format!("sensing time must be finite and >= 0, got {}", self.time)));
        }
        Ok(())
    }
}

fn decay_envelope(cluster: f64, gamma: f64, time: f64) -> f64 {
    if time == 0.0 {
        1.0
    } else {
        (-cluster * gamma * time / 2.0).exp()
    }
}

/// Accumulated Ramsey phase 𝒩ωt + φ, with the CPMG-averaged detuning.
fn fringe_phase(run: &SensingRun, omega: f64) -> f64 {
    let cluster = run.cluster_size() as f64;
    let detuning = omega - run.probe.omega0;
    let detuning = if run.cpmg { detuning * 2.0 / PI } else { detuning };
    match run.bias {
        // 𝒩ω₀t cancels against the default bias
        None => FRAC_PI_2 + cluster * detuning * run.time,
        Some(bias) => cluster * (run.probe.omega0 + detuning) * run.time + bias,
    }
}

fn probability_with(run: &SensingRun, omega: f64, gamma: f64) -> f64 {
    let cluster = run.cluster_size() as f64;
    0.5 + 0.5 * fringe_phase(run, omega).cos() * decay_envelope(cluster, gamma, run.time)
}

/// Probability of readout outcome 0 after the run's sensing time.
pub fn probability(run: &SensingRun) -> Result<f64> {
    run.validate_time()?;
    let bundle = run.rates()?;
    Ok(probability_with(run, run.probe.omega(), bundle.gamma))
}

/// Fisher information (∂p/∂ω)²/(p(1 − p)) of the binary readout.
///
/// Γ is treated as independent of ω, which is exact at the default bias
/// point where cos(𝒩ωt + φ) = 0; there this equals 𝒩²t²e^{−𝒩Γt}
/// (times (2/π)² under CPMG).
pub fn fisher(run: &SensingRun) -> Result<f64> {
    run.validate_time()?;
    let bundle = run.rates()?;
    fisher_with(run, bundle.gamma)
}

fn fisher_with(run: &SensingRun, gamma: f64) -> Result<f64> {
    let omega = run.probe.omega();
    let cluster = run.cluster_size() as f64;
    let p = probability_with(run, omega, gamma);
    let spread = p * (1.0 - p);
    if spread <= 0.0 {
        return Err(Error::Uninformative { p });
    }
    let envelope = decay_envelope(cluster, gamma, run.time);
    let slope = if run.cpmg { 2.0 / PI } else { 1.0 };
    let dp = -0.5 * fringe_phase(run, omega).sin() * cluster * run.time * slope * envelope;
    Ok(dp * dp / spread)
}

/// 𝒩²t²e^{−𝒩Γt}, scaled by (2/π)² under CPMG.
pub fn fisher_closed_form(cluster: usize, gamma: f64, time: f64, cpmg: bool) -> f64 {
    let n = cluster as f64;
    let factor = if cpmg { CPMG_FACTOR } else { 1.0 };
    if time == 0.0 {
        return 0.0;
    }
    factor * n * n * time * time * (-n * gamma * time).exp()
}

/// Fisher information from central finite differences of the probability
/// over ω, with Γ recomputed at the displaced frequencies.
pub fn fisher_finite_difference(run: &SensingRun, step: f64) -> Result<f64> {
    run.validate_time()?;
    if !(step > 0.0) {
        return Err(invalid("finite-difference step must be > 0"));
    }
    let omega = run.probe.omega();
    let centre = probability_with(run, omega, run.rates_at(omega)?.gamma);
    let plus = probability_with(run, omega + step, run.rates_at(omega + step)?.gamma);
    let minus = probability_with(run, omega - step, run.rates_at(omega - step)?.gamma);
    let spread = centre * (1.0 - centre);
    if spread <= 0.0 {
        return Err(Error::Uninformative { p: centre });
    }
    let dp = (plus - minus) / (2.0 * step);
    Ok(dp * dp / spread)
}

/// Optimum of S(t) over the sensing time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Optimum {
    Finite { s_max: f64, t_opt: f64 },
    /// Γ = 0: S grows without bound, t_opt = ∞.
    Unbounded,
    /// Γ diverges at a sub-Ohmic boundary: S_max = 0.
    Diverged,
}

impl Optimum {
    /// S_max as a float (`∞` when unbounded, 0 when diverged).
    pub fn s_max(&self) -> f64 {
        match *self {
            Optimum::Finite { s_max, .. } => s_max,
            Optimum::Unbounded => f64::INFINITY,
            Optimum::Diverged => 0.0,
        }
    }

    pub fn t_opt(&self) -> f64 {
        match *self {
            Optimum::Finite { t_opt, .. } => t_opt,
            Optimum::Unbounded => f64::INFINITY,
            Optimum::Diverged => 0.0,
        }
    }
}

fn optimum_from(run: &SensingRun, gamma: f64) -> Optimum {
    let factor = run.signal_factor();
    if gamma == f64::INFINITY {
        Optimum::Diverged
    } else if gamma == 0.0 {
        Optimum::Unbounded
    } else {
        Optimum::Finite {
            s_max: factor * run.probe.total as f64 / (E * gamma),
            t_opt: 1.0 / (run.cluster_size() as f64 * gamma),
        }
    }
}

/// max_t S = N/(eΓ) at t_opt = 1/(𝒩Γ). The sensing time of `run` is ignored.
pub fn optimize(run: &SensingRun) -> Result<Optimum> {
    let bundle = run.rates()?;
    Ok(optimum_from(run, bundle.gamma))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HighBetaApprox {
    /// Approximate S_max; `∞` at zero temperature.
    pub s_max: f64,
    /// ħβ(𝒥 − ω) exceeds [`HIGH_BETA_VALIDITY`] for every spin.
    pub valid: bool,
}

/// Low-temperature approximation of S_max in the strong ferromagnetic regime,
/// replacing n̄± by e^{−ħβ|𝒥 ± ω|}.
pub fn high_beta_approx(run: &SensingRun) -> Result<HighBetaApprox> {
    let bundle = run.rates()?;
    high_beta_from(run, &bundle)
}

fn high_beta_from(run: &SensingRun, bundle: &RateBundle) -> Result<HighBetaApprox> {
    if let Some(bad) = bundle.spins.iter().find(|s| s.regime != Regime::StrongFerromagnetic) {
        return Err(Error::WrongRegime {
            expected: "strong_fm",
            found: bad.regime.label().to_string(),
        });
    }
    let omega = run.probe.omega();
    let hbar_beta = run.bath.thermal.value();
    let mut gamma = 0.0;
    let mut valid = true;
    for s in &bundle.spins {
        let lower = (s.collective - omega).abs();
        let upper = (s.collective + omega).abs();
        gamma += s.gamma_minus * (-hbar_beta * lower).exp() + s.gamma_plus * (-hbar_beta * upper).exp();
        valid &= hbar_beta * lower > HIGH_BETA_VALIDITY;
    }
    gamma /= bundle.size() as f64;
    let s_max = if gamma == 0.0 {
        f64::INFINITY
    } else {
        run.signal_factor() * run.probe.total as f64 / (E * gamma)
    };
    Ok(HighBetaApprox { s_max, valid })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityResult {
    pub p: f64,
    pub fisher: f64,
    /// S = M·F/t.
    pub sensitivity: f64,
    pub gamma: f64,
    pub optimum: Optimum,
    /// Shared regime of the cluster, `None` when mixed.
    pub regime: Option<Regime>,
    /// Present only in the strong ferromagnetic regime.
    pub approx_high_beta: Option<HighBetaApprox>,
}

pub fn sensitivity(run: &SensingRun) -> Result<SensitivityResult> {
    run.validate_time()?;
    if run.time <= 0.0 {
        return Err(invalid("sensitivity needs a sensing time t > 0"));
    }
    let bundle = run.rates()?;
    let gamma = bundle.gamma;
    let p = probability_with(run, run.probe.omega(), gamma);
    let f = fisher_with(run, gamma)?;
    Ok(SensitivityResult {
        p,
        fisher: f,
        sensitivity: run.probe.clusters as f64 * f / run.time,
        gamma,
        optimum: optimum_from(run, gamma),
        regime: bundle.shared_regime(),
        approx_high_beta: high_beta_from(run, &bundle).ok(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpectralDensity;
    use approx::assert_relative_eq;

    fn pair_run(coupling: f64, beta: f64) -> SensingRun {
        let probe = ProbeSpec::single_cluster(2, 1.0).unwrap();
        let geom = ClusterGeometry::all_to_all(2, coupling).unwrap();
        let bath = BathContext::natural(beta, SpectralDensity::ohmic(1e-3).unwrap()).unwrap();
        SensingRun::new(probe, geom, bath).unwrap()
    }

    #[test]
    fn probe_validation() {
        assert!(ProbeSpec::new(6, 4, 1.0).is_err());
        assert!(ProbeSpec::new(6, 3, 0.0).is_err());
        assert!(ProbeSpec::new(6, 3, 1.0).unwrap().with_deviation(-2.0).is_err());
        let probe = ProbeSpec::new(6, 3, 1.0).unwrap();
        let geom = ClusterGeometry::all_to_all(3, 1.0).unwrap();
        let bath = BathContext::natural(1.0, SpectralDensity::ohmic(1e-3).unwrap()).unwrap();
        assert!(SensingRun::new(probe, geom, bath).is_err());
    }

    #[test]
    fn starts_at_half() {
        let run = pair_run(5.0, 1.0).with_bias(FRAC_PI_2);
        assert_eq!(probability(&run).unwrap(), 0.5);
    }

    #[test]
    fn default_bias_centres_the_fringe() {
        for t in [0.0, 0.3, 7.0, 120.0] {
            let run = pair_run(5.0, 1.0).at_time(t);
            assert!((probability(&run).unwrap() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn full_fringe_without_decay() {
        let mut run = pair_run(0.0, 1.0);
        run.bath.spectral = SpectralDensity::decoupled();
        run.probe = run.probe.with_deviation(0.1).unwrap();
        let t = PI / (2.0 * 2.0 * 0.1);
        let run = run.at_time(t);
        assert!(probability(&run).unwrap().abs() < 1e-12);
    }

    #[test]
    fn noiseless_fisher_grows_quadratically() {
        let mut run = pair_run(0.0, 1.0);
        run.bath.spectral = SpectralDensity::decoupled();
        for t in [0.5, 2.0, 10.0] {
            assert_relative_eq!(fisher(&run.at_time(t)).unwrap(), 4.0 * t * t, max_relative = 1e-12);
        }
    }

    #[test]
    fn fisher_at_optimum() {
        let run = pair_run(5.0, 1.0);
        let gamma = run.rates().unwrap().gamma;
        let t_opt = 1.0 / (2.0 * gamma);
        let f = fisher(&run.at_time(t_opt)).unwrap();
        assert_relative_eq!(f, t_opt * t_opt * 4.0 / E, max_relative = 1e-12);
    }

    #[test]
    fn finite_difference_fisher() {
        let run = pair_run(5.0, 1.0).at_time(0.3);
        let closed = fisher(&run).unwrap();
        let fd = fisher_finite_difference(&run, 1e-6).unwrap();
        assert!(((fd - closed) / closed).abs() < 1e-4, "{fd} vs {closed}");
        let gamma = run.rates().unwrap().gamma;
        assert_relative_eq!(closed, fisher_closed_form(2, gamma, 0.3, false), max_relative = 1e-12);
    }

    #[test]
    fn uninformative_bias() {
        let mut run = pair_run(0.0, 1.0);
        run.bath.spectral = SpectralDensity::decoupled();
        // cos(𝒩ωt + φ) = 1 at t = 1 with φ = −2
        let run = run.at_time(1.0).with_bias(-2.0);
        assert!(matches!(fisher(&run), Err(Error::Uninformative { .. })));
    }

    #[test]
    fn heisenberg_and_standard_limits() {
        let bath = BathContext::natural(1.0, SpectralDensity::decoupled()).unwrap();
        let t = 3.0;
        let heisenberg = SensingRun::new(
            ProbeSpec::single_cluster(4, 1.0).unwrap(),
            ClusterGeometry::all_to_all(4, 0.0).unwrap(),
            bath,
        )
        .unwrap()
        .at_time(t);
        assert_relative_eq!(sensitivity(&heisenberg).unwrap().sensitivity, 16.0 * t, max_relative = 1e-12);
        let standard = SensingRun::new(
            ProbeSpec::new(4, 4, 1.0).unwrap(),
            ClusterGeometry::all_to_all(1, 0.0).unwrap(),
            bath,
        )
        .unwrap()
        .at_time(t);
        assert_relative_eq!(sensitivity(&standard).unwrap().sensitivity, 4.0 * t, max_relative = 1e-12);
        assert_eq!(optimize(&standard).unwrap(), Optimum::Unbounded);
    }

    #[test]
    fn single_spin_ramsey_decay() {
        let bath = BathContext::natural(1.0, SpectralDensity::ohmic(1e-3).unwrap()).unwrap();
        let run = SensingRun::new(
            ProbeSpec::new(3, 3, 1.0).unwrap(),
            ClusterGeometry::all_to_all(1, 0.0).unwrap(),
            bath,
        )
        .unwrap()
        .at_time(40.0);
        let n = 1.0 / (1f64.exp() - 1.0);
        let gamma = 2.0 * PI * 1e-3 * (2.0 * n + 1.0);
        let s = sensitivity(&run).unwrap();
        assert_relative_eq!(s.gamma, gamma, max_relative = 1e-14);
        assert_relative_eq!(s.sensitivity, 3.0 * 40.0 * (-gamma * 40.0).exp(), max_relative = 1e-12);
    }

    #[test]
    fn rejects_non_positive_time() {
        let run = pair_run(5.0, 1.0);
        assert!(sensitivity(&run).is_err());
        assert!(sensitivity(&run.at_time(-1.0)).is_err());
    }

    #[test]
    fn cpmg_scales_by_two_over_pi_squared() {
        let plain = pair_run(5.0, 1.0).at_time(50.0);
        let echo = plain.with_cpmg(true);
        let a = sensitivity(&plain).unwrap();
        let b = sensitivity(&echo).unwrap();
        assert_relative_eq!(b.sensitivity / a.sensitivity, CPMG_FACTOR, max_relative = 1e-12);
        assert_relative_eq!(b.optimum.s_max() / a.optimum.s_max(), CPMG_FACTOR, max_relative = 1e-14);
        let fd = fisher_finite_difference(&echo, 1e-6).unwrap();
        assert!(((fd - b.fisher) / b.fisher).abs() < 1e-4);
    }

    #[test]
    fn optimum_is_the_peak() {
        let run = pair_run(5.0, 1.0);
        let Optimum::Finite { s_max, t_opt } = optimize(&run).unwrap() else { panic!() };
        let at = |t: f64| sensitivity(&run.at_time(t)).unwrap().sensitivity;
        assert_relative_eq!(at(t_opt), s_max, max_relative = 1e-12);
        assert!(at(t_opt) >= at(t_opt * (1.0 + 1e-3)));
        assert!(at(t_opt) >= at(t_opt * (1.0 - 1e-3)));
    }

    #[test]
    fn zero_temperature_weak_coupling_saturates() {
        let run = pair_run(0.0, f64::INFINITY);
        let s = optimize(&run).unwrap().s_max();
        assert_relative_eq!(s, 2.0 / (E * 2.0 * PI * 1e-3), max_relative = 1e-14);
    }

    #[test]
    fn high_beta_needs_ferromagnet() {
        assert!(matches!(high_beta_approx(&pair_run(0.0, 5.0)), Err(Error::WrongRegime { .. })));
        let approx = high_beta_approx(&pair_run(5.0, 5.0)).unwrap();
        assert!(approx.valid);
        let exact = optimize(&pair_run(5.0, 5.0)).unwrap().s_max();
        assert!((exact / approx.s_max - 1.0).abs() < 0.02);
        assert!(!high_beta_approx(&pair_run(1.5, 1.0)).unwrap().valid);
        assert_eq!(high_beta_approx(&pair_run(5.0, f64::INFINITY)).unwrap().s_max, f64::INFINITY);
    }

    #[test]
    fn diverged_boundary_has_zero_sensitivity() {
        let mut run = pair_run(1.0, 1.0);
        run.bath.spectral = SpectralDensity::white(1e-3).unwrap();
        assert_eq!(optimize(&run).unwrap(), Optimum::Diverged);
        let r = sensitivity(&run.at_time(1.0)).unwrap();
        assert_eq!(r.regime, Some(Regime::Boundary));
        assert_eq!(r.sensitivity, 0.0);
    }
}
