use serde::Serialize;

use super::{
    build_generator, evolve, ghz_state, lambda_expectation, measure_povm, GeneratorOptions, StepControl,
};
use crate::error::{invalid, Result};
use crate::estimation::{probability, CouplingProfile, SensingRun};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub t: f64,
    /// |⟨Λ(t)⟩| from the master equation.
    pub lambda_abs: f64,
    /// (1/2)e^{−𝒩Γt/2}.
    pub lambda_closed: f64,
    pub p_oracle: f64,
    pub p_closed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorFit {
    pub secular: bool,
    /// Least-squares decay rate of log|⟨Λ⟩| over points with |⟨Λ⟩| > 10⁻³.
    pub fitted_rate: f64,
    /// 𝒩Γ/2.
    pub expected_rate: f64,
    /// Relative deviation, or absolute when the expected rate is zero.
    pub rate_error: f64,
    /// Fitted angular frequency of arg⟨Λ⟩ (magnitude).
    pub phase_rate: f64,
    /// 𝒩ω.
    pub expected_phase_rate: f64,
    pub phase_error: f64,
    pub max_p_error: f64,
    /// max |⟨Λ⟩| − closed form, absolute.
    pub max_lambda_error: f64,
    pub min_eigenvalue: f64,
    pub min_frequency_spacing: f64,
    pub max_decay_rate: f64,
    pub steps: usize,
    pub rows: Vec<OracleRow>,
}

impl GeneratorFit {
    /// Bohr frequencies separated by more than ten times the fastest decay.
    pub fn well_separated(&self) -> bool {
        self.min_frequency_spacing > 10.0 * self.max_decay_rate
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub size: usize,
    pub omega: f64,
    pub gamma: f64,
    pub t_opt: f64,
    pub secular: GeneratorFit,
    pub full: GeneratorFit,
}

/// Evenly spaced output times over [0, 3t_opt], or [0, 10/ω₀] when Γ = 0.
pub fn default_time_grid(run: &SensingRun, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(invalid("time grid needs at least two points"));
    }
    let gamma = run.with_profile(CouplingProfile::PerSpin).rates()?.gamma;
    let horizon = if gamma > 0.0 {
        3.0 / (run.cluster_size() as f64 * gamma)
    } else {
        10.0 / run.probe.omega0
    };
    Ok((0..points).map(|i| horizon * i as f64 / (points - 1) as f64).collect())
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn relative_or_absolute(value: f64, expected: f64) -> f64 {
    if expected == 0.0 {
        value.abs()
    } else {
        ((value - expected) / expected).abs()
    }
}

/// Integrates the GHZ state under the secular and the full Redfield generator
/// and compares the coherence and readout probability with the closed forms.
///
/// The run's sensing time is ignored; its bias (default or fixed) is applied
/// at every output time. Per-spin collective couplings are used throughout,
/// matching the master equation.
pub fn oracle_report(run: &SensingRun, times: &[f64], control: &StepControl) -> Result<OracleReport> {
    if run.cpmg {
        return Err(invalid("the master-equation oracle models static sensing only"));
    }
    let run = run.with_profile(CouplingProfile::PerSpin);
    let size = run.cluster_size();
    let omega = run.probe.omega();
    let gamma = run.rates()?.gamma;
    let expected_rate = size as f64 * gamma / 2.0;
    let expected_phase_rate = size as f64 * omega;
    let rho0 = ghz_state(size)?;

    let fit = |options: GeneratorOptions| -> Result<GeneratorFit> {
        let gen = build_generator(&run.geom, omega, &run.bath, options)?;
        // the full Redfield generator is not completely positive; its
        // eigenvalue floor is reported instead of enforced
        let control = if options.secular {
            *control
        } else {
            let mut c = *control;
            c.state_tolerance.positivity = f64::INFINITY;
            c
        };
        let traj = evolve(&rho0, &gen, times, &control)?;
        let mut rows = Vec::with_capacity(times.len());
        let mut fit_t = Vec::new();
        let mut fit_log = Vec::new();
        let mut fit_phase = Vec::new();
        let mut max_p: f64 = 0.0;
        let mut max_l: f64 = 0.0;
        for (&t, rho) in traj.times.iter().zip(&traj.states) {
            let timed = run.at_time(t);
            let lambda = lambda_expectation(rho);
            let p_oracle = measure_povm(rho, timed.bias_phase())?;
            let p_closed = probability(&timed)?;
            let lambda_closed = 0.5 * (-expected_rate * t).exp();
            if lambda.norm() > 1e-3 {
                fit_t.push(t);
                fit_log.push(lambda.norm().ln());
                // demodulated phase; the residual drift is small enough to unwrap
                fit_phase.push((lambda * num_complex::Complex64::from_polar(1.0, expected_phase_rate * t)).arg());
            }
            max_p = max_p.max((p_oracle - p_closed).abs());
            max_l = max_l.max((lambda.norm() - lambda_closed).abs());
            rows.push(OracleRow { t, lambda_abs: lambda.norm(), lambda_closed, p_oracle, p_closed });
        }
        if fit_t.len() < 2 {
            return Err(invalid("fewer than two usable points for the decay fit"));
        }
        for i in 1..fit_phase.len() {
            let mut d = fit_phase[i] - fit_phase[i - 1];
            while d > std::f64::consts::PI {
                d -= 2.0 * std::f64::consts::PI;
            }
            while d < -std::f64::consts::PI {
                d += 2.0 * std::f64::consts::PI;
            }
            fit_phase[i] = fit_phase[i - 1] + d;
        }
        let fitted_rate = -least_squares_slope(&fit_t, &fit_log);
        let phase_rate = expected_phase_rate - least_squares_slope(&fit_t, &fit_phase);
        Ok(GeneratorFit {
            secular: options.secular,
            fitted_rate,
            expected_rate,
            rate_error: relative_or_absolute(fitted_rate, expected_rate),
            phase_rate,
            expected_phase_rate,
            phase_error: relative_or_absolute(phase_rate, expected_phase_rate),
            max_p_error: max_p,
            max_lambda_error: max_l,
            min_eigenvalue: traj.min_eigenvalue,
            min_frequency_spacing: gen.min_frequency_spacing(),
            max_decay_rate: gen.max_decay_rate(),
            steps: traj.accepted_steps,
            rows,
        })
    };

    let secular = fit(GeneratorOptions::secular())?;
    let full = fit(GeneratorOptions::full())?;
    let t_opt = if gamma > 0.0 { 1.0 / (size as f64 * gamma) } else { f64::INFINITY };
    Ok(OracleReport { size, omega, gamma, t_opt, secular, full })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::BathContext;
    use crate::estimation::ProbeSpec;
    use crate::geometry::ClusterGeometry;
    use crate::spectral::SpectralDensity;

    fn run(size: usize, coupling: f64, beta: f64, spectral: SpectralDensity) -> SensingRun {
        SensingRun::new(
            ProbeSpec::single_cluster(size, 1.0).unwrap(),
            ClusterGeometry::all_to_all(size, coupling).unwrap(),
            BathContext::natural(beta, spectral).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn strong_ferromagnetic_pair() {
        let r = run(2, 5.0, 1.0, SpectralDensity::ohmic(1e-3).unwrap());
        let times = default_time_grid(&r, 61).unwrap();
        let rep = oracle_report(&r, &times, &StepControl::default()).unwrap();
        assert!(rep.secular.rate_error < 5e-3, "{}", rep.secular.rate_error);
        assert!(rep.secular.max_p_error < 1e-3);
        assert!(rep.secular.phase_error < 1e-3);
        assert!(rep.full.rate_error < 5e-2, "{}", rep.full.rate_error);
    }

    #[test]
    fn decoupled_pair_keeps_its_coherence() {
        let r = run(2, 0.0, 1.0, SpectralDensity::decoupled());
        let times = default_time_grid(&r, 21).unwrap();
        let rep = oracle_report(&r, &times, &StepControl::default()).unwrap();
        assert_eq!(rep.gamma, 0.0);
        for row in &rep.full.rows {
            assert!((row.lambda_abs - 0.5).abs() < 1e-9);
        }
        assert!(rep.full.rate_error < 1e-9);
    }

    #[test]
    fn zero_temperature_ferromagnet_is_protected() {
        let r = run(2, 5.0, f64::INFINITY, SpectralDensity::ohmic(1e-3).unwrap());
        let times: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        let rep = oracle_report(&r, &times, &StepControl::default()).unwrap();
        for row in rep.secular.rows.iter().chain(&rep.full.rows) {
            assert!(0.5 - row.lambda_abs < 1e-6);
        }
    }

    #[test]
    fn rejects_cpmg_and_large_clusters() {
        let r = run(2, 5.0, 1.0, SpectralDensity::ohmic(1e-3).unwrap());
        assert!(oracle_report(&r.with_cpmg(true), &[0.0, 1.0], &StepControl::default()).is_err());
        let big = run(5, 5.0, 1.0, SpectralDensity::ohmic(1e-3).unwrap());
        assert!(oracle_report(&big, &[0.0, 1.0], &StepControl::default()).is_err());
    }
}
