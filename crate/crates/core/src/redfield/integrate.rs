use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{DensityMatrix, RedfieldGenerator, StateTolerance};
use crate::error::{invalid, Error, Result};

/// Picture in which the ODE is integrated. Results are always returned in
/// the lab frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Frame {
    Lab,
    /// Interaction picture with respect to the spin Hamiltonian.
    #[default]
    Rotating,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: Option<f64>,
    /// Smallest step allowed, relative to max(|t|, 1).
    pub min_step: f64,
    pub max_steps: usize,
    pub frame: Frame,
    pub state_tolerance: StateTolerance,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-9,
            initial_step: None,
            min_step: 1e-13,
            max_steps: 20_000_000,
            frame: Frame::Rotating,
            state_tolerance: StateTolerance::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Smallest eigenvalue seen at any output time.
    pub min_eigenvalue: f64,
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct System<'a> {
    gen: &'a RedfieldGenerator,
    frame: Frame,
    freqs: Vec<f64>,
    scratch: DVector<Complex64>,
}

impl System<'_> {
    fn rhs(&mut self, t: f64, y: &DVector<Complex64>, out: &mut DVector<Complex64>) {
        match self.frame {
            Frame::Lab => {
                self.gen.apply_dissipator(y, out);
                for (r, o) in out.iter_mut().enumerate() {
                    *o += Complex64::new(0.0, -self.freqs[r]) * y[r];
                }
            }
            Frame::Rotating => {
                for (r, s) in self.scratch.iter_mut().enumerate() {
                    *s = y[r] * Complex64::from_polar(1.0, -self.freqs[r] * t);
                }
                self.gen.apply_dissipator(&self.scratch, out);
                for (r, o) in out.iter_mut().enumerate() {
                    *o *= Complex64::from_polar(1.0, self.freqs[r] * t);
                }
            }
        }
    }

    fn to_lab(&self, t: f64, y: &DVector<Complex64>) -> DVector<Complex64> {
        match self.frame {
            Frame::Lab => y.clone(),
            Frame::Rotating => DVector::from_fn(y.len(), |r, _| y[r] * Complex64::from_polar(1.0, -self.freqs[r] * t)),
        }
    }
}

/// Integrates dρ/dt = 𝓛ρ with adaptive Dormand–Prince steps, landing exactly
/// on every requested output time. Output times must be non-decreasing and
/// non-negative; integration starts at t = 0 from `rho0`.
pub fn evolve(
    rho0: &DensityMatrix,
    gen: &RedfieldGenerator,
    times: &[f64],
    control: &StepControl,
) -> Result<Trajectory> {
    let dim = gen.dim();
    if rho0.dim() != dim {
        return Err(invalid(format!("state dimension {} does not match generator {}", rho0.dim(), dim)));
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("output times must be finite, non-negative and non-decreasing"));
    }
    let big = dim * dim;
    let mut sys = System {
        gen,
        frame: control.frame,
        freqs: (0..big).map(|r| gen.frequency(r)).collect(),
        scratch: DVector::zeros(big),
    };
    let scale_rate = match control.frame {
        Frame::Lab => sys.freqs.iter().fold(0.0, |m: f64, f| m.max(f.abs())),
        Frame::Rotating => 0.0,
    } + gen.max_decay_rate();

    let mut y = DVector::from_column_slice(rho0.matrix().as_slice());
    let mut t = 0.0;
    let mut h = control
        .initial_step
        .unwrap_or(if scale_rate > 0.0 { 0.05 / scale_rate } else { times.last().copied().unwrap_or(1.0).max(1e-12) });
    let mut k: Vec<DVector<Complex64>> = (0..7).map(|_| DVector::zeros(big)).collect();
    let mut stage = DVector::zeros(big);
    let mut fsal_valid = false;
    let mut accepted = 0;
    let mut rejected = 0;
    let mut out_times = Vec::with_capacity(times.len());
    let mut states = Vec::with_capacity(times.len());
    let mut min_eig = f64::INFINITY;

    for &target in times {
        while t < target {
            if accepted + rejected >= control.max_steps {
                return Err(Error::Integration { t, reason: format!("exceeded {} steps", control.max_steps) });
            }
            let remaining = target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            if !fsal_valid {
                let (k0, _) = k.split_at_mut(1);
                sys.rhs(t, &y, &mut k0[0]);
                fsal_valid = true;
            }
            for s in 1..7 {
                stage.copy_from(&y);
                for (j, kj) in k.iter().enumerate().take(s) {
                    if A[s][j] != 0.0 {
                        stage.axpy(Complex64::new(step * A[s][j], 0.0), kj, Complex64::new(1.0, 0.0));
                    }
                }
                let (_, rest) = k.split_at_mut(s);
                sys.rhs(t + C[s] * step, &stage, &mut rest[0]);
            }
            // stage now holds the 5th-order solution (row 7 of A equals the weights).
            let mut err: f64 = 0.0;
            for r in 0..big {
                let mut e = Complex64::new(0.0, 0.0);
                for (s, ks) in k.iter().enumerate() {
                    if E[s] != 0.0 {
                        e += ks[r] * E[s];
                    }
                }
                let sc = control.atol + control.rtol * y[r].norm().max(stage[r].norm());
                err = err.max(step * e.norm() / sc);
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                std::mem::swap(&mut y, &mut stage);
                let (first, rest) = k.split_at_mut(6);
                std::mem::swap(&mut first[0], &mut rest[0]);
                accepted += 1;
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || factor < 1.0 {
                    h = step * factor;
                }
            } else {
                rejected += 1;
                h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                fsal_valid = true;
                if h < control.min_step * t.abs().max(1.0) {
                    return Err(Error::Integration { t, reason: format!("step size {h:e} below floor") });
                }
            }
        }
        let lab = sys.to_lab(t, &y);
        let rho = DensityMatrix::from_matrix_unchecked(DMatrix::from_column_slice(dim, dim, lab.as_slice()))?;
        rho.check(&control.state_tolerance).map_err(|e| match e {
            Error::StateCorrupted(msg) => Error::StateCorrupted(format!("at t = {t:e}: {msg}")),
            other => other,
        })?;
        min_eig = min_eig.min(rho.min_eigenvalue());
        out_times.push(target);
        states.push(rho);
    }
    Ok(Trajectory { times: out_times, states, accepted_steps: accepted, rejected_steps: rejected, min_eigenvalue: min_eig })
}

#[cfg(test)]
mod tests {
    use super::super::{build_generator, ghz_state, lambda_expectation, GeneratorOptions};
    use super::*;
    use crate::bath::BathContext;
    use crate::geometry::ClusterGeometry;
    use crate::spectral::SpectralDensity;

    #[test]
    fn zero_time_returns_initial_state() {
        let geom = ClusterGeometry::all_to_all(2, 5.0).unwrap();
        let bath = BathContext::natural(1.0, SpectralDensity::ohmic(1e-3).unwrap()).unwrap();
        let gen = build_generator(&geom, 1.0, &bath, GeneratorOptions::full()).unwrap();
        let rho = ghz_state(2).unwrap();
        let traj = evolve(&rho, &gen, &[0.0], &StepControl::default()).unwrap();
        assert_eq!(traj.states[0], rho);
    }

    #[test]
    fn closed_system_rotates_the_coherence() {
        let geom = ClusterGeometry::all_to_all(3, 0.4).unwrap();
        let bath = BathContext::natural(1.0, SpectralDensity::decoupled()).unwrap();
        let gen = build_generator(&geom, 1.2, &bath, GeneratorOptions::full()).unwrap();
        let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.37).collect();
        for frame in [Frame::Lab, Frame::Rotating] {
            let control = StepControl { frame, ..Default::default() };
            let traj = evolve(&ghz_state(3).unwrap(), &gen, &times, &control).unwrap();
            for (t, rho) in traj.times.iter().zip(&traj.states) {
                let expected = Complex64::from_polar(0.5, -3.0 * 1.2 * t);
                assert!((lambda_expectation(rho) - expected).norm() < 1e-8, "{frame:?} t={t}");
            }
        }
    }

    #[test]
    fn frames_agree_for_full_generator() {
        let geom = ClusterGeometry::all_to_all(2, 0.3).unwrap();
        let bath = BathContext::natural(2.0, SpectralDensity::ohmic(5e-3).unwrap()).unwrap();
        let gen = build_generator(&geom, 1.0, &bath, GeneratorOptions::full()).unwrap();
        let times = [0.5, 10.0, 40.0];
        let a = evolve(&ghz_state(2).unwrap(), &gen, &times, &StepControl { frame: Frame::Lab, ..Default::default() })
            .unwrap();
        let b = evolve(&ghz_state(2).unwrap(), &gen, &times, &StepControl::default()).unwrap();
        for (x, y) in a.states.iter().zip(&b.states) {
            let diff = (x.matrix() - y.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(diff < 1e-7, "{diff}");
        }
    }

    #[test]
    fn zero_temperature_relaxes_to_ground_state() {
        let geom = ClusterGeometry::all_to_all(2, 0.0).unwrap();
        let bath = BathContext::natural(f64::INFINITY, SpectralDensity::ohmic(1e-2).unwrap()).unwrap();
        let gen = build_generator(&geom, 1.0, &bath, GeneratorOptions::full()).unwrap();
        let gamma = 2.0 * std::f64::consts::PI * 1e-2;
        let traj = evolve(&ghz_state(2).unwrap(), &gen, &[30.0 / gamma], &StepControl::default()).unwrap();
        let rho = &traj.states[0];
        assert!((rho.population(3) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_times() {
        let geom = ClusterGeometry::all_to_all(1, 0.0).unwrap();
        let bath = BathContext::natural(1.0, SpectralDensity::decoupled()).unwrap();
        let gen = build_generator(&geom, 1.0, &bath, GeneratorOptions::full()).unwrap();
        let rho = ghz_state(1).unwrap();
        assert!(evolve(&rho, &gen, &[1.0, 0.5], &StepControl::default()).is_err());
        assert!(evolve(&rho, &gen, &[-1.0], &StepControl::default()).is_err());
        assert!(evolve(&ghz_state(2).unwrap(), &gen, &[1.0], &StepControl::default()).is_err());
    }
}
