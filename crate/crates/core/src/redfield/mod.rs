//! Dense Born–Markov oracle for clusters of up to four spins.
//!
//! Basis states are indexed by bit patterns: bit i set means spin i is down.
//! Index 0 is all-up and `dim − 1` is all-down. Energies are angular
//! frequencies (ħ = 1 inside this module in either unit system).

mod generator;
mod integrate;
mod report;

pub use generator::{build_generator, GeneratorOptions, RedfieldGenerator};
pub use integrate::{evolve, Frame, StepControl, Trajectory};
pub use report::{default_time_grid, oracle_report, GeneratorFit, OracleReport, OracleRow};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::geometry::ClusterGeometry;

pub const MAX_ORACLE_SIZE: usize = 4;

pub(crate) fn check_size(size: usize) -> Result<()> {
    if size == 0 {
        return Err(invalid("cluster must contain at least one spin"));
    }
    if size > MAX_ORACLE_SIZE {
        return Err(Error::SizeCapExceeded { size, cap: MAX_ORACLE_SIZE });
    }
    Ok(())
}

/// Diagonal spin Hamiltonian (ω/2)Σσᶻ − (1/4)Σ_{i≠j} J_ij σᶻσᶻ.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinHamiltonian {
    size: usize,
    omega: f64,
    energies: Vec<f64>,
}

impl SpinHamiltonian {
    pub fn new(geom: &ClusterGeometry, omega: f64) -> Result<Self> {
        check_size(geom.size())?;
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(invalid(format!("spin frequency must be > 0, got {omega}")));
        }
        let n = geom.size();
        let j = geom.coupling_matrix();
        let energies = (0..1usize << n)
            .map(|index| {
                let s: Vec<f64> = (0..n).map(|i| if index >> i & 1 == 0 { 1.0 } else { -1.0 }).collect();
                let zeeman: f64 = s.iter().sum::<f64>() * omega / 2.0;
                let mut ising = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        if a != b {
                            ising += j[(a, b)] * s[a] * s[b];
                        }
                    }
                }
                zeeman - ising / 4.0
            })
            .collect();
        Ok(Self { size: n, omega, energies })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Bohr frequency E_a − E_b.
    pub fn bohr(&self, a: usize, b: usize) -> f64 {
        self.energies[a] - self.energies[b]
    }

    pub fn all_up(&self) -> usize {
        0
    }

    pub fn all_down(&self) -> usize {
        self.dim() - 1
    }

    pub fn matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_diagonal(&self.energies.iter().map(|&e| Complex64::new(e, 0.0)).collect::<Vec<_>>().into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateTolerance {
    pub trace: f64,
    pub hermiticity: f64,
    /// Most negative eigenvalue allowed.
    pub positivity: f64,
}

impl Default for StateTolerance {
    fn default() -> Self {
        Self { trace: 1e-10, hermiticity: 1e-10, positivity: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(matrix)?;
        rho.check(&StateTolerance::default())?;
        Ok(rho)
    }

    /// Wraps a square matrix without checking the state invariants.
    pub fn from_matrix_unchecked(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() || !matrix.nrows().is_power_of_two() {
            return Err(invalid(format!(
                "density matrix must be square with power-of-two size, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(size: usize) -> Result<Self> {
        check_size(size)?;
        let dim = 1usize << size;
        Ok(Self { matrix: DMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0) })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn size(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let hermitian = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        hermitian.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn element(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn population(&self, index: usize) -> f64 {
        self.matrix[(index, index)].re
    }

    pub fn check(&self, tol: &StateTolerance) -> Result<()> {
        let trace = self.trace();
        if (trace - Complex64::new(1.0, 0.0)).norm() > tol.trace {
            return Err(Error::StateCorrupted(format!("trace {trace} differs from 1")));
        }
        let herm = self.hermiticity_error();
        if herm > tol.hermiticity {
            return Err(Error::StateCorrupted(format!("hermiticity error {herm:e}")));
        }
        let min = self.min_eigenvalue();
        if min < -tol.positivity {
            return Err(Error::StateCorrupted(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }
}

/// Projector onto (|↑…↑⟩ + |↓…↓⟩)/√2.
pub fn ghz_state(size: usize) -> Result<DensityMatrix> {
    check_size(size)?;
    let dim = 1usize << size;
    let mut m = DMatrix::zeros(dim, dim);
    for a in [0, dim - 1] {
        for b in [0, dim - 1] {
            m[(a, b)] = Complex64::new(0.5, 0.0);
        }
    }
    Ok(DensityMatrix { matrix: m })
}

/// Λ = (σ⁻)^{⊗𝒩} with σ⁻ = |↓⟩⟨↑|.
pub fn lambda_operator(size: usize) -> Result<DMatrix<Complex64>> {
    check_size(size)?;
    let lowering = DMatrix::from_row_slice(
        2,
        2,
        &[Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
    );
    let mut out = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for _ in 0..size {
        out = lowering.kronecker(&out);
    }
    Ok(out)
}

/// ⟨Λ⟩ = Tr(ρΛ) = ⟨↑…↑|ρ|↓…↓⟩.
pub fn lambda_expectation(rho: &DensityMatrix) -> Complex64 {
    rho.matrix[(0, rho.dim() - 1)]
}

/// Tr(ρΠ₀) with Π₀ = 1/2 + (Λe^{−iφ} + Λ†e^{iφ})/2.
pub fn measure_povm(rho: &DensityMatrix, phi: f64) -> Result<f64> {
    let p = 0.5 + (Complex64::from_polar(1.0, -phi) * lambda_expectation(rho)).re;
    if !(-1e-9..=1.0 + 1e-9).contains(&p) {
        return Err(Error::StateCorrupted(format!("readout probability {p} outside [0, 1]")));
    }
    Ok(p.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ghz_structure() {
        for n in 1..=4 {
            let rho = ghz_state(n).unwrap();
            let nonzero = rho.matrix().iter().filter(|z| z.norm() > 0.0).count();
            assert_eq!(nonzero, 4);
            assert!(rho.matrix().iter().all(|z| z.norm() == 0.0 || z.norm() == 0.5));
            assert_relative_eq!(rho.purity(), 1.0, epsilon = 1e-15);
            rho.check(&StateTolerance::default()).unwrap();
        }
        assert!(ghz_state(1).unwrap().matrix().iter().all(|z| z.re == 0.5));
        assert!(matches!(ghz_state(5), Err(Error::SizeCapExceeded { size: 5, cap: 4 })));
    }

    #[test]
    fn hamiltonian_gaps_match_collective_couplings() {
        let geom = ClusterGeometry::new(
            4,
            crate::geometry::RangeExponent::Finite(2.0),
            0.7,
            crate::geometry::DistanceConvention::Linear,
        )
        .unwrap();
        let omega = 1.3;
        let h = SpinHamiltonian::new(&geom, omega).unwrap();
        for i in 0..4 {
            let collective = geom.collective_coupling(i).unwrap();
            let up = h.all_up();
            let down = h.all_down();
            assert_relative_eq!(h.bohr(up ^ (1 << i), up), collective - omega, epsilon = 1e-12);
            assert_relative_eq!(h.bohr(down ^ (1 << i), down), collective + omega, epsilon = 1e-12);
        }
        assert_relative_eq!(h.bohr(0, h.all_down()), 4.0 * omega, epsilon = 1e-12);
    }

    #[test]
    fn lambda_operator_selects_the_ghz_coherence() {
        for n in 1..=3 {
            let l = lambda_operator(n).unwrap();
            let dim = 1 << n;
            assert_eq!(l[(dim - 1, 0)], Complex64::new(1.0, 0.0));
            assert_eq!(l.iter().filter(|z| z.norm() > 0.0).count(), 1);
            let rho = ghz_state(n).unwrap();
            assert_eq!((rho.matrix() * &l).trace(), lambda_expectation(&rho));
        }
    }

    #[test]
    fn povm_examples() {
        assert_relative_eq!(measure_povm(&ghz_state(3).unwrap(), 0.0).unwrap(), 1.0);
        for phi in [0.0, 0.4, 2.0] {
            assert_relative_eq!(measure_povm(&DensityMatrix::maximally_mixed(2).unwrap(), phi).unwrap(), 0.5);
        }
    }

    #[test]
    fn detects_corruption() {
        let mut m = ghz_state(2).unwrap().into_matrix();
        m[(1, 1)] = Complex64::new(-0.1, 0.0);
        m[(0, 0)] = Complex64::new(0.6, 0.0);
        assert!(DensityMatrix::new(m.clone()).is_err());
        m[(0, 3)] = Complex64::new(2.0, 0.0);
        let rho = DensityMatrix::from_matrix_unchecked(m).unwrap();
        assert!(measure_povm(&rho, 0.0).is_err());
    }
}
