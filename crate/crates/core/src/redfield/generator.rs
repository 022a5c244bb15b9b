use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{DensityMatrix, SpinHamiltonian};
use crate::bath::BathContext;
use crate::error::Result;
use crate::geometry::ClusterGeometry;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorOptions {
    /// Drop terms coupling coherences with different Bohr frequencies.
    pub secular: bool,
    /// Bohr frequencies closer than this fraction of the spectral width count as equal.
    pub secular_tolerance: f64,
}

impl Default for GeneratorOptions {
    fn default() -> Self {
        Self { secular: true, secular_tolerance: 1e-9 }
    }
}

impl GeneratorOptions {
    pub fn secular() -> Self {
        Self::default()
    }

    pub fn full() -> Self {
        Self { secular: false, ..Self::default() }
    }
}

/// Redfield superoperator on column-major vec(ρ).
///
/// The dissipative part is stored separately from the Hamiltonian part so
/// that it can also be integrated in the frame rotating with the spins.
#[derive(Debug, Clone)]
pub struct RedfieldGenerator {
    hamiltonian: SpinHamiltonian,
    options: GeneratorOptions,
    dissipator: DMatrix<Complex64>,
    /// Row-sorted nonzero entries of `dissipator`.
    sparse: Vec<(usize, usize, Complex64)>,
}

/// One-sided bath spectrum at gap ν (real part only): π f(|ν|)(n̄+1) for ν > 0,
/// π f(|ν|) n̄ for ν < 0.
fn one_sided(bath: &BathContext, nu: f64) -> Result<f64> {
    Ok(bath.transition_rate(nu)? / 2.0)
}

pub fn build_generator(
    geom: &ClusterGeometry,
    omega: f64,
    bath: &BathContext,
    options: GeneratorOptions,
) -> Result<RedfieldGenerator> {
    let hamiltonian = SpinHamiltonian::new(geom, omega)?;
    let n = hamiltonian.size();
    let dim = hamiltonian.dim();
    let big = dim * dim;
    let c0 = Complex64::new(0.0, 0.0);

    // Λᵢ = ∫₀^∞ C(τ) σᵢˣ(−τ) dτ; σᵢˣ connects a and a ^ (1 << i).
    let mut lambdas = Vec::with_capacity(n);
    let mut k = DMatrix::<Complex64>::zeros(dim, dim);
    let mut sigmas = Vec::with_capacity(n);
    for i in 0..n {
        let bit = 1usize << i;
        let mut sigma = DMatrix::<Complex64>::zeros(dim, dim);
        let mut lambda = DMatrix::<Complex64>::zeros(dim, dim);
        for a in 0..dim {
            let b = a ^ bit;
            sigma[(a, b)] = Complex64::new(1.0, 0.0);
            let weight = one_sided(bath, hamiltonian.bohr(b, a))?;
            lambda[(a, b)] = Complex64::new(weight, 0.0);
        }
        k += &sigma * &lambda;
        lambdas.push(lambda);
        sigmas.push(sigma);
    }

    let scale = hamiltonian.energies().iter().fold(omega, |m, e| m.max(e.abs()));
    let tol = options.secular_tolerance * scale;
    let freq = |r: usize| hamiltonian.bohr(r % dim, r / dim);

    let mut dissipator = DMatrix::<Complex64>::zeros(big, big);
    for d in 0..dim {
        for c in 0..dim {
            let col = c + d * dim;
            for b in 0..dim {
                for a in 0..dim {
                    let row = a + b * dim;
                    let mut v = c0;
                    for (lambda, sigma) in lambdas.iter().zip(&sigmas) {
                        v += lambda[(a, c)] * sigma[(d, b)] + sigma[(a, c)] * lambda[(b, d)].conj();
                    }
                    if b == d {
                        v -= k[(a, c)];
                    }
                    if a == c {
                        v -= k[(b, d)].conj();
                    }
                    if v == c0 {
                        continue;
                    }
                    if options.secular && (freq(row) - freq(col)).abs() > tol {
                        continue;
                    }
                    dissipator[(row, col)] = v;
                }
            }
        }
    }
    let mut sparse = Vec::new();
    for row in 0..big {
        for col in 0..big {
            let v = dissipator[(row, col)];
            if v != c0 {
                sparse.push((row, col, v));
            }
        }
    }
    Ok(RedfieldGenerator { hamiltonian, options, dissipator, sparse })
}

impl RedfieldGenerator {
    pub fn hamiltonian(&self) -> &SpinHamiltonian {
        &self.hamiltonian
    }

    pub fn options(&self) -> GeneratorOptions {
        self.options
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    /// Bohr frequency of the vec(ρ) component `index`.
    pub fn frequency(&self, index: usize) -> f64 {
        let dim = self.dim();
        self.hamiltonian.bohr(index % dim, index / dim)
    }

    pub fn dissipator(&self) -> &DMatrix<Complex64> {
        &self.dissipator
    }

    /// Full superoperator −i[H, ·] + dissipator.
    pub fn superoperator(&self) -> DMatrix<Complex64> {
        let mut l = self.dissipator.clone();
        for r in 0..l.nrows() {
            l[(r, r)] += Complex64::new(0.0, -self.frequency(r));
        }
        l
    }

    /// out = D·v using the sparse dissipator.
    pub(crate) fn apply_dissipator(&self, v: &DVector<Complex64>, out: &mut DVector<Complex64>) {
        out.fill(Complex64::new(0.0, 0.0));
        for &(r, c, x) in &self.sparse {
            out[r] += x * v[c];
        }
    }

    /// 𝓛(ρ) as a matrix.
    pub fn apply(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let dim = self.dim();
        let v = DVector::from_column_slice(rho.as_slice());
        let mut out = DVector::zeros(dim * dim);
        self.apply_dissipator(&v, &mut out);
        for r in 0..dim * dim {
            out[r] += Complex64::new(0.0, -self.frequency(r)) * v[r];
        }
        DMatrix::from_column_slice(dim, dim, out.as_slice())
    }

    pub fn apply_state(&self, rho: &DensityMatrix) -> DMatrix<Complex64> {
        self.apply(rho.matrix())
    }

    /// Largest decay rate −Re 𝓛_rr.
    pub fn max_decay_rate(&self) -> f64 {
        (0..self.dissipator.nrows()).map(|r| -self.dissipator[(r, r)].re).fold(0.0, f64::max)
    }

    /// Smallest nonzero spacing between distinct Bohr frequencies.
    pub fn min_frequency_spacing(&self) -> f64 {
        let dim = self.dim();
        let mut f: Vec<f64> = (0..dim * dim).map(|r| self.frequency(r)).collect();
        f.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let scale = f.iter().fold(self.hamiltonian.omega(), |m, x| m.max(x.abs()));
        f.windows(2)
            .map(|w| w[1] - w[0])
            .filter(|&d| d > self.options.secular_tolerance * scale)
            .fold(f64::INFINITY, f64::min)
    }
}
