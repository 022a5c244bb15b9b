//! Brute-force decay rates by direct quadrature of the bath correlation.
//!
//! The bath correlation function of a thermal bosonic environment with
//! spectral density f is
//!
//! ```text
//! C(τ) = ∫ dΩ f(Ω) [coth(ħβΩ/2) cos(Ωτ) − i sin(Ωτ)],
//! ```
//!
//! and the decay rate of spin i is the half-Fourier transform
//!
//! ```text
//! ξᵢ = 2 Re ∫₀^∞ dτ [C(τ) e^{−iτ(𝒥ᵢ − ω)} + C(−τ) e^{iτ(𝒥ᵢ + ω)}].
//! ```
//!
//! Both integrals are done numerically here: C(τ) is tabulated on a uniform τ
//! grid from a composite Gauss–Legendre rule in Ω, and the τ-integral is
//! damped by a window W_ε(τ) and summed with the trapezoid rule (the
//! integrand is even in τ, so the trapezoid rule is spectrally accurate).
//! The damping biases the result by a power series in ε, which Richardson
//! extrapolation over successive halvings of ε removes.
//!
//! Nothing in this module evaluates the closed-form rates; it exists to check
//! them.

use rayon::prelude::*;

use crate::bath::BathContext;
use crate::error::{invalid, Error, Result};

/// Damping applied to the τ-integral so that the half-Fourier transform of an
/// oscillatory integrand converges.
pub trait DampingWindow: Send + Sync {
    fn name(&self) -> &'static str;
    fn weight(&self, epsilon: f64, tau: f64) -> f64;
    /// τ beyond which the window is below double-precision relevance.
    fn support(&self, epsilon: f64) -> f64;
    /// Powers of ε in the bias expansion: (first, step).
    fn bias_powers(&self) -> (u32, u32);
}

/// e^{−ετ}: a Lorentzian of width ε in frequency.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExponentialWindow;

impl DampingWindow for ExponentialWindow {
    fn name(&self) -> &'static str {
        "exponential"
    }
    fn weight(&self, epsilon: f64, tau: f64) -> f64 {
        (-epsilon * tau).exp()
    }
    fn support(&self, epsilon: f64) -> f64 {
        40.0 / epsilon
    }
    fn bias_powers(&self) -> (u32, u32) {
        (1, 1)
    }
}

/// e^{−(ετ)²/2}: a Gaussian of width ε in frequency, with no spectral tails.
#[derive(Debug, Clone, Copy, Default)]
pub struct GaussianWindow;

impl DampingWindow for GaussianWindow {
    fn name(&self) -> &'static str {
        "gaussian"
    }
    fn weight(&self, epsilon: f64, tau: f64) -> f64 {
        let x = epsilon * tau;
        (-0.5 * x * x).exp()
    }
    fn support(&self, epsilon: f64) -> f64 {
        9.0 / epsilon
    }
    fn bias_powers(&self) -> (u32, u32) {
        (2, 2)
    }
}

pub fn window_by_name(name: &str) -> Result<&'static dyn DampingWindow> {
    match name {
        "exponential" => Ok(&ExponentialWindow),
        "gaussian" => Ok(&GaussianWindow),
        other => Err(Error::Unknown { kind: "damping window", name: other.to_string() }),
    }
}

#[derive(Clone, Copy)]
pub struct QuadratureOptions {
    pub window: &'static dyn DampingWindow,
    /// Ω_max as a multiple of max(|𝒥 ± ω|, 1/ħβ).
    pub cutoff_factor: f64,
    /// Explicit Ω_max, overriding `cutoff_factor`.
    pub omega_max: Option<f64>,
    /// Infrared cutoff of the Ω-integral, in units of ω.
    pub omega_min: f64,
    /// Largest ε as a fraction of the smallest gap |𝒥 ± ω|.
    pub epsilon_fraction: f64,
    /// Explicit largest ε, overriding `epsilon_fraction`.
    pub epsilon: Option<f64>,
    /// Number of ε values (each half the previous).
    pub levels: usize,
    /// τ samples per half-period of the fastest oscillation.
    pub samples_per_half_period: f64,
    /// Gauss–Legendre panel width times the longest τ, in radians.
    pub panel_phase: f64,
    /// Relative change between the last two extrapolants that counts as converged.
    pub tolerance: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            window: &GaussianWindow,
            cutoff_factor: 20.0,
            omega_max: None,
            omega_min: 1e-6,
            epsilon_fraction: 1.0 / 8.0,
            epsilon: None,
            levels: 3,
            samples_per_half_period: 2.0,
            panel_phase: 2.0,
            tolerance: 5e-3,
        }
    }
}

impl std::fmt::Debug for QuadratureOptions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QuadratureOptions")
            .field("window", &self.window.name())
            .field("cutoff_factor", &self.cutoff_factor)
            .field("omega_max", &self.omega_max)
            .field("omega_min", &self.omega_min)
            .field("epsilon_fraction", &self.epsilon_fraction)
            .field("epsilon", &self.epsilon)
            .field("levels", &self.levels)
            .field("tolerance", &self.tolerance)
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureEstimate {
    /// Extrapolated ε → 0 value.
    pub value: f64,
    /// Raw damped estimates, one per ε.
    pub raw: Vec<(f64, f64)>,
    /// Diagonal of the Richardson table.
    pub extrapolants: Vec<f64>,
    pub omega_max: f64,
    pub omega_nodes: usize,
    pub tau_samples: usize,
}

const GL6_NODES: [f64; 6] = [
    -0.932_469_514_203_152,
    -0.661_209_386_466_264_5,
    -0.238_619_186_083_196_9,
    0.238_619_186_083_196_9,
    0.661_209_386_466_264_5,
    0.932_469_514_203_152,
];
const GL6_WEIGHTS: [f64; 6] = [
    0.171_324_492_379_170_3,
    0.360_761_573_048_138_6,
    0.467_913_934_572_691_1,
    0.467_913_934_572_691_1,
    0.360_761_573_048_138_6,
    0.171_324_492_379_170_3,
];

/// Composite Gauss–Legendre nodes on [lo, hi]: geometric panels (ratio 1.5)
/// until the panel width reaches `width`, then uniform panels of `width`.
fn omega_nodes(lo: f64, hi: f64, width: f64) -> Vec<(f64, f64)> {
    let mut edges = vec![lo];
    let mut e = lo;
    while e < hi {
        let step = (0.5 * e).min(width).max(f64::MIN_POSITIVE);
        e = (e + step).min(hi);
        edges.push(e);
    }
    let mut out = Vec::with_capacity(6 * edges.len());
    for w in edges.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let half = 0.5 * (w[1] - w[0]);
        for (x, wt) in GL6_NODES.iter().zip(GL6_WEIGHTS) {
            out.push((mid + half * x, half * wt));
        }
    }
    out
}

/// Re C(τ) and Im C(τ) on τ_k = k·dτ, k = 0..samples.
fn correlation_table(
    bath: &BathContext,
    nodes: &[(f64, f64)],
    dtau: f64,
    samples: usize,
) -> (Vec<f64>, Vec<f64>) {
    let hbar_beta = bath.thermal.value();
    let spectral = bath.spectral;
    let chunk = 256;
    nodes
        .par_chunks(chunk)
        .map(|block| {
            let mut re = vec![0.0; samples];
            let mut im = vec![0.0; samples];
            for &(omega, w) in block {
                let f = w * spectral.eval(omega);
                let coth = if hbar_beta.is_infinite() {
                    1.0
                } else {
                    1.0 / (0.5 * hbar_beta * omega).tanh()
                };
                let (a_re, a_im) = (f * coth, -f);
                // rotate e^{iΩτ} forward, resynchronising to limit drift
                let (s, c) = (omega * dtau).sin_cos();
                let (mut zc, mut zs) = (1.0, 0.0);
                for k in 0..samples {
                    if k % 64 == 0 {
                        let (s0, c0) = (omega * dtau * k as f64).sin_cos();
                        zc = c0;
                        zs = s0;
                    }
                    re[k] += a_re * zc;
                    im[k] += a_im * zs;
                    let nc = zc * c - zs * s;
                    zs = zs * c + zc * s;
                    zc = nc;
                }
            }
            (re, im)
        })
        .reduce(
            || (vec![0.0; samples], vec![0.0; samples]),
            |(mut ar, mut ai), (br, bi)| {
                for k in 0..samples {
                    ar[k] += br[k];
                    ai[k] += bi[k];
                }
                (ar, ai)
            },
        )
}

fn richardson(raw: &[f64], first: u32, step: u32) -> Vec<f64> {
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(raw.len());
    for (l, &v) in raw.iter().enumerate() {
        let mut row = vec![v];
        for m in 1..=l {
            let p = first + (m as u32 - 1) * step;
            let factor = 2f64.powi(p as i32) - 1.0;
            let prev = row[m - 1];
            let above = table[l - 1][m - 1];
            row.push(prev + (prev - above) / factor);
        }
        table.push(row);
    }
    table.iter().enumerate().map(|(l, row)| row[l]).collect()
}

/// ξᵢ by regularised double quadrature of the bath correlation function.
pub fn xi_quadrature_oracle(
    collective: f64,
    omega: f64,
    bath: &BathContext,
    opts: &QuadratureOptions,
) -> Result<QuadratureEstimate> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(invalid(format!("spin frequency must be > 0, got {omega}")));
    }
    if opts.levels < 1 {
        return Err(invalid("at least one damping level is required"));
    }
    let a = collective - omega;
    let b = collective + omega;
    let gap_min = a.abs().min(b.abs());
    let gap_max = a.abs().max(b.abs());
    if gap_min <= 0.0 {
        return Err(invalid("quadrature oracle needs both gaps |𝒥 ± ω| to be non-zero"));
    }
    if bath.spectral.is_decoupled() {
        return Ok(QuadratureEstimate {
            value: 0.0,
            raw: vec![],
            extrapolants: vec![0.0],
            omega_max: 0.0,
            omega_nodes: 0,
            tau_samples: 0,
        });
    }
    let thermal_scale = match bath.thermal.value() {
        b if b.is_finite() => 1.0 / b,
        _ => 0.0,
    };
    let omega_max = opts
        .omega_max
        .unwrap_or(opts.cutoff_factor * gap_max.max(thermal_scale));
    let eps0 = opts.epsilon.unwrap_or(opts.epsilon_fraction * gap_min);
    let epsilons: Vec<f64> = (0..opts.levels).map(|l| eps0 / 2f64.powi(l as i32)).collect();
    let eps_min = *epsilons.last().unwrap();

    let tau_max = opts.window.support(eps_min);
    let dtau = std::f64::consts::PI / (opts.samples_per_half_period * (omega_max + gap_max));
    let samples = (tau_max / dtau).ceil() as usize + 1;
    let nodes = omega_nodes(opts.omega_min * omega, omega_max, opts.panel_phase / tau_max);
    let (c_re, c_im) = correlation_table(bath, &nodes, dtau, samples);

    let integrand: Vec<f64> = (0..samples)
        .map(|k| {
            let tau = k as f64 * dtau;
            let (sa, ca) = (a * tau).sin_cos();
            let (sb, cb) = (b * tau).sin_cos();
            c_re[k] * (ca + cb) + c_im[k] * (sa + sb)
        })
        .collect();

    let raw: Vec<(f64, f64)> = epsilons
        .iter()
        .map(|&eps| {
            let sum: f64 = integrand
                .iter()
                .enumerate()
                .map(|(k, h)| {
                    let w = if k == 0 { 0.5 } else { 1.0 };
                    w * opts.window.weight(eps, k as f64 * dtau) * h
                })
                .sum();
            (eps, 2.0 * dtau * sum)
        })
        .collect();
    let (first, step) = opts.window.bias_powers();
    let values: Vec<f64> = raw.iter().map(|r| r.1).collect();
    let extrapolants = richardson(&values, first, step);
    let value = *extrapolants.last().unwrap();
    if extrapolants.len() >= 2 {
        let previous = extrapolants[extrapolants.len() - 2];
        if (value - previous).abs() > opts.tolerance * value.abs() {
            return Err(Error::NonConvergence { previous, latest: value });
        }
    }
    Ok(QuadratureEstimate {
        value,
        raw,
        extrapolants,
        omega_max,
        omega_nodes: nodes.len(),
        tau_samples: samples,
    })
}
