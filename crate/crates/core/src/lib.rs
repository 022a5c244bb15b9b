//! Sensitivity of thermally damped, Ising-coupled spin probes.
//!
//! A probe of N spins is split into M clusters of 𝒩 spins, each prepared in a
//! GHZ state and read out with a binary measurement. Energy relaxation into a
//! thermal bosonic bath damps the GHZ coherence at a rate set by each spin's
//! collective Ising coupling relative to the spin frequency. This crate
//! computes those rates in closed form, turns them into Fisher information and
//! sensitivity, and checks the closed forms against two brute-force oracles:
//! a τ-quadrature of the bath correlation function and a dense Redfield
//! integration of small clusters.

pub mod bath;
pub mod error;
pub mod estimation;
pub mod geometry;
pub mod methods;
pub mod quadrature;
pub mod rates;
pub mod redfield;
pub mod scenario;
pub mod spectral;
pub mod units;

pub use bath::{BathContext, Thermal};
pub use error::{Error, Result};
pub use estimation::{
    fisher, fisher_finite_difference, high_beta_approx, optimize, probability, sensitivity, CouplingProfile,
    Optimum, ProbeSpec, SensingRun, SensitivityResult,
};
pub use geometry::{ClusterGeometry, DistanceConvention, RangeExponent};
pub use methods::{rate_method_by_name, rate_methods, RateMethod};
pub use rates::{average_rate, average_rate_uniform, xi, RateBundle, Regime, SpinRate};
pub use spectral::SpectralDensity;
pub use units::{NaturalScale, UnitSystem};
