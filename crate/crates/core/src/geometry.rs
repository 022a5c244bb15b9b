//! One-dimensional power-law Ising clusters.
//!
//! Spin i couples to spin j with J·d(i, j)^(−α). Two distance conventions are
//! supported: [`DistanceConvention::Linear`] uses d = |i − j| (and its uniform
//! collective coupling is evaluated from the middle spin), while
//! [`DistanceConvention::Circular`] uses the ring distance
//! min(|i − j|, 𝒩 − |i − j|), for which every spin sees the same environment.
//! The two agree for 𝒩 ≤ 4 and differ for odd 𝒩 ≥ 5.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Range exponent α of the coupling law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RangeExponent {
    Finite(f64),
    /// α → ∞: only spins at distance 1 interact.
    NearestNeighborOnly,
}

impl RangeExponent {
    fn weight(self, distance: usize) -> f64 {
        match self {
            RangeExponent::Finite(alpha) => (distance as f64).powf(-alpha),
            RangeExponent::NearestNeighborOnly => {
                if distance == 1 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum DistanceConvention {
    #[default]
    Linear,
    Circular,
}

impl DistanceConvention {
    pub fn distance(self, i: usize, j: usize, size: usize) -> usize {
        let d = i.abs_diff(j);
        match self {
            DistanceConvention::Linear => d,
            DistanceConvention::Circular => d.min(size - d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterGeometry {
    size: usize,
    exponent: RangeExponent,
    coupling: f64,
    distance: DistanceConvention,
}

impl ClusterGeometry {
    pub fn new(
        size: usize,
        exponent: RangeExponent,
        coupling: f64,
        distance: DistanceConvention,
    ) -> Result<Self> {
        if size < 1 {
            return Err(invalid("cluster size must be at least 1"));
        }
        if let RangeExponent::Finite(alpha) = exponent {
            if !(alpha >= 0.0 && alpha.is_finite()) {
                return Err(invalid(format!("range exponent must be finite and >= 0, got {alpha}")));
            }
        }
        if !coupling.is_finite() {
            return Err(invalid("coupling must be finite"));
        }
        Ok(Self { size, exponent, coupling, distance })
    }

    /// All-to-all coupling J (α = 0).
    pub fn all_to_all(size: usize, coupling: f64) -> Result<Self> {
        Self::new(size, RangeExponent::Finite(0.0), coupling, DistanceConvention::Linear)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn exponent(&self) -> RangeExponent {
        self.exponent
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn distance(&self) -> DistanceConvention {
        self.distance
    }

    pub fn with_size(&self, size: usize) -> Result<Self> {
        Self::new(size, self.exponent, self.coupling, self.distance)
    }

    pub fn with_coupling(&self, coupling: f64) -> Result<Self> {
        Self::new(self.size, self.exponent, coupling, self.distance)
    }

    /// J_{i,j} for i ≠ j (0-based indices).
    pub fn pair_coupling(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i != j);
        let d = self.distance.distance(i, j, self.size);
        self.coupling * self.exponent.weight(d)
    }

    /// Symmetric 𝒩×𝒩 coupling matrix. The diagonal is zero and carries no meaning.
    pub fn coupling_matrix(&self) -> DMatrix<f64> {
        let n = self.size;
        DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { self.pair_coupling(i, j) })
    }

    /// 𝒥ᵢ, the row sum of the coupling matrix for spin `index` (0-based).
    pub fn collective_coupling(&self, index: usize) -> Result<f64> {
        if index >= self.size {
            return Err(Error::IndexOutOfRange { index, size: self.size });
        }
        Ok((0..self.size).filter(|&j| j != index).map(|j| self.pair_coupling(index, j)).sum())
    }

    pub fn collective_couplings(&self) -> Vec<f64> {
        (0..self.size)
            .map(|i| (0..self.size).filter(|&j| j != i).map(|j| self.pair_coupling(i, j)).sum())
            .collect()
    }

    /// The single collective coupling 𝒥 shared by every spin of a uniform chain.
    ///
    /// Linear: the row sum of the reference spin ⌊𝒩/2⌋ (1-based). Circular:
    /// the common row sum, after checking that every row agrees.
    pub fn collective_coupling_uniform(&self) -> f64 {
        if self.size == 1 {
            return 0.0;
        }
        match self.distance {
            DistanceConvention::Linear => {
                let reference = self.size / 2 - 1;
                (0..self.size)
                    .filter(|&j| j != reference)
                    .map(|j| self.pair_coupling(reference, j))
                    .sum()
            }
            DistanceConvention::Circular => {
                let rows = self.collective_couplings();
                let first = rows[0];
                let scale = first.abs().max(self.coupling.abs()).max(f64::MIN_POSITIVE);
                assert!(
                    rows.iter().all(|r| (r - first).abs() <= 1e-12 * scale),
                    "ring rows must agree: {rows:?}"
                );
                first
            }
        }
    }
}
