//! Interchangeable ways of obtaining the cluster decay rate Γ, selectable by name.

use crate::bath::BathContext;
use crate::error::{Error, Result};
use crate::geometry::ClusterGeometry;
use crate::quadrature::{xi_quadrature_oracle, QuadratureOptions};
use crate::rates::average_rate;
use crate::redfield::{build_generator, evolve, ghz_state, lambda_expectation, GeneratorOptions, StepControl};

pub trait RateMethod: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    /// Γ with per-spin collective couplings.
    fn gamma(&self, geom: &ClusterGeometry, omega: f64, bath: &BathContext) -> Result<f64>;
}

pub struct ClosedForm;

impl RateMethod for ClosedForm {
    fn name(&self) -> &'static str {
        "closed-form"
    }

    fn description(&self) -> &'static str {
        "regime-dependent closed form of the per-spin rates"
    }

    fn gamma(&self, geom: &ClusterGeometry, omega: f64, bath: &BathContext) -> Result<f64> {
        Ok(average_rate(geom, omega, bath)?.gamma)
    }
}

pub struct Quadrature;

impl RateMethod for Quadrature {
    fn name(&self) -> &'static str {
        "quadrature"
    }

    fn description(&self) -> &'static str {
        "damped τ-integral of the bath correlation function"
    }

    fn gamma(&self, geom: &ClusterGeometry, omega: f64, bath: &BathContext) -> Result<f64> {
        let opts = QuadratureOptions::default();
        let couplings = geom.collective_couplings();
        let mut sum = 0.0;
        for c in &couplings {
            sum += xi_quadrature_oracle(*c, omega, bath, &opts)?.value;
        }
        Ok(sum / couplings.len() as f64)
    }
}

pub struct Redfield {
    pub secular: bool,
}

impl RateMethod for Redfield {
    fn name(&self) -> &'static str {
        if self.secular {
            "redfield-secular"
        } else {
            "redfield-full"
        }
    }

    fn description(&self) -> &'static str {
        if self.secular {
            "GHZ coherence decay fitted from the secular master equation"
        } else {
            "GHZ coherence decay fitted from the full Redfield equation"
        }
    }

    fn gamma(&self, geom: &ClusterGeometry, omega: f64, bath: &BathContext) -> Result<f64> {
        let options = if self.secular { GeneratorOptions::secular() } else { GeneratorOptions::full() };
        let gen = build_generator(geom, omega, bath, options)?;
        let dim = gen.dim();
        let coherence = (dim - 1) * dim;
        let scale = -gen.dissipator()[(coherence, coherence)].re;
        if scale <= 0.0 {
            return Ok(0.0);
        }
        let times: Vec<f64> = (0..=40).map(|i| i as f64 * 3.0 / (40.0 * scale)).collect();
        let mut control = StepControl::default();
        control.state_tolerance.positivity = f64::INFINITY;
        let traj = evolve(&ghz_state(geom.size())?, &gen, &times, &control)?;
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for (t, rho) in traj.times.iter().zip(&traj.states) {
            let y = lambda_expectation(rho).norm().ln();
            sx += t;
            sy += y;
            sxx += t * t;
            sxy += t * y;
        }
        let n = times.len() as f64;
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        Ok(-2.0 * slope / geom.size() as f64)
    }
}

static CLOSED_FORM: ClosedForm = ClosedForm;
static QUADRATURE: Quadrature = Quadrature;
static REDFIELD_SECULAR: Redfield = Redfield { secular: true };
static REDFIELD_FULL: Redfield = Redfield { secular: false };

pub fn rate_methods() -> [&'static dyn RateMethod; 4] {
    [&CLOSED_FORM, &QUADRATURE, &REDFIELD_SECULAR, &REDFIELD_FULL]
}

pub fn rate_method_by_name(name: &str) -> Result<&'static dyn RateMethod> {
    rate_methods()
        .into_iter()
        .find(|m| m.name() == name)
        .ok_or_else(|| Error::Unknown { kind: "rate method", name: name.to_string() })
}
