//! Figure presets: named bundles of curves, each one a sweep or a table of
//! collective couplings.

use std::path::{Path, PathBuf};

use thermoprobe::{DistanceConvention, RangeExponent};

use crate::config::{Axis, ModelParams, OutputFormat, Spacing, SweepConfig};
use crate::error::{CliError, CliResult};
use crate::sweep::{format_number, run_sweep, to_csv, to_json};

#[derive(Debug, Clone, PartialEq)]
pub enum CurveData {
    Sweep(SweepConfig),
    /// 𝒥 against 𝒩 for a fixed coupling law.
    CollectiveCoupling { model: ModelParams, sizes: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub name: String,
    pub data: CurveData,
}

pub trait FigurePreset: Send + Sync {
    fn id(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn curves(&self) -> Vec<Curve>;
}

const OHMIC: (&str, f64) = ("ohmic", 1.0);
const WHITE: (&str, f64) = ("white", 0.0);
const ONE_OVER_F: (&str, f64) = ("one_over_f", -1.0);

fn pair(coupling: f64, hbar_beta: f64, spectral_exponent: f64) -> ModelParams {
    ModelParams { size: 2, coupling, hbar_beta, spectral_exponent, amplitude: 1e-3, ..Default::default() }
}

struct SensitivityVsTime;

impl FigurePreset for SensitivityVsTime {
    fn id(&self) -> &'static str {
        "fig1e"
    }

    fn summary(&self) -> &'static str {
        "S(t) for a spin pair with J = 0 and J = 5ω₀ at β = 1/ħω₀, Ohmic A = 0.001"
    }

    fn curves(&self) -> Vec<Curve> {
        [("weak", 0.0), ("strong_fm", 5.0)]
            .into_iter()
            .map(|(name, coupling)| Curve {
                name: name.into(),
                data: CurveData::Sweep(SweepConfig {
                    model: pair(coupling, 1.0, 1.0),
                    axis: Axis::Time,
                    min: 0.1,
                    max: 1e4,
                    points: 200,
                    spacing: Some(Spacing::Log),
                    ..Default::default()
                }),
            })
            .collect()
    }
}

struct SensitivityVsBeta {
    id: &'static str,
    summary: &'static str,
    spectral: (&'static str, f64),
}

impl FigurePreset for SensitivityVsBeta {
    fn id(&self) -> &'static str {
        self.id
    }

    fn summary(&self) -> &'static str {
        self.summary
    }

    fn curves(&self) -> Vec<Curve> {
        [("weak", 0.0), ("strong_fm", 5.0), ("strong_af", -5.0)]
            .into_iter()
            .map(|(name, coupling)| Curve {
                name: name.into(),
                data: CurveData::Sweep(SweepConfig {
                    model: pair(coupling, 1.0, self.spectral.1),
                    axis: Axis::Beta,
                    min: 0.1,
                    max: 10.0,
                    points: 100,
                    spacing: Some(Spacing::Log),
                    ..Default::default()
                }),
            })
            .collect()
    }
}

pub const COLLECTIVE_BETAS: [f64; 3] = [0.5, 1.0, 2.0];

struct SensitivityVsCollective {
    id: &'static str,
    summary: &'static str,
    spectral: (&'static str, f64),
}

impl FigurePreset for SensitivityVsCollective {
    fn id(&self) -> &'static str {
        self.id
    }

    fn summary(&self) -> &'static str {
        self.summary
    }

    fn curves(&self) -> Vec<Curve> {
        COLLECTIVE_BETAS
            .into_iter()
            .map(|beta| Curve {
                name: format!("beta_{beta}"),
                data: CurveData::Sweep(SweepConfig {
                    model: pair(0.0, beta, self.spectral.1),
                    axis: Axis::Collective,
                    min: -10.0,
                    max: 10.0,
                    points: 201,
                    spacing: Some(Spacing::Linear),
                    ..Default::default()
                }),
            })
            .collect()
    }
}

pub const CLUSTER_ALPHAS: [(&str, RangeExponent); 4] = [
    ("alpha_0", RangeExponent::Finite(0.0)),
    ("alpha_2", RangeExponent::Finite(2.0)),
    ("alpha_3", RangeExponent::Finite(3.0)),
    ("alpha_inf", RangeExponent::NearestNeighborOnly),
];
pub const CLUSTER_COUPLING: f64 = 0.75;
pub const CLUSTER_BETA: f64 = 10.0;
pub const CLUSTER_MAX_SIZE: usize = 20;

fn ring(alpha: RangeExponent, spectral_exponent: f64) -> ModelParams {
    ModelParams {
        size: 2,
        alpha,
        convention: DistanceConvention::Circular,
        coupling: CLUSTER_COUPLING,
        hbar_beta: CLUSTER_BETA,
        spectral_exponent,
        ..Default::default()
    }
}

struct CollectiveVsSize;

impl FigurePreset for CollectiveVsSize {
    fn id(&self) -> &'static str {
        "fig3a"
    }

    fn summary(&self) -> &'static str {
        "collective coupling 𝒥 against cluster size on a ring, J = 0.75ω₀"
    }

    fn curves(&self) -> Vec<Curve> {
        CLUSTER_ALPHAS
            .into_iter()
            .map(|(name, alpha)| Curve {
                name: name.into(),
                data: CurveData::CollectiveCoupling {
                    model: ring(alpha, 1.0),
                    sizes: (1..=CLUSTER_MAX_SIZE).collect(),
                },
            })
            .collect()
    }
}

struct SensitivityVsSize {
    id: &'static str,
    summary: &'static str,
    spectral: (&'static str, f64),
}

impl FigurePreset for SensitivityVsSize {
    fn id(&self) -> &'static str {
        self.id
    }

    fn summary(&self) -> &'static str {
        self.summary
    }

    fn curves(&self) -> Vec<Curve> {
        CLUSTER_ALPHAS
            .into_iter()
            .map(|(name, alpha)| Curve {
                name: name.into(),
                data: CurveData::Sweep(SweepConfig {
                    model: ring(alpha, self.spectral.1),
                    axis: Axis::Size,
                    min: 1.0,
                    max: CLUSTER_MAX_SIZE as f64,
                    points: CLUSTER_MAX_SIZE,
                    spacing: Some(Spacing::Linear),
                    ..Default::default()
                }),
            })
            .collect()
    }
}

static FIG1E: SensitivityVsTime = SensitivityVsTime;
static FIG2A: SensitivityVsBeta =
    SensitivityVsBeta { id: "fig2a", summary: "S_max against β for 𝒥 = 0, ±5ω₀, Ohmic A = 0.001", spectral: OHMIC };
static FIG2B: SensitivityVsBeta =
    SensitivityVsBeta { id: "fig2b", summary: "S_max against β for 𝒥 = 0, ±5ω₀, white A = 0.001", spectral: WHITE };
static FIG2C: SensitivityVsBeta =
    SensitivityVsBeta { id: "fig2c", summary: "S_max against β for 𝒥 = 0, ±5ω₀, 1/f A = 0.001", spectral: ONE_OVER_F };
static FIG2D: SensitivityVsCollective =
    SensitivityVsCollective { id: "fig2d", summary: "S_max against 𝒥 at several β, Ohmic A = 0.001", spectral: OHMIC };
static FIG2E: SensitivityVsCollective =
    SensitivityVsCollective { id: "fig2e", summary: "S_max against 𝒥 at several β, white A = 0.001", spectral: WHITE };
static FIG2F: SensitivityVsCollective = SensitivityVsCollective {
    id: "fig2f",
    summary: "S_max against 𝒥 at several β, 1/f A = 0.001",
    spectral: ONE_OVER_F,
};
static FIG3A: CollectiveVsSize = CollectiveVsSize;
static FIG3B: SensitivityVsSize = SensitivityVsSize {
    id: "fig3b",
    summary: "S_max against cluster size on a ring, β = 10/ħω₀, Ohmic A = 0.001",
    spectral: OHMIC,
};
static FIG3C: SensitivityVsSize = SensitivityVsSize {
    id: "fig3c",
    summary: "S_max against cluster size on a ring, β = 10/ħω₀, white A = 0.001",
    spectral: WHITE,
};

pub fn presets() -> [&'static dyn FigurePreset; 10] {
    [&FIG1E, &FIG2A, &FIG2B, &FIG2C, &FIG2D, &FIG2E, &FIG2F, &FIG3A, &FIG3B, &FIG3C]
}

pub fn preset_by_id(id: &str) -> CliResult<&'static dyn FigurePreset> {
    let wanted = id.to_ascii_lowercase();
    presets().into_iter().find(|p| p.id() == wanted).ok_or_else(|| {
        let known: Vec<&str> = presets().iter().map(|p| p.id()).collect();
        CliError::Invalid(format!("unknown figure preset '{id}' (known: {})", known.join(", ")))
    })
}

/// Rendered curve contents, ready to be written.
pub fn render_curve(curve: &Curve, format: OutputFormat) -> CliResult<String> {
    match &curve.data {
        CurveData::Sweep(cfg) => {
            let rows = run_sweep(cfg)?;
            Ok(match format {
                OutputFormat::Csv => to_csv(cfg.axis, &rows),
                OutputFormat::Json => {
                    serde_json::to_string_pretty(&to_json(cfg.axis, &rows)).expect("json values serialise") + "\n"
                }
            })
        }
        CurveData::CollectiveCoupling { model, sizes } => {
            let mut rows = Vec::with_capacity(sizes.len());
            for &n in sizes {
                let geom = ModelParams { size: n, ..*model }.geometry()?;
                rows.push((n, geom.collective_coupling_uniform()));
            }
            Ok(match format {
                OutputFormat::Csv => {
                    let mut out = String::from("size,collective\n");
                    for (n, c) in rows {
                        out.push_str(&format!("{n},{}\n", format_number(c)));
                    }
                    out
                }
                OutputFormat::Json => {
                    let v: Vec<serde_json::Value> =
                        rows.into_iter().map(|(n, c)| serde_json::json!({"size": n, "collective": c})).collect();
                    serde_json::to_string_pretty(&v).expect("json values serialise") + "\n"
                }
            })
        }
    }
}

/// Writes `<preset>_<curve>.{csv,json}` into `dir` and returns the paths.
pub fn write_figure(preset: &dyn FigurePreset, dir: &Path, format: OutputFormat) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })?;
    let ext = if format == OutputFormat::Json { "json" } else { "csv" };
    let mut paths = Vec::new();
    for curve in preset.curves() {
        let body = render_curve(&curve, format)?;
        let path = dir.join(format!("{}_{}.{ext}", preset.id(), curve.name));
        std::fs::write(&path, body).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        paths.push(path);
    }
    Ok(paths)
}
