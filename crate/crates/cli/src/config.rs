//! Flat `key = value unit` configuration documents.
//!
//! Dimensional values carry an explicit unit: `w0` and `inv_w0` in natural
//! units, `rad_s`, `s` and `K` in SI. A document may not mix the two systems.
//! Spectral amplitudes are read in the document's unit system without a
//! suffix. Lines starting with `#` are comments.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use thermoprobe::units::UnitSystem;
use thermoprobe::{
    BathContext, ClusterGeometry, CouplingProfile, DistanceConvention, ProbeSpec, RangeExponent, SensingRun,
    SpectralDensity, Thermal,
};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub size: usize,
    pub clusters: usize,
    pub alpha: RangeExponent,
    pub convention: DistanceConvention,
    /// Pairwise coupling J.
    pub coupling: f64,
    pub omega0: f64,
    pub deviation: f64,
    /// ħβ; infinite at zero temperature.
    pub hbar_beta: f64,
    pub spectral_exponent: f64,
    /// Spectral amplitude A; zero decouples the bath.
    pub amplitude: f64,
    pub cpmg: bool,
    pub profile: CouplingProfile,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            size: 2,
            clusters: 1,
            alpha: RangeExponent::Finite(0.0),
            convention: DistanceConvention::Linear,
            coupling: 0.0,
            omega0: 1.0,
            deviation: 0.0,
            hbar_beta: 1.0,
            spectral_exponent: 1.0,
            amplitude: 1e-3,
            cpmg: false,
            profile: CouplingProfile::Uniform,
        }
    }
}

impl ModelParams {
    pub fn geometry(&self) -> CliResult<ClusterGeometry> {
        Ok(ClusterGeometry::new(self.size, self.alpha, self.coupling, self.convention)?)
    }

    pub fn spectral(&self) -> CliResult<SpectralDensity> {
        if self.amplitude == 0.0 {
            Ok(SpectralDensity::decoupled())
        } else {
            Ok(SpectralDensity::new(self.amplitude, self.spectral_exponent)?)
        }
    }

    pub fn bath(&self, units: UnitSystem) -> CliResult<BathContext> {
        Ok(BathContext::new(Thermal::hbar_beta(self.hbar_beta)?, self.spectral()?, units))
    }

    pub fn run(&self, units: UnitSystem) -> CliResult<SensingRun> {
        let probe = ProbeSpec::new(self.size * self.clusters, self.clusters, self.omega0)?
            .with_deviation(self.deviation)?;
        Ok(SensingRun::new(probe, self.geometry()?, self.bath(units)?)?
            .with_cpmg(self.cpmg)
            .with_profile(self.profile))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Beta,
    Collective,
    Size,
    Time,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Beta => "beta",
            Axis::Collective => "collective",
            Axis::Size => "size",
            Axis::Time => "time",
        }
    }

    fn dimension(self) -> Dimension {
        match self {
            Axis::Beta => Dimension::InverseTemperature,
            Axis::Collective => Dimension::Frequency,
            Axis::Size => Dimension::None,
            Axis::Time => Dimension::Time,
        }
    }
}

impl FromStr for Axis {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "beta" => Ok(Axis::Beta),
            "collective" | "coupling" => Ok(Axis::Collective),
            "size" => Ok(Axis::Size),
            "time" => Ok(Axis::Time),
            _ => Err(CliError::Invalid(format!("unknown axis '{s}' (beta, collective, size, time)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

impl FromStr for Spacing {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "linear" | "lin" => Ok(Spacing::Linear),
            "log" => Ok(Spacing::Log),
            _ => Err(CliError::Invalid(format!("unknown spacing '{s}' (linear, log)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub units: UnitSystem,
    pub model: ModelParams,
    pub axis: Axis,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    /// `None` picks log for β and positive 𝒥 ranges, linear otherwise.
    pub spacing: Option<Spacing>,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            units: UnitSystem::Natural,
            model: ModelParams::default(),
            axis: Axis::Beta,
            min: 0.1,
            max: 10.0,
            points: 50,
            spacing: None,
            output: None,
            format: OutputFormat::Csv,
        }
    }
}

impl SweepConfig {
    pub fn spacing(&self) -> Spacing {
        self.spacing.unwrap_or(match self.axis {
            Axis::Beta => Spacing::Log,
            Axis::Collective if self.min > 0.0 => Spacing::Log,
            _ => Spacing::Linear,
        })
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.points < 2 {
            return Err(CliError::Invalid(format!("a sweep needs at least 2 points, got {}", self.points)));
        }
        if !(self.min < self.max) || !self.min.is_finite() || !self.max.is_finite() {
            return Err(CliError::Invalid(format!("sweep range needs min < max, got [{}, {}]", self.min, self.max)));
        }
        if self.spacing() == Spacing::Log && self.min <= 0.0 {
            return Err(CliError::Invalid("log spacing needs min > 0".into()));
        }
        match self.axis {
            Axis::Beta if self.min <= 0.0 => Err(CliError::Invalid("β must stay > 0".into())),
            Axis::Time if self.min < 0.0 => Err(CliError::Invalid("sensing time must be >= 0".into())),
            Axis::Size if self.min < 1.0 || self.min.fract() != 0.0 || self.max.fract() != 0.0 => {
                Err(CliError::Invalid("cluster sizes must be integers >= 1".into()))
            }
            Axis::Collective if self.model.size < 2 => {
                Err(CliError::Invalid("a single spin has no collective coupling to sweep".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dimension {
    None,
    Frequency,
    Time,
    InverseTemperature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
    pub unit: Option<String>,
}

/// Splits a document into entries without interpreting them.
pub fn parse_document(text: &str) -> CliResult<Vec<Entry>> {
    let mut entries: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, rest) = line
            .split_once('=')
            .ok_or_else(|| CliError::Invalid(format!("line {}: expected 'key = value [unit]'", i + 1)))?;
        let key = key.trim().to_string();
        let mut parts = rest.split_whitespace();
        let value = parts
            .next()
            .ok_or_else(|| CliError::Invalid(format!("line {}: missing value for '{key}'", i + 1)))?
            .to_string();
        let unit = parts.next().map(str::to_string);
        if parts.next().is_some() {
            return Err(CliError::Invalid(format!("line {}: trailing tokens after unit", i + 1)));
        }
        if entries.iter().any(|e| e.key == key) {
            return Err(CliError::Invalid(format!("line {}: duplicate key '{key}'", i + 1)));
        }
        entries.push(Entry { line: i + 1, key, value, unit });
    }
    Ok(entries)
}

fn unit_system_of(unit: &str) -> Option<UnitSystem> {
    match unit {
        "w0" | "inv_w0" => Some(UnitSystem::Natural),
        "rad_s" | "s" | "K" => Some(UnitSystem::Si),
        _ => None,
    }
}

/// Unit system implied by the document's suffixes; errors when they mix.
pub fn document_units(entries: &[Entry]) -> CliResult<Option<UnitSystem>> {
    let mut found: Option<(UnitSystem, &Entry)> = None;
    for e in entries {
        let Some(unit) = &e.unit else { continue };
        let system = unit_system_of(unit)
            .ok_or_else(|| CliError::Invalid(format!("line {}: unknown unit '{unit}'", e.line)))?;
        match found {
            Some((s, first)) if s != system => {
                return Err(CliError::Invalid(format!(
                    "line {}: unit '{unit}' mixes unit systems with line {} ('{}')",
                    e.line,
                    first.line,
                    first.unit.as_deref().unwrap_or("")
                )))
            }
            None => found = Some((system, e)),
            _ => {}
        }
    }
    Ok(found.map(|(s, _)| s))
}

fn number(e: &Entry) -> CliResult<f64> {
    e.value
        .parse::<f64>()
        .map_err(|_| CliError::Invalid(format!("line {}: '{}' is not a number", e.line, e.value)))
}

fn dimensional(e: &Entry, dim: Dimension, units: UnitSystem) -> CliResult<f64> {
    let v = number(e)?;
    let unit = e.unit.as_deref();
    let ok = match (dim, units, unit) {
        (Dimension::None, _, None) => return Ok(v),
        (Dimension::None, _, Some(u)) => {
            return Err(CliError::Invalid(format!("line {}: '{}' is dimensionless, drop unit '{u}'", e.line, e.key)))
        }
        (_, _, None) => {
            return Err(CliError::Invalid(format!("line {}: '{}' needs a unit suffix", e.line, e.key)))
        }
        (Dimension::Frequency, UnitSystem::Natural, Some("w0")) => true,
        (Dimension::Frequency, UnitSystem::Si, Some("rad_s")) => true,
        (Dimension::Time | Dimension::InverseTemperature, UnitSystem::Natural, Some("inv_w0")) => true,
        (Dimension::Time | Dimension::InverseTemperature, UnitSystem::Si, Some("s")) => true,
        _ => false,
    };
    if !ok {
        return Err(CliError::Invalid(format!(
            "line {}: unit '{}' does not fit '{}'",
            e.line,
            unit.unwrap_or(""),
            e.key
        )));
    }
    Ok(v)
}

fn dimensionless<T: FromStr>(e: &Entry) -> CliResult<T> {
    if let Some(u) = &e.unit {
        return Err(CliError::Invalid(format!("line {}: '{}' takes no unit, got '{u}'", e.line, e.key)));
    }
    e.value
        .parse::<T>()
        .map_err(|_| CliError::Invalid(format!("line {}: invalid value '{}' for '{}'", e.line, e.value, e.key)))
}

pub fn parse_alpha(s: &str) -> CliResult<RangeExponent> {
    match s {
        "inf" | "infinity" | "nn" => Ok(RangeExponent::NearestNeighborOnly),
        _ => s
            .parse::<f64>()
            .map(RangeExponent::Finite)
            .map_err(|_| CliError::Invalid(format!("invalid range exponent '{s}'"))),
    }
}

pub fn parse_convention(s: &str) -> CliResult<DistanceConvention> {
    match s {
        "linear" => Ok(DistanceConvention::Linear),
        "circular" | "ring" => Ok(DistanceConvention::Circular),
        _ => Err(CliError::Invalid(format!("unknown distance convention '{s}' (linear, circular)"))),
    }
}

pub fn parse_profile(s: &str) -> CliResult<CouplingProfile> {
    match s {
        "uniform" => Ok(CouplingProfile::Uniform),
        "per_spin" | "per-spin" => Ok(CouplingProfile::PerSpin),
        _ => Err(CliError::Invalid(format!("unknown coupling profile '{s}' (uniform, per_spin)"))),
    }
}

fn parse_format(s: &str) -> CliResult<OutputFormat> {
    match s {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        _ => Err(CliError::Invalid(format!("unknown format '{s}' (csv, json)"))),
    }
}

fn with_line<T>(e: &Entry, r: CliResult<T>) -> CliResult<T> {
    r.map_err(|err| match err {
        CliError::Invalid(msg) => CliError::Invalid(format!("line {}: {msg}", e.line)),
        other => other,
    })
}

/// Applies a document on top of `base`. `si` forces SI units and must agree
/// with the document's suffixes.
pub fn apply_document(base: &SweepConfig, entries: &[Entry], si: bool) -> CliResult<SweepConfig> {
    let implied = document_units(entries)?;
    let units = match (implied, si) {
        (Some(UnitSystem::Natural), true) => {
            return Err(CliError::Invalid("--si conflicts with natural units in the config".into()))
        }
        (Some(u), _) => u,
        (None, true) => UnitSystem::Si,
        (None, false) => base.units,
    };
    let mut cfg = base.clone();
    cfg.units = units;
    // axis first: min/max units depend on it
    if let Some(e) = entries.iter().find(|e| e.key == "axis") {
        cfg.axis = with_line(e, dimensionless::<String>(e).and_then(|s| s.parse()))?;
    }
    let m = &mut cfg.model;
    for e in entries {
        match e.key.as_str() {
            "axis" => {}
            "min" => cfg.min = dimensional(e, cfg.axis.dimension(), units)?,
            "max" => cfg.max = dimensional(e, cfg.axis.dimension(), units)?,
            "points" => cfg.points = dimensionless(e)?,
            "spacing" => cfg.spacing = Some(with_line(e, dimensionless::<String>(e)?.parse())?),
            "size" => m.size = dimensionless(e)?,
            "clusters" => m.clusters = dimensionless(e)?,
            "alpha" => m.alpha = with_line(e, parse_alpha(&dimensionless::<String>(e)?))?,
            "convention" => m.convention = with_line(e, parse_convention(&dimensionless::<String>(e)?))?,
            "profile" => m.profile = with_line(e, parse_profile(&dimensionless::<String>(e)?))?,
            "coupling" => m.coupling = dimensional(e, Dimension::Frequency, units)?,
            "omega0" => m.omega0 = dimensional(e, Dimension::Frequency, units)?,
            "deviation" => m.deviation = dimensional(e, Dimension::Frequency, units)?,
            "beta" => m.hbar_beta = dimensional(e, Dimension::InverseTemperature, units)?,
            "temperature" => {
                if e.unit.as_deref() != Some("K") {
                    return Err(CliError::Invalid(format!("line {}: temperature needs unit K", e.line)));
                }
                let t = number(e)?;
                if !(t >= 0.0) {
                    return Err(CliError::Invalid(format!("line {}: temperature must be >= 0", e.line)));
                }
                m.hbar_beta = UnitSystem::Si.hbar_beta_from_temperature(t);
            }
            "spectral_exponent" => m.spectral_exponent = dimensionless(e)?,
            "amplitude" => m.amplitude = dimensionless(e)?,
            "cpmg" => m.cpmg = dimensionless(e)?,
            "output" => cfg.output = Some(PathBuf::from(dimensionless::<String>(e)?)),
            "format" => cfg.format = with_line(e, parse_format(&dimensionless::<String>(e)?))?,
            other => return Err(CliError::Invalid(format!("line {}: unknown key '{other}'", e.line))),
        }
    }
    Ok(cfg)
}

pub fn parse_config(text: &str, si: bool) -> CliResult<SweepConfig> {
    apply_document(&SweepConfig::default(), &parse_document(text)?, si)
}

fn unit_label(dim: Dimension, units: UnitSystem) -> &'static str {
    match (dim, units) {
        (Dimension::None, _) => "",
        (Dimension::Frequency, UnitSystem::Natural) => " w0",
        (Dimension::Frequency, UnitSystem::Si) => " rad_s",
        (_, UnitSystem::Natural) => " inv_w0",
        (_, UnitSystem::Si) => " s",
    }
}

/// Serialises a configuration so that [`parse_config`] reproduces it exactly.
pub fn dump_config(cfg: &SweepConfig) -> String {
    let u = cfg.units;
    let m = &cfg.model;
    let f = |x: f64| format!("{x:e}");
    let mut out = String::new();
    let _ = writeln!(out, "# thermoprobe sweep configuration ({} units)", u.label());
    let _ = writeln!(out, "axis = {}", cfg.axis.name());
    let _ = writeln!(out, "min = {}{}", f(cfg.min), unit_label(cfg.axis.dimension(), u));
    let _ = writeln!(out, "max = {}{}", f(cfg.max), unit_label(cfg.axis.dimension(), u));
    let _ = writeln!(out, "points = {}", cfg.points);
    if let Some(s) = cfg.spacing {
        let _ = writeln!(out, "spacing = {}", if s == Spacing::Log { "log" } else { "linear" });
    }
    let _ = writeln!(out, "size = {}", m.size);
    let _ = writeln!(out, "clusters = {}", m.clusters);
    let alpha = match m.alpha {
        RangeExponent::Finite(a) => f(a),
        RangeExponent::NearestNeighborOnly => "inf".into(),
    };
    let _ = writeln!(out, "alpha = {alpha}");
    let conv = if m.convention == DistanceConvention::Linear { "linear" } else { "circular" };
    let _ = writeln!(out, "convention = {conv}");
    let profile = if m.profile == CouplingProfile::Uniform { "uniform" } else { "per_spin" };
    let _ = writeln!(out, "profile = {profile}");
    let _ = writeln!(out, "coupling = {}{}", f(m.coupling), unit_label(Dimension::Frequency, u));
    let _ = writeln!(out, "omega0 = {}{}", f(m.omega0), unit_label(Dimension::Frequency, u));
    let _ = writeln!(out, "deviation = {}{}", f(m.deviation), unit_label(Dimension::Frequency, u));
    let _ = writeln!(out, "beta = {}{}", f(m.hbar_beta), unit_label(Dimension::InverseTemperature, u));
    let _ = writeln!(out, "spectral_exponent = {}", f(m.spectral_exponent));
    let _ = writeln!(out, "amplitude = {}", f(m.amplitude));
    let _ = writeln!(out, "cpmg = {}", m.cpmg);
    if let Some(p) = &cfg.output {
        let _ = writeln!(out, "output = {}", p.display());
    }
    let _ = writeln!(out, "format = {}", if cfg.format == OutputFormat::Json { "json" } else { "csv" });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_natural_document() {
        let text = "# demo\naxis = collective\nmin = -10 w0\nmax = 10 w0\npoints = 201\nsize = 2\nbeta = 1 inv_w0\nspectral_exponent = 0\n";
        let cfg = parse_config(text, false).unwrap();
        assert_eq!(cfg.axis, Axis::Collective);
        assert_eq!((cfg.min, cfg.max, cfg.points), (-10.0, 10.0, 201));
        assert_eq!(cfg.spacing(), Spacing::Linear);
        assert_eq!(cfg.model.spectral_exponent, 0.0);
        assert_eq!(cfg.units, UnitSystem::Natural);
    }

    #[test]
    fn rejects_mixed_units() {
        let err = parse_config("coupling = 5 w0\nomega0 = 2e9 rad_s\n", false).unwrap_err();
        assert!(err.to_string().contains("mixes unit systems"), "{err}");
        assert!(parse_config("coupling = 5 w0\n", true).is_err());
    }

    #[test]
    fn rejects_missing_and_misplaced_units() {
        assert!(parse_config("coupling = 5\n", false).is_err());
        assert!(parse_config("points = 5 w0\n", false).is_err());
        assert!(parse_config("beta = 1 w0\n", false).is_err());
        assert!(parse_config("beta = 1 furlong\n", false).is_err());
        assert!(parse_config("mystery = 1\n", false).is_err());
        assert!(parse_config("size = 2\nsize = 3\n", false).is_err());
    }

    #[test]
    fn temperature_converts_to_hbar_beta() {
        let cfg = parse_config("temperature = 0.02 K\nomega0 = 5e9 rad_s\n", false).unwrap();
        assert_eq!(cfg.units, UnitSystem::Si);
        let x = cfg.model.hbar_beta * 5e9;
        assert!((x - 1.909).abs() < 1e-3, "{x}");
    }

    #[test]
    fn dump_round_trips() {
        let text = "axis = size\nmin = 1\nmax = 20\npoints = 20\nalpha = inf\nconvention = circular\nbeta = 10 inv_w0\ncoupling = 0.75 w0\namplitude = 0.001\ncpmg = true\nprofile = per_spin\nformat = json\noutput = out.json\n";
        let cfg = parse_config(text, false).unwrap();
        let again = parse_config(&dump_config(&cfg), false).unwrap();
        assert_eq!(cfg, again);
        let si = parse_config("omega0 = 2e9 rad_s\ncoupling = 5e9 rad_s\nbeta = inf s\nmin = 1e-12 s\nmax = 1e-9 s\n", false).unwrap();
        assert_eq!(parse_config(&dump_config(&si), false).unwrap(), si);
    }

    #[test]
    fn grid_validation() {
        let mut cfg = SweepConfig { points: 1, ..Default::default() };
        assert!(cfg.validate().is_err());
        cfg.points = 5;
        cfg.min = 3.0;
        cfg.max = 1.0;
        assert!(cfg.validate().is_err());
        cfg.min = -1.0;
        cfg.max = 1.0;
        cfg.spacing = Some(Spacing::Log);
        assert!(cfg.validate().is_err());
        cfg.axis = Axis::Time;
        cfg.spacing = Some(Spacing::Linear);
        assert!(cfg.validate().is_err());
        cfg.min = 0.0;
        cfg.validate().unwrap();
    }
}
