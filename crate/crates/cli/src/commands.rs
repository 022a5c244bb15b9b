use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use thermoprobe::quadrature::{xi_quadrature_oracle, QuadratureOptions};
use thermoprobe::redfield::{default_time_grid, oracle_report, OracleReport, StepControl};
use thermoprobe::scenario::{FluxReport, FluxVariant};
use thermoprobe::units::UnitSystem;
use thermoprobe::{rate_method_by_name, xi, Regime};

use crate::config::{
    apply_document, dump_config, parse_alpha, parse_convention, parse_document, parse_profile, Axis, ModelParams,
    OutputFormat, SweepConfig,
};
use crate::error::{CliError, CliResult};
use crate::figures::{preset_by_id, presets, write_figure};
use crate::sweep::{format_number, run_sweep, to_csv, to_json};

#[derive(Debug, Parser)]
#[command(name = "thermoprobe", version, about = "Sensitivity of Ising-coupled GHZ spin probes in a thermal bath")]
pub struct Cli {
    /// Emit JSON instead of tables/CSV.
    #[arg(long, global = true)]
    pub json: bool,
    /// Output file (sweep, rates, oracle) or directory (figure).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Interpret numeric flags in SI units (rad/s, s).
    #[arg(long, global = true)]
    pub si: bool,
    /// Read parameters from a `key = value unit` document.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    pub dump_config: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-spin decay rates and the cluster average Γ.
    Rates(RatesArgs),
    /// Sweep one parameter and tabulate Γ, S_max and t_opt.
    Sweep(SweepArgs),
    /// Regenerate the data behind a figure preset (or `list`).
    Figure { preset: String },
    /// Worked hardware scenarios.
    #[command(subcommand)]
    Scenario(ScenarioCommand),
    /// Cross-check the closed forms against the master-equation and quadrature oracles.
    Oracle(OracleArgs),
}

#[derive(Debug, Subcommand)]
pub enum ScenarioCommand {
    /// Flux-qubit examples: weak2, strongFM2, noninteracting4, strongFM4 or all.
    Flux { variant: String },
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// Cluster size 𝒩.
    #[arg(long = "n-spins")]
    pub n_spins: Option<usize>,
    /// Number of clusters M.
    #[arg(long)]
    pub clusters: Option<usize>,
    /// Range exponent α (a number, or `inf` for nearest neighbours).
    #[arg(long)]
    pub alpha: Option<String>,
    /// Pairwise coupling J.
    #[arg(long, allow_hyphen_values = true)]
    pub coupling: Option<f64>,
    /// ħβ (`inf` for zero temperature).
    #[arg(long)]
    pub beta: Option<f64>,
    /// Bath temperature in kelvin (SI only).
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Spectral density as `k,A` for f(Ω) = A·Ω^k; A = 0 decouples the bath.
    #[arg(long, allow_hyphen_values = true)]
    pub spectral: Option<String>,
    /// Reference frequency ω₀.
    #[arg(long)]
    pub omega0: Option<f64>,
    /// Frequency deviation Δω.
    #[arg(long, allow_hyphen_values = true)]
    pub deviation: Option<f64>,
    /// linear or circular.
    #[arg(long)]
    pub convention: Option<String>,
    /// uniform or per_spin.
    #[arg(long)]
    pub profile: Option<String>,
    /// Apply the CPMG sensitivity factor.
    #[arg(long)]
    pub cpmg: bool,
}

#[derive(Debug, Args)]
pub struct RatesArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Additional rate method to evaluate alongside the closed form.
    #[arg(long)]
    pub method: Option<String>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// beta, collective, size or time.
    #[arg(long)]
    pub axis: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// linear or log.
    #[arg(long)]
    pub spacing: Option<String>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Output times over [0, 3 t_opt].
    #[arg(long, default_value_t = 121)]
    pub points: usize,
}

impl ModelArgs {
    fn apply(&self, m: &mut ModelParams, units: UnitSystem) -> CliResult<()> {
        if let Some(v) = self.n_spins {
            m.size = v;
        }
        if let Some(v) = self.clusters {
            m.clusters = v;
        }
        if let Some(v) = &self.alpha {
            m.alpha = parse_alpha(v)?;
        }
        if let Some(v) = self.coupling {
            m.coupling = v;
        }
        if let Some(v) = self.beta {
            m.hbar_beta = v;
        }
        if let Some(t) = self.temperature {
            if units != UnitSystem::Si {
                return Err(CliError::Invalid("--temperature needs --si (or an SI config)".into()));
            }
            if self.beta.is_some() {
                return Err(CliError::Invalid("give either --beta or --temperature".into()));
            }
            m.hbar_beta = units.hbar_beta_from_temperature(t);
        }
        if let Some(s) = &self.spectral {
            let (k, a) = s
                .split_once(',')
                .ok_or_else(|| CliError::Invalid(format!("--spectral expects 'k,A', got '{s}'")))?;
            let parse = |x: &str| {
                x.trim().parse::<f64>().map_err(|_| CliError::Invalid(format!("--spectral: '{x}' is not a number")))
            };
            m.spectral_exponent = parse(k)?;
            m.amplitude = parse(a)?;
        }
        if let Some(v) = self.omega0 {
            m.omega0 = v;
        }
        if let Some(v) = self.deviation {
            m.deviation = v;
        }
        if let Some(v) = &self.convention {
            m.convention = parse_convention(v)?;
        }
        if let Some(v) = &self.profile {
            m.profile = parse_profile(v)?;
        }
        if self.cpmg {
            m.cpmg = true;
        }
        Ok(())
    }
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn base_config(cli: &Cli) -> CliResult<SweepConfig> {
    let base = SweepConfig { units: if cli.si { UnitSystem::Si } else { UnitSystem::Natural }, ..Default::default() };
    match &cli.config {
        Some(path) => apply_document(&base, &parse_document(&read_file(path)?)?, cli.si),
        None => Ok(base),
    }
}

fn emit(out: &mut dyn Write, path: Option<&Path>, body: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, body).map_err(|source| CliError::Io { path: p.display().to_string(), source }),
        None => out
            .write_all(body.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialise") + "\n"
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Rates(args) => rates(cli, args, out),
        Command::Sweep(args) => sweep(cli, args, out),
        Command::Figure { preset } => figure(cli, preset, out),
        Command::Scenario(ScenarioCommand::Flux { variant }) => flux(cli, variant, out),
        Command::Oracle(args) => oracle(cli, args, out),
    }
}

fn model_config(cli: &Cli, model: &ModelArgs) -> CliResult<SweepConfig> {
    let mut cfg = base_config(cli)?;
    model.apply(&mut cfg.model, cfg.units)?;
    Ok(cfg)
}

fn rates(cli: &Cli, args: &RatesArgs, out: &mut dyn Write) -> CliResult<()> {
    let cfg = model_config(cli, &args.model)?;
    if cli.dump_config {
        return emit(out, None, &dump_config(&cfg));
    }
    let m = cfg.model;
    let run = m.run(cfg.units)?;
    let bundle = run.rates()?;
    let extra = match &args.method {
        Some(name) => {
            let method = rate_method_by_name(name)?;
            let g = if method.name() == "closed-form" {
                bundle.gamma
            } else {
                method.gamma(&run.geom, run.probe.omega(), &run.bath)?
            };
            Some((method.name(), g))
        }
        None => None,
    };
    let body = if cli.json {
        let spins: Vec<_> = bundle
            .spins
            .iter()
            .enumerate()
            .map(|(i, s)| {
                json!({
                    "spin": i,
                    "collective": s.collective,
                    "regime": s.regime.label(),
                    "gamma_minus": s.gamma_minus,
                    "gamma_plus": s.gamma_plus,
                    "n_minus": s.n_minus,
                    "n_plus": s.n_plus,
                    "xi": format_json(s.xi),
                })
            })
            .collect();
        let mut v = json!({
            "units": cfg.units.label(),
            "spins": spins,
            "Gamma": format_json(bundle.gamma),
            "regime": bundle.regime_label(),
        });
        if let Some((name, g)) = extra {
            v["method"] = json!({"name": name, "Gamma": format_json(g)});
        }
        pretty(&v)
    } else {
        let mut s = String::new();
        let _ = writeln!(s, "spin,collective,regime,gamma_minus,gamma_plus,n_minus,n_plus,xi");
        for (i, r) in bundle.spins.iter().enumerate() {
            let _ = writeln!(
                s,
                "{i},{},{},{},{},{},{},{}",
                format_number(r.collective),
                r.regime.label(),
                format_number(r.gamma_minus),
                format_number(r.gamma_plus),
                format_number(r.n_minus),
                format_number(r.n_plus),
                format_number(r.xi)
            );
        }
        let _ = writeln!(s, "# Gamma = {} ({})", format_number(bundle.gamma), bundle.regime_label());
        if let Some((name, g)) = extra {
            let _ = writeln!(s, "# Gamma[{name}] = {}", format_number(g));
        }
        s
    };
    emit(out, cli.out.as_deref(), &body)
}

fn format_json(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(format_number(x))
    }
}

fn sweep(cli: &Cli, args: &SweepArgs, out: &mut dyn Write) -> CliResult<()> {
    let mut cfg = model_config(cli, &args.model)?;
    if let Some(a) = &args.axis {
        cfg.axis = a.parse::<Axis>()?;
    }
    if let Some(v) = args.min {
        cfg.min = v;
    }
    if let Some(v) = args.max {
        cfg.max = v;
    }
    if let Some(v) = args.points {
        cfg.points = v;
    }
    if let Some(s) = &args.spacing {
        cfg.spacing = Some(s.parse()?);
    }
    if cli.json {
        cfg.format = OutputFormat::Json;
    }
    if let Some(p) = &cli.out {
        cfg.output = Some(p.clone());
    }
    cfg.validate()?;
    if cli.dump_config {
        return emit(out, None, &dump_config(&cfg));
    }
    let rows = run_sweep(&cfg)?;
    let body = match cfg.format {
        OutputFormat::Csv => to_csv(cfg.axis, &rows),
        OutputFormat::Json => pretty(&to_json(cfg.axis, &rows)),
    };
    emit(out, cfg.output.as_deref(), &body)
}

fn figure(cli: &Cli, id: &str, out: &mut dyn Write) -> CliResult<()> {
    if id == "list" {
        let mut s = String::new();
        for p in presets() {
            let _ = writeln!(s, "{:<6} {}", p.id(), p.summary());
        }
        return emit(out, None, &s);
    }
    let preset = preset_by_id(id)?;
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let format = if cli.json { OutputFormat::Json } else { OutputFormat::Csv };
    let paths = write_figure(preset, &dir, format)?;
    let mut s = String::new();
    for p in paths {
        let _ = writeln!(s, "{}", p.display());
    }
    emit(out, None, &s)
}

fn flux_json(r: &FluxReport) -> serde_json::Value {
    let p = r.parameters;
    json!({
        "variant": r.variant.name(),
        "spins": p.spins,
        "omega0_rad_s": p.omega0,
        "coupling_rad_s": p.coupling,
        "collective_rad_s": r.collective,
        "t1_s": p.t1,
        "temperature_K": p.temperature,
        "cpmg": p.cpmg,
        "cpmg_factor": thermoprobe::estimation::CPMG_FACTOR,
        "Gamma_per_s": r.gamma,
        "S_max_per_Hz": format_json(r.optimum.s_max()),
        "t_opt_s": format_json(r.optimum.t_opt()),
    })
}

fn flux(cli: &Cli, variant: &str, out: &mut dyn Write) -> CliResult<()> {
    let variants: Vec<FluxVariant> =
        if variant == "all" { FluxVariant::ALL.to_vec() } else { vec![variant.parse::<FluxVariant>()?] };
    let reports = variants.into_iter().map(|v| v.report()).collect::<Result<Vec<_>, _>>()?;
    let body = if cli.json {
        pretty(&serde_json::Value::Array(reports.iter().map(flux_json).collect()))
    } else {
        let mut s = String::new();
        for r in &reports {
            let p = r.parameters;
            let _ = writeln!(s, "flux qubit scenario {}", r.variant);
            let _ = writeln!(s, "  spins           {}", p.spins);
            let _ = writeln!(s, "  omega0          {} rad/s", format_number(p.omega0));
            let _ = writeln!(s, "  coupling J      {} rad/s (collective {})", format_number(p.coupling), format_number(r.collective));
            let _ = writeln!(s, "  T1              {} s", format_number(p.t1));
            let _ = writeln!(s, "  temperature     {} K", p.temperature);
            let _ = writeln!(s, "  CPMG factor     {}", format_number(thermoprobe::estimation::CPMG_FACTOR));
            let _ = writeln!(s, "  Gamma           {} 1/s", format_number(r.gamma));
            let _ = writeln!(s, "  S_max           {} 1/Hz", format_number(r.optimum.s_max()));
            let _ = writeln!(s, "  t_opt           {} s", format_number(r.optimum.t_opt()));
        }
        s
    };
    emit(out, cli.out.as_deref(), &body)
}

pub const ORACLE_SECULAR_RATE_TOL: f64 = 5e-3;
pub const ORACLE_FULL_RATE_TOL: f64 = 5e-2;
pub const ORACLE_P_TOL: f64 = 1e-3;
pub const ORACLE_PHASE_TOL: f64 = 1e-3;
pub const ORACLE_QUADRATURE_TOL: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    /// `None` when the check does not apply.
    pub passed: Option<bool>,
}

pub fn oracle_checks(report: &OracleReport, quadrature: &[(f64, f64, f64)]) -> Vec<Check> {
    let check = |name: &str, value: f64, tolerance: f64| Check {
        name: name.into(),
        value,
        tolerance,
        passed: Some(value <= tolerance),
    };
    let mut checks = vec![
        check("secular decay rate vs N*Gamma/2", report.secular.rate_error, ORACLE_SECULAR_RATE_TOL),
        check("secular p(t) vs closed form", report.secular.max_p_error, ORACLE_P_TOL),
        check("secular phase rate vs N*omega", report.secular.phase_error, ORACLE_PHASE_TOL),
    ];
    let mut full = check("full decay rate vs N*Gamma/2", report.full.rate_error, ORACLE_FULL_RATE_TOL);
    if !report.full.well_separated() {
        full.passed = None;
    }
    checks.push(full);
    for &(collective, closed, quad) in quadrature {
        let err = if closed == 0.0 { quad.abs() } else { ((quad - closed) / closed).abs() };
        checks.push(check(&format!("quadrature xi at J_i = {}", format_number(collective)), err, ORACLE_QUADRATURE_TOL));
    }
    checks
}

fn oracle(cli: &Cli, args: &OracleArgs, out: &mut dyn Write) -> CliResult<()> {
    let cfg = model_config(cli, &args.model)?;
    if cli.dump_config {
        return emit(out, None, &dump_config(&cfg));
    }
    let mut model = cfg.model;
    model.cpmg = false;
    if model.clusters != 1 {
        model.clusters = 1;
    }
    let run = model.run(cfg.units)?;
    let times = default_time_grid(&run, args.points)?;
    let report = oracle_report(&run, &times, &StepControl::default())?;

    let omega = run.probe.omega();
    let mut couplings = run.geom.collective_couplings();
    couplings.sort_by(|a, b| a.partial_cmp(b).unwrap());
    couplings.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(1.0));
    let mut quadrature = Vec::new();
    for c in couplings {
        if Regime::classify(c, omega) == Regime::Boundary {
            continue;
        }
        let closed = xi(c, omega, &run.bath)?.xi;
        let est = xi_quadrature_oracle(c, omega, &run.bath, &QuadratureOptions::default())?;
        quadrature.push((c, closed, est.value));
    }
    let checks = oracle_checks(&report, &quadrature);

    let body = if cli.json {
        let rows = |fit: &thermoprobe::redfield::GeneratorFit| serde_json::to_value(fit).expect("serialisable");
        pretty(&json!({
            "size": report.size,
            "omega": report.omega,
            "Gamma": report.gamma,
            "t_opt": format_json(report.t_opt),
            "secular": rows(&report.secular),
            "full": rows(&report.full),
            "quadrature": quadrature.iter().map(|(c, a, b)| json!({"collective": c, "closed": a, "quadrature": b})).collect::<Vec<_>>(),
            "checks": checks.iter().map(|c| json!({"name": c.name, "value": c.value, "tolerance": c.tolerance, "passed": c.passed})).collect::<Vec<_>>(),
        }))
    } else {
        let mut s = String::from("generator,t,lambda_abs,lambda_closed,p_oracle,p_closed\n");
        for fit in [&report.secular, &report.full] {
            let label = if fit.secular { "secular" } else { "full" };
            for r in &fit.rows {
                let _ = writeln!(
                    s,
                    "{label},{},{},{},{},{}",
                    format_number(r.t),
                    format_number(r.lambda_abs),
                    format_number(r.lambda_closed),
                    format_number(r.p_oracle),
                    format_number(r.p_closed)
                );
            }
        }
        s
    };
    emit(out, cli.out.as_deref(), &body)?;

    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "oracle: N = {}, Gamma = {}, t_opt = {}, min eigenvalue (full) = {}",
        report.size,
        format_number(report.gamma),
        format_number(report.t_opt),
        format_number(report.full.min_eigenvalue)
    );
    for c in &checks {
        let status = match c.passed {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        };
        let _ = writeln!(summary, "{status} {} = {:.3e} (tol {:.1e})", c.name, c.value, c.tolerance);
    }
    eprint!("{summary}");
    let failed: Vec<&str> = checks.iter().filter(|c| c.passed == Some(false)).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::OracleFailed(failed.join("; ")))
    }
}
