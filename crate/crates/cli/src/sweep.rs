//! Grid evaluation and tabular output.

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use thermoprobe::estimation::high_beta_approx;
use thermoprobe::{optimize, sensitivity, Error, Optimum};

use crate::config::{Axis, Spacing, SweepConfig};
use crate::error::{CliError, CliResult};

pub const COLUMNS: [&str; 5] = ["regime", "Gamma", "S_max", "t_opt", "S_max_high_beta_approx"];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub regime: String,
    pub gamma: f64,
    pub optimum: Optimum,
    pub approx: Option<f64>,
    /// S at the swept time (time axis only).
    pub sensitivity: Option<f64>,
}

pub fn grid_values(cfg: &SweepConfig) -> Vec<f64> {
    let n = cfg.points;
    let raw: Vec<f64> = (0..n)
        .map(|i| {
            let f = i as f64 / (n - 1) as f64;
            match cfg.spacing() {
                Spacing::Linear => cfg.min + (cfg.max - cfg.min) * i as f64 / (n - 1) as f64,
                Spacing::Log => (cfg.min.ln() + (cfg.max.ln() - cfg.min.ln()) * f).exp(),
            }
        })
        .collect();
    if cfg.axis == Axis::Size {
        let mut sizes: Vec<f64> = raw.iter().map(|v| v.round()).collect();
        sizes.dedup();
        sizes
    } else {
        raw
    }
}

fn evaluate(cfg: &SweepConfig, value: f64) -> CliResult<SweepRow> {
    let mut model = cfg.model;
    match cfg.axis {
        Axis::Beta => model.hbar_beta = value,
        Axis::Size => model.size = value as usize,
        Axis::Time => {}
        Axis::Collective => {
            let unit = model.geometry()?.with_coupling(1.0)?;
            let per_unit = unit.collective_coupling_uniform();
            if per_unit == 0.0 {
                return Err(CliError::Invalid("geometry has no collective coupling to scale".into()));
            }
            model.coupling = value / per_unit;
        }
    }
    let run = model.run(cfg.units)?;
    let bundle = run.rates()?;
    let optimum = optimize(&run)?;
    let approx = match high_beta_approx(&run) {
        Ok(a) => Some(a.s_max),
        Err(Error::WrongRegime { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let s = if cfg.axis == Axis::Time {
        Some(if value == 0.0 { 0.0 } else { sensitivity(&run.at_time(value))?.sensitivity })
    } else {
        None
    };
    Ok(SweepRow {
        value,
        regime: bundle.regime_label().to_string(),
        gamma: bundle.gamma,
        optimum,
        approx,
        sensitivity: s,
    })
}

/// Evaluates every grid point in parallel; rows come back in grid order.
pub fn run_sweep(cfg: &SweepConfig) -> CliResult<Vec<SweepRow>> {
    cfg.validate()?;
    let values = grid_values(cfg);
    let rows: Vec<CliResult<SweepRow>> = values.par_iter().map(|&v| evaluate(cfg, v)).collect();
    rows.into_iter().collect()
}

pub fn format_number(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.8e}")
    }
}

fn cells(row: &SweepRow, axis: Axis) -> Vec<(String, Value)> {
    let num = |x: f64| -> Value {
        if x.is_finite() {
            json!(x)
        } else {
            json!(format_number(x))
        }
    };
    let (s_max, t_opt) = match row.optimum {
        Optimum::Finite { s_max, t_opt } => (num(s_max), num(t_opt)),
        Optimum::Unbounded => (json!("inf"), json!("inf")),
        Optimum::Diverged => (json!("0"), json!("0")),
    };
    let value = if axis == Axis::Size { json!(row.value as usize) } else { num(row.value) };
    let mut out = vec![
        (axis.name().to_string(), value),
        ("regime".into(), json!(row.regime)),
        ("Gamma".into(), num(row.gamma)),
        ("S_max".into(), s_max),
        ("t_opt".into(), t_opt),
        ("S_max_high_beta_approx".into(), row.approx.map_or(Value::Null, num)),
    ];
    if let Some(s) = row.sensitivity {
        out.push(("S".into(), num(s)));
    }
    out
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_u64() => n.to_string(),
        Value::Number(n) => format_number(n.as_f64().unwrap_or(f64::NAN)),
        other => other.to_string(),
    }
}

pub fn header(axis: Axis) -> Vec<String> {
    let mut h = vec![axis.name().to_string()];
    h.extend(COLUMNS.iter().map(|s| s.to_string()));
    if axis == Axis::Time {
        h.push("S".into());
    }
    h
}

pub fn to_csv(axis: Axis, rows: &[SweepRow]) -> String {
    let mut out = header(axis).join(",");
    out.push('\n');
    for row in rows {
        let line: Vec<String> = cells(row, axis).iter().map(|(_, v)| csv_cell(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn to_json(axis: Axis, rows: &[SweepRow]) -> Value {
    Value::Array(rows.iter().map(|r| Value::Object(cells(r, axis).into_iter().collect::<Map<_, _>>())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ModelParams;

    fn beta_sweep(coupling: f64) -> SweepConfig {
        SweepConfig {
            model: ModelParams { coupling, ..Default::default() },
            axis: Axis::Beta,
            min: 0.5,
            max: 20.0,
            points: 40,
            ..Default::default()
        }
    }

    #[test]
    fn log_grid_hits_the_endpoints() {
        let g = grid_values(&beta_sweep(5.0));
        assert_eq!(g.len(), 40);
        assert!((g[0] - 0.5).abs() < 1e-15 && (g[39] - 20.0).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn linear_collective_grid_contains_the_boundary() {
        let cfg = SweepConfig { axis: Axis::Collective, min: -10.0, max: 10.0, points: 201, ..Default::default() };
        let g = grid_values(&cfg);
        assert!(g.contains(&1.0) && g.contains(&-1.0) && g.contains(&0.0));
    }

    #[test]
    fn size_grid_is_integral() {
        let cfg = SweepConfig { axis: Axis::Size, min: 1.0, max: 5.0, points: 9, ..Default::default() };
        assert_eq!(grid_values(&cfg), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn ferromagnet_improves_with_beta() {
        let rows = run_sweep(&beta_sweep(5.0)).unwrap();
        let s: Vec<f64> = rows.iter().map(|r| r.optimum.s_max()).collect();
        assert!(s.windows(2).all(|w| w[1] > w[0]));
        assert!(rows.iter().all(|r| r.regime == "strong_fm" && r.approx.is_some()));
    }

    #[test]
    fn csv_layout() {
        let rows = run_sweep(&beta_sweep(0.0)).unwrap();
        let csv = to_csv(Axis::Beta, &rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "beta,regime,Gamma,S_max,t_opt,S_max_high_beta_approx");
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 6);
        assert_eq!(first[1], "weak");
        assert_eq!(first[5], "");
        assert!(first[0].contains('e'));
        let json = to_json(Axis::Beta, &rows);
        assert_eq!(json.as_array().unwrap().len(), rows.len());
        assert!(json[0]["S_max_high_beta_approx"].is_null());
    }

    #[test]
    fn special_values_serialise_as_strings() {
        let row = SweepRow {
            value: 1.0,
            regime: "boundary".into(),
            gamma: f64::INFINITY,
            optimum: Optimum::Diverged,
            approx: None,
            sensitivity: None,
        };
        let csv = to_csv(Axis::Collective, std::slice::from_ref(&row));
        assert!(csv.lines().nth(1).unwrap().ends_with("boundary,inf,0,0,"));
        let unbounded = SweepRow { optimum: Optimum::Unbounded, gamma: 0.0, ..row };
        let csv = to_csv(Axis::Collective, &[unbounded]);
        assert!(csv.contains(",inf,inf,"));
    }

    #[test]
    fn parallel_output_is_deterministic() {
        let cfg = beta_sweep(3.0);
        let a = to_csv(Axis::Beta, &run_sweep(&cfg).unwrap());
        let b = to_csv(Axis::Beta, &run_sweep(&cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn time_axis_adds_sensitivity() {
        let cfg = SweepConfig {
            model: ModelParams { coupling: 5.0, ..Default::default() },
            axis: Axis::Time,
            min: 0.0,
            max: 2000.0,
            points: 11,
            ..Default::default()
        };
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows[0].sensitivity, Some(0.0));
        let peak = rows[0].optimum.s_max();
        assert!(rows.iter().all(|r| r.sensitivity.unwrap() <= peak * (1.0 + 1e-12)));
        assert!(to_csv(Axis::Time, &rows).lines().next().unwrap().ends_with(",S"));
    }
}
