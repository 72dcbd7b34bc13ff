//! Tables and their CSV / JSON renderings.
//!
//! Frequencies are written in MHz, angles in degrees, populations and
//! fidelities as fractions. CSV numbers carry 6 significant digits.

use std::path::{Path, PathBuf};

use anyhow::Context;
use cfsim_core::to_mhz;
use serde_json::{json, Map, Value};

use crate::config::{Format, LoadedConfig};
use crate::sweep::{CouplingRecord, GateRecord, Records, SweepOutput};
use crate::units::sig;

pub const GATE_SCHEMA: &str = "cfsim-sweep/1";
pub const COUPLING_SCHEMA: &str = "cfsim-coupling/1";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => sig(*x, 6),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(_) | Cell::Empty => Value::Null,
            Cell::Int(i) => json!(i),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
        }
    }
}

fn num(x: Option<f64>) -> Cell {
    x.map_or(Cell::Empty, Cell::Num)
}

fn mhz(x: Option<f64>) -> Cell {
    num(x.map(to_mhz))
}

fn deg(x: Option<f64>) -> Cell {
    num(x.map(f64::to_degrees))
}

fn text(x: &Option<String>) -> Cell {
    x.as_ref().map_or(Cell::Empty, |s| Cell::Text(s.clone()))
}

/// Rows under named columns, tagged with a schema id.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub schema: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(schema: &str, columns: &[&str]) -> Self {
        Self { schema: schema.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// `# schema: <id>` followed by a header and one line per row.
    pub fn to_csv(&self) -> anyhow::Result<String> {
        let mut out = format!("# schema: {}\n", self.schema).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&self.columns)?;
            for row in &self.rows {
                w.write_record(row.iter().map(Cell::csv))?;
            }
            w.flush()?;
        }
        Ok(String::from_utf8(out)?)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let m: Map<String, Value> = self.columns.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                    Value::Object(m)
                })
                .collect(),
        )
    }

    /// Plain aligned text for the terminal.
    pub fn to_text(&self) -> String {
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::csv).collect()).collect();
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|j| cells.iter().map(|r| r[j].len()).chain([self.columns[j].len()]).max().unwrap_or(0))
            .collect();
        let line = |items: Vec<&str>| {
            items
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let mut out = vec![line(self.columns.iter().map(String::as_str).collect())];
        out.extend(cells.iter().map(|r| line(r.iter().map(String::as_str).collect())));
        out.join("\n") + "\n"
    }
}

fn with_axes(labels: &[String], rest: &[&str]) -> Vec<String> {
    let mut cols = vec!["index".to_string()];
    cols.extend(labels.iter().cloned());
    cols.extend(rest.iter().map(|s| s.to_string()));
    cols
}

pub const GATE_COLUMNS: [&str; 15] = [
    "omega_1_MHz",
    "nu_1_MHz",
    "nu_2_MHz",
    "epsilon_MHz",
    "omega_2_MHz",
    "feasible",
    "theta_deg",
    "phi_deg",
    "leakage",
    "fidelity",
    "theta_pred_deg",
    "phi_pred_deg",
    "fidelity_pred",
    "pulse_factor",
    "error",
];

fn gate_row(r: &GateRecord) -> Vec<Cell> {
    let mut row = vec![Cell::Int(r.index as i64)];
    row.extend(r.axes.iter().map(|&v| Cell::Num(v)));
    row.extend([
        Cell::Num(to_mhz(r.omega_1)),
        Cell::Num(to_mhz(r.nu_1)),
        Cell::Num(to_mhz(r.nu_2)),
        Cell::Num(to_mhz(r.epsilon)),
        mhz(r.omega_2),
        Cell::Bool(r.feasible),
        deg(r.theta),
        deg(r.phi),
        num(r.leakage),
        num(r.fidelity),
        deg(r.theta_predicted),
        deg(r.phi_predicted),
        num(r.fidelity_predicted),
        num(r.pulse_factor),
        text(&r.error),
    ]);
    row
}

fn coupling_row(r: &CouplingRecord) -> Vec<Cell> {
    let mut row = vec![Cell::Int(r.index as i64)];
    row.extend(r.axes.iter().map(|&v| Cell::Num(v)));
    let deviation = match (r.g_analytic, r.g_numeric) {
        (Some(a), Some(n)) if a != 0.0 => Some((n - a.abs()) / a.abs()),
        _ => None,
    };
    row.extend([
        mhz(r.drive_frequency),
        mhz(r.g_analytic.map(f64::abs)),
        mhz(r.g_numeric),
        num(deviation),
        text(&r.error),
    ]);
    row
}

pub fn gate_table(labels: &[String], records: &[GateRecord]) -> Table {
    let cols = with_axes(labels, &GATE_COLUMNS);
    let mut t = Table { schema: GATE_SCHEMA.into(), columns: cols, rows: Vec::new() };
    for r in records {
        t.push(gate_row(r));
    }
    t
}

pub fn coupling_table(labels: &[String], records: &[CouplingRecord]) -> Table {
    let cols =
        with_axes(labels, &["drive_frequency_MHz", "g_analytic_MHz", "g_numeric_MHz", "relative_deviation", "error"]);
    let mut t = Table { schema: COUPLING_SCHEMA.into(), columns: cols, rows: Vec::new() };
    for r in records {
        t.push(coupling_row(r));
    }
    t
}

pub fn sweep_table(out: &SweepOutput) -> Table {
    match &out.records {
        Records::Gate(r) => gate_table(&out.axis_labels, r),
        Records::Coupling(r) => coupling_table(&out.axis_labels, r),
    }
}

fn min_mean_max(xs: impl Iterator<Item = f64>) -> Value {
    let v: Vec<f64> = xs.filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return Value::Null;
    }
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    json!({ "min": min, "mean": v.iter().sum::<f64>() / v.len() as f64, "max": max })
}

/// Aggregate numbers of a sweep.
pub fn stats(records: &Records) -> Value {
    match records {
        Records::Gate(r) => json!({
            "points": r.len(),
            "feasible": r.iter().filter(|x| x.feasible).count(),
            "reported": r.iter().filter(|x| x.fidelity.is_some()).count(),
            "errors": r.iter().filter(|x| x.error.is_some()).count(),
            "fidelity": min_mean_max(r.iter().filter_map(|x| x.fidelity)),
            "leakage": min_mean_max(r.iter().filter_map(|x| x.leakage)),
        }),
        Records::Coupling(r) => json!({
            "points": r.len(),
            "numeric": r.iter().filter(|x| x.g_numeric.is_some()).count(),
            "errors": r.iter().filter(|x| x.error.is_some()).count(),
            "relative_deviation": min_mean_max(r.iter().filter_map(|x| match (x.g_analytic, x.g_numeric) {
                (Some(a), Some(n)) if a != 0.0 => Some(((n - a.abs()) / a.abs()).abs()),
                _ => None,
            })),
        }),
    }
}

/// Run summary: configuration echo, filled defaults, overrides, stats and
/// the table rows.
pub fn summary(loaded: &LoadedConfig, command: &str, table: &Table, stats: Value) -> anyhow::Result<Value> {
    let o = &loaded.overrides;
    Ok(json!({
        "schema": table.schema,
        "command": command,
        "config": serde_json::to_value(&loaded.document)?,
        "defaults": loaded.config.defaults,
        "overrides": {
            "dt_ns": o.dt,
            "integrator": o.integrator.map(|i| format!("{i:?}").to_lowercase()),
            "format": o.format.map(|f| format!("{f:?}").to_lowercase()),
        },
        "stats": stats,
        "columns": table.columns,
        "records": table.to_json(),
    }))
}

/// Writes `<stem>.csv` and/or `<stem>.json` under `dir`.
pub fn write_outputs(
    dir: &Path,
    stem: &str,
    table: &Table,
    summary: &Value,
    format: Format,
) -> anyhow::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    if format.csv() {
        let p = dir.join(format!("{stem}.csv"));
        std::fs::write(&p, table.to_csv()?).with_context(|| format!("writing {}", p.display()))?;
        written.push(p);
    }
    if format.json() {
        let p = dir.join(format!("{stem}.json"));
        std::fs::write(&p, serde_json::to_string_pretty(summary)? + "\n")
            .with_context(|| format!("writing {}", p.display()))?;
        written.push(p);
    }
    Ok(written)
}
