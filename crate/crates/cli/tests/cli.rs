use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cfsim_cli::commands;
use cfsim_cli::config::{parse_config, Overrides, DEFAULT_CONFIG};
use cfsim_cli::emit::Cell;
use cfsim_cli::sweep::{run_sweep, Records};
use cfsim_core::model::DeviceParams;

fn cfsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfsim")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Shipped configuration with its sweep section replaced.
fn with_sweep(sweep: &str) -> String {
    let head = &DEFAULT_CONFIG[..DEFAULT_CONFIG.find("[sweep]").unwrap()];
    format!("{head}{sweep}\n[outputs]\nformat = \"both\"\n")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p
}

fn num(c: &Cell) -> f64 {
    match c {
        Cell::Num(x) => *x,
        other => panic!("expected a number, got {other:?}"),
    }
}

fn column(columns: &[String], name: &str) -> usize {
    columns.iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"))
}

const SMALL_GATE_SWEEP: &str = r#"[sweep]
kind = "gate"

[[sweep.axes]]
path = "point.omega_1"
start = "40 MHz"
stop = "120 MHz"
count = 3

[[sweep.axes]]
path = "point.epsilon"
start = "-30 MHz"
stop = "30 MHz"
count = 3
"#;

#[test]
fn shipped_config_is_the_reference_device() {
    let loaded = parse_config(None, &Overrides::default()).unwrap();
    let c = &loaded.config;
    assert_eq!(c.device, DeviceParams::paper_device());
    assert_eq!(c.simulation.gate_time, 100.0);
    assert_eq!(loaded.config.axes.len(), 2);
}

#[test]
fn missing_dt_is_defaulted_and_echoed() {
    let out = cfsim(&["spectrum"]);
    assert!(out.status.success());
    assert!(stderr(&out).contains("simulation.dt = 0.001 ns (default)"), "{}", stderr(&out));

    let out = cfsim(&["--dt", "0.5 ps", "spectrum"]);
    assert!(out.status.success());
    assert!(!stderr(&out).contains("simulation.dt"));
}

#[test]
fn bad_fields_are_named_in_errors() {
    let dir = tempfile::tempdir().unwrap();
    let text = DEFAULT_CONFIG.replace("levels = [5, 5, 4]", "levels = [5, -1, 4]");
    let p = write_config(dir.path(), &text);
    let out = cfsim(&["--config", p.to_str().unwrap(), "spectrum"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("simulation.levels[1]"), "{}", stderr(&out));

    let text = DEFAULT_CONFIG.replace("omega_c = \"8.5 GHz\"", "omega_c = \"8.5\"");
    let p = write_config(dir.path(), &text);
    let out = cfsim(&["--config", p.to_str().unwrap(), "spectrum"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("device.omega_c"), "{}", stderr(&out));
}

#[test]
fn sweep_feasibility_follows_the_detuning_bound() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(dir.path(), &with_sweep(SMALL_GATE_SWEEP));
    let loaded = parse_config(Some(&p), &Overrides::default()).unwrap();
    let out = run_sweep(&loaded, 2).unwrap();
    let Records::Gate(records) = &out.records else { panic!("gate sweep") };
    assert_eq!(records.len(), 9);
    let bound = 2.0 * std::f64::consts::PI / loaded.config.simulation.gate_time;
    for r in records {
        assert_eq!(r.feasible, r.epsilon.abs() <= bound * (1.0 + 1e-9), "eps {}", r.epsilon);
        assert_eq!(r.fidelity.is_some(), r.feasible);
        if let Some(f) = r.fidelity {
            assert!(f > 0.99, "fidelity {f}");
        }
    }
    // eps = +-30 MHz lies outside 2 pi / 100 ns = 10 MHz; eps = 0 inside
    assert_eq!(records.iter().filter(|r| r.feasible).count(), 3);
}

#[test]
fn invert_hits_the_iswap_target() {
    let loaded = parse_config(None, &Overrides::default()).unwrap();
    let out = commands::invert(&loaded.config, true).unwrap();
    let t = &out.table;
    let row = &t.rows[0];
    let get = |name: &str| num(&row[column(&t.columns, name)]);
    assert!((get("theta_pred_deg") - 90.0).abs() < 1e-6);
    assert!(get("phi_pred_deg").abs() < 1e-6);
    assert!((get("theta_deg") - 90.0).abs() < 1.0, "theta {}", get("theta_deg"));
    // realized phase carries AC Stark shifts outside the phase law (about -3.5 deg)
    assert!(get("phi_deg").abs() < 5.0, "phi {}", get("phi_deg"));
    assert!(get("leakage") < 5e-3);
}

#[test]
fn single_point_sweep_matches_gate() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = r#"[sweep]
kind = "gate"

[[sweep.axes]]
path = "point.omega_1"
start = "100 MHz"
stop = "100 MHz"
count = 1
"#;
    let p = write_config(dir.path(), &with_sweep(sweep));
    let loaded = parse_config(Some(&p), &Overrides::default()).unwrap();
    let swept = commands::sweep(&loaded, 1).unwrap().table;
    let gate = commands::gate(&loaded.config).unwrap().table;
    assert_eq!(swept.rows.len(), 1);
    // the sweep row carries one axis column after the index
    assert_eq!(swept.columns[1], "point.omega_1 [MHz]");
    assert_eq!(&swept.columns[2..], &gate.columns[1..]);
    assert_eq!(&swept.rows[0][2..], &gate.rows[0][1..]);
}

#[test]
fn sweep_output_is_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(dir.path(), &with_sweep(SMALL_GATE_SWEEP));
    let cfg = p.to_str().unwrap();
    let mut outputs = Vec::new();
    for workers in ["1", "3"] {
        let out_dir = dir.path().join(format!("w{workers}"));
        let out = cfsim(&["--config", cfg, "--workers", workers, "--out", out_dir.to_str().unwrap(), "sweep"]);
        assert!(out.status.success(), "{}", stderr(&out));
        let csv = std::fs::read(out_dir.join("sweep.csv")).unwrap();
        let json = std::fs::read(out_dir.join("sweep.json")).unwrap();
        outputs.push((csv, json));
    }
    assert_eq!(outputs[0], outputs[1]);

    let csv = String::from_utf8(outputs[0].0.clone()).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "# schema: cfsim-sweep/1");
    assert!(lines[1].starts_with("index,point.omega_1 [MHz],point.epsilon [MHz],omega_1_MHz"));
    // one row per grid point
    assert_eq!(lines.len(), 2 + 9);

    let summary: serde_json::Value = serde_json::from_slice(&outputs[0].1).unwrap();
    assert_eq!(summary["records"].as_array().unwrap().len(), 9);
    assert_eq!(summary["defaults"]["simulation.dt"], "0.001 ns");
}

/// Local minima of `ys`, as interpolated abscissae.
fn minima(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    (1..ys.len() - 1)
        .filter(|&i| ys[i] < ys[i - 1] && ys[i] <= ys[i + 1])
        .map(|i| {
            // vertex of |a (x - x0)| through the three points
            let (yl, y0, yr) = (ys[i - 1], ys[i], ys[i + 1]);
            let h = xs[i + 1] - xs[i];
            let slope = f64::max(yl - y0, yr - y0) / h;
            xs[i] + (yl - yr) / (2.0 * slope)
        })
        .collect()
}

#[test]
fn crosstalk_zeros_follow_bessel_stripes() {
    const J0_ZEROS: [f64; 3] = [2.404_825_557_695_773, 5.520_078_110_286_311, 8.653_727_912_911_012];
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/crosstalk.toml"))
        .unwrap()
        .replace("numeric = true", "numeric = false")
        .replace("count = 4", "count = 2")
        .replace("count = 19", "count = 451");
    let p = write_config(dir.path(), &text);
    let loaded = parse_config(Some(&p), &Overrides::default()).unwrap();
    let out = run_sweep(&loaded, 2).unwrap();
    let Records::Coupling(records) = &out.records else { panic!("coupling sweep") };
    assert_eq!(records.len(), 2 * 451);

    let mut slopes = Vec::new();
    for col in records.chunks(451) {
        let nu_2 = col[0].axes[0];
        let xs: Vec<f64> = col.iter().map(|r| r.axes[1]).collect();
        let ys: Vec<f64> = col.iter().map(|r| r.g_analytic.unwrap().abs()).collect();
        let found = minima(&xs, &ys);
        assert!(found.len() >= 2, "nu_2 = {nu_2}: {found:?}");
        // zero positions in Omega_2 / nu_2 are common to every column and
        // spaced like the J_0 zeros
        let s = found[0] / nu_2;
        for (k, z) in found.iter().zip(J0_ZEROS) {
            let ratio = (k / nu_2) / s;
            assert!((ratio - z / J0_ZEROS[0]).abs() < 0.01, "nu_2 = {nu_2}: {found:?}");
        }
        slopes.push(s);
    }
    assert!((slopes[0] - slopes[1]).abs() / slopes[0] < 0.01, "{slopes:?}");

    // the numeric coupling vanishes at the first analytic zero of the 30 MHz column
    let zero = slopes[0] * 30.0;
    let numeric = |amplitude: f64| {
        let text = text
            .replace("numeric = false", "numeric = true")
            .replace("amplitude = \"0 MHz\"", &format!("amplitude = \"{amplitude} MHz\""))
            .replace("frequency = \"35 MHz\"", "frequency = \"30 MHz\"");
        let p = write_config(dir.path(), &text);
        let cfg = parse_config(Some(&p), &Overrides::default()).unwrap().config;
        let out = commands::coupling(&cfg).unwrap();
        let t = &out.table;
        (num(&t.rows[0][column(&t.columns, "g_analytic_MHz")]), num(&t.rows[0][column(&t.columns, "g_numeric_MHz")]))
    };
    let (g0_analytic, g0_numeric) = numeric(0.0);
    assert!((g0_numeric - g0_analytic).abs() / g0_analytic < 0.01);
    let (_, g_zero) = numeric(zero);
    assert!(g_zero < 0.05 * g0_numeric, "numeric {g_zero} MHz at {zero} MHz");
}
