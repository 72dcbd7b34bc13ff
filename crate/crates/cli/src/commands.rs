//! One function per subcommand. Each returns a table plus summary stats.

use anyhow::{anyhow, Context};
use cfsim_core::analytics::control::AmplitudeOptions;
use cfsim_core::analytics::toy::{toy_block_hamiltonians, two_level_return_probability};
use cfsim_core::analytics::{
    idle_zz_cancel, invert_targets, resonance_scan, solve_optimal_amplitude, AmplitudeSolution, ScanOptions,
};
use cfsim_core::dynamics::propagate::{propagate_generic, Input, Tracked};
use cfsim_core::dynamics::pulse::{optimize_pulse_factor, PulseOptions};
use cfsim_core::dynamics::EnvelopeSpec;
use cfsim_core::gate::gate_report;
use cfsim_core::model::{build_toy_dc_ac_hamiltonian, build_toy_hamiltonian, BasisIndex, TOY_LABELS};
use cfsim_core::numerics::C64;
use cfsim_core::protocol::{cfsim_tones, propagate_computational, CfsimDevice};
use cfsim_core::{to_ghz, to_mhz};
use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::config::{LoadedConfig, RunConfig};
use crate::emit::{self, Cell, Table};
use crate::sweep::{coupling_record, gate_record, resolve_tones, run_sweep};

/// Result of one subcommand.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    /// File stem of written outputs.
    pub stem: String,
    pub table: Table,
    pub stats: Value,
}

impl CommandOutput {
    fn new(stem: &str, table: Table, stats: Value) -> Self {
        Self { stem: stem.into(), table, stats }
    }
}

fn device(cfg: &RunConfig) -> anyhow::Result<CfsimDevice> {
    CfsimDevice::new(cfg.device.clone(), cfg.simulation.form).context("building the device model")
}

fn label(s: &str) -> BasisIndex {
    s.parse().expect("static label")
}

/// Dressed energies, overlaps and number coefficients.
pub fn spectrum(cfg: &RunConfig) -> anyhow::Result<CommandOutput> {
    let dev = device(cfg)?;
    let f = &dev.frame;
    let mut t = Table::new("cfsim-spectrum/1", &["label", "energy_GHz", "overlap", "n_1", "n_2", "n_c"]);
    let mut order: Vec<usize> = (0..f.dimension()).collect();
    order.sort_by(|&a, &b| f.energies[a].total_cmp(&f.energies[b]));
    for i in order {
        t.push(vec![
            Cell::Text(f.label(i).to_string()),
            Cell::Num(to_ghz(f.energies[i])),
            Cell::Num(f.overlaps[i]),
            Cell::Num(f.n_coeffs[0][i]),
            Cell::Num(f.n_coeffs[1][i]),
            Cell::Num(f.n_coeffs[2][i]),
        ]);
    }
    let c = &dev.constants;
    let stats = json!({
        "dimension": f.dimension(),
        "nu_1_MHz": to_mhz(c.nu_1),
        "gap_MHz": to_mhz(c.gap),
        "xi_zz_MHz": to_mhz(c.xi_zz),
        "iswap": c.iswap,
        "cphase": c.cphase,
        "warnings": f.warnings,
    });
    Ok(CommandOutput::new("spectrum", t, stats))
}

/// Analytic (and optionally numeric) coupling of the configured transition.
pub fn coupling(cfg: &RunConfig) -> anyhow::Result<CommandOutput> {
    let dev = device(cfg)?;
    let record = coupling_record(&dev, cfg, 0, Vec::new());
    let table = emit::coupling_table(&[], std::slice::from_ref(&record));
    let stats = emit::stats(&crate::sweep::Records::Coupling(vec![record]));
    Ok(CommandOutput::new("coupling", table, stats))
}

/// Tone-2 amplitude closing the CPHASE cycle at the configured point.
pub fn opt_amp(cfg: &RunConfig) -> anyhow::Result<CommandOutput> {
    let dev = device(cfg)?;
    let c = &dev.constants;
    let (nu_1, nu_2) = (cfg.point.nu_1.resolve(c), cfg.point.tone_2.nu_2(c));
    let t_g = cfg.simulation.gate_time;
    let solution = solve_optimal_amplitude(c, t_g, cfg.point.omega_1, nu_1, nu_2, &AmplitudeOptions::default());
    let mut t = Table::new(
        "cfsim-opt-amp/1",
        &["omega_1_MHz", "nu_1_MHz", "nu_2_MHz", "epsilon_MHz", "status", "omega_2_MHz", "g_2_MHz", "note"],
    );
    let head = [
        Cell::Num(to_mhz(cfg.point.omega_1)),
        Cell::Num(to_mhz(nu_1)),
        Cell::Num(to_mhz(nu_2)),
        Cell::Num(to_mhz(c.sideband_detuning(nu_2))),
    ];
    let tail = match &solution {
        AmplitudeSolution::Solved { omega_2, g_2 } => {
            [Cell::Text("solved".into()), Cell::Num(to_mhz(*omega_2)), Cell::Num(to_mhz(*g_2)), Cell::Empty]
        }
        AmplitudeSolution::Infeasible { detuning } => [
            Cell::Text("infeasible".into()),
            Cell::Empty,
            Cell::Empty,
            Cell::Text(format!("|epsilon| = {:.4} MHz exceeds 1/t_g", to_mhz(detuning.abs()))),
        ],
        AmplitudeSolution::Unsolvable { reason } => {
            [Cell::Text("unsolvable".into()), Cell::Empty, Cell::Empty, Cell::Text(reason.clone())]
        }
    };
    t.push(head.into_iter().chain(tail).collect());
    Ok(CommandOutput::new("opt-amp", t, serde_json::to_value(&solution)?))
}

/// Tone parameters for the target `(theta, phi)`, optionally propagated.
pub fn invert(cfg: &RunConfig, propagate: bool) -> anyhow::Result<CommandOutput> {
    let dev = device(cfg)?;
    let c = &dev.constants;
    let t_g = cfg.simulation.gate_time;
    let s =
        invert_targets(c, t_g, cfg.point.theta, cfg.point.phi, cfg.simulation.theta_law, &AmplitudeOptions::default())
            .context("inverting the target angles")?;
    let mut cols = vec![
        "theta_target_deg",
        "phi_target_deg",
        "omega_1_MHz",
        "omega_2_MHz",
        "nu_1_MHz",
        "nu_2_MHz",
        "epsilon_MHz",
        "theta_pred_deg",
        "phi_pred_deg",
        "iterations",
    ];
    let mut row = vec![
        Cell::Num(cfg.point.theta.to_degrees()),
        Cell::Num(cfg.point.phi.to_degrees()),
        Cell::Num(to_mhz(s.omega_1)),
        Cell::Num(to_mhz(s.omega_2)),
        Cell::Num(to_mhz(s.nu_1)),
        Cell::Num(to_mhz(s.nu_2)),
        Cell::Num(to_mhz(c.sideband_detuning(s.nu_2))),
        Cell::Num(s.theta.to_degrees()),
        Cell::Num(s.phi.to_degrees()),
        Cell::Int(s.iterations as i64),
    ];
    let mut stats = json!({ "solution": s });
    if propagate {
        let tones = cfsim_tones(s.omega_1, s.nu_1, s.omega_2, s.nu_2, &cfg.simulation.envelope_spec());
        let r = propagate_computational(&dev, &tones, t_g, &cfg.simulation.propagation())?;
        let report = gate_report(&r, &dev.frame, t_g, Some((cfg.point.theta, cfg.point.phi)))?;
        cols.extend(["theta_deg", "phi_deg", "leakage", "fidelity_target"]);
        row.extend([
            Cell::Num(report.theta.to_degrees()),
            Cell::Num(report.phi.to_degrees()),
            Cell::Num(report.leakage),
            Cell::Num(report.predicted.map_or(f64::NAN, |p| p.fidelity)),
        ]);
        stats["report"] = serde_json::to_value(&report)?;
    }
    let mut t = Table::new("cfsim-invert/1", &cols);
    t.push(row);
    Ok(CommandOutput::new("invert", t, stats))
}

/// Multi-photon resonance conditions of the configured tones.
pub fn resonances(cfg: &RunConfig) -> anyhow::Result<CommandOutput> {
    let dev = device(cfg)?;
    let tones = resolve_tones(&dev, cfg);
    let opts = ScanOptions {
        max_photons: cfg.resonances.max_photons,
        threshold: cfg.resonances.threshold,
        labels: cfg.resonances.labels.clone(),
    };
    let found = resonance_scan(&dev.frame, &tones, &opts)?;
    let mut t = Table::new("cfsim-resonances/1", &["upper", "lower", "n_c", "n_1", "n_2", "residual_MHz"]);
    for r in found.iter().filter(|r| r.upper != r.lower) {
        t.push(vec![
            Cell::Text(r.upper.clone()),
            Cell::Text(r.lower.clone()),
            Cell::Int(r.n_r.into()),
            Cell::Int(r.n_1.into()),
            Cell::Int(r.n_2.into()),
            Cell::Num(to_mhz(r.residual)),
        ]);
    }
    let stats = json!({ "resonances": t.rows.len() });
    Ok(CommandOutput::new("resonances", t, stats))
}

/// Population traces of the configured tones.
pub fn evolve(cfg: &RunConfig) -> anyhow::Result<CommandOutput> {
    let dev = device(cfg)?;
    let tones = resolve_tones(&dev, cfg);
    let e = &cfg.evolve;
    let inputs: Vec<Input> = e.inputs.iter().map(|&l| Input::dressed(&dev.frame, l)).collect::<Result<_, _>>()?;
    let tracked: Vec<Tracked> = e.tracked.iter().map(|&l| Tracked::dressed(&dev.frame, l)).collect::<Result<_, _>>()?;
    let r = dev.propagator.propagate(&tones, e.duration, &inputs, &tracked, &cfg.simulation.propagation())?;
    let mut cols = vec!["time_ns".to_string()];
    for i in &r.input_labels {
        for k in &r.tracked_labels {
            cols.push(format!("P_{i}_{k}"));
        }
    }
    let mut t = Table { schema: "cfsim-evolve/1".into(), columns: cols, rows: Vec::new() };
    for (s, &time) in r.time_grid.iter().enumerate() {
        let mut row = vec![Cell::Num(time)];
        for per_input in &r.traces {
            row.extend(per_input.iter().map(|trace| Cell::Num(trace[s])));
        }
        t.push(row);
    }
    let stats = json!({ "steps": r.steps, "dt_ns": r.dt, "max_drift": r.max_drift });
    Ok(CommandOutput::new("evolve", t, stats))
}

/// The configured operating point, as one sweep record.
pub fn gate(cfg: &RunConfig) -> anyhow::Result<CommandOutput> {
    let dev = device(cfg)?;
    let record = gate_record(&dev, cfg, 0, Vec::new());
    let table = emit::gate_table(&[], std::slice::from_ref(&record));
    let stats = emit::stats(&crate::sweep::Records::Gate(vec![record]));
    Ok(CommandOutput::new("gate", table, stats))
}

pub fn sweep(loaded: &LoadedConfig, workers: usize) -> anyhow::Result<CommandOutput> {
    if loaded.config.axes.is_empty() {
        return Err(anyhow!("sweep.axes is empty; add at least one axis"));
    }
    let out = run_sweep(loaded, workers)?;
    Ok(CommandOutput::new("sweep", emit::sweep_table(&out), emit::stats(&out.records)))
}

/// Toy-model populations next to the weak-drive block prediction.
pub fn toy(cfg: &RunConfig) -> anyhow::Result<CommandOutput> {
    let toy = &cfg.toy;
    let p = &toy.params;
    let dc_ac = p.dc_ac.is_some();
    let f_max =
        [p.detuning.abs(), (2.0 * p.detuning + p.anharmonicity).abs(), p.drives[0].frequency, p.drives[1].frequency]
            .into_iter()
            .chain(p.dc_ac.map(|d| d.frequency.max(d.delta_1.abs()).max(d.delta_2.abs())))
            .fold(p.coupling.abs(), f64::max);
    let dt = (0.05 / f_max.max(1e-9)).min(0.05);
    let steps = (toy.duration / dt).ceil() as usize;
    let mut psi0 = DMatrix::<C64>::zeros(5, 1);
    psi0[(toy.input, 0)] = C64::new(1.0, 0.0);
    let h = |t: f64| -> DMatrix<C64> {
        let m =
            if dc_ac { build_toy_dc_ac_hamiltonian(p, t).expect("dc_ac present") } else { build_toy_hamiltonian(p, t) };
        m.map(|x| C64::new(x, 0.0))
    };
    let ev = propagate_generic(h, 0.0, toy.duration, steps, &psi0, toy.samples);
    let blocks = toy_block_hamiltonians(p);
    let mut cols: Vec<String> = vec!["time_ns".into()];
    cols.extend(TOY_LABELS.iter().map(|l| format!("P_{l}")));
    let predicted = match (dc_ac, TOY_LABELS[toy.input]) {
        (false, "01") | (false, "10") => Some((blocks.iswap_coupling, blocks.iswap_detuning)),
        (false, "11") => Some((blocks.cphase_coupling, -blocks.epsilon)),
        _ => None,
    };
    if predicted.is_some() {
        cols.push(format!("P_{}_block", TOY_LABELS[toy.input]));
    }
    let mut t = Table { schema: "cfsim-toy/1".into(), columns: cols, rows: Vec::new() };
    for (k, &time) in ev.time_grid.iter().enumerate() {
        let mut row = vec![Cell::Num(time)];
        row.extend((0..5).map(|j| Cell::Num(ev.states[k][(j, 0)].norm_sqr())));
        if let Some((g, d)) = predicted {
            row.push(Cell::Num(two_level_return_probability(g, d, time)));
        }
        t.push(row);
    }
    let stats = json!({
        "steps": steps,
        "dt_ns": dt,
        "iswap_coupling_MHz": to_mhz(blocks.iswap_coupling),
        "cphase_coupling_MHz": to_mhz(blocks.cphase_coupling),
        "iswap_detuning_MHz": to_mhz(blocks.iswap_detuning),
        "epsilon_MHz": to_mhz(blocks.epsilon),
    });
    Ok(CommandOutput::new("toy", t, stats))
}

/// Off-resonant tone-2 setting that cancels the idle ZZ phase.
pub fn zz_idle(cfg: &RunConfig) -> anyhow::Result<CommandOutput> {
    let dev = device(cfg)?;
    let c = &dev.constants;
    let nu = cfg.zz_idle.tone.nu_2(c);
    let s = idle_zz_cancel(c, nu, &AmplitudeOptions::default()).context("solving the idle amplitude")?;
    let mut cols = vec!["nu_2_MHz", "epsilon_MHz", "omega_2_MHz", "g_MHz", "gate_time_ns", "xi_zz_MHz"];
    let mut row = vec![
        Cell::Num(to_mhz(nu)),
        Cell::Num(to_mhz(s.detuning)),
        Cell::Num(to_mhz(s.omega)),
        Cell::Num(to_mhz(s.g)),
        Cell::Num(s.gate_time),
        Cell::Num(to_mhz(c.xi_zz)),
    ];
    let mut stats = json!({ "solution": s });
    if cfg.zz_idle.propagate {
        let tones = cfsim_tones(0.0, c.nu_1, s.omega, nu, &EnvelopeSpec::rectangular());
        let r = propagate_computational(&dev, &tones, s.gate_time, &cfg.simulation.propagation())?;
        let report = gate_report(&r, &dev.frame, s.gate_time, Some((0.0, 0.0)))?;
        cols.extend(["phi_deg", "theta_deg", "leakage", "fidelity_identity"]);
        row.extend([
            Cell::Num(report.phi.to_degrees()),
            Cell::Num(report.theta.to_degrees()),
            Cell::Num(report.leakage),
            Cell::Num(report.predicted.map_or(f64::NAN, |p| p.fidelity)),
        ]);
        stats["report"] = serde_json::to_value(&report)?;
    }
    let mut t = Table::new("cfsim-zz-idle/1", &cols);
    t.push(row);
    Ok(CommandOutput::new("zz-idle", t, stats))
}

/// Flat-top envelope factor of tone 2 at the configured point.
pub fn pulse_opt(cfg: &RunConfig) -> anyhow::Result<CommandOutput> {
    let dev = device(cfg)?;
    let c = &dev.constants;
    let t_g = cfg.simulation.gate_time;
    let (nu_1, nu_2) = (cfg.point.nu_1.resolve(c), cfg.point.tone_2.nu_2(c));
    let omega_2 = match cfg.point.omega_2 {
        Some(w) => w,
        None => match solve_optimal_amplitude(c, t_g, cfg.point.omega_1, nu_1, nu_2, &AmplitudeOptions::default()) {
            AmplitudeSolution::Solved { omega_2, .. } => omega_2,
            other => return Err(anyhow!("no tone-2 amplitude at this point: {other:?}")),
        },
    };
    let envelope = EnvelopeSpec::default_flat_top(t_g);
    let tones = cfsim_tones(cfg.point.omega_1, nu_1, omega_2, nu_2, &envelope);
    let factor =
        optimize_pulse_factor(&dev.frame, &tones, 1, &[label("110"), label("020")], t_g, &PulseOptions::default())?;
    let mut t = Table::new("cfsim-pulse-opt/1", &["omega_2_MHz", "pulse_factor", "objective", "warning"]);
    t.push(vec![
        Cell::Num(to_mhz(omega_2)),
        Cell::Num(factor.gamma),
        Cell::Num(factor.objective),
        factor.warning.clone().map_or(Cell::Empty, Cell::Text),
    ]);
    Ok(CommandOutput::new("pulse-opt", t, serde_json::to_value(&factor)?))
}
