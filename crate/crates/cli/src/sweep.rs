//! Grid evaluation. Points run on a worker pool and come back in row-major
//! order over the axes, so output does not depend on the worker count.

use std::f64::consts::PI;
use std::sync::Arc;

use cfsim_core::analytics::control::AmplitudeOptions;
use cfsim_core::analytics::couplings::{g_multi, OffResonantTone};
use cfsim_core::dynamics::pulse::PulseOptions;
use cfsim_core::model::{CouplingForm, DeviceParams, DriveTone};
use cfsim_core::protocol::{
    floquet_resonance, measure_coupling, run_point, CfsimDevice, CouplingMeasurement, GateSettings,
};
use cfsim_core::spectrum::coupling_constants;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{resolve, set_path, strip_sweep, LoadedConfig, RunConfig, SweepKind};

/// One gate evaluation. Angles in rad, frequencies in rad/ns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateRecord {
    pub index: usize,
    pub axes: Vec<f64>,
    pub omega_1: f64,
    pub nu_1: f64,
    pub nu_2: f64,
    pub epsilon: f64,
    pub omega_2: Option<f64>,
    pub feasible: bool,
    pub theta: Option<f64>,
    pub phi: Option<f64>,
    pub leakage: Option<f64>,
    pub fidelity: Option<f64>,
    pub theta_predicted: Option<f64>,
    pub phi_predicted: Option<f64>,
    /// Fidelity of the numeric gate against the predicted angles.
    pub fidelity_predicted: Option<f64>,
    pub pulse_factor: Option<f64>,
    pub error: Option<String>,
}

/// One coupling evaluation, rad/ns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingRecord {
    pub index: usize,
    pub axes: Vec<f64>,
    /// Frequency of the resonant tone actually used.
    pub drive_frequency: Option<f64>,
    pub g_analytic: Option<f64>,
    pub g_numeric: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Records {
    Gate(Vec<GateRecord>),
    Coupling(Vec<CouplingRecord>),
}

impl Records {
    pub fn len(&self) -> usize {
        match self {
            Records::Gate(r) => r.len(),
            Records::Coupling(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub axis_labels: Vec<String>,
    pub records: Records,
}

/// Devices are shared between points with identical device parameters.
struct DeviceCache {
    entries: Vec<(DeviceParams, CouplingForm, Result<Arc<CfsimDevice>, String>)>,
}

impl DeviceCache {
    fn build(configs: &[Result<RunConfig, String>]) -> Self {
        let mut keys: Vec<(DeviceParams, CouplingForm)> = Vec::new();
        for c in configs.iter().flatten() {
            let key = (c.device.clone(), c.simulation.form);
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        let built: Vec<_> = keys
            .par_iter()
            .map(|(d, f)| CfsimDevice::new(d.clone(), *f).map(Arc::new).map_err(|e| e.to_string()))
            .collect();
        Self { entries: keys.into_iter().zip(built).map(|((d, f), b)| (d, f, b)).collect() }
    }

    fn get(&self, c: &RunConfig) -> Result<Arc<CfsimDevice>, String> {
        self.entries
            .iter()
            .find(|(d, f, _)| *d == c.device && *f == c.simulation.form)
            .map(|(_, _, b)| b.clone())
            .expect("device cached for every valid point")
    }
}

/// Evaluates every grid point of `loaded` on `workers` threads.
pub fn run_sweep(loaded: &LoadedConfig, workers: usize) -> anyhow::Result<SweepOutput> {
    let axes = &loaded.config.axes;
    let base = strip_sweep(&loaded.document);
    let shape: Vec<usize> = axes.iter().map(|a| a.values.len()).collect();
    let total: usize = shape.iter().product();
    let points: Vec<Vec<usize>> = (0..total)
        .map(|flat| {
            let mut rem = flat;
            let mut idx = vec![0; shape.len()];
            for k in (0..shape.len()).rev() {
                idx[k] = rem % shape[k];
                rem /= shape[k];
            }
            idx
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
    let kind = loaded.config.sweep_kind;
    let records = pool.install(|| {
        let configs: Vec<Result<RunConfig, String>> = points
            .par_iter()
            .map(|idx| {
                let mut doc = base.clone();
                for (axis, &i) in axes.iter().zip(idx) {
                    set_path(&mut doc, &axis.path, axis.values[i].clone()).map_err(|e| e.to_string())?;
                }
                resolve(&doc, &loaded.overrides).map_err(|e| e.to_string())
            })
            .collect();
        let cache = DeviceCache::build(&configs);
        let axis_values = |idx: &[usize]| -> Vec<f64> { axes.iter().zip(idx).map(|(a, &i)| a.numbers[i]).collect() };
        match kind {
            SweepKind::Gate => Records::Gate(
                points
                    .par_iter()
                    .zip(&configs)
                    .enumerate()
                    .map(|(index, (idx, cfg))| {
                        let axes = axis_values(idx);
                        match cfg.as_ref().map_err(Clone::clone).and_then(|c| cache.get(c).map(|d| (c, d))) {
                            Ok((c, d)) => gate_record(&d, c, index, axes),
                            Err(e) => failed_gate(index, axes, e),
                        }
                    })
                    .collect(),
            ),
            SweepKind::Coupling => Records::Coupling(
                points
                    .par_iter()
                    .zip(&configs)
                    .enumerate()
                    .map(|(index, (idx, cfg))| {
                        let axes = axis_values(idx);
                        match cfg.as_ref().map_err(Clone::clone).and_then(|c| cache.get(c).map(|d| (c, d))) {
                            Ok((c, d)) => coupling_record(&d, c, index, axes),
                            Err(e) => CouplingRecord {
                                index,
                                axes,
                                drive_frequency: None,
                                g_analytic: None,
                                g_numeric: None,
                                error: Some(e),
                            },
                        }
                    })
                    .collect(),
            ),
        }
    });
    Ok(SweepOutput { axis_labels: axes.iter().map(|a| a.label.clone()).collect(), records })
}

fn failed_gate(index: usize, axes: Vec<f64>, error: String) -> GateRecord {
    GateRecord {
        index,
        axes,
        omega_1: f64::NAN,
        nu_1: f64::NAN,
        nu_2: f64::NAN,
        epsilon: f64::NAN,
        omega_2: None,
        feasible: false,
        theta: None,
        phi: None,
        leakage: None,
        fidelity: None,
        theta_predicted: None,
        phi_predicted: None,
        fidelity_predicted: None,
        pulse_factor: None,
        error: Some(error),
    }
}

pub fn gate_settings(cfg: &RunConfig) -> GateSettings {
    let s = &cfg.simulation;
    GateSettings {
        gate_time: s.gate_time,
        propagation: s.propagation(),
        amplitude: AmplitudeOptions::default(),
        envelope: s.envelope_spec(),
        pulse: s.pulse_optimization.then(PulseOptions::default),
    }
}

/// Solves `Omega_2` unless given, propagates and reports the point of `cfg`.
pub fn gate_record(dev: &CfsimDevice, cfg: &RunConfig, index: usize, axes: Vec<f64>) -> GateRecord {
    let c = &dev.constants;
    let nu_1 = cfg.point.nu_1.resolve(c);
    let nu_2 = cfg.point.tone_2.nu_2(c);
    let out = run_point(dev, cfg.point.omega_1, nu_1, nu_2, cfg.point.omega_2, &gate_settings(cfg));
    let report = out.report.as_ref();
    let predicted = report.and_then(|r| r.predicted);
    GateRecord {
        index,
        axes,
        omega_1: out.omega_1,
        nu_1,
        nu_2,
        epsilon: c.sideband_detuning(nu_2),
        omega_2: out.omega_2,
        feasible: out.feasible,
        theta: report.map(|r| r.theta),
        phi: report.map(|r| r.phi),
        leakage: report.map(|r| r.leakage),
        fidelity: report.map(|r| r.fidelity),
        theta_predicted: out.prediction.map(|p| p.theta),
        phi_predicted: out.prediction.map(|p| p.phi),
        fidelity_predicted: predicted.map(|p| p.fidelity),
        pulse_factor: out.pulse.as_ref().map(|p| p.gamma),
        error: out.error.clone(),
    }
}

/// Drive tones of `cfg` with spectrum-tied frequencies resolved.
pub fn resolve_tones(dev: &CfsimDevice, cfg: &RunConfig) -> Vec<DriveTone> {
    cfg.tones
        .iter()
        .map(|t| DriveTone::new(t.mode, t.amplitude, t.frequency.resolve(&dev.constants)).with_phase(t.phase))
        .collect()
}

/// Analytic coupling of the configured transition and, optionally, a numeric
/// measurement. The first tone on the drive mode is the resonant one.
pub fn coupling_record(dev: &CfsimDevice, cfg: &RunConfig, index: usize, axes: Vec<f64>) -> CouplingRecord {
    let mut record =
        CouplingRecord { index, axes, drive_frequency: None, g_analytic: None, g_numeric: None, error: None };
    if let Err(e) = fill_coupling(dev, cfg, &mut record) {
        record.error = Some(e.to_string());
    }
    record
}

fn fill_coupling(dev: &CfsimDevice, cfg: &RunConfig, record: &mut CouplingRecord) -> cfsim_core::Result<()> {
    let sec = &cfg.coupling;
    let (a, b) = sec.transition;
    let constants = coupling_constants(&dev.frame, (a, b), sec.drive_mode, sec.spectator_mode)?;
    let mut tones = resolve_tones(dev, cfg);
    for t in &tones {
        t.validate()?;
    }
    let resonant = tones
        .iter()
        .position(|t| t.mode == sec.drive_mode)
        .ok_or_else(|| cfsim_core::Error::Config(format!("no tone on the drive mode {}", sec.drive_mode)))?;
    let mut off = Vec::new();
    for (i, t) in tones.iter().enumerate() {
        if i != resonant {
            let gamma = dev.frame.n_coeff(t.mode, a)? - dev.frame.n_coeff(t.mode, b)?;
            off.push(OffResonantTone { gamma, amplitude: t.amplitude, frequency: t.frequency });
        }
    }
    let g = g_multi(&constants, tones[resonant].amplitude, tones[resonant].frequency, &off).g;
    record.g_analytic = Some(g);
    record.drive_frequency = Some(tones[resonant].frequency);
    if !sec.numeric {
        return Ok(());
    }
    if sec.calibrate && tones.len() == 2 {
        let spectator = tones[1 - resonant].clone();
        let (lower, upper) = if dev.frame.energy(a)? < dev.frame.energy(b)? { (a, b) } else { (b, a) };
        tones[resonant].frequency = floquet_resonance(dev, &spectator, lower, upper, tones[resonant].frequency)?;
        record.drive_frequency = Some(tones[resonant].frequency);
    }
    let slowest = tones.iter().map(|t| t.frequency).fold(f64::INFINITY, f64::min);
    let window = sec.window.unwrap_or_else(|| if g == 0.0 { 1000.0 } else { (4.0 * PI / g.abs()).min(5000.0) });
    let m = CouplingMeasurement {
        window,
        strobe_period: 2.0 * PI / slowest,
        smooth: if tones.len() > 1 { 8 } else { 1 },
        max_relative_rms: 0.3,
        extensions: 2,
    };
    record.g_numeric = Some(measure_coupling(dev, a, b, &tones, &m)?);
    Ok(())
}
