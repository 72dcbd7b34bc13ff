//! Run configuration: TOML with explicit units, validated into core types.

use std::collections::BTreeMap;
use std::path::Path;

use cfsim_core::analytics::{CfsimConstants, ThetaLaw};
use cfsim_core::dynamics::propagate::default_dt;
use cfsim_core::dynamics::{EnvelopeSpec, Integrator, PropagationOptions};
use cfsim_core::model::{BasisIndex, CouplingForm, DcAcDrive, DeviceParams, Mode, ToyParams, ToyTone};
use serde::Deserialize;
use thiserror::Error;

use crate::units::{parse_quantity, split_quantity, Dimension};

/// Shipped configuration: the reference device at a 100 ns gate.
pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.toml");

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed configuration: {0}")]
    Syntax(String),
    #[error("{path}: {message}")]
    Field { path: String, message: String },
}

fn field(path: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Field { path: path.into(), message: message.into() }
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDevice {
    omega_1: Option<String>,
    omega_2: Option<String>,
    omega_c: Option<String>,
    delta_1: Option<String>,
    delta_2: Option<String>,
    delta_c: Option<String>,
    g_1c: Option<String>,
    g_2c: Option<String>,
    g_12: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimulation {
    gate_time: Option<String>,
    dt: Option<String>,
    integrator: Option<String>,
    levels: Option<Vec<i64>>,
    dimension_cap: Option<i64>,
    hamiltonian: Option<String>,
    samples: Option<i64>,
    envelope: Option<String>,
    pulse_optimization: Option<bool>,
    theta_law: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPoint {
    omega_1: Option<String>,
    nu_1: Option<String>,
    nu_2: Option<String>,
    epsilon: Option<String>,
    omega_2: Option<String>,
    theta: Option<String>,
    phi: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTone {
    mode: String,
    amplitude: String,
    frequency: String,
    phase: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvolve {
    duration: Option<String>,
    inputs: Option<Vec<String>>,
    tracked: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoupling {
    transition: Option<Vec<String>>,
    drive_mode: Option<String>,
    spectator_mode: Option<String>,
    numeric: Option<bool>,
    calibrate: Option<bool>,
    window: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawResonances {
    max_photons: Option<i64>,
    threshold: Option<String>,
    labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawZzIdle {
    epsilon: Option<String>,
    frequency: Option<String>,
    propagate: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawToyTone {
    amplitude: String,
    frequency: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDcAc {
    g0: String,
    amplitude: String,
    frequency: String,
    delta_1: String,
    delta_2: String,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawToy {
    detuning: Option<String>,
    anharmonicity: Option<String>,
    coupling: Option<String>,
    drives: Option<Vec<RawToyTone>>,
    dc_ac: Option<RawDcAc>,
    duration: Option<String>,
    input: Option<String>,
    samples: Option<i64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    path: String,
    start: toml::Value,
    stop: toml::Value,
    count: i64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    kind: Option<String>,
    axes: Option<Vec<RawAxis>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutputs {
    directory: Option<String>,
    format: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    device: RawDevice,
    #[serde(default)]
    simulation: RawSimulation,
    #[serde(default)]
    point: RawPoint,
    #[serde(default)]
    tones: Vec<RawTone>,
    #[serde(default)]
    evolve: RawEvolve,
    #[serde(default)]
    coupling: RawCoupling,
    #[serde(default)]
    resonances: RawResonances,
    #[serde(default)]
    zz_idle: RawZzIdle,
    #[serde(default)]
    toy: RawToy,
    #[serde(default)]
    sweep: RawSweep,
    #[serde(default)]
    outputs: RawOutputs,
}

/// Frequency that may be tied to the dressed spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrequencySpec {
    Fixed(f64),
    /// `|w~_010 - w~_100|`.
    Nu1,
    /// `|w~_020 - w~_110|`.
    Gap,
}

impl FrequencySpec {
    pub fn resolve(&self, c: &CfsimConstants) -> f64 {
        match *self {
            FrequencySpec::Fixed(f) => f,
            FrequencySpec::Nu1 => c.nu_1,
            FrequencySpec::Gap => c.gap.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToneSpec {
    pub mode: Mode,
    pub amplitude: f64,
    pub frequency: FrequencySpec,
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeKind {
    Rectangular,
    FlatTop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub gate_time: f64,
    pub dt: f64,
    pub integrator: Integrator,
    pub form: CouplingForm,
    pub samples: usize,
    pub envelope: EnvelopeKind,
    pub pulse_optimization: bool,
    pub theta_law: ThetaLaw,
}

impl Simulation {
    pub fn propagation(&self) -> PropagationOptions {
        PropagationOptions {
            dt: Some(self.dt),
            integrator: self.integrator,
            samples: self.samples,
            ..Default::default()
        }
    }

    pub fn envelope_spec(&self) -> EnvelopeSpec {
        match self.envelope {
            EnvelopeKind::Rectangular => EnvelopeSpec::rectangular(),
            EnvelopeKind::FlatTop => EnvelopeSpec::default_flat_top(self.gate_time),
        }
    }
}

/// Operating point of the bichromatic scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub omega_1: f64,
    pub nu_1: FrequencySpec,
    pub tone_2: SidebandSpec,
    pub omega_2: Option<f64>,
    pub theta: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SidebandSpec {
    Frequency(f64),
    Detuning(f64),
}

impl SidebandSpec {
    pub fn nu_2(&self, c: &CfsimConstants) -> f64 {
        match *self {
            SidebandSpec::Frequency(f) => f,
            SidebandSpec::Detuning(e) => c.nu_2_for_detuning(e),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolve {
    pub duration: f64,
    pub inputs: Vec<BasisIndex>,
    pub tracked: Vec<BasisIndex>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSection {
    pub transition: (BasisIndex, BasisIndex),
    pub drive_mode: Mode,
    pub spectator_mode: Mode,
    pub numeric: bool,
    /// Retune the resonant tone to the Floquet-shifted transition.
    pub calibrate: bool,
    pub window: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resonances {
    pub max_photons: u32,
    pub threshold: f64,
    pub labels: Option<Vec<BasisIndex>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZzIdle {
    pub tone: SidebandSpec,
    pub propagate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Toy {
    pub params: ToyParams,
    pub duration: f64,
    pub input: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Gate,
    Coupling,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub path: String,
    pub values: Vec<toml::Value>,
    /// Header label, `path [unit]`.
    pub label: String,
    /// Axis values in the axis unit, for emission.
    pub numbers: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

/// Validated configuration. All quantities are in rad/ns, ns and rad.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub device: DeviceParams,
    pub simulation: Simulation,
    pub point: Point,
    pub tones: Vec<ToneSpec>,
    pub evolve: Evolve,
    pub coupling: CouplingSection,
    pub resonances: Resonances,
    pub zz_idle: ZzIdle,
    pub toy: Toy,
    pub sweep_kind: SweepKind,
    pub axes: Vec<Axis>,
    pub output_directory: Option<String>,
    pub format: Format,
    /// Defaults filled in during validation, `path -> value`.
    pub defaults: BTreeMap<String, String>,
}

/// Command-line overrides applied before validation.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub integrator: Option<Integrator>,
    pub format: Option<Format>,
}

/// Parsed document plus its validated form.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub document: toml::Table,
    pub config: RunConfig,
    pub overrides: Overrides,
}

pub fn read_document(path: Option<&Path>) -> Result<toml::Table> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| ConfigError::Io { path: p.display().to_string(), message: e.to_string() })?,
        None => DEFAULT_CONFIG.to_string(),
    };
    text.parse::<toml::Table>().map_err(|e| ConfigError::Syntax(e.to_string()))
}

/// Reads and validates a configuration file, or the shipped default.
pub fn parse_config(path: Option<&Path>, overrides: &Overrides) -> Result<LoadedConfig> {
    let document = read_document(path)?;
    let config = resolve(&document, overrides)?;
    Ok(LoadedConfig { document, config, overrides: overrides.clone() })
}

struct Ctx {
    defaults: BTreeMap<String, String>,
}

impl Ctx {
    fn quantity(
        &mut self,
        path: &str,
        value: &Option<String>,
        dim: Dimension,
        default: Option<(f64, &str)>,
    ) -> Result<f64> {
        match value {
            Some(text) => parse_quantity(text, dim).map_err(|m| field(path, m)),
            None => match default {
                Some((v, shown)) => {
                    self.defaults.insert(path.into(), shown.into());
                    Ok(v)
                }
                None => Err(field(path, "missing")),
            },
        }
    }

    fn optional(&mut self, path: &str, value: &Option<String>, dim: Dimension) -> Result<Option<f64>> {
        value.as_ref().map(|t| parse_quantity(t, dim).map_err(|m| field(path, m))).transpose()
    }

    fn count(&mut self, path: &str, value: Option<i64>, default: i64, min: i64) -> Result<usize> {
        let v = match value {
            Some(v) => v,
            None => {
                self.defaults.insert(path.into(), default.to_string());
                default
            }
        };
        if v < min {
            return Err(field(path, format!("must be >= {min}, got {v}")));
        }
        Ok(v as usize)
    }
}

fn parse_label(path: &str, text: &str) -> Result<BasisIndex> {
    text.parse().map_err(|e: cfsim_core::Error| field(path, e.to_string()))
}

fn parse_mode(path: &str, text: &str) -> Result<Mode> {
    text.parse().map_err(|e: cfsim_core::Error| field(path, e.to_string()))
}

fn parse_frequency_spec(path: &str, text: &str) -> Result<FrequencySpec> {
    match text.trim() {
        "nu_1" => Ok(FrequencySpec::Nu1),
        "gap" => Ok(FrequencySpec::Gap),
        t => parse_quantity(t, Dimension::Frequency).map(FrequencySpec::Fixed).map_err(|m| field(path, m)),
    }
}

/// Validates a parsed document.
pub fn resolve(document: &toml::Table, overrides: &Overrides) -> Result<RunConfig> {
    let raw: RawConfig = toml::Value::Table(document.clone())
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
    let mut cx = Ctx { defaults: BTreeMap::new() };

    let paper = DeviceParams::paper_device();
    let d = &raw.device;
    let f = Dimension::Frequency;
    let levels = match &raw.simulation.levels {
        Some(l) => {
            if l.len() != 3 {
                return Err(field("simulation.levels", format!("expected 3 level counts, got {}", l.len())));
            }
            let mut out = [0usize; 3];
            for (i, &n) in l.iter().enumerate() {
                if n < 2 {
                    return Err(field(format!("simulation.levels[{i}]"), format!("level count must be >= 2, got {n}")));
                }
                out[i] = n as usize;
            }
            out
        }
        None => {
            cx.defaults.insert("simulation.levels".into(), "[5, 5, 4]".into());
            [5, 5, 4]
        }
    };
    let device = DeviceParams {
        omega_1: cx.quantity("device.omega_1", &d.omega_1, f, None)?,
        omega_2: cx.quantity("device.omega_2", &d.omega_2, f, None)?,
        omega_c: cx.quantity("device.omega_c", &d.omega_c, f, None)?,
        delta_1: cx.quantity("device.delta_1", &d.delta_1, f, None)?,
        delta_2: cx.quantity("device.delta_2", &d.delta_2, f, None)?,
        delta_c: cx.quantity("device.delta_c", &d.delta_c, f, Some((0.0, "0 MHz")))?,
        g_1c: cx.quantity("device.g_1c", &d.g_1c, f, None)?,
        g_2c: cx.quantity("device.g_2c", &d.g_2c, f, None)?,
        g_12: cx.quantity("device.g_12", &d.g_12, f, Some((0.0, "0 MHz")))?,
        dim_1: levels[0],
        dim_2: levels[1],
        dim_c: levels[2],
        dimension_cap: cx.count(
            "simulation.dimension_cap",
            raw.simulation.dimension_cap,
            paper.dimension_cap as i64,
            8,
        )?,
    };
    device.validate().map_err(|e| field("device", e.to_string()))?;

    let s = &raw.simulation;
    let gate_time = cx.quantity("simulation.gate_time", &s.gate_time, Dimension::Time, None)?;
    if gate_time <= 0.0 {
        return Err(field("simulation.gate_time", "must be positive"));
    }
    let dt = match overrides.dt {
        Some(v) => v,
        None => {
            let fallback = default_dt(&device);
            let shown = format!("{fallback} ns");
            cx.quantity("simulation.dt", &s.dt, Dimension::Time, Some((fallback, &shown)))?
        }
    };
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(field("simulation.dt", format!("must be positive, got {dt}")));
    }
    let integrator = match (overrides.integrator, s.integrator.as_deref()) {
        (Some(i), _) => i,
        (None, Some("split")) => Integrator::Split,
        (None, Some("expm")) => Integrator::Expm,
        (None, Some(other)) => return Err(field("simulation.integrator", format!("`{other}` is not split or expm"))),
        (None, None) => {
            cx.defaults.insert("simulation.integrator".into(), "split".into());
            Integrator::Split
        }
    };
    let form = match s.hamiltonian.as_deref() {
        Some("rwa") => CouplingForm::Rwa,
        Some("non-rwa") => CouplingForm::NonRwa,
        Some(other) => return Err(field("simulation.hamiltonian", format!("`{other}` is not rwa or non-rwa"))),
        None => {
            cx.defaults.insert("simulation.hamiltonian".into(), "rwa".into());
            CouplingForm::Rwa
        }
    };
    let envelope = match s.envelope.as_deref() {
        Some("rectangular") => EnvelopeKind::Rectangular,
        Some("flat-top") => EnvelopeKind::FlatTop,
        Some(other) => return Err(field("simulation.envelope", format!("`{other}` is not rectangular or flat-top"))),
        None => {
            cx.defaults.insert("simulation.envelope".into(), "rectangular".into());
            EnvelopeKind::Rectangular
        }
    };
    if envelope == EnvelopeKind::FlatTop && gate_time <= 20.0 {
        return Err(field("simulation.envelope", "flat-top needs a gate longer than 20 ns"));
    }
    let theta_law = match s.theta_law.as_deref() {
        Some("closed") => ThetaLaw::Closed,
        Some("rabi") => ThetaLaw::Rabi,
        Some(other) => return Err(field("simulation.theta_law", format!("`{other}` is not closed or rabi"))),
        None => ThetaLaw::Closed,
    };
    let simulation = Simulation {
        gate_time,
        dt,
        integrator,
        form,
        samples: cx.count("simulation.samples", s.samples, 200, 1)?,
        envelope,
        pulse_optimization: s.pulse_optimization.unwrap_or(false),
        theta_law,
    };

    let p = &raw.point;
    let nu_1 = match &p.nu_1 {
        Some(t) => parse_frequency_spec("point.nu_1", t)?,
        None => FrequencySpec::Nu1,
    };
    let tone_2 = match (&p.nu_2, &p.epsilon) {
        (Some(_), Some(_)) => return Err(field("point", "give either nu_2 or epsilon, not both")),
        (Some(t), None) => SidebandSpec::Frequency(parse_quantity(t, f).map_err(|m| field("point.nu_2", m))?),
        (None, e) => SidebandSpec::Detuning(cx.quantity("point.epsilon", e, f, Some((0.0, "0 MHz")))?),
    };
    let point = Point {
        omega_1: cx.quantity("point.omega_1", &p.omega_1, f, Some((0.0, "0 MHz")))?,
        nu_1,
        tone_2,
        omega_2: cx.optional("point.omega_2", &p.omega_2, f)?,
        theta: cx.quantity("point.theta", &p.theta, Dimension::Angle, Some((std::f64::consts::FRAC_PI_2, "90 deg")))?,
        phi: cx.quantity("point.phi", &p.phi, Dimension::Angle, Some((0.0, "0 deg")))?,
    };
    if point.omega_1 < 0.0 {
        return Err(field("point.omega_1", "must be >= 0"));
    }
    if point.omega_2.is_some_and(|w| w < 0.0) {
        return Err(field("point.omega_2", "must be >= 0"));
    }

    let mut tones = Vec::new();
    for (i, t) in raw.tones.iter().enumerate() {
        let base = format!("tones[{i}]");
        let amplitude = parse_quantity(&t.amplitude, f).map_err(|m| field(format!("{base}.amplitude"), m))?;
        if amplitude < 0.0 {
            return Err(field(format!("{base}.amplitude"), "must be >= 0"));
        }
        tones.push(ToneSpec {
            mode: parse_mode(&format!("{base}.mode"), &t.mode)?,
            amplitude,
            frequency: parse_frequency_spec(&format!("{base}.frequency"), &t.frequency)?,
            phase: cx.optional(&format!("{base}.phase"), &t.phase, Dimension::Angle)?.unwrap_or(0.0),
        });
    }

    let e = &raw.evolve;
    let labels = |path: &str, list: &Option<Vec<String>>, default: &[&str]| -> Result<Vec<BasisIndex>> {
        match list {
            Some(l) => l.iter().enumerate().map(|(i, s)| parse_label(&format!("{path}[{i}]"), s)).collect(),
            None => default.iter().map(|s| parse_label(path, s)).collect(),
        }
    };
    let evolve = Evolve {
        duration: cx.quantity(
            "evolve.duration",
            &e.duration,
            Dimension::Time,
            Some((gate_time, "simulation.gate_time")),
        )?,
        inputs: labels("evolve.inputs", &e.inputs, &["100"])?,
        tracked: labels("evolve.tracked", &e.tracked, &["100", "010"])?,
    };
    if evolve.duration <= 0.0 {
        return Err(field("evolve.duration", "must be positive"));
    }

    let c = &raw.coupling;
    let transition = labels("coupling.transition", &c.transition, &["100", "010"])?;
    if transition.len() != 2 {
        return Err(field("coupling.transition", "expected two state labels"));
    }
    let coupling = CouplingSection {
        transition: (transition[0], transition[1]),
        drive_mode: parse_mode("coupling.drive_mode", c.drive_mode.as_deref().unwrap_or("1"))?,
        spectator_mode: parse_mode("coupling.spectator_mode", c.spectator_mode.as_deref().unwrap_or("2"))?,
        numeric: c.numeric.unwrap_or(false),
        calibrate: c.calibrate.unwrap_or(false),
        window: cx.optional("coupling.window", &c.window, Dimension::Time)?,
    };
    if coupling.window.is_some_and(|w| w <= 0.0) {
        return Err(field("coupling.window", "must be positive"));
    }

    let r = &raw.resonances;
    let resonances = Resonances {
        max_photons: cx.count("resonances.max_photons", r.max_photons, 3, 0)? as u32,
        threshold: cx.quantity("resonances.threshold", &r.threshold, f, Some((cfsim_core::mhz(10.0), "10 MHz")))?,
        labels: r.labels.as_ref().map(|_| labels("resonances.labels", &r.labels, &[])).transpose()?,
    };

    let z = &raw.zz_idle;
    let zz_tone = match (&z.frequency, &z.epsilon) {
        (Some(_), Some(_)) => return Err(field("zz_idle", "give either frequency or epsilon, not both")),
        (Some(t), None) => SidebandSpec::Frequency(parse_quantity(t, f).map_err(|m| field("zz_idle.frequency", m))?),
        (None, e) => {
            SidebandSpec::Detuning(cx.quantity("zz_idle.epsilon", e, f, Some((cfsim_core::mhz(-30.0), "-30 MHz")))?)
        }
    };
    let zz_idle = ZzIdle { tone: zz_tone, propagate: z.propagate.unwrap_or(true) };

    let toy = resolve_toy(&raw.toy, &mut cx)?;

    let sweep_kind = match raw.sweep.kind.as_deref() {
        Some("gate") | None => SweepKind::Gate,
        Some("coupling") => SweepKind::Coupling,
        Some(other) => return Err(field("sweep.kind", format!("`{other}` is not gate or coupling"))),
    };
    let axes = resolve_axes(document, raw.sweep.axes.as_deref().unwrap_or(&[]))?;

    let format = match (overrides.format, raw.outputs.format.as_deref()) {
        (Some(fm), _) => fm,
        (None, Some("csv")) => Format::Csv,
        (None, Some("json")) => Format::Json,
        (None, Some("both") | None) => Format::Both,
        (None, Some(other)) => return Err(field("outputs.format", format!("`{other}` is not csv, json or both"))),
    };

    Ok(RunConfig {
        device,
        simulation,
        point,
        tones,
        evolve,
        coupling,
        resonances,
        zz_idle,
        toy,
        sweep_kind,
        axes,
        output_directory: raw.outputs.directory.clone(),
        format,
        defaults: cx.defaults,
    })
}

fn resolve_toy(t: &RawToy, cx: &mut Ctx) -> Result<Toy> {
    let f = Dimension::Frequency;
    let mut drives = [ToyTone::default(); 2];
    if let Some(list) = &t.drives {
        if list.len() != 2 {
            return Err(field("toy.drives", format!("expected two drives, got {}", list.len())));
        }
        for (i, d) in list.iter().enumerate() {
            drives[i] = ToyTone {
                amplitude: parse_quantity(&d.amplitude, f)
                    .map_err(|m| field(format!("toy.drives[{i}].amplitude"), m))?,
                frequency: parse_quantity(&d.frequency, f)
                    .map_err(|m| field(format!("toy.drives[{i}].frequency"), m))?,
            };
        }
    }
    let dc_ac = match &t.dc_ac {
        Some(d) => {
            let q = |name: &str, v: &str| parse_quantity(v, f).map_err(|m| field(format!("toy.dc_ac.{name}"), m));
            Some(DcAcDrive {
                g0: q("g0", &d.g0)?,
                amplitude: q("amplitude", &d.amplitude)?,
                frequency: q("frequency", &d.frequency)?,
                delta_1: q("delta_1", &d.delta_1)?,
                delta_2: q("delta_2", &d.delta_2)?,
            })
        }
        None => None,
    };
    let params = ToyParams {
        detuning: cx.quantity("toy.detuning", &t.detuning, f, Some((cfsim_core::mhz(450.0), "450 MHz")))?,
        anharmonicity: cx.quantity(
            "toy.anharmonicity",
            &t.anharmonicity,
            f,
            Some((cfsim_core::mhz(-200.0), "-200 MHz")),
        )?,
        coupling: cx.quantity("toy.coupling", &t.coupling, f, Some((cfsim_core::mhz(1.0), "1 MHz")))?,
        drives,
        dc_ac,
    };
    params.validate().map_err(|e| field("toy", e.to_string()))?;
    let s = t.input.as_deref().unwrap_or("01");
    let input = cfsim_core::model::TOY_LABELS
        .iter()
        .position(|l| *l == s)
        .ok_or_else(|| field("toy.input", format!("`{s}` is not one of 01, 10, 11, 02, 20")))?;
    let duration = cx.quantity("toy.duration", &t.duration, Dimension::Time, Some((1000.0, "1000 ns")))?;
    if duration <= 0.0 {
        return Err(field("toy.duration", "must be positive"));
    }
    Ok(Toy { params, duration, input, samples: cx.count("toy.samples", t.samples, 400, 1)? })
}

/// Looks up a dotted path, with `name[i]` or `name.i` for array elements.
fn path_segments(path: &str) -> Vec<String> {
    path.replace('[', ".").replace(']', "").split('.').filter(|s| !s.is_empty()).map(str::to_string).collect()
}

fn lookup_mut<'a>(table: &'a mut toml::Table, path: &str) -> Option<&'a mut toml::Value> {
    let segs = path_segments(path);
    let (first, rest) = segs.split_first()?;
    let mut cur = table.get_mut(first)?;
    for s in rest {
        cur = match cur {
            toml::Value::Table(t) => t.get_mut(s)?,
            toml::Value::Array(a) => a.get_mut(s.parse::<usize>().ok()?)?,
            _ => return None,
        };
    }
    Some(cur)
}

/// Writes `value` at `path`; the path must already exist in the document.
pub fn set_path(table: &mut toml::Table, path: &str, value: toml::Value) -> Result<()> {
    let slot = lookup_mut(table, path)
        .ok_or_else(|| field(format!("sweep axis {path}"), "path not present in the configuration"))?;
    *slot = value;
    Ok(())
}

fn resolve_axes(document: &toml::Table, raw: &[RawAxis]) -> Result<Vec<Axis>> {
    if raw.len() > 2 {
        return Err(field("sweep.axes", format!("at most 2 axes, got {}", raw.len())));
    }
    let mut axes = Vec::new();
    for (i, a) in raw.iter().enumerate() {
        let base = format!("sweep.axes[{i}]");
        if a.count < 1 {
            return Err(field(format!("{base}.count"), format!("must be >= 1, got {}", a.count)));
        }
        if a.path.starts_with("sweep") || a.path.starts_with("outputs") {
            return Err(field(format!("{base}.path"), "sweep and outputs cannot be swept"));
        }
        let mut probe = document.clone();
        let current = lookup_mut(&mut probe, &a.path)
            .ok_or_else(|| field(format!("{base}.path"), format!("`{}` is not present in the configuration", a.path)))?
            .clone();
        let n = a.count as usize;
        let (values, numbers, unit) = match (&a.start, &a.stop) {
            (toml::Value::String(s0), toml::Value::String(s1)) => {
                let (v0, u0) = split_quantity(s0).map_err(|m| field(format!("{base}.start"), m))?;
                let (v1, u1) = split_quantity(s1).map_err(|m| field(format!("{base}.stop"), m))?;
                if u0 != u1 {
                    return Err(field(base.clone(), format!("start and stop units differ (`{u0}` vs `{u1}`)")));
                }
                if !matches!(current, toml::Value::String(_)) {
                    return Err(field(format!("{base}.path"), "target is not a quantity string"));
                }
                let nums = grid(v0, v1, n);
                let values: Vec<toml::Value> = nums.iter().map(|v| toml::Value::String(format!("{v} {u0}"))).collect();
                (values, nums, u0.to_string())
            }
            (toml::Value::Integer(s0), toml::Value::Integer(s1)) => {
                if !matches!(current, toml::Value::Integer(_)) {
                    return Err(field(format!("{base}.path"), "target is not an integer"));
                }
                let nums = grid(*s0 as f64, *s1 as f64, n);
                let values: Vec<toml::Value> = nums.iter().map(|v| toml::Value::Integer(v.round() as i64)).collect();
                (values, nums.iter().map(|v| v.round()).collect(), String::new())
            }
            _ => return Err(field(base.clone(), "start and stop must both be quantity strings or both integers")),
        };
        // every grid value must validate on its own
        for v in &values {
            let mut doc = document.clone();
            set_path(&mut doc, &a.path, v.clone())?;
            resolve(&strip_sweep(&doc), &Overrides::default())
                .map_err(|e| field(format!("{base} value {v}"), e.to_string()))?;
        }
        let label = if unit.is_empty() { a.path.clone() } else { format!("{} [{unit}]", a.path) };
        axes.push(Axis { path: a.path.clone(), values, label, numbers });
    }
    Ok(axes)
}

/// The document without its `sweep` table.
pub fn strip_sweep(document: &toml::Table) -> toml::Table {
    let mut doc = document.clone();
    doc.remove("sweep");
    doc
}

fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Human-readable list of filled defaults.
pub fn defaults_report(config: &RunConfig) -> String {
    config.defaults.iter().map(|(k, v)| format!("  {k} = {v} (default)")).collect::<Vec<_>>().join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_default_is_the_reference_device() {
        let c = parse_config(None, &Overrides::default()).unwrap().config;
        assert_eq!(c.device, DeviceParams::paper_device());
        assert_eq!(c.simulation.gate_time, 100.0);
    }

    #[test]
    fn path_segments_accept_both_index_styles() {
        assert_eq!(path_segments("tones[1].amplitude"), ["tones", "1", "amplitude"]);
        assert_eq!(path_segments("tones.1.amplitude"), ["tones", "1", "amplitude"]);
    }
}
