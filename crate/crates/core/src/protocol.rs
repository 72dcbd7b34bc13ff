//! One cfSim operating point end to end: amplitude solve, propagation and
//! gate report.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::analytics::control::{
    predict_theta_phi, solve_optimal_amplitude, AmplitudeOptions, AmplitudeSolution, CfsimConstants, Prediction,
};
use crate::dynamics::envelope::EnvelopeSpec;
use crate::dynamics::propagate::{Input, PropagationOptions, PropagationResult, Propagator, Tracked};
use crate::dynamics::pulse::{optimize_pulse_factor, PulseFactor, PulseOptions};
use crate::gate::{computational_labels, gate_report, GateReport};
use crate::model::{build_hamiltonian, BasisIndex, CouplingForm, DeviceParams, DriveTone, Mode};
use crate::spectrum::{diagonalize, DressedFrame};
use crate::Result;

/// Device data shared by every operating point.
#[derive(Debug, Clone)]
pub struct CfsimDevice {
    pub device: DeviceParams,
    pub form: CouplingForm,
    pub h0: DMatrix<f64>,
    pub frame: DressedFrame,
    pub constants: CfsimConstants,
    pub propagator: Propagator,
}

impl CfsimDevice {
    pub fn new(device: DeviceParams, form: CouplingForm) -> Result<Self> {
        let h0 = build_hamiltonian(&device, form)?;
        let frame = diagonalize(&h0, &device)?;
        let constants = CfsimConstants::from_frame(&frame)?;
        let propagator = Propagator::from_frame(&h0, &frame)?;
        Ok(Self { device, form, h0, frame, constants, propagator })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateSettings {
    pub gate_time: f64,
    pub propagation: PropagationOptions,
    pub amplitude: AmplitudeOptions,
    /// Envelope of both tones.
    pub envelope: EnvelopeSpec,
    /// Optimize the tone-2 envelope factor before propagating.
    pub pulse: Option<PulseOptions>,
}

impl GateSettings {
    pub fn new(gate_time: f64) -> Self {
        Self {
            gate_time,
            propagation: PropagationOptions::default(),
            amplitude: AmplitudeOptions::default(),
            envelope: EnvelopeSpec::rectangular(),
            pulse: None,
        }
    }
}

/// Tone 1 on qubit 1, tone 2 on qubit 2.
pub fn cfsim_tones(omega_1: f64, nu_1: f64, omega_2: f64, nu_2: f64, envelope: &EnvelopeSpec) -> Vec<DriveTone> {
    vec![
        DriveTone::new(Mode::Q1, omega_1, nu_1).with_envelope(*envelope),
        DriveTone::new(Mode::Q2, omega_2, nu_2).with_envelope(*envelope),
    ]
}

/// Propagates the dressed computational states and `020` population traces.
pub fn propagate_computational(
    dev: &CfsimDevice,
    tones: &[DriveTone],
    gate_time: f64,
    opts: &PropagationOptions,
) -> Result<PropagationResult> {
    let inputs: Vec<Input> =
        computational_labels().iter().map(|&l| Input::dressed(&dev.frame, l)).collect::<Result<_>>()?;
    let mut tracked: Vec<Tracked> =
        computational_labels().iter().map(|&l| Tracked::dressed(&dev.frame, l)).collect::<Result<_>>()?;
    for extra in ["020", "200", "001"] {
        let label: BasisIndex = extra.parse()?;
        if dev.device.index(label).is_ok() {
            tracked.push(Tracked::dressed(&dev.frame, label)?);
        }
    }
    dev.propagator.propagate(tones, gate_time, &inputs, &tracked, opts)
}

/// Outcome of one operating point. Failures are recorded, not raised.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointOutcome {
    pub omega_1: f64,
    pub nu_1: f64,
    pub nu_2: f64,
    pub omega_2: Option<f64>,
    pub feasible: bool,
    pub prediction: Option<Prediction>,
    pub pulse: Option<PulseFactor>,
    pub report: Option<GateReport>,
    pub error: Option<String>,
}

/// Solves `Omega_2` when not given, then propagates and reports.
pub fn run_point(
    dev: &CfsimDevice,
    omega_1: f64,
    nu_1: f64,
    nu_2: f64,
    omega_2: Option<f64>,
    settings: &GateSettings,
) -> PointOutcome {
    let t_g = settings.gate_time;
    let mut out = PointOutcome {
        omega_1,
        nu_1,
        nu_2,
        omega_2,
        feasible: dev.constants.feasible(t_g, nu_2),
        prediction: None,
        pulse: None,
        report: None,
        error: None,
    };
    let omega_2 = match omega_2 {
        Some(w) => w,
        None => match solve_optimal_amplitude(&dev.constants, t_g, omega_1, nu_1, nu_2, &settings.amplitude) {
            AmplitudeSolution::Solved { omega_2, .. } => omega_2,
            AmplitudeSolution::Infeasible { .. } => {
                out.feasible = false;
                return out;
            }
            AmplitudeSolution::Unsolvable { reason } => {
                out.feasible = false;
                out.error = Some(reason);
                return out;
            }
        },
    };
    out.omega_2 = Some(omega_2);
    let prediction = predict_theta_phi(&dev.constants, t_g, omega_1, nu_1, nu_2, omega_2);
    out.prediction = Some(prediction);
    match evaluate(dev, omega_1, nu_1, omega_2, nu_2, settings, prediction) {
        Ok((pulse, report)) => {
            out.pulse = pulse;
            out.report = Some(report);
        }
        Err(e) => out.error = Some(e.to_string()),
    }
    out
}

fn evaluate(
    dev: &CfsimDevice,
    omega_1: f64,
    nu_1: f64,
    omega_2: f64,
    nu_2: f64,
    settings: &GateSettings,
    prediction: Prediction,
) -> Result<(Option<PulseFactor>, GateReport)> {
    let t_g = settings.gate_time;
    let mut tones = cfsim_tones(omega_1, nu_1, omega_2, nu_2, &settings.envelope);
    let pulse = match &settings.pulse {
        Some(opts) => {
            let labels: [BasisIndex; 2] = ["110".parse()?, "020".parse()?];
            let factor = optimize_pulse_factor(&dev.frame, &tones, 1, &labels, t_g, opts)?;
            tones[1].envelope = tones[1].envelope.with_scale(factor.gamma);
            Some(factor)
        }
        None => None,
    };
    let result = propagate_computational(dev, &tones, t_g, &settings.propagation)?;
    let report = gate_report(&result, &dev.frame, t_g, Some((prediction.theta, prediction.phi)))?;
    Ok((pulse, report))
}

/// Frequency of a tone resonant with `lower -> upper` in the presence of the
/// periodic tone `spectator`: the splitting of the two Floquet quasi-energies
/// over one spectator period, taken on the branch nearest `near`.
pub fn floquet_resonance(
    dev: &CfsimDevice,
    spectator: &DriveTone,
    lower: BasisIndex,
    upper: BasisIndex,
    near: f64,
) -> Result<f64> {
    if spectator.frequency.is_nan() || spectator.frequency <= 0.0 {
        return Err(crate::Error::Config("spectator frequency must be positive".into()));
    }
    let period = 2.0 * std::f64::consts::PI / spectator.frequency;
    let per_period = (period / dev.propagator.default_dt()).ceil();
    let opts = PropagationOptions { dt: Some(period / per_period), samples: 1, ..Default::default() };
    let inputs = [Input::dressed(&dev.frame, lower)?, Input::dressed(&dev.frame, upper)?];
    let tracked = [Tracked::dressed(&dev.frame, lower)?];
    let r = dev.propagator.propagate(std::slice::from_ref(spectator), period, &inputs, &tracked, &opts)?;
    let phase = |k: usize, label: BasisIndex| -> Result<f64> {
        let v = dev.frame.dressed_state(label)?;
        Ok((0..v.len()).map(|i| r.final_states[(i, k)] * v[i]).sum::<crate::numerics::C64>().arg())
    };
    let splitting = (phase(0, lower)? - phase(1, upper)?) / period;
    Ok(splitting + spectator.frequency * ((near - splitting) / spectator.frequency).round())
}

/// Settings of a numeric exchange-coupling measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingMeasurement {
    /// Record length (ns); rounded up to whole strobe periods.
    pub window: f64,
    /// Sampling period (ns), normally one period of the slowest tone.
    pub strobe_period: f64,
    /// Running-mean length in strobe samples; 1 disables smoothing.
    pub smooth: usize,
    /// Fit residual bound relative to the trace spread.
    pub max_relative_rms: f64,
    /// Times the record is doubled after a failed fit.
    pub extensions: u32,
}

/// Exchange coupling `W sqrt(A)` from a stroboscopic `sin^2` fit of the
/// `input -> target` transfer. Zero when less than `1e-3` transfers.
///
/// The running mean cancels micromotion of other tones aliased near half the
/// strobe rate. It scales the `sin^2` modulation by `sin(w W h) / (w sin(W h))`,
/// which is divided out of the fitted amplitude. When that factor drops below
/// 0.2 the mean is halved; when the fit fails the record is doubled, up to
/// `extensions` times.
pub fn measure_coupling(
    dev: &CfsimDevice,
    input: BasisIndex,
    target: BasisIndex,
    tones: &[DriveTone],
    m: &CouplingMeasurement,
) -> Result<f64> {
    let smooth = m.smooth.max(1);
    let per_period = (m.strobe_period / dev.propagator.default_dt()).ceil();
    let inputs = [Input::dressed(&dev.frame, input)?];
    let tracked = [Tracked::dressed(&dev.frame, target)?];
    let mut window = m.window;
    let mut attempt = 0;
    loop {
        let periods = (window / m.strobe_period).ceil().max(8.0 + smooth as f64);
        let opts = PropagationOptions {
            dt: Some(m.strobe_period / per_period),
            samples: periods as usize,
            ..Default::default()
        };
        let r = dev.propagator.propagate(tones, periods * m.strobe_period, &inputs, &tracked, &opts)?;
        let trace = &r.traces[0][0];
        if trace.iter().copied().fold(0.0, f64::max) < 1e-3 {
            return Ok(0.0);
        }
        let mut w = smooth;
        let failure = loop {
            match smoothed_fit(&r.time_grid, trace, w, m) {
                Ok((g, factor)) if factor >= 0.2 => return Ok(g),
                Ok((_, factor)) if w == 1 => {
                    break crate::Error::FitFailed(format!("smoothing suppresses the exchange (factor {factor:.3})"))
                }
                Ok(_) => w /= 2,
                Err(e) => break e,
            }
        };
        if attempt >= m.extensions {
            return Err(failure);
        }
        window *= 2.0;
        attempt += 1;
    }
}

/// Coupling and smoothing factor from a `w`-sample running mean of `trace`.
fn smoothed_fit(times: &[f64], trace: &[f64], w: usize, m: &CouplingMeasurement) -> Result<(f64, f64)> {
    let n = trace.len() - w + 1;
    let shift = 0.5 * (w - 1) as f64 * m.strobe_period;
    let t: Vec<f64> = times[..n].iter().map(|t| t + shift).collect();
    let values: Vec<f64> = (0..n).map(|k| trace[k..k + w].iter().sum::<f64>() / w as f64).collect();
    let fit = crate::dynamics::rabi::rabi_fit_with(&t, &values, m.max_relative_rms)?;
    let wh = fit.frequency * m.strobe_period;
    let factor = if w == 1 { 1.0 } else { (w as f64 * wh).sin() / (w as f64 * wh.sin()) };
    Ok((fit.frequency * (fit.amplitude / factor.max(1e-12)).max(0.0).sqrt(), factor))
}
