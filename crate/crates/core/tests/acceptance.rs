//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the
//! binary fails only when a criterion cannot run to completion.
//!
//! `cargo test --release -p cfsim-core --test acceptance -- C2 C5` runs a subset.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use cfsim_core::analytics::toy::two_level_return_probability;
use cfsim_core::analytics::*;
use cfsim_core::dynamics::propagate::propagate_generic;
use cfsim_core::dynamics::pulse::PulseOptions;
use cfsim_core::dynamics::{EnvelopeSpec, Integrator, PropagationOptions};
use cfsim_core::gate::{extract_angles, fidelity, gate_report, ideal_fsim, ComputationalUnitary};
use cfsim_core::model::*;
use cfsim_core::numerics::bessel::J1_FIRST_ZERO;
use cfsim_core::numerics::linalg::{connected_components, hermiticity_defect, to_complex};
use cfsim_core::numerics::roots::{bracketed_root, RootOptions};
use cfsim_core::numerics::{j0_plus_j2, wrap_phase, C64};
use cfsim_core::protocol::{
    cfsim_tones, floquet_resonance, measure_coupling, propagate_computational, run_point, CfsimDevice,
    CouplingMeasurement, GateSettings, PointOutcome,
};
use cfsim_core::spectrum::coupling_constants;
use cfsim_core::{ghz, mhz, to_mhz};
use common::{label, paper, small_device};
use nalgebra::{DMatrix, Matrix4, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = (bool, String);
type Criterion = (&'static str, &'static str, fn() -> Verdict);

const T_G: f64 = 100.0;
const J0_ZEROS: [f64; 3] = [2.404_825_557_695_773, 5.520_078_110_286_311, 8.653_727_912_911_013];

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [Criterion; 10] = [
        ("C1", "Bessel zero of the 110-020 coupling", c1_bessel_zero),
        ("C2", "crosstalk stripes", c2_crosstalk_stripes),
        ("C3", "analytic vs numeric couplings", c3_coupling_agreement),
        ("C4", "leakage along optimal amplitudes", c4_leakage),
        ("C5", "cfSim map", c5_cfsim_map),
        ("C6", "ZZ-free full iSWAP", c6_zz_free_iswap),
        ("C7", "pulse shaping", c7_pulse_shaping),
        ("C8", "toy-model reduction", c8_toy_reduction),
        ("C9", "property suite", c9_properties),
        ("C10", "DC+AC toy model", c10_dc_ac),
    ];
    let mut ran = 0;
    let mut passed = 0;
    let mut broken = Vec::new();
    for (id, name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f.eq_ignore_ascii_case(id)) {
            continue;
        }
        let start = Instant::now();
        match catch_unwind(AssertUnwindSafe(run)) {
            Ok((pass, detail)) => {
                ran += 1;
                passed += pass as usize;
                let tag = if pass { "PASS" } else { "FAIL" };
                println!("{tag} {id} {name}: {detail} [{:.1} s]", start.elapsed().as_secs_f64());
            }
            Err(_) => {
                println!("FAIL {id} {name}: did not complete");
                broken.push(id);
            }
        }
    }
    println!("acceptance: {passed}/{ran} criteria passed");
    if !broken.is_empty() {
        eprintln!("criteria that did not complete: {broken:?}");
        std::process::exit(1);
    }
}

/// Exchange coupling from a trace sampled once per drive period.
///
/// `None` when the trace cannot be fitted; zero when nothing transfers.
fn strobe_coupling(
    dev: &CfsimDevice,
    input: &str,
    target: &str,
    tones: &[DriveTone],
    window: f64,
    period: f64,
) -> Option<f64> {
    smoothed_strobe_coupling(dev, input, target, tones, window, period, 1)
}

/// [`strobe_coupling`] with a running mean over `smooth` strobe samples.
fn smoothed_strobe_coupling(
    dev: &CfsimDevice,
    input: &str,
    target: &str,
    tones: &[DriveTone],
    window: f64,
    period: f64,
    smooth: usize,
) -> Option<f64> {
    let m = CouplingMeasurement { window, strobe_period: period, smooth, max_relative_rms: 0.3, extensions: 2 };
    measure_coupling(dev, label(input), label(target), tones, &m).ok()
}

/// Location of a V-shaped minimum from the two lines on either side of `i`.
fn v_vertex(x: &[f64], y: &[f64], i: usize) -> f64 {
    if i < 2 || i + 2 >= x.len() {
        return x[i];
    }
    let left = (y[i - 1] - y[i - 2]) / (x[i - 1] - x[i - 2]);
    let right = (y[i + 2] - y[i + 1]) / (x[i + 2] - x[i + 1]);
    let (bl, br) = (y[i - 1] - left * x[i - 1], y[i + 1] - right * x[i + 1]);
    if (left - right).abs() < 1e-300 {
        return x[i];
    }
    let v = (br - bl) / (left - right);
    if (x[i - 1]..=x[i + 1]).contains(&v) {
        v
    } else {
        x[i]
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn c1_bessel_zero() -> Verdict {
    let dev = paper();
    let c = coupling_constants(&dev.frame, dev.constants.cphase.transition, Mode::Q1, Mode::Q2).unwrap();
    let nu = dev.constants.gap.abs();
    let xs = linspace(3.0, 4.6, 40);
    let analytic: Vec<f64> = xs.iter().map(|x| g_single(&c, x * nu / c.beta, nu).g).collect();
    let root = bracketed_root(j0_plus_j2, 3.0, 4.6, RootOptions::default()).unwrap();
    let g_ref = analytic[0].abs();
    let mut numeric = Vec::new();
    for &x in &xs {
        let tone = DriveTone::new(Mode::Q1, x * nu / c.beta, nu);
        let g = strobe_coupling(dev, "110", "020", &[tone], 4.0 * PI / g_ref, 2.0 * PI / nu);
        numeric.push(g.unwrap_or(f64::NAN));
    }
    let (i_min, _) = numeric
        .iter()
        .enumerate()
        .filter(|(_, g)| g.is_finite())
        .fold((0, f64::INFINITY), |acc, (i, &g)| if g < acc.1 { (i, g) } else { acc });
    let dip = v_vertex(&xs, &numeric, i_min);
    let analytic_sign_change = analytic.windows(2).any(|w| w[0] * w[1] <= 0.0);
    let dev_analytic = root / J1_FIRST_ZERO - 1.0;
    let dev_numeric = dip / J1_FIRST_ZERO - 1.0;
    let pass = analytic_sign_change && dev_analytic.abs() <= 0.02 && dev_numeric.abs() <= 0.02;
    (
        pass,
        format!(
            "analytic zero at beta*Omega/nu = {root:.4} ({:+.2}%), numeric dip at {dip:.3} ({:+.2}%), tolerance 2%",
            100.0 * dev_analytic,
            100.0 * dev_numeric
        ),
    )
}

fn c2_crosstalk_stripes() -> Verdict {
    let dev = paper();
    let c = &dev.constants;
    let omega_1 = mhz(150.0);
    let gamma = c.iswap.gamma.abs();
    let nus = linspace(mhz(30.0), mhz(45.0), 25);
    let omegas = linspace(0.0, mhz(450.0), 25);
    let g_0 = g_single(&c.iswap, omega_1, c.nu_1).g.abs();

    let t_analytic = Instant::now();
    let mut analytic_ok = true;
    for &nu in &nus {
        let g: Vec<f64> = omegas.iter().map(|&o| g_crosstalk(&c.iswap, omega_1, c.nu_1, o, nu).g.abs()).collect();
        analytic_ok &= stripes_matched(&g, &omegas, nu, gamma, g_0).iter().all(|&(_, m)| m);
    }
    let analytic_time = t_analytic.elapsed().as_secs_f64();

    // spectator lines n nu_2 closer to a 100-010 transition than the exchange coupling
    let scan = ScanOptions { max_photons: 14, threshold: g_0, labels: Some(vec![label("100"), label("010")]) };
    let (mut expected, mut matched, mut flagged) = (0, 0, 0);
    let (mut flagged_expected, mut flagged_matched) = (0, 0);
    let mut misses = Vec::new();
    for &nu in &nus {
        let probe = [DriveTone::new(Mode::Q1, omega_1, c.nu_1), DriveTone::new(Mode::Q2, 0.0, nu)];
        let anomalous = resonance_scan(&dev.frame, &probe, &scan)
            .unwrap()
            .iter()
            .any(|r| r.upper != r.lower && !(r.n_1.abs() == 1 && r.n_2 == 0));
        let g: Vec<f64> = omegas
            .iter()
            .map(|&o| {
                let spectator = DriveTone::new(Mode::Q2, o, nu);
                let nu_1 = floquet_resonance(dev, &spectator, label("100"), label("010"), c.nu_1).unwrap();
                let tones = [DriveTone::new(Mode::Q1, omega_1, nu_1), spectator];
                smoothed_strobe_coupling(dev, "100", "010", &tones, 4.0 * PI / g_0, 2.0 * PI / nu, 8)
                    .unwrap_or(f64::NAN)
            })
            .collect();
        let found = stripes_matched(&g, &omegas, nu, gamma, g_0);
        if anomalous {
            flagged += 1;
            flagged_expected += found.len();
            flagged_matched += found.iter().filter(|(_, ok)| *ok).count();
            continue;
        }
        for (zero, ok) in found {
            expected += 1;
            matched += ok as usize;
            if !ok {
                misses.push(format!("{zero:.3}@{:.1}MHz", to_mhz(nu)));
            }
        }
    }
    let pass = analytic_ok && analytic_time < 1.0 && expected > 0 && matched == expected;
    (
        pass,
        format!(
            "numeric minima on {matched}/{expected} expected J0 zeros over {} columns{}; {flagged} columns on multi-photon lines excluded ({flagged_matched}/{flagged_expected} there); analytic grid {} in {:.3} s",
            nus.len() - flagged,
            if misses.is_empty() { String::new() } else { format!(", missed {}", misses.join(" ")) },
            if analytic_ok { "matches" } else { "misses zeros" },
            analytic_time
        ),
    )
}

/// For each listed `J_0` zero inside the column, whether a local minimum of
/// `g` lies within one grid step of it.
fn stripes_matched(g: &[f64], omegas: &[f64], nu: f64, gamma: f64, g_0: f64) -> Vec<(f64, bool)> {
    let xs: Vec<f64> = omegas.iter().map(|o| gamma * o / nu).collect();
    let step = xs[1] - xs[0];
    let minima: Vec<usize> =
        (1..g.len() - 1).filter(|&i| g[i].is_finite() && g[i] <= g[i - 1].min(g[i + 1]) && g[i] < 0.5 * g_0).collect();
    J0_ZEROS
        .iter()
        .filter(|&&z| z > xs[1] && z < xs[xs.len() - 2])
        .map(|&z| (z, minima.iter().any(|&i| (xs[i] - z).abs() <= step)))
        .collect()
}

fn perturbed_device(rng: &mut ChaCha8Rng) -> DeviceParams {
    let mut d = DeviceParams::paper_device();
    d.omega_1 = ghz(rng.random_range(7.0..7.3));
    d.omega_2 = ghz(rng.random_range(7.45..7.75));
    d.omega_c = ghz(rng.random_range(8.3..8.7));
    d.g_1c = mhz(rng.random_range(100.0..140.0));
    d.g_2c = mhz(rng.random_range(100.0..140.0));
    d.delta_1 = mhz(rng.random_range(-220.0..-180.0));
    d.delta_2 = mhz(rng.random_range(-220.0..-180.0));
    d
}

fn c3_coupling_agreement() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut failed = 0;
    for draw in 0..20 {
        let dev = CfsimDevice::new(perturbed_device(&mut rng), CouplingForm::Rwa).unwrap();
        let c = &dev.constants;
        let ratio = rng.random_range(0.05..0.5);
        let (constants, mode, nu, input, target) = if draw % 2 == 0 {
            (&c.iswap, Mode::Q1, c.nu_1, "100", "010")
        } else {
            (&c.cphase, Mode::Q2, c.gap.abs(), "110", "020")
        };
        let omega = ratio * nu;
        let g = g_single(constants, omega, nu).g.abs();
        let numeric =
            strobe_coupling(&dev, input, target, &[DriveTone::new(mode, omega, nu)], 2.0 * PI / g, 2.0 * PI / nu);
        match numeric {
            Some(n) => worst = worst.max((n - g).abs() / g),
            None => failed += 1,
        }
    }
    (
        failed == 0 && worst <= 0.05,
        format!("20 draws, worst relative deviation {:.2}% (tolerance 5%), {failed} failed fits", 100.0 * worst),
    )
}

fn rect_settings() -> GateSettings {
    GateSettings::new(T_G)
}

fn shaped_settings() -> GateSettings {
    let mut s = GateSettings::new(T_G);
    s.envelope = EnvelopeSpec::default_flat_top(T_G);
    s.pulse = Some(PulseOptions::default());
    s
}

fn infidelity(out: &PointOutcome) -> Option<f64> {
    out.report.as_ref().map(|r| 1.0 - r.fidelity)
}

fn c4_leakage() -> Verdict {
    let dev = paper();
    let c = &dev.constants;
    let omega_1 = mhz(100.0);
    let edge = 2.0 * PI / T_G;
    let mut leaks = Vec::new();
    let mut worst_p110: f64 = 1.0;
    for k in 0..15 {
        let eps = edge * (-1.0 + 2.0 * (k as f64 + 0.5) / 15.0);
        let out = run_point(dev, omega_1, c.nu_1, c.nu_2_for_detuning(eps), None, &rect_settings());
        let report = out.report.expect("feasible trajectory point");
        leaks.push(report.leakage);
        worst_p110 = worst_p110.min(1.0 - 3.0 * report.leakage);
    }
    let mean = leaks.iter().sum::<f64>() / leaks.len() as f64;
    let max = leaks.iter().copied().fold(0.0, f64::max);
    (
        mean < 0.01,
        format!(
            "15 points at Omega_1 = 100 MHz: mean leakage {:.3}%, max {:.3}% (limit 1%), 110 retention >= {:.4}",
            100.0 * mean,
            100.0 * max,
            worst_p110
        ),
    )
}

fn omega_1_full_swap(c: &CfsimConstants) -> f64 {
    bracketed_root(|o| g_single(&c.iswap, o, c.nu_1).g.abs() * T_G - PI / 2.0, 0.0, mhz(400.0), RootOptions::default())
        .unwrap()
}

fn c5_cfsim_map() -> Verdict {
    let dev = paper();
    let c = &dev.constants;
    let omegas = linspace(0.0, omega_1_full_swap(c), 10);
    let edge = 2.0 * PI / T_G;
    let epsilons = linspace(-edge, edge, 10);
    let (mut thetas, mut phis, mut fids) = (Vec::new(), Vec::new(), Vec::new());
    let mut infeasible = 0;
    for &o in &omegas {
        for &e in &epsilons {
            let out = run_point(dev, o, c.nu_1, c.nu_2_for_detuning(e), None, &rect_settings());
            match out.report {
                Some(r) if out.feasible => {
                    thetas.push(r.theta.to_degrees());
                    phis.push(r.phi.to_degrees());
                    fids.push(r.fidelity);
                }
                _ => infeasible += 1,
            }
        }
    }
    let theta_lo = thetas.iter().copied().fold(f64::INFINITY, f64::min);
    let theta_hi = thetas.iter().copied().fold(0.0, f64::max);
    let mut sorted = phis.clone();
    sorted.sort_by(f64::total_cmp);
    let mut widest_gap = 360.0 - (sorted[sorted.len() - 1] - sorted[0]);
    for w in sorted.windows(2) {
        widest_gap = f64::max(widest_gap, w[1] - w[0]);
    }
    let min_f = fids.iter().copied().fold(1.0, f64::min);
    let frac_999 = fids.iter().filter(|&&f| f >= 0.999).count() as f64 / fids.len() as f64;
    let theta_ok = theta_lo <= 3.0 && theta_hi >= 87.0;
    // ten phase columns spaced 40 deg apart
    let phi_ok = widest_gap <= 60.0;
    let pass = theta_ok && phi_ok && min_f >= 0.995 && frac_999 >= 0.6;
    (
        pass,
        format!(
            "{} feasible points ({infeasible} not): theta in [{theta_lo:.2}, {theta_hi:.2}] deg, widest phi gap {widest_gap:.1} deg, min fidelity {:.3}%, {:.0}% of points >= 99.9%",
            fids.len(),
            100.0 * min_f,
            100.0 * frac_999
        ),
    )
}

fn c6_zz_free_iswap() -> Verdict {
    let dev = paper();
    let c = &dev.constants;
    let s = invert_targets(c, T_G, PI / 2.0, 0.0, ThetaLaw::Closed, &AmplitudeOptions::default()).unwrap();
    let tones = cfsim_tones(s.omega_1, s.nu_1, s.omega_2, s.nu_2, &EnvelopeSpec::rectangular());
    let result = propagate_computational(dev, &tones, T_G, &PropagationOptions::default()).unwrap();
    let r = gate_report(&result, &dev.frame, T_G, Some((PI / 2.0, 0.0))).unwrap();
    let target = r.predicted.expect("target comparison").fidelity;
    let theta = r.theta.to_degrees();
    let phi = r.phi.to_degrees();
    let pass = (theta - 90.0).abs() <= 1.0 && phi.abs() <= 1.0 && (100.0 * target - 99.67).abs() <= 0.3;
    (
        pass,
        format!(
            "Omega_1 = {:.1} MHz, Omega_2 = {:.1} MHz, nu_2 = {:.5} GHz: theta {theta:.2} deg, phi {phi:.2} deg, fidelity vs fSim(90, 0) {:.3}% (vs fitted angles {:.3}%), leakage {:.2e}",
            to_mhz(s.omega_1),
            to_mhz(s.omega_2),
            to_mhz(s.nu_2) / 1000.0,
            100.0 * target,
            100.0 * r.fidelity,
            r.leakage
        ),
    )
}

fn c7_pulse_shaping() -> Verdict {
    let dev = paper();
    let c = &dev.constants;
    let edge = 2.0 * PI / T_G;
    let epsilons = linspace(-0.9 * edge, 0.9 * edge, 7);
    let mut ratios = Vec::new();
    for o in [mhz(50.0), mhz(100.0), mhz(150.0)] {
        let (mut rect, mut shaped) = (0.0, 0.0);
        for &e in &epsilons {
            let nu_2 = c.nu_2_for_detuning(e);
            rect += infidelity(&run_point(dev, o, c.nu_1, nu_2, None, &rect_settings())).expect("rectangular point");
            shaped += infidelity(&run_point(dev, o, c.nu_1, nu_2, None, &shaped_settings())).expect("shaped point");
        }
        ratios.push((to_mhz(o), rect / shaped, rect / 7.0, shaped / 7.0));
    }
    let pass = ratios.iter().all(|r| r.1 >= 5.0);
    let detail = ratios
        .iter()
        .map(|(o, r, a, b)| format!("Omega_1 {o:.0} MHz: {r:.2}x ({:.3}% -> {:.3}%)", 100.0 * a, 100.0 * b))
        .collect::<Vec<_>>()
        .join("; ");
    (pass, format!("mean infidelity ratio rect/shaped (floor 5x): {detail}"))
}

fn toy_block_transfer(block: &nalgebra::Matrix2<f64>, t: f64) -> f64 {
    1.0 - two_level_return_probability(block[(0, 1)], block[(1, 1)] - block[(0, 0)], t)
}

fn c8_toy_reduction() -> Verdict {
    let detuning = mhz(450.0);
    let anharmonicity = mhz(-200.0);
    let params = |x: f64, eps: f64| {
        let nu_1 = detuning;
        let nu_2 = detuning - anharmonicity - eps;
        ToyParams {
            detuning,
            anharmonicity,
            coupling: mhz(1.0),
            drives: [
                ToyTone { amplitude: x * nu_1, frequency: nu_1 },
                ToyTone { amplitude: x * nu_2, frequency: nu_2 },
            ],
            dc_ac: None,
        }
    };
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for x in [0.15, 0.3] {
        // detuned case: sideband detuning equal to the resonant block coupling
        let resonant = toy_block_hamiltonians(&params(x, 0.0)).cphase_coupling.abs();
        for eps in [0.0, resonant] {
            let p = params(x, eps);
            let b = toy_block_hamiltonians(&p);
            let t_end = PI / b.iswap_coupling.abs().min(b.cphase_coupling.abs());
            let mut psi0 = DMatrix::<C64>::zeros(5, 2);
            psi0[(0, 0)] = C64::new(1.0, 0.0);
            psi0[(2, 1)] = C64::new(1.0, 0.0);
            let steps = (t_end / 0.02).ceil() as usize;
            let run = propagate_generic(|t| to_complex(&build_toy_hamiltonian(&p, t)), 0.0, t_end, steps, &psi0, 300);
            let p10 = run.population(1, 0);
            let p02 = run.population(3, 1);
            for (k, &t) in run.time_grid.iter().enumerate() {
                worst = worst.max((p10[k] - toy_block_transfer(&b.iswap, t)).abs());
                worst = worst.max((p02[k] - toy_block_transfer(&b.cphase, t)).abs());
            }
            cases += 1;
        }
    }
    (
        worst <= 0.02,
        format!(
            "{cases} cases with Omega/nu in {{0.15, 0.3}}, g = 1 MHz: worst population gap {:.2}% (tolerance 2%)",
            100.0 * worst
        ),
    )
}

fn c9_properties() -> Verdict {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut check = |name: &str, pass: bool, value: String| {
        ok &= pass;
        notes.push(format!("{name} {value}{}", if pass { "" } else { " (FAIL)" }));
    };

    let dev = paper();
    let c = &dev.constants;
    let h0 = build_non_rwa_hamiltonian(&dev.device).unwrap();
    let tp = ToyParams {
        detuning: mhz(450.0),
        anharmonicity: mhz(-200.0),
        coupling: mhz(5.0),
        drives: [ToyTone { amplitude: 0.8, frequency: 2.8 }, ToyTone { amplitude: 1.2, frequency: 4.1 }],
        dc_ac: None,
    };
    let herm = (0..5)
        .map(|k| hermiticity_defect(&build_toy_rotating_hamiltonian(&tp, 3.7 * k as f64)))
        .fold(hermiticity_defect(&to_complex(&h0)), f64::max);
    check("hermiticity", herm == 0.0, format!("{herm:.1e}"));

    let s = invert_targets(c, T_G, 1.0, 0.5, ThetaLaw::Closed, &AmplitudeOptions::default()).unwrap();
    let out = run_point(dev, s.omega_1, s.nu_1, s.nu_2, Some(s.omega_2), &rect_settings());
    let tones = cfsim_tones(s.omega_1, s.nu_1, s.omega_2, s.nu_2, &EnvelopeSpec::rectangular());
    let drift = propagate_computational(dev, &tones, T_G, &PropagationOptions::default()).unwrap().max_drift;
    check("unitarity drift", drift <= 1e-8 && out.report.is_some(), format!("{drift:.1e}"));

    let frame_gap = toy_frame_gap(&tp);
    check("frame round trip", frame_gap <= 1e-8, format!("{frame_gap:.1e}"));

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut fid_gap, mut phase_gap, mut trip_gap): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..200 {
        let m = Matrix4::from_fn(|_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let u = m.qr().q();
        let chi = rng.random_range(-PI..PI);
        let target = ideal_fsim(rng.random_range(0.0..PI / 2.0), rng.random_range(-PI..PI));
        fid_gap = fid_gap.max((fidelity(&u, &u) - 1.0).abs());
        phase_gap = phase_gap.max((fidelity(&(u * C64::from_polar(1.0, chi)), &target) - fidelity(&u, &target)).abs());
        let (theta, phi) = (rng.random_range(0.0..PI / 2.0), rng.random_range(-PI..PI));
        let ex = extract_angles(&ComputationalUnitary::new(ideal_fsim(theta, phi))).unwrap();
        trip_gap = trip_gap.max((ex.theta - theta).abs()).max(wrap_phase(ex.phi - phi).abs());
    }
    check("F(U,U)=1", fid_gap <= 1e-12, format!("{fid_gap:.1e}"));
    check("global phase", phase_gap <= 1e-12, format!("{phase_gap:.1e}"));
    check("extract round trip", trip_gap <= 1e-12, format!("{trip_gap:.1e}"));

    let mut series_gap: f64 = 0.0;
    for _ in 0..100 {
        let o = mhz(rng.random_range(0.0..400.0));
        let terms = g_series(&dev.frame, c.iswap.transition, &[DriveTone::new(Mode::Q1, o, c.nu_1)], 2).unwrap();
        let t = stationary_terms(&terms, 1e-9)[0];
        let g = g_single(&c.iswap, o, c.nu_1).g;
        series_gap = series_gap.max((t.stripped_amplitude().re - g).abs() / g.abs().max(1e-300));
    }
    check("series vs closed form", series_gap <= 1e-10, format!("{series_gap:.1e}"));

    let order = split_order();
    check("split order", (1.9..=2.1).contains(&order), format!("{order:.3}"));
    (ok, notes.join(", "))
}

fn toy_frame_gap(p: &ToyParams) -> f64 {
    let mut psi = DMatrix::<C64>::zeros(5, 1);
    for (i, z) in [(0.3, 0.1), (-0.2, 0.4), (0.5, 0.0), (0.1, -0.3), (0.2, 0.2)].iter().enumerate() {
        psi[(i, 0)] = C64::new(z.0, z.1);
    }
    psi /= C64::new(psi.norm(), 0.0);
    let phases = |t: f64| toy_frame_phases(p, t).map(|x| C64::from_polar(1.0, x));
    let v0 = phases(0.0);
    let psi_i = DMatrix::from_fn(5, 1, |i, _| v0[i].conj() * psi[(i, 0)]);
    let lab = propagate_generic(|t| to_complex(&build_toy_hamiltonian(p, t)), 0.0, 20.0, 10_000, &psi, 1);
    let rot = propagate_generic(|t| build_toy_rotating_hamiltonian(p, t), 0.0, 20.0, 10_000, &psi_i, 1);
    let v = phases(20.0);
    let mapped = DMatrix::from_fn(5, 1, |i, _| v[i] * rot.final_state()[(i, 0)]);
    (lab.final_state() - mapped).norm()
}

fn split_order() -> f64 {
    let d = small_device();
    let h0 = build_rwa_hamiltonian(&d).unwrap();
    let p = cfsim_core::dynamics::Propagator::new(&h0, &d).unwrap();
    let tones = [
        DriveTone::new(Mode::Q1, 3.0, 2.5).with_phase(0.3),
        DriveTone::new(Mode::Q2, 2.0, 1.7),
        DriveTone::new(Mode::Coupler, 1.0, 4.1),
    ];
    let opts = |dt: f64| PropagationOptions { dt: Some(dt), integrator: Integrator::Split, ..Default::default() };
    let reference = p.unitary(&tones, 5.0, &opts(2.5e-5)).unwrap();
    let dts = [4e-3, 2e-3, 1e-3, 5e-4];
    let xs: Vec<f64> = dts.iter().map(|d: &f64| d.ln()).collect();
    let ys: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            let diff = p.unitary(&tones, 5.0, &opts(dt)).unwrap() - &reference;
            diff.svd(false, false).singular_values.max().ln()
        })
        .collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>()
}

/// Computational gate of the DC+AC toy model in `(00, 01, 10, 11)` order.
fn dc_ac_gate(p: &ToyParams, t_g: f64) -> (ComputationalUnitary, f64) {
    let mut psi0 = DMatrix::<C64>::zeros(5, 3);
    for k in 0..3 {
        psi0[(k, k)] = C64::new(1.0, 0.0);
    }
    let steps = (t_g / 0.01).ceil() as usize;
    let run = propagate_generic(|t| to_complex(&build_toy_dc_ac_hamiltonian(p, t).unwrap()), 0.0, t_g, steps, &psi0, 1);
    let u = run.final_state();
    let mut m = Matrix4::<C64>::zeros();
    m[(0, 0)] = C64::new(1.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            m[(1 + i, 1 + j)] = u[(i, j)];
        }
    }
    m[(3, 3)] = u[(2, 2)];
    let leak = u[(3, 2)].norm_sqr() + u[(4, 2)].norm_sqr();
    (ComputationalUnitary::new(m), leak)
}

fn c10_dc_ac() -> Verdict {
    let delta = mhz(-200.0);
    let g0 = mhz(10.0);
    let t_g = PI / (2.0 * g0);
    let base = |amplitude: f64, frequency: f64| ToyParams {
        detuning: 0.0,
        anharmonicity: delta,
        coupling: 0.0,
        drives: [ToyTone { amplitude: 0.0, frequency: 1.0 }; 2],
        dc_ac: Some(DcAcDrive { g0, amplitude, frequency, delta_1: delta, delta_2: delta }),
    };
    // resonance of the 11-like and bright 02/20-like DC eigenstates
    let dc = build_toy_dc_ac_hamiltonian(&base(0.0, 1.0), 0.0).unwrap();
    let block = dc.view((2, 2), (3, 3)).into_owned();
    let eig = SymmetricEigen::new(block);
    let eleven =
        (0..3).max_by(|&a, &b| eig.eigenvectors[(0, a)].abs().total_cmp(&eig.eigenvectors[(0, b)].abs())).unwrap();
    let bright = (0..3)
        .filter(|&k| k != eleven)
        .max_by(|&a, &b| eig.eigenvectors[(0, a)].abs().total_cmp(&eig.eigenvectors[(0, b)].abs()))
        .unwrap();
    let resonance = (eig.eigenvalues[eleven] - eig.eigenvalues[bright]).abs();

    let freqs = linspace(mhz(110.0), mhz(300.0), 20);
    let amps = linspace(0.0, mhz(38.0), 20);
    let mut leak = vec![vec![0.0; 20]; 20];
    let mut phi = vec![vec![0.0; 20]; 20];
    for (i, &w) in freqs.iter().enumerate() {
        for (j, &a) in amps.iter().enumerate() {
            let (m, l) = dc_ac_gate(&base(a, w), t_g);
            leak[i][j] = l;
            if l < 0.5 {
                let ex = extract_angles(&m).unwrap();
                phi[i][j] = ex.phi;
            } else {
                phi[i][j] = f64::NAN;
            }
        }
    }
    // leakage islands above one half whose peak lies inside the window
    let n = 20;
    let hot = |k: usize| leak[k / n][k % n] > 0.5;
    let islands = connected_components(n * n, |a, b| {
        let (ia, ja, ib, jb) = (a / n, a % n, b / n, b % n);
        hot(a) && hot(b) && ia.abs_diff(ib) + ja.abs_diff(jb) == 1
    });
    let step_w = freqs[1] - freqs[0];
    let mut centers = Vec::new();
    for island in islands.iter().filter(|c| hot(c[0])) {
        let peak = *island.iter().max_by(|&&a, &&b| leak[a / n][a % n].total_cmp(&leak[b / n][b % n])).unwrap();
        let (pi_, pj) = (peak / n, peak % n);
        if pi_ == 0 || pi_ == n - 1 || pj == 0 || pj == n - 1 {
            continue;
        }
        let weight: f64 = island.iter().map(|&k| leak[k / n][k % n]).sum();
        let centroid = island.iter().map(|&k| leak[k / n][k % n] * freqs[k / n]).sum::<f64>() / weight;
        centers.push((centroid, amps[pj], leak[pi_][pj]));
    }
    let centers_on_resonance = centers.iter().filter(|c| (c.0 - resonance).abs() <= step_w).count();

    let i_res = (0..20).min_by(|&a, &b| (freqs[a] - resonance).abs().total_cmp(&(freqs[b] - resonance).abs())).unwrap();
    let best_pi = (0..20)
        .filter(|&j| leak[i_res][j] < 0.05 && amps[j] > 0.0)
        .map(|j| wrap_phase(phi[i_res][j] - PI).abs())
        .fold(f64::INFINITY, f64::min)
        .to_degrees();

    // sign changes of phi between calm neighbours that do not pass through pi
    let mut crossings = 0;
    for i in 0..n {
        for j in 0..n {
            for (a, b) in [(i + 1, j), (i, j + 1)] {
                if a == n || b == n {
                    continue;
                }
                let (p, q) = (phi[i][j], phi[a][b]);
                let calm = leak[i][j] < 0.05 && leak[a][b] < 0.05;
                if calm && p * q <= 0.0 && (p - q).abs() < PI / 2.0 {
                    crossings += 1;
                }
            }
        }
    }
    let pass = centers.len() == 2 && centers_on_resonance == 2 && best_pi <= 10.0 && crossings >= 2;
    let listed = centers
        .iter()
        .map(|c| format!("{:.0}% at {:.1} MHz / Omega {:.0} MHz", 100.0 * c.2, to_mhz(c.0), to_mhz(c.1)))
        .collect::<Vec<_>>()
        .join(", ");
    (
        pass,
        format!(
            "{} leakage centers [{listed}], {centers_on_resonance} within one frequency step of the {:.1} MHz resonance; closest phase to pi on resonance off by {best_pi:.1} deg; {crossings} zero-phase crossings",
            centers.len(),
            to_mhz(resonance)
        ),
    )
}
