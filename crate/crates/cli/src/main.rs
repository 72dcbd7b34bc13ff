use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use cfsim_cli::commands::{self, CommandOutput};
use cfsim_cli::config::{defaults_report, parse_config, ConfigError, Format, LoadedConfig, Overrides};
use cfsim_cli::emit;
use cfsim_cli::units::{parse_quantity, Dimension};
use cfsim_core::dynamics::Integrator;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cfsim", version, about = "Concurrent fSim gates under bichromatic parametric drives")]
struct Cli {
    /// TOML configuration; the shipped reference configuration when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for CSV / JSON outputs; overrides `outputs.directory`.
    /// Without either, results go to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = default_workers())]
    workers: usize,
    /// Time step with unit, e.g. "0.5 ps".
    #[arg(long, global = true)]
    dt: Option<String>,
    #[arg(long, global = true, value_enum)]
    integrator: Option<IntegratorArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum IntegratorArg {
    Split,
    Expm,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dressed spectrum and device constants.
    Spectrum,
    /// Effective coupling of `[coupling]` under `[[tones]]`.
    Coupling,
    /// Tone-2 amplitude closing the CPHASE cycle at `[point]`.
    OptAmp,
    /// Tone parameters realizing `point.theta` and `point.phi`.
    Invert {
        /// Also propagate the solution and report the realized gate.
        #[arg(long)]
        propagate: bool,
    },
    /// Multi-photon resonance conditions of `[[tones]]`.
    Resonances,
    /// Population traces under `[[tones]]`.
    Evolve,
    /// Gate report of `[point]`.
    Gate,
    /// Grid over `[[sweep.axes]]`.
    Sweep,
    /// Two-qutrit toy model.
    Toy,
    /// Idle ZZ cancellation with an off-resonant tone.
    ZzIdle,
    /// Flat-top envelope factor of tone 2.
    PulseOpt,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn name(c: &Command) -> &'static str {
    match c {
        Command::Spectrum => "spectrum",
        Command::Coupling => "coupling",
        Command::OptAmp => "opt-amp",
        Command::Invert { .. } => "invert",
        Command::Resonances => "resonances",
        Command::Evolve => "evolve",
        Command::Gate => "gate",
        Command::Sweep => "sweep",
        Command::Toy => "toy",
        Command::ZzIdle => "zz-idle",
        Command::PulseOpt => "pulse-opt",
    }
}

fn run(cli: &Cli, loaded: &LoadedConfig) -> anyhow::Result<CommandOutput> {
    let cfg = &loaded.config;
    match cli.command {
        Command::Spectrum => commands::spectrum(cfg),
        Command::Coupling => commands::coupling(cfg),
        Command::OptAmp => commands::opt_amp(cfg),
        Command::Invert { propagate } => commands::invert(cfg, propagate),
        Command::Resonances => commands::resonances(cfg),
        Command::Evolve => commands::evolve(cfg),
        Command::Gate => commands::gate(cfg),
        Command::Sweep => commands::sweep(loaded, cli.workers),
        Command::Toy => commands::toy(cfg),
        Command::ZzIdle => commands::zz_idle(cfg),
        Command::PulseOpt => commands::pulse_opt(cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let dt = match cli.dt.as_deref().map(|t| parse_quantity(t, Dimension::Time)).transpose() {
        Ok(dt) => dt,
        Err(e) => {
            eprintln!("error: --dt: {e}");
            return ExitCode::from(2);
        }
    };
    let overrides = Overrides {
        dt,
        integrator: cli.integrator.map(|i| match i {
            IntegratorArg::Split => Integrator::Split,
            IntegratorArg::Expm => Integrator::Expm,
        }),
        format: cli.format,
    };
    let loaded = match parse_config(cli.config.as_deref(), &overrides) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(match e {
                ConfigError::Io { .. } => 1,
                _ => 2,
            });
        }
    };
    let filled = defaults_report(&loaded.config);
    if !filled.is_empty() {
        eprintln!("filled defaults:\n{filled}");
    }
    let command = name(&cli.command);
    let output = match run(&cli, &loaded) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    let mut stdout = std::io::stdout().lock();
    let result = (|| -> anyhow::Result<()> {
        let out = cli.out.clone().or_else(|| loaded.config.output_directory.as_ref().map(PathBuf::from));
        match &out {
            Some(dir) => {
                let summary = emit::summary(&loaded, command, &output.table, output.stats.clone())?;
                for p in emit::write_outputs(dir, &output.stem, &output.table, &summary, loaded.config.format)? {
                    writeln!(stdout, "wrote {}", p.display())?;
                }
            }
            None => {
                write!(stdout, "{}", output.table.to_text())?;
                writeln!(stdout, "{}", serde_json::to_string_pretty(&output.stats)?)?;
            }
        }
        stdout.flush()?;
        Ok(())
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
