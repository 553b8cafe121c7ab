//! `molphase` command-line front end.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod parse;

use parse::{Scan, Tau};

#[derive(Parser, Debug)]
#[command(name = "molphase", version, about = "Iterative phase estimation of molecular ground-state energies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact spectrum of a Hamiltonian.
    Eig(EigArgs),
    /// Run iterative phase estimation and write the trace.
    Ipea(IpeaArgs),
    /// Adiabatic state preparation fidelity at one or many total times.
    Asp(AspArgs),
    /// Per-iteration phase error across coherent-error strengths.
    NoiseSweep(SweepArgs),
    /// Probe spectra for every iteration of a run.
    Spectra(SpectraArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Built-in `h2` or path to a Hamiltonian JSON document.
    #[arg(long, default_value = "h2")]
    hamiltonian: String,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug, Clone)]
struct Estimation {
    /// Evolution time, or `auto` to place the spectrum inside one turn.
    #[arg(long, default_value = "auto", value_parser = parse::tau)]
    tau: Tau,
    /// Bits extracted per iteration.
    #[arg(long, default_value_t = 3)]
    bits: u32,
    /// Number of iterations.
    #[arg(long, default_value_t = 6)]
    iterations: usize,
    /// Per-reading phase error bound, in turns or with a `deg` suffix.
    #[arg(long, default_value = "5deg", value_parser = parse::angle)]
    errbd: f64,
    /// Seed for the readout jitter.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Ideal,
    Noisy,
    Pulse,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Law {
    Uniform,
    Extremes,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Prep {
    /// The exact ground state.
    Exact,
    /// The state left by a 200-step adiabatic sweep of length 50.
    Asp,
}

#[derive(Args, Debug, Clone)]
struct Readout {
    /// Readout model. Defaults to `noisy` when any noise flag is given.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Readout jitter bound, in turns or with a `deg` suffix.
    #[arg(long, value_parser = parse::angle)]
    jitter: Option<f64>,
    /// Distribution of the jitter inside its bound.
    #[arg(long, value_enum, default_value = "uniform")]
    jitter_law: Law,
    /// Strength of the coherent σz perturbation of U.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Fractional pulse over-rotation for the pulse backend.
    #[arg(long, default_value_t = 0.0)]
    over_rotation: f64,
    /// Initial system state.
    #[arg(long, value_enum, default_value = "exact")]
    prep: Prep,
}

#[derive(Args, Debug)]
struct EigArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct IpeaArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    estimation: Estimation,
    #[command(flatten)]
    readout: Readout,
}

#[derive(Args, Debug)]
struct AspArgs {
    #[command(flatten)]
    common: Common,
    /// Number of Trotter steps.
    #[arg(long, default_value_t = 6)]
    steps: usize,
    /// Single total time.
    #[arg(long, conflicts_with = "scan")]
    total_time: Option<f64>,
    /// Total-time grid `start:stop:step`; default 1:30:0.5.
    #[arg(long, value_parser = parse::scan)]
    scan: Option<Scan>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    estimation: Estimation,
    /// Comma-separated coherent-error strengths.
    #[arg(long, value_delimiter = ',', default_value = "0,1e-6,1e-5,1e-4,1e-3")]
    epsilons: Vec<f64>,
}

#[derive(Args, Debug)]
struct SpectraArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    estimation: Estimation,
    #[command(flatten)]
    readout: Readout,
    /// Lorentzian line width, Hz.
    #[arg(long, default_value_t = 2.0)]
    line_width: f64,
    /// Points per spectrum.
    #[arg(long, default_value_t = 4096)]
    points: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eig(a) => commands::eig(a),
        Command::Ipea(a) => commands::ipea(a),
        Command::Asp(a) => commands::asp(a),
        Command::NoiseSweep(a) => commands::noise_sweep(a),
        Command::Spectra(a) => commands::spectra(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
