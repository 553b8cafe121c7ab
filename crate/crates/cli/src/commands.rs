//! Command implementations. Every command resolves and validates its inputs,
//! computes all results in memory, and only then writes files, so a failing
//! run leaves the output directory untouched.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use molphase::ipea::error_profile;
use molphase::nmr::SpinSystem;
use molphase::probe::{extract_phase_from_spectrum, synthesize_spectrum, JitterLaw};
use molphase::{
    build_h2, choose_tau, load_hamiltonian, run_asp, run_ipea, scan_total_time, spectrum, AdiabaticSchedule,
    IpeaRun, IterationConfig, MolecularHamiltonian, NoiseModel, PulseBackend, PureState, ReadoutMode,
    SpectrumParams,
};
use serde_json::json;

use crate::parse::Tau;
use crate::{AspArgs, EigArgs, Estimation, IpeaArgs, Law, Mode, Prep, Readout, SpectraArgs, SweepArgs};

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or input; exit code 2.
    Invalid(String),
    /// Failure while computing or writing; exit code 1.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl From<molphase::Error> for CliError {
    fn from(e: molphase::Error) -> Self {
        if e.is_validation() {
            CliError::Invalid(e.to_string())
        } else {
            CliError::Failed(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Files produced by a command, written together at the end.
struct Outputs {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl Outputs {
    fn new(dir: &Path) -> Self {
        Outputs {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    fn add(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    fn write(self) -> CliResult<()> {
        let fail = |p: &Path, e: std::io::Error| CliError::Failed(format!("cannot write {}: {e}", p.display()));
        fs::create_dir_all(&self.dir).map_err(|e| fail(&self.dir, e))?;
        for (name, contents) in self.files {
            let path = self.dir.join(name);
            fs::write(&path, contents).map_err(|e| fail(&path, e))?;
            info!("wrote {}", path.display());
        }
        Ok(())
    }
}

fn load(source: &str) -> CliResult<MolecularHamiltonian> {
    if source == "h2" {
        return Ok(build_h2());
    }
    let text = fs::read_to_string(source).map_err(|e| CliError::Invalid(format!("cannot read {source}: {e}")))?;
    load_hamiltonian(&text).map_err(|e| CliError::Invalid(format!("{source}: {e}")))
}

fn resolve_tau(h: &MolecularHamiltonian, tau: Tau) -> CliResult<f64> {
    match tau {
        Tau::Auto => Ok(choose_tau(h)?),
        Tau::Fixed(t) => Ok(t),
    }
}

fn iteration_config(h: &MolecularHamiltonian, est: &Estimation) -> CliResult<IterationConfig> {
    let config = IterationConfig {
        bits_per_iteration: est.bits,
        iterations: est.iterations,
        phase_error_bound: est.errbd,
        tau: resolve_tau(h, est.tau)?,
    };
    config.validate()?;
    Ok(config)
}

fn readout_mode(r: &Readout, seed: u64) -> CliResult<ReadoutMode> {
    let noisy_flags = r.jitter.is_some() || r.epsilon.is_some();
    let mode = r.mode.unwrap_or(if noisy_flags { Mode::Noisy } else { Mode::Ideal });
    match mode {
        Mode::Ideal => {
            if noisy_flags {
                return Err(CliError::Invalid("noise flags need --mode noisy".into()));
            }
            Ok(ReadoutMode::Ideal)
        }
        Mode::Noisy => {
            let noise = NoiseModel {
                phase_jitter_bound: r.jitter.unwrap_or(0.0),
                coherent_epsilon: r.epsilon.unwrap_or(0.0),
                rng_seed: seed,
                law: match r.jitter_law {
                    Law::Uniform => JitterLaw::Uniform,
                    Law::Extremes => JitterLaw::Extremes,
                },
                ..NoiseModel::default()
            };
            noise.validate()?;
            Ok(ReadoutMode::Noisy(noise))
        }
        Mode::Pulse => {
            if noisy_flags {
                return Err(CliError::Invalid("the pulse backend takes --over-rotation, not readout noise".into()));
            }
            if !r.over_rotation.is_finite() {
                return Err(CliError::Invalid("over-rotation must be finite".into()));
            }
            Ok(ReadoutMode::PulseBacked(PulseBackend {
                system: SpinSystem::default(),
                over_rotation: r.over_rotation,
            }))
        }
    }
}

fn prepared_state(h: &MolecularHamiltonian, prep: Prep) -> CliResult<PureState> {
    match prep {
        Prep::Exact => Ok(spectrum(h)?.ground_state),
        Prep::Asp => Ok(run_asp(&AdiabaticSchedule::new(h.clone(), 200, 50.0)?)?.final_state),
    }
}

fn run_from_flags(common_h: &MolecularHamiltonian, est: &Estimation, readout: &Readout) -> CliResult<IpeaRun> {
    let config = iteration_config(common_h, est)?;
    let mode = readout_mode(readout, est.seed)?;
    let prep = prepared_state(common_h, readout.prep)?;
    Ok(run_ipea(common_h, &config, &prep, &mode)?)
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> CliResult<String> {
    let mut buf = Vec::new();
    write(&mut buf).map_err(|e| CliError::Failed(e.to_string()))?;
    String::from_utf8(buf).map_err(|e| CliError::Failed(e.to_string()))
}

pub fn eig(args: EigArgs) -> CliResult<()> {
    let h = load(&args.common.hamiltonian)?;
    let eig = h.eig()?;
    let tau = if h.dim() == 2 { choose_tau(&h).ok() } else { None };
    let ground = eig.eigenvector(0);

    println!("{} ({}x{})", h.label, h.dim(), h.dim());
    for (i, e) in eig.eigenvalues.iter().enumerate() {
        println!("E{i} = {e:.4}");
    }
    let amps: Vec<String> = ground.amplitudes().iter().map(|a| format!("{:.6}{:+.6}i", a.re, a.im)).collect();
    println!("ground state = [{}]", amps.join(", "));
    if let Some(t) = tau {
        println!("tau = {t:.6}");
    }

    let report = json!({
        "label": h.label,
        "dim": h.dim(),
        "energies": eig.eigenvalues,
        "ground_state": ground.amplitudes().iter().map(|a| [a.re, a.im]).collect::<Vec<_>>(),
        "tau": tau,
    });
    let mut out = Outputs::new(&args.common.out);
    out.add("eig.json", serde_json::to_string_pretty(&report).unwrap() + "\n");
    out.write()
}

pub fn ipea(args: IpeaArgs) -> CliResult<()> {
    let h = load(&args.common.hamiltonian)?;
    let run = run_from_flags(&h, &args.estimation, &args.readout)?;

    let trace = csv_bytes(|w| run.write_trace_csv(w))?;
    let table = run.binary_table();
    let bits = run.precision_bits();
    let summary = json!({
        "label": h.label,
        "tau": run.config.tau,
        "bits_per_iteration": run.config.bits_per_iteration,
        "iterations": run.config.iterations,
        "phase_error_bound": run.config.phase_error_bound,
        "phase": run.estimate.value,
        "binary": run.estimate.bit_string(),
        "energy": run.energy.energy,
        "oracle_energy": run.energy.oracle_energy,
        "abs_error": run.energy.abs_error,
        "correct_bits": bits,
        "guaranteed_bits": run.estimate.guaranteed_bits,
        "prep_fidelity": run.prep_fidelity,
    });

    print!("{table}");
    println!("energy = {:.9} hartree", run.energy.energy);
    if let Some(o) = run.energy.oracle_energy {
        println!("exact  = {o:.9} hartree");
    }
    println!("correct bits = {bits}");

    let mut out = Outputs::new(&args.common.out);
    out.add("ipea_trace.csv", trace);
    out.add("ipea_table.txt", table);
    out.add("ipea_summary.json", serde_json::to_string_pretty(&summary).unwrap() + "\n");
    out.write()
}

pub fn asp(args: AspArgs) -> CliResult<()> {
    let h = load(&args.common.hamiltonian)?;
    let grid = match (args.total_time, &args.scan) {
        (Some(t), _) => vec![t],
        (None, Some(s)) => s.points(),
        (None, None) => crate::parse::scan("1:30:0.5").unwrap().points(),
    };
    AdiabaticSchedule::new(h.clone(), args.steps, grid[0])?;
    let rows = scan_total_time(&h, args.steps, &grid)?;

    let mut csv = String::from("total_time,fidelity\n");
    for (t, f) in &rows {
        writeln!(csv, "{t:.16e},{f:.16e}").unwrap();
    }
    let (best_t, best_f) = rows.iter().copied().fold((f64::NAN, -1.0), |a, b| if b.1 > a.1 { b } else { a });
    println!("best fidelity {best_f:.6} at T = {best_t} ({} steps)", args.steps);

    let mut out = Outputs::new(&args.common.out);
    out.add("asp_scan.csv", csv);
    out.write()
}

pub fn noise_sweep(args: SweepArgs) -> CliResult<()> {
    let h = load(&args.common.hamiltonian)?;
    let config = iteration_config(&h, &args.estimation)?;
    if let Some(bad) = args.epsilons.iter().find(|e| !(**e >= 0.0 && e.is_finite())) {
        return Err(CliError::Invalid(format!("epsilon must be non-negative, got {bad}")));
    }
    let prep = spectrum(&h)?.ground_state;

    let mut errors = String::from("epsilon,k,phase_error,attainable_bits\n");
    let mut growth = String::from("epsilon,growth_ratio,final_bits\n");
    for &eps in &args.epsilons {
        let run = run_ipea(&h, &config, &prep, &ReadoutMode::Noisy(NoiseModel::coherent(eps)))?;
        let p = error_profile(&run);
        for (k, (e, b)) in p.phase_errors.iter().zip(&p.attainable_bits).enumerate() {
            writeln!(errors, "{eps:.16e},{k},{e:.16e},{b}").unwrap();
        }
        let ratio = p.growth_ratio.map(|r| format!("{r:.16e}")).unwrap_or_default();
        let final_bits = *p.attainable_bits.last().unwrap();
        writeln!(growth, "{eps:.16e},{ratio},{final_bits}").unwrap();
        println!(
            "epsilon {eps:e}: growth {} , final bits {final_bits}",
            p.growth_ratio.map(|r| format!("{r:.3}")).unwrap_or_else(|| "-".into())
        );
    }

    let mut out = Outputs::new(&args.common.out);
    out.add("noise_sweep.csv", errors);
    out.add("noise_growth.csv", growth);
    out.write()
}

pub fn spectra(args: SpectraArgs) -> CliResult<()> {
    let h = load(&args.common.hamiltonian)?;
    let params = SpectrumParams {
        line_width: args.line_width,
        points: args.points,
        ..SpectrumParams::default()
    };
    params.validate()?;
    let run = run_from_flags(&h, &args.estimation, &args.readout)?;

    let reference = synthesize_spectrum(0.0, &params)?;
    let mut out = Outputs::new(&args.common.out);
    let mut manifest = String::from("k,file,measured_phase,extracted_phase\n");
    let ref_phase = extract_phase_from_spectrum(&reference, &reference)?;
    writeln!(manifest, "-1,spectrum_ref.csv,{:.16e},{ref_phase:.16e}", 0.0).unwrap();
    out.add("spectrum_ref.csv", csv_bytes(|w| reference.write_csv(w))?);
    for r in &run.records {
        let trace = synthesize_spectrum(r.measured_phase, &params)?;
        let extracted = extract_phase_from_spectrum(&trace, &reference)?;
        let name = format!("spectrum_k{}.csv", r.k);
        writeln!(manifest, "{},{name},{:.16e},{extracted:.16e}", r.k, r.measured_phase).unwrap();
        println!("k {}: phase {:.6}, from spectrum {extracted:.6}", r.k, r.measured_phase);
        out.add(name, csv_bytes(|w| trace.write_csv(w))?);
    }
    out.add("spectra_manifest.csv", manifest);
    out.write()
}
