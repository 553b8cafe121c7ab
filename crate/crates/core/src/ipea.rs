//! Iterative phase estimation with clipped phase feedback.
//!
//! Iteration `k` applies the controlled `U_k` to `|+⟩ ⊗ |ψ⟩`, reads the probe
//! phase `φ_k`, and builds the next operator
//!
//! ```text
//! U_{k+1} = [e^{−i2πφ'_k} · U_k]^{2^n},    φ'_k = max(φ_k − φ_errbd, 0)
//! ```
//!
//! Subtracting a slightly low estimate leaves a residual phase in
//! `[0, 2·φ_errbd]`, which the `2^n` power stretches to at most one turn as
//! long as `2^{−n} ≥ 2·φ_errbd`. Every later readout therefore lies in a known
//! window and can be unwrapped without ambiguity. After the last iteration
//! the phase is rebuilt from the back:
//!
//! ```text
//! φc_{K−1} = φ_{K−1},    φc_{i−1} = φc_i · 2^{−n} + φ'_{i−1}
//! ```
//!
//! and the energy is `E = −2π·φc_0/τ`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::{self, Write};

use log::warn;

use crate::error::{Error, Result};
use crate::hamiltonian::{spectrum, MolecularHamiltonian};
use crate::linalg::{expm_herm, phase_distance, state_fidelity, PureState, UnitaryMatrix};
use crate::nmr::{compile_controlled_u, compile_probe_phase, PulseBackend};
use crate::probe::{controlled_u, ideal_readout, noisy_readout, perturbed_u, NoiseModel, DEFAULT_PHASE_JITTER};

pub const DEFAULT_BITS_PER_ITERATION: u32 = 3;
pub const DEFAULT_ITERATIONS: usize = 6;

/// Below this ground-state overlap a run is rejected.
pub const MIN_PREP_OVERLAP: f64 = 0.9;
/// Below this ground-state overlap a run logs a warning.
pub const WARN_PREP_OVERLAP: f64 = 0.999;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationConfig {
    pub bits_per_iteration: u32,
    pub iterations: usize,
    /// Guaranteed bound on each readout error, turns.
    pub phase_error_bound: f64,
    pub tau: f64,
}

impl IterationConfig {
    /// Three bits per iteration, six iterations, ±5° readout.
    pub fn with_tau(tau: f64) -> Self {
        IterationConfig {
            bits_per_iteration: DEFAULT_BITS_PER_ITERATION,
            iterations: DEFAULT_ITERATIONS,
            phase_error_bound: DEFAULT_PHASE_JITTER,
            tau,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.bits_per_iteration;
        if n == 0 {
            return Err(Error::Config("bits per iteration must be at least 1".into()));
        }
        if self.iterations == 0 {
            return Err(Error::Config("at least one iteration is required".into()));
        }
        if n as usize * (self.iterations - 1) > 63 {
            return Err(Error::Config(format!(
                "{} iterations of {n} bits exceed the 2^63 operator power limit",
                self.iterations
            )));
        }
        if !(self.phase_error_bound >= 0.0) {
            return Err(Error::Config("phase error bound must be non-negative".into()));
        }
        if 2f64.powi(-(n as i32)) < 2.0 * self.phase_error_bound {
            return Err(Error::Config(format!(
                "2^-{n} < 2·{}: too many bits per iteration for this phase error bound",
                self.phase_error_bound
            )));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Config(format!("tau must be positive, got {}", self.tau)));
        }
        Ok(())
    }

    /// Whether every reading consistent with the bound falls in a window
    /// narrower than one turn, `(2^n + 1)·2·φ_errbd ≤ 1`. Admissible configs
    /// that miss this can misplace a reading by a full turn in the worst case.
    pub fn unwrap_is_unambiguous(&self) -> bool {
        (2f64.powi(self.bits_per_iteration as i32) + 1.0) * 2.0 * self.phase_error_bound <= 1.0
    }

    /// Centre of the window the readout of iteration `k ≥ 1` must fall in.
    fn window_center(&self) -> f64 {
        2f64.powi(self.bits_per_iteration as i32) * self.phase_error_bound
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    /// Raw probe phase in `[0, 1)`.
    pub measured_phase: f64,
    /// Representative of the reading used by the algorithm. Equal to the raw
    /// reading at `k = 0`; for `k ≥ 1` taken from the window
    /// `[2^n·φ_errbd − ½, 2^n·φ_errbd + ½)`, so it may be slightly negative.
    pub unwrapped_phase: f64,
    /// `φ'_k`.
    pub clipped_phase: f64,
    /// Power of `U` contained in `U_k`, `2^{n·k}`.
    pub operator_power: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseEstimate {
    /// `φ_exp` in `[0, 1)`.
    pub value: f64,
    /// `φc_i` for `i = K−1, …, 0`.
    pub reconstruction_trace: Vec<f64>,
    /// Floor binary expansion of `value`, most significant first.
    pub binary_digits: Vec<u8>,
    pub guaranteed_bits: u32,
}

impl PhaseEstimate {
    pub fn bit_string(&self) -> String {
        bits_to_string(&self.binary_digits)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyResult {
    /// Hartree.
    pub energy: f64,
    pub phase: PhaseEstimate,
    pub tau: f64,
    pub oracle_energy: Option<f64>,
    pub abs_error: Option<f64>,
}

impl EnergyResult {
    pub fn with_oracle(mut self, oracle_energy: f64) -> Self {
        self.oracle_energy = Some(oracle_energy);
        self.abs_error = Some((self.energy - oracle_energy).abs());
        self
    }
}

/// How each controlled `U_k` is applied and read out.
#[derive(Clone, Debug, Default)]
pub enum ReadoutMode {
    /// Exact gate, exact readout.
    #[default]
    Ideal,
    /// Perturbed `U` and jittered readout, per the noise model.
    Noisy(NoiseModel),
    /// Every controlled operation compiled to pulses and evolved under the
    /// two-spin Hamiltonian.
    PulseBacked(PulseBackend),
}

/// Everything a run produces.
#[derive(Clone, Debug)]
pub struct IpeaRun {
    pub records: Vec<IterationRecord>,
    pub estimate: PhaseEstimate,
    pub energy: EnergyResult,
    pub config: IterationConfig,
    /// `−E_g·τ/2π` reduced mod 1.
    pub oracle_phase: f64,
    pub prep_fidelity: f64,
}

impl IpeaRun {
    /// Estimate built from the first `k + 1` records.
    pub fn estimate_after(&self, k: usize) -> PhaseEstimate {
        reconstruct(&self.records[..=k], self.config.bits_per_iteration).expect("records are contiguous")
    }

    /// Correct leading bits of the final estimate.
    pub fn precision_bits(&self) -> u32 {
        precision_report(&self.estimate, self.oracle_phase)
    }

    /// Iteration trace: one row per iteration and a final `summary` row.
    ///
    /// Iteration rows hold the running estimate after that iteration and the
    /// number of bits attained so far; the summary row holds the final
    /// estimate and its count of correct bits against the oracle.
    pub fn write_trace_csv(&self, mut w: impl Write) -> io::Result<()> {
        let tau = self.config.tau;
        let oracle = self.energy.oracle_energy;
        let fmt_err = |e: f64| oracle.map(|o| format!("{:.16e}", (e - o).abs())).unwrap_or_default();
        writeln!(
            w,
            "k,measured_phase,clipped_phase,operator_power,phi_c,cumulative_bits,energy_estimate,abs_error_vs_oracle"
        )?;
        for r in &self.records {
            let running = self.estimate_after(r.k);
            let e = energy_from_phase(&running, tau).energy;
            writeln!(
                w,
                "{},{:.16e},{:.16e},{},{:.16e},{},{:.16e},{}",
                r.k,
                r.measured_phase,
                r.clipped_phase,
                r.operator_power,
                running.value,
                self.config.bits_per_iteration as usize * (r.k + 1),
                e,
                fmt_err(e)
            )?;
        }
        writeln!(
            w,
            "summary,,,,{:.16e},{},{:.16e},{}",
            self.estimate.value,
            self.precision_bits(),
            self.energy.energy,
            fmt_err(self.energy.energy)
        )
    }

    /// Binary expansion of the running estimate after each iteration, in
    /// groups of five, with the bits fixed by that iteration in brackets.
    pub fn binary_table(&self) -> String {
        let n = self.config.bits_per_iteration as usize;
        let total = n * self.records.len();
        let mut out = String::new();
        for r in &self.records {
            let digits = to_binary(self.estimate_after(r.k).value, total);
            let (lo, hi) = (n * r.k, n * (r.k + 1));
            writeln!(out, "{:>3}  {}", r.k, format_digits(&digits, lo..hi)).unwrap();
        }
        let oracle = to_binary(self.oracle_phase, total);
        writeln!(out, " th  {}", format_digits(&oracle, 0..0)).unwrap();
        out
    }
}

fn format_digits(digits: &[u8], mark: std::ops::Range<usize>) -> String {
    let mut s = String::from("0.");
    for (i, d) in digits.iter().enumerate() {
        if i > 0 && i % 5 == 0 {
            s.push(' ');
        }
        if i == mark.start && !mark.is_empty() {
            s.push('[');
        }
        s.push(if *d == 1 { '1' } else { '0' });
        if i + 1 == mark.end && !mark.is_empty() {
            s.push(']');
        }
    }
    s
}

pub fn bits_to_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
}

/// `U_0 = exp(−iHτ)`.
pub fn initial_operator(h: &MolecularHamiltonian, tau: f64) -> Result<UnitaryMatrix> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Validation(format!("tau must be positive, got {tau}")));
    }
    expm_herm(&h.matrix, tau)
}

/// `[e^{−i2πφ'}·U_k]^{2^n}`, powered by repeated squaring.
pub fn next_operator(u_k: &UnitaryMatrix, clipped_phase: f64, n: u32) -> Result<UnitaryMatrix> {
    if n == 0 {
        return Err(Error::Validation("n must be at least 1".into()));
    }
    if !clipped_phase.is_finite() {
        return Err(Error::Validation("clipped phase must be finite".into()));
    }
    Ok(u_k.with_phase(-2.0 * PI * clipped_phase).pow2(n))
}

/// Rebuilds `φ` from the iteration records.
pub fn reconstruct(records: &[IterationRecord], n: u32) -> Result<PhaseEstimate> {
    if records.is_empty() {
        return Err(Error::Validation("no iteration records".into()));
    }
    if let Some((i, r)) = records.iter().enumerate().find(|(i, r)| r.k != *i) {
        return Err(Error::Validation(format!(
            "records are not contiguous: position {i} holds iteration {}",
            r.k
        )));
    }
    let shrink = 2f64.powi(-(n as i32));
    let last = records.last().unwrap();
    let mut phi_c = last.unwrapped_phase;
    let mut trace = vec![phi_c];
    for r in records[..records.len() - 1].iter().rev() {
        phi_c = phi_c * shrink + r.clipped_phase;
        trace.push(phi_c);
    }
    let mut value = phi_c.rem_euclid(1.0);
    if value >= 1.0 {
        value = 0.0;
    }
    *trace.last_mut().unwrap() = value;
    let bits = n * records.len() as u32;
    Ok(PhaseEstimate {
        value,
        reconstruction_trace: trace,
        binary_digits: to_binary(value, bits as usize),
        guaranteed_bits: bits,
    })
}

/// Truncated binary expansion of `value ∈ [0, 1)`, most significant first.
pub fn to_binary(value: f64, digits: usize) -> Vec<u8> {
    let mut x = value.rem_euclid(1.0);
    (0..digits)
        .map(|_| {
            // doubling and subtracting one are exact in binary floating point
            x *= 2.0;
            if x >= 1.0 {
                x -= 1.0;
                1
            } else {
                0
            }
        })
        .collect()
}

/// `E = −2π·φ/τ`.
pub fn energy_from_phase(phase: &PhaseEstimate, tau: f64) -> EnergyResult {
    EnergyResult {
        energy: -2.0 * PI * phase.value / tau,
        phase: phase.clone(),
        tau,
        oracle_energy: None,
        abs_error: None,
    }
}

/// Largest `j` with `d(estimate, oracle) < 2^{−j}` on the unit circle,
/// capped at 64.
pub fn precision_report(estimate: &PhaseEstimate, oracle_phase: f64) -> u32 {
    let d = phase_distance(estimate.value, oracle_phase);
    if d == 0.0 {
        return 64;
    }
    let j = (-d.log2()).ceil() - 1.0;
    j.clamp(0.0, 64.0) as u32
}

/// `−E·τ/2π` reduced into `[0, 1)`.
pub fn phase_of_energy(energy: f64, tau: f64) -> f64 {
    let p = (-energy * tau / (2.0 * PI)).rem_euclid(1.0);
    if p >= 1.0 {
        0.0
    } else {
        p
    }
}

enum Realizer {
    Matrix { mode_noise: Option<NoiseModel> },
    Pulses { backend: PulseBackend, realized: Option<UnitaryMatrix> },
}

/// Runs the iterative estimation.
pub fn run_ipea(
    h: &MolecularHamiltonian,
    config: &IterationConfig,
    prep: &PureState,
    mode: &ReadoutMode,
) -> Result<IpeaRun> {
    config.validate()?;
    if prep.dim() != h.dim() {
        return Err(Error::Validation(format!(
            "prepared state has dimension {} but the Hamiltonian is {}x{}",
            prep.dim(),
            h.dim(),
            h.dim()
        )));
    }
    let spec = spectrum(h)?;
    let prep_fidelity = state_fidelity(&spec.ground_state, prep)?;
    if prep_fidelity < MIN_PREP_OVERLAP {
        return Err(Error::Validation(format!(
            "prepared state overlaps the ground state with fidelity {prep_fidelity:.6} < {MIN_PREP_OVERLAP}"
        )));
    }
    if prep_fidelity < WARN_PREP_OVERLAP {
        warn!("prepared state has ground-state fidelity {prep_fidelity:.6}; the phase will be biased");
    }

    if !config.unwrap_is_unambiguous() {
        warn!("readings at the edge of the error bound can be unwrapped onto the wrong turn");
    }

    let n = config.bits_per_iteration;
    let tau = config.tau;
    let (mut u_k, mut realizer, psi_in) = match mode {
        ReadoutMode::Ideal => (
            initial_operator(h, tau)?,
            Realizer::Matrix { mode_noise: None },
            PureState::plus().tensor(prep)?,
        ),
        ReadoutMode::Noisy(noise) => (
            perturbed_u(h, tau, noise)?,
            Realizer::Matrix {
                mode_noise: Some(noise.clone()),
            },
            PureState::plus().tensor(prep)?,
        ),
        ReadoutMode::PulseBacked(backend) => (
            initial_operator(h, tau)?,
            Realizer::Pulses {
                backend: *backend,
                realized: None,
            },
            backend.input_state(prep)?,
        ),
    };

    let center = config.window_center();
    let mut records: Vec<IterationRecord> = Vec::with_capacity(config.iterations);
    for k in 0..config.iterations {
        let mut step = || -> Result<f64> {
            let reading = match &mut realizer {
                Realizer::Matrix { mode_noise } => {
                    let state = controlled_u(&u_k)?.apply(&psi_in);
                    match mode_noise {
                        None => ideal_readout(&state)?,
                        Some(noise) => noisy_readout(&state, noise, k as u64)?,
                    }
                }
                Realizer::Pulses { backend, realized } => {
                    let gate = match (realized.take(), records.last()) {
                        (Some(prev), Some(r)) => {
                            let correction = backend.realize(&compile_probe_phase(-2.0 * PI * r.clipped_phase, &backend.system)?)?;
                            correction.compose(&prev).pow2(n)
                        }
                        _ => backend.realize(&compile_controlled_u(&u_k, &backend.system)?)?,
                    };
                    let state = gate.apply(&psi_in);
                    *realized = Some(gate);
                    ideal_readout(&state)?
                }
            };
            Ok(reading.phase_fraction)
        };
        let measured = step().map_err(|e| e.at_iteration(k))?;

        let (unwrapped, clipped) = if k == 0 {
            // no prior window: clip on the circle
            (measured, (measured - config.phase_error_bound).rem_euclid(1.0))
        } else {
            let unwrapped = if measured >= center + 0.5 { measured - 1.0 } else { measured };
            (unwrapped, (unwrapped - config.phase_error_bound).max(0.0))
        };
        records.push(IterationRecord {
            k,
            measured_phase: measured,
            unwrapped_phase: unwrapped,
            clipped_phase: clipped,
            operator_power: 1u64 << (n as usize * k),
        });
        if k + 1 < config.iterations {
            u_k = next_operator(&u_k, clipped, n)?;
        }
    }

    let estimate = reconstruct(&records, n)?;
    let energy = energy_from_phase(&estimate, tau).with_oracle(spec.ground_energy());
    Ok(IpeaRun {
        records,
        estimate,
        energy,
        config: *config,
        oracle_phase: phase_of_energy(spec.ground_energy(), tau),
        prep_fidelity,
    })
}

/// Pulse-backed run from the exact ground state.
pub fn run_pulse_backend(h: &MolecularHamiltonian, config: &IterationConfig, backend: &PulseBackend) -> Result<IpeaRun> {
    let prep = spectrum(h)?.ground_state;
    run_ipea(h, config, &prep, &ReadoutMode::PulseBacked(*backend))
}

/// Per-iteration phase errors of a run against the exact operators built
/// from the same clipped phases.
#[derive(Clone, Debug)]
pub struct ErrorProfile {
    /// `d(φ_k, exact eigenphase of U_k)` for each iteration.
    pub phase_errors: Vec<f64>,
    /// Correct bits of the running estimate after each iteration.
    pub attainable_bits: Vec<u32>,
    /// Geometric mean of `e_{k+1}/e_k` over iterations still inside the bound.
    pub growth_ratio: Option<f64>,
}

/// Error growth of a finished run.
///
/// The reference eigenphase of `U_k` follows the exact recursion
/// `θ_{k+1} = 2^n·(θ_k − φ'_k) mod 1` from `θ_0` = oracle phase, so each
/// entry isolates the error of the realized operator at that iteration.
pub fn error_profile(run: &IpeaRun) -> ErrorProfile {
    let scale = 2f64.powi(run.config.bits_per_iteration as i32);
    let bound = run.config.phase_error_bound;
    let mut theta = run.oracle_phase;
    let mut phase_errors = Vec::with_capacity(run.records.len());
    for r in &run.records {
        phase_errors.push(phase_distance(r.measured_phase, theta));
        theta = (scale * (theta - r.clipped_phase)).rem_euclid(1.0);
    }
    let attainable_bits = (0..run.records.len())
        .map(|k| precision_report(&run.estimate_after(k), run.oracle_phase))
        .collect();
    let ratios: Vec<f64> = phase_errors
        .windows(2)
        .filter(|w| w[0] > 1e-10 && w[0] < bound && w[1] < 0.25)
        .map(|w| w[1] / w[0])
        .collect();
    let growth_ratio = if ratios.is_empty() {
        None
    } else {
        Some((ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64).exp())
    };
    ErrorProfile {
        phase_errors,
        attainable_bits,
        growth_ratio,
    }
}
