//! The interferometric measurement arm.
//!
//! A probe qubit prepared in `|+⟩` controls the evolution of the system
//! register. When the register holds an eigenstate of `U`, the controlled
//! gate leaves it untouched and writes the eigenphase onto the probe's
//! relative phase, which transverse (quadrature) detection reads directly.
//!
//! Conventions: the probe is tensor factor 0, `|↑⟩` is basis index 0 and the
//! gate acts on the system when the probe is `|↓⟩`. The reported phase is
//! `arg⟨ψ|(|↑⟩⟨↓| ⊗ I)|ψ⟩ / 2π`, normalized into `[0, 1)`.

use std::f64::consts::PI;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::hamiltonian::MolecularHamiltonian;
use crate::linalg::{
    c64, expm_herm, partial_trace_dims, pauli_z, turns_from_radians, ComplexMatrix,
    DensityMatrix, HermitianMatrix, PureState, UnitaryMatrix, C64, MAX_DIM,
};

/// Smallest probe coherence magnitude for which a phase is reported.
pub const MIN_COHERENCE: f64 = 1e-6;

/// The ±5° bound of the interferometric readout, in turns.
pub const DEFAULT_PHASE_JITTER: f64 = 5.0 / 360.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeReadout {
    /// Normalized transverse expectation value, `e^{i2πφ}`.
    pub expectation: C64,
    /// `φ` in `[0, 1)`.
    pub phase_fraction: f64,
}

impl ProbeReadout {
    fn from_coherence(c: C64) -> Result<Self> {
        let magnitude = c.norm();
        if !(magnitude >= MIN_COHERENCE) {
            return Err(Error::Readout { coherence: magnitude });
        }
        Ok(ProbeReadout {
            expectation: c / magnitude,
            phase_fraction: turns_from_radians(c.arg()),
        })
    }

    fn from_phase(phase_fraction: f64) -> Self {
        ProbeReadout {
            expectation: C64::from_polar(1.0, 2.0 * PI * phase_fraction),
            phase_fraction,
        }
    }
}

/// `|↑⟩⟨↑| ⊗ I + |↓⟩⟨↓| ⊗ U`.
pub fn controlled_u(u: &UnitaryMatrix) -> Result<UnitaryMatrix> {
    let d = u.dim();
    if 2 * d > MAX_DIM || d < 2 {
        return Err(Error::Validation(format!(
            "controlled gate needs a 2x2 or 4x4 system unitary, got {d}x{d}"
        )));
    }
    let m = ComplexMatrix::from_fn(2 * d, |i, j| match (i / d, j / d) {
        (0, 0) => {
            if i == j {
                c64(1.0, 0.0)
            } else {
                c64(0.0, 0.0)
            }
        }
        (1, 1) => u.get(i - d, j - d),
        _ => c64(0.0, 0.0),
    });
    UnitaryMatrix::new(m)
}

/// Off-diagonal element `ρ_probe[↓][↑]` of the probe's reduced state.
pub fn probe_coherence(rho: &DensityMatrix) -> Result<C64> {
    let dim = rho.dim();
    if dim < 4 || dim % 2 != 0 {
        return Err(Error::Validation(format!(
            "probe readout needs a probe ⊗ system state, got dimension {dim}"
        )));
    }
    let reduced = partial_trace_dims(rho, (2, dim / 2), 0)?;
    Ok(reduced.get(1, 0))
}

/// Noise-free quadrature readout of the probe phase.
pub fn ideal_readout(state: &PureState) -> Result<ProbeReadout> {
    ProbeReadout::from_coherence(probe_coherence(&DensityMatrix::from_pure(state))?)
}

/// Readout from a mixed joint state, e.g. an evolved pseudo-pure state.
/// Only the direction of the coherence is reported, so the polarization
/// scale drops out.
pub fn density_readout(rho: &DensityMatrix) -> Result<ProbeReadout> {
    ProbeReadout::from_coherence(probe_coherence(rho)?)
}

/// Distribution of the bounded readout error.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum JitterLaw {
    /// Uniform on `[−b, +b]`.
    #[default]
    Uniform,
    /// `±b` with equal probability: always on the edge of the bound.
    Extremes,
}

/// Readout jitter plus a coherent perturbation of the simulated evolution.
#[derive(Clone, Debug)]
pub struct NoiseModel {
    /// Half-width of the readout error, in turns.
    pub phase_jitter_bound: f64,
    /// Strength (hartree) of the Hamiltonian error `ε·V` inside `U`.
    pub coherent_epsilon: f64,
    /// `V`, unit max-norm.
    pub perturbation_direction: HermitianMatrix,
    pub rng_seed: u64,
    pub law: JitterLaw,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            phase_jitter_bound: 0.0,
            coherent_epsilon: 0.0,
            perturbation_direction: HermitianMatrix::new(pauli_z()).expect("σ_z is Hermitian"),
            rng_seed: 0,
            law: JitterLaw::Uniform,
        }
    }
}

impl NoiseModel {
    /// The exact channel.
    pub fn ideal() -> Self {
        Self::default()
    }

    pub fn jitter(bound: f64, seed: u64) -> Self {
        NoiseModel {
            phase_jitter_bound: bound,
            rng_seed: seed,
            ..Self::default()
        }
    }

    pub fn coherent(epsilon: f64) -> Self {
        NoiseModel {
            coherent_epsilon: epsilon,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.phase_jitter_bound >= 0.0 && self.phase_jitter_bound < 0.5) {
            return Err(Error::Validation(format!(
                "phase jitter bound must lie in [0, 0.5) turns, got {}",
                self.phase_jitter_bound
            )));
        }
        if !(self.coherent_epsilon >= 0.0 && self.coherent_epsilon.is_finite()) {
            return Err(Error::Validation(format!(
                "coherent epsilon must be non-negative, got {}",
                self.coherent_epsilon
            )));
        }
        let norm = self.perturbation_direction.matrix().max_norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "perturbation direction must have unit max-norm, got {norm}"
            )));
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        self.phase_jitter_bound == 0.0 && self.coherent_epsilon == 0.0
    }

    /// Jitter for draw number `index`; each index reads its own ChaCha stream.
    pub fn draw(&self, index: u64) -> f64 {
        let b = self.phase_jitter_bound;
        if b == 0.0 {
            return 0.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(index);
        match self.law {
            JitterLaw::Uniform => rng.gen_range(-b..=b),
            JitterLaw::Extremes => {
                if rng.gen::<bool>() {
                    b
                } else {
                    -b
                }
            }
        }
    }
}

/// Ideal readout shifted by a bounded jitter draw, reduced mod 1.
pub fn noisy_readout(state: &PureState, noise: &NoiseModel, draw_index: u64) -> Result<ProbeReadout> {
    let ideal = ideal_readout(state)?;
    if noise.phase_jitter_bound == 0.0 {
        return Ok(ideal);
    }
    let phase = (ideal.phase_fraction + noise.draw(draw_index)).rem_euclid(1.0);
    Ok(ProbeReadout::from_phase(if phase >= 1.0 { 0.0 } else { phase }))
}

/// `exp(−i(H + ε·V)τ)`; at `ε = 0` this is exactly `expm_herm(H, τ)`.
pub fn perturbed_u(h: &MolecularHamiltonian, tau: f64, noise: &NoiseModel) -> Result<UnitaryMatrix> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Validation(format!("tau must be positive, got {tau}")));
    }
    noise.validate()?;
    if noise.coherent_epsilon == 0.0 {
        return expm_herm(&h.matrix, tau);
    }
    if noise.perturbation_direction.dim() != h.dim() {
        return Err(Error::Validation(format!(
            "perturbation direction is {0}x{0} but the Hamiltonian is {1}x{1}",
            noise.perturbation_direction.dim(),
            h.dim()
        )));
    }
    let generator = h.matrix.combine(1.0, &noise.perturbation_direction, noise.coherent_epsilon);
    expm_herm(&generator, tau)
}

/// Acquisition and line-shape parameters for synthesized probe spectra.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumParams {
    /// Full width at half maximum, Hz.
    pub line_width: f64,
    /// Splitting of the probe doublet, Hz.
    pub j_coupling: f64,
    pub points: usize,
    pub spectral_width: f64,
}

impl Default for SpectrumParams {
    fn default() -> Self {
        SpectrumParams {
            line_width: 2.0,
            j_coupling: 214.6,
            points: 4096,
            spectral_width: 2000.0,
        }
    }
}

impl SpectrumParams {
    pub fn validate(&self) -> Result<()> {
        if self.points < 256 || !self.points.is_power_of_two() {
            return Err(Error::Validation(format!(
                "points must be a power of two ≥ 256, got {}",
                self.points
            )));
        }
        if !(self.line_width > 0.0) {
            return Err(Error::Validation("line width must be positive".into()));
        }
        if !(self.j_coupling > 0.0) || !(self.spectral_width > self.j_coupling) {
            return Err(Error::Validation(format!(
                "need 0 < J ({}) < spectral width ({})",
                self.j_coupling, self.spectral_width
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumTrace {
    /// Ascending, uniformly spaced, Hz.
    pub frequencies: Vec<f64>,
    pub complex_amplitudes: Vec<C64>,
    /// Receiver phase in radians.
    pub reference_phase: f64,
}

impl SpectrumTrace {
    /// Sum of the amplitudes inside `[center − half_width, center + half_width]`,
    /// times the grid spacing.
    pub fn window_integral(&self, center: f64, half_width: f64) -> C64 {
        let df = self.frequencies[1] - self.frequencies[0];
        self.frequencies
            .iter()
            .zip(&self.complex_amplitudes)
            .filter(|(f, _)| (**f - center).abs() <= half_width)
            .map(|(_, a)| a * df)
            .sum()
    }

    /// Complex integral over the whole trace.
    pub fn integral(&self) -> C64 {
        let df = self.frequencies[1] - self.frequencies[0];
        self.complex_amplitudes.iter().map(|a| a * df).sum()
    }

    /// Writes `frequency_hz,amplitude_re,amplitude_im` rows.
    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "frequency_hz,amplitude_re,amplitude_im")?;
        for (f, a) in self.frequencies.iter().zip(&self.complex_amplitudes) {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", f, a.re, a.im)?;
        }
        Ok(())
    }
}

/// Synthesizes the probe doublet for relative phase `phase_fraction`.
///
/// The free induction decay is `e^{i2πφ}·cos(πJt)·e^{−π·lw·t}`: two lines at
/// `±J/2` carrying the probe phase, decaying at the line-width rate. The first
/// sample is halved before the transform so the lines have no baseline
/// offset.
pub fn synthesize_spectrum(phase_fraction: f64, params: &SpectrumParams) -> Result<SpectrumTrace> {
    params.validate()?;
    if !phase_fraction.is_finite() {
        return Err(Error::Validation("phase must be finite".into()));
    }
    let n = params.points;
    let dt = 1.0 / params.spectral_width;
    let carrier = C64::from_polar(1.0, 2.0 * PI * phase_fraction);
    let mut fid: Vec<C64> = (0..n)
        .map(|j| {
            let t = j as f64 * dt;
            carrier * (PI * params.j_coupling * t).cos() * (-PI * params.line_width * t).exp()
        })
        .collect();
    fid[0] *= 0.5;

    FftPlanner::new().plan_fft_forward(n).process(&mut fid);

    let df = params.spectral_width / n as f64;
    let half = n / 2;
    // reorder to ascending frequency: bins N/2..N are negative
    let frequencies = (0..n).map(|k| (k as f64 - half as f64) * df).collect();
    let complex_amplitudes = (0..n).map(|k| fid[(k + half) % n] * dt).collect();
    Ok(SpectrumTrace {
        frequencies,
        complex_amplitudes,
        reference_phase: 0.0,
    })
}

/// Phase of `trace` relative to `reference`, in turns.
pub fn extract_phase_from_spectrum(trace: &SpectrumTrace, reference: &SpectrumTrace) -> Result<f64> {
    if trace.frequencies.len() < 2 || trace.frequencies != reference.frequencies {
        return Err(Error::Validation("spectra do not share a frequency grid".into()));
    }
    let reference_integral = reference.integral();
    if reference_integral.norm() < 1e-9 {
        return Err(Error::Reference {
            magnitude: reference_integral.norm(),
        });
    }
    let ratio = trace.integral() / reference_integral;
    Ok(turns_from_radians(ratio.arg() + trace.reference_phase - reference.reference_phase))
}
