//! Pulse-level backend for a heteronuclear two-spin register.
//!
//! The free Hamiltonian in the doubly rotating frame is
//!
//! ```text
//! H = (ω_p/2)·σz⊗I + (ω_s/2)·I⊗σz + (πJ/2)·σz⊗σz      (rad/s, J in Hz)
//! ```
//!
//! Pulses are hard (instantaneous) rotations about transverse axes; delays
//! evolve under `H`. Controlled gates are compiled by rotating the target's
//! rotation axis onto `z`, letting the J coupling accumulate the conditional
//! phase, and fixing up the remaining single-spin `z` rotations with
//! composite transverse pulses.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::linalg::{
    c64, expm_herm, pauli_x, pauli_y, pauli_z, tensor, ComplexMatrix, DensityMatrix, HermitianMatrix, PureState,
    UnitaryMatrix, C64,
};
use crate::probe::controlled_u;

/// Coupling between ¹H and ¹³C in chloroform, Hz.
pub const DEFAULT_J_COUPLING: f64 = 214.6;

/// Smallest acceptable compilation fidelity is `1 − COMPILE_TOL`.
pub const COMPILE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinSystem {
    /// Probe offset in the rotating frame, rad/s.
    pub omega_probe: f64,
    /// System offset in the rotating frame, rad/s.
    pub omega_system: f64,
    /// Scalar coupling, Hz.
    pub j_coupling: f64,
}

impl Default for SpinSystem {
    fn default() -> Self {
        SpinSystem {
            omega_probe: 0.0,
            omega_system: 0.0,
            j_coupling: DEFAULT_J_COUPLING,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spin {
    Probe,
    System,
    Both,
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::Probe => "probe",
            Spin::System => "system",
            Spin::Both => "both",
        })
    }
}

/// Rotation by `angle` about the transverse axis at azimuth `phase`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseEvent {
    pub spin: Spin,
    pub phase: f64,
    pub angle: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DelayEvent {
    /// Seconds.
    pub duration: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Event {
    Pulse(PulseEvent),
    Delay(DelayEvent),
}

impl Event {
    /// A pulse with non-negative angle; negative angles flip the axis.
    pub fn pulse(spin: Spin, phase: f64, angle: f64) -> Event {
        let (phase, angle) = if angle < 0.0 { (phase + PI, -angle) } else { (phase, angle) };
        Event::Pulse(PulseEvent {
            spin,
            phase: phase.rem_euclid(2.0 * PI),
            angle,
        })
    }

    pub fn delay(duration: f64) -> Event {
        Event::Delay(DelayEvent { duration })
    }
}

/// Single-spin transverse rotation `exp(−i(θ/2)(cos φ·σx + sin φ·σy))`.
pub fn transverse_rotation(phase: f64, angle: f64) -> ComplexMatrix {
    let (s, c) = (0.5 * angle).sin_cos();
    let axis = &pauli_x().scale(c64(phase.cos(), 0.0)) + &pauli_y().scale(c64(phase.sin(), 0.0));
    &ComplexMatrix::identity(2).scale(c64(c, 0.0)) + &axis.scale(c64(0.0, -s))
}

/// Composite `Rz(angle)` built from transverse pulses: `Rx(−π/2)`, `Ry(angle)`, `Rx(π/2)`.
pub fn z_rotation_events(spin: Spin, angle: f64) -> Vec<Event> {
    if angle == 0.0 {
        return Vec::new();
    }
    vec![
        Event::pulse(spin, PI, FRAC_PI_2),
        Event::pulse(spin, FRAC_PI_2, angle),
        Event::pulse(spin, 0.0, FRAC_PI_2),
    ]
}

/// `(ω_p/2)σz⊗I + (ω_s/2)I⊗σz + (πJ/2)σz⊗σz`.
pub fn nmr_hamiltonian(sys: &SpinSystem) -> HermitianMatrix {
    let i2 = ComplexMatrix::identity(2);
    let z = pauli_z();
    let zp = tensor(&z, &i2).unwrap();
    let zs = tensor(&i2, &z).unwrap();
    let zz = tensor(&z, &z).unwrap();
    let m = &(&zp.scale(c64(sys.omega_probe / 2.0, 0.0)) + &zs.scale(c64(sys.omega_system / 2.0, 0.0)))
        + &zz.scale(c64(PI * sys.j_coupling / 2.0, 0.0));
    HermitianMatrix::new(m).expect("diagonal real matrix is Hermitian")
}

fn event_unitary(event: &Event, sys: &SpinSystem, over_rotation: f64) -> Result<UnitaryMatrix> {
    match event {
        Event::Pulse(p) => {
            if !(p.angle.is_finite() && p.phase.is_finite()) {
                return Err(Error::Validation("pulse angle and phase must be finite".into()));
            }
            let r = transverse_rotation(p.phase, p.angle * (1.0 + over_rotation));
            let i2 = ComplexMatrix::identity(2);
            let m = match p.spin {
                Spin::Probe => tensor(&r, &i2)?,
                Spin::System => tensor(&i2, &r)?,
                Spin::Both => tensor(&r, &r)?,
            };
            Ok(UnitaryMatrix::from_trusted(m))
        }
        Event::Delay(d) => {
            if !(d.duration >= 0.0 && d.duration.is_finite()) {
                return Err(Error::Validation(format!("delay {} must be non-negative", d.duration)));
            }
            expm_herm(&nmr_hamiltonian(sys), d.duration)
        }
    }
}

/// Product of the event propagators in time order, pulses scaled by `1 + over_rotation`.
pub fn evolve_events(events: &[Event], sys: &SpinSystem, over_rotation: f64) -> Result<UnitaryMatrix> {
    events.iter().try_fold(UnitaryMatrix::identity(4), |acc, e| {
        Ok(event_unitary(e, sys, over_rotation)?.compose(&acc))
    })
}

/// An event list together with the gate it is meant to realize.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseSequence {
    pub events: Vec<Event>,
    pub intended_unitary: UnitaryMatrix,
    /// `|Tr(intended^dag · realized)| / 4` at construction.
    pub achieved_fidelity: f64,
}

impl PulseSequence {
    pub fn new(events: Vec<Event>, intended_unitary: UnitaryMatrix, sys: &SpinSystem) -> Result<Self> {
        if intended_unitary.dim() != 4 {
            return Err(Error::Validation("pulse sequences act on two spins".into()));
        }
        let realized = evolve_events(&events, sys, 0.0)?;
        let achieved_fidelity = intended_unitary.phase_insensitive_fidelity(&realized);
        Ok(PulseSequence {
            events,
            intended_unitary,
            achieved_fidelity,
        })
    }

    /// Total free-evolution time, seconds.
    pub fn total_delay(&self) -> f64 {
        self.events
            .iter()
            .map(|e| match e {
                Event::Delay(d) => d.duration,
                Event::Pulse(_) => 0.0,
            })
            .sum()
    }

    /// Line-oriented export: `PULSE <spin> <phase> <angle>`, `DELAY <s>`, `FIDELITY <f>`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            match e {
                Event::Pulse(p) => writeln!(out, "PULSE {} {:.16e} {:.16e}", p.spin, p.phase, p.angle),
                Event::Delay(d) => writeln!(out, "DELAY {:.16e}", d.duration),
            }
            .unwrap();
        }
        writeln!(out, "FIDELITY {:.16e}", self.achieved_fidelity).unwrap();
        out
    }
}

/// Ideal propagator of the sequence.
pub fn evolve_sequence(seq: &PulseSequence, sys: &SpinSystem) -> Result<UnitaryMatrix> {
    evolve_events(&seq.events, sys, 0.0)
}

/// `(1−ε)/4·I + ε·|↑↑⟩⟨↑↑|`.
pub fn prepare_pps(epsilon: f64) -> Result<DensityMatrix> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Validation(format!("polarization {epsilon} outside (0, 1]")));
    }
    let mut diag = [c64((1.0 - epsilon) / 4.0, 0.0); 4];
    diag[0] += epsilon;
    DensityMatrix::new(ComplexMatrix::diagonal(&diag))
}

fn finish(events: Vec<Event>, intended: UnitaryMatrix, sys: &SpinSystem) -> Result<PulseSequence> {
    let seq = PulseSequence::new(events, intended, sys)?;
    if seq.achieved_fidelity < 1.0 - COMPILE_TOL {
        return Err(Error::Compilation {
            fidelity: seq.achieved_fidelity,
            residual: 1.0 - seq.achieved_fidelity,
        });
    }
    Ok(seq)
}

/// Pulse sequence for `|↑⟩⟨↑| ⊗ I + |↓⟩⟨↓| ⊗ u`.
///
/// Writes `u = e^{iα}·V·Rz(θ)·V^dag`, where `V` is a single transverse pulse
/// taking `z` to the rotation axis of `u`. The controlled `Rz(θ)` is
/// `Rz_s(θ/2)·exp(+iθ/4·σz⊗σz)`; the coupling term comes from one delay and
/// the controlled global phase is a `z` rotation of the probe. Offsets that
/// act during the delay are undone in the trailing `z` rotations.
pub fn compile_controlled_u(u: &UnitaryMatrix, sys: &SpinSystem) -> Result<PulseSequence> {
    if u.dim() != 2 {
        return Err(Error::Validation(format!(
            "compiler targets a single system spin, got a {0}x{0} unitary",
            u.dim()
        )));
    }
    if !(sys.j_coupling > 0.0) {
        return Err(Error::Validation("compilation needs a positive J coupling".into()));
    }
    let intended = controlled_u(u)?;

    let det = u.get(0, 0) * u.get(1, 1) - u.get(0, 1) * u.get(1, 0);
    let alpha = det.arg() / 2.0;
    let phase = C64::from_polar(1.0, -alpha);
    let (a, b) = (u.get(0, 0) * phase, u.get(0, 1) * phase);

    // W = cos(θ/2) − i sin(θ/2) n·σ
    let axis = [-b.im, -b.re, -a.im];
    let s = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
    let theta = 2.0 * s.atan2(a.re);
    let n = if s < 1e-15 { [0.0, 0.0, 1.0] } else { axis.map(|x| x / s) };
    let polar = n[2].clamp(-1.0, 1.0).acos();
    let azimuth = n[1].atan2(n[0]) + FRAC_PI_2;

    // (πJ/2)·t ≡ −θ/4 (mod π)
    let coupling_rate = PI * sys.j_coupling / 2.0;
    let t = (-theta / 4.0).rem_euclid(PI) / coupling_rate;

    let mut events = Vec::with_capacity(9);
    if polar != 0.0 {
        events.push(Event::pulse(Spin::System, azimuth, -polar));
    }
    if t > 0.0 {
        events.push(Event::delay(t));
    }
    events.extend(z_rotation_events(Spin::System, theta / 2.0 - sys.omega_system * t));
    if polar != 0.0 {
        events.push(Event::pulse(Spin::System, azimuth, polar));
    }
    events.extend(z_rotation_events(Spin::Probe, alpha - sys.omega_probe * t));
    finish(events, intended, sys)
}

/// Pulse sequence for the controlled scalar `e^{iθ}`, a `z` rotation of the probe.
pub fn compile_probe_phase(theta: f64, sys: &SpinSystem) -> Result<PulseSequence> {
    let u = UnitaryMatrix::identity(2).with_phase(theta);
    finish(z_rotation_events(Spin::Probe, theta), controlled_u(&u)?, sys)
}

/// Realizes compiled sequences, optionally with a systematic over-rotation
/// of every pulse.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PulseBackend {
    pub system: SpinSystem,
    /// Fractional pulse-angle error, e.g. `1e-3` for 0.1 %.
    pub over_rotation: f64,
}

impl PulseBackend {
    pub fn new(system: SpinSystem) -> Self {
        PulseBackend {
            system,
            over_rotation: 0.0,
        }
    }

    pub fn realize(&self, seq: &PulseSequence) -> Result<UnitaryMatrix> {
        evolve_events(&seq.events, &self.system, self.over_rotation)
    }

    /// Pseudo-Hadamard `R_y(π/2)` on the probe, taking `|↑⟩` to `|+⟩`.
    pub fn probe_preparation(&self) -> Result<UnitaryMatrix> {
        evolve_events(&[Event::pulse(Spin::Probe, FRAC_PI_2, FRAC_PI_2)], &self.system, self.over_rotation)
    }

    /// Input state `R_y(π/2)|↑⟩ ⊗ prep`.
    pub fn input_state(&self, prep: &PureState) -> Result<PureState> {
        if prep.dim() != 2 {
            return Err(Error::Validation("pulse backend drives a single system spin".into()));
        }
        let start = PureState::basis(2, 0).tensor(prep)?;
        Ok(self.probe_preparation()?.apply(&start))
    }
}

pub use crate::ipea::run_pulse_backend;
