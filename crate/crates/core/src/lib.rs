//! Simulation of iterative phase estimation for small molecular Hamiltonians.
//!
//! The pieces, bottom to top:
//!
//! - [`linalg`]: dense complex matrices up to 8×8, Hermitian eigensolver,
//!   matrix exponential, partial trace.
//! - [`hamiltonian`]: the H₂ minimal-basis Hamiltonian, loading from JSON,
//!   exact spectrum and evolution-time choice.
//! - [`adiabatic`]: Trotterized adiabatic preparation of the ground state.
//! - [`probe`]: controlled operations, probe-qubit readout, noise models and
//!   synthetic spectra.
//! - [`ipea`]: the iterative estimation loop, reconstruction and error
//!   analysis.
//! - [`nmr`]: a two-spin pulse-level backend.
//!
//! ```
//! use molphase::{build_h2, choose_tau, spectrum, run_ipea, IterationConfig, ReadoutMode};
//!
//! let h = build_h2();
//! let tau = choose_tau(&h).unwrap();
//! let ground = spectrum(&h).unwrap().ground_state;
//! let run = run_ipea(&h, &IterationConfig::with_tau(tau), &ground, &ReadoutMode::Ideal).unwrap();
//! assert!((run.energy.energy - -1.851571).abs() < 1e-6);
//! ```

pub mod adiabatic;
pub mod error;
pub mod hamiltonian;
pub mod ipea;
pub mod linalg;
pub mod nmr;
pub mod probe;

pub use adiabatic::{run_asp, scan_total_time, AdiabaticSchedule, AspResult};
pub use error::{Error, Result};
pub use hamiltonian::{build_h2, choose_tau, load_hamiltonian, spectrum, EnergySpectrum, MolecularHamiltonian};
pub use ipea::{
    energy_from_phase, error_profile, precision_report, reconstruct, run_ipea, run_pulse_backend, EnergyResult,
    ErrorProfile, IpeaRun, IterationConfig, IterationRecord, PhaseEstimate, ReadoutMode,
};
pub use linalg::{ComplexMatrix, DensityMatrix, HermitianMatrix, PureState, UnitaryMatrix};
pub use nmr::{PulseBackend, PulseSequence, SpinSystem};
pub use probe::{NoiseModel, SpectrumParams, SpectrumTrace};
