//! Adiabatic state preparation on the system qubit.
//!
//! The register starts in `|−⟩`, the ground state of `σ_x`, and is driven
//! through `H_ad(s) = (1 − s)·σ_x + s·H` in a fixed number of discrete steps.
//! Each step uses the symmetric split
//!
//! ```text
//! e^{-i(δ/2)(1−s)σ_x} · e^{-i s H δ} · e^{-i(δ/2)(1−s)σ_x}
//! ```
//!
//! whose error against the exact step is third order in `δ`. The sweep
//! parameter runs over `s_m = m/M` for `m = 0..=M`, so the first step is pure
//! `σ_x` evolution and the last is pure `H` evolution.

use crate::error::{Error, Result};
use crate::hamiltonian::{spectrum, MolecularHamiltonian, MIN_GAP};
use crate::linalg::{expm_herm, hermitian_eig, pauli_x, state_fidelity, HermitianMatrix, PureState, UnitaryMatrix};

#[derive(Clone, Debug)]
pub struct AdiabaticSchedule {
    /// Number of discrete steps, `M + 1`.
    pub steps: usize,
    pub total_time: f64,
    pub target: MolecularHamiltonian,
}

impl AdiabaticSchedule {
    pub fn new(target: MolecularHamiltonian, steps: usize, total_time: f64) -> Result<Self> {
        if steps == 0 {
            return Err(Error::Validation("schedule needs at least one step".into()));
        }
        if !(total_time > 0.0 && total_time.is_finite()) {
            return Err(Error::Validation(format!("total time must be positive, got {total_time}")));
        }
        if target.dim() != 2 {
            return Err(Error::Validation(format!(
                "adiabatic preparation interpolates from σ_x and needs a 2x2 target, got {0}x{0}",
                target.dim()
            )));
        }
        Ok(AdiabaticSchedule {
            steps,
            total_time,
            target,
        })
    }

    /// Duration of one step, `T/(M+1)`.
    pub fn step_duration(&self) -> f64 {
        self.total_time / self.steps as f64
    }

    /// `s_m = m/M`; a single-step schedule jumps straight to `s = 1`.
    pub fn s(&self, m: usize) -> f64 {
        if self.steps == 1 {
            1.0
        } else {
            m as f64 / (self.steps - 1) as f64
        }
    }
}

#[derive(Clone, Debug)]
pub struct AspResult {
    pub final_state: PureState,
    /// Overlap of the final state with the exact ground state of the target.
    pub fidelity: f64,
    /// Overlap with the instantaneous ground state after each step.
    pub per_step_fidelities: Vec<f64>,
    /// Product of all step propagators.
    pub propagator: UnitaryMatrix,
    pub schedule: AdiabaticSchedule,
}

fn check_s(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Validation(format!("interpolation parameter s = {s} outside [0, 1]")));
    }
    Ok(())
}

/// `(1 − s)·σ_x + s·H`.
pub fn interpolated_hamiltonian(target: &MolecularHamiltonian, s: f64) -> Result<HermitianMatrix> {
    check_s(s)?;
    if target.dim() != 2 {
        return Err(Error::Validation("interpolation needs a 2x2 target".into()));
    }
    let sx = HermitianMatrix::new(pauli_x())?;
    Ok(sx.combine(1.0 - s, &target.matrix, s))
}

/// One symmetric-split step of the discretized sweep.
pub fn trotter_step(target: &MolecularHamiltonian, s_m: f64, delta: f64) -> Result<UnitaryMatrix> {
    check_s(s_m)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Validation(format!("step duration must be positive, got {delta}")));
    }
    if target.dim() != 2 {
        return Err(Error::Validation("trotter step needs a 2x2 target".into()));
    }
    let sx = HermitianMatrix::new(pauli_x())?;
    let half = expm_herm(&sx, 0.5 * delta * (1.0 - s_m))?;
    let middle = expm_herm(&target.matrix, s_m * delta)?;
    Ok(half.compose(&middle).compose(&half))
}

fn instantaneous_ground(target: &MolecularHamiltonian, s: f64) -> Result<PureState> {
    let eig = hermitian_eig(&interpolated_hamiltonian(target, s)?)?;
    let gap = eig.eigenvalues[1] - eig.eigenvalues[0];
    if gap <= MIN_GAP {
        return Err(Error::Degenerate { gap, at_s: Some(s) });
    }
    Ok(eig.eigenvector(0))
}

/// Runs the discretized adiabatic sweep from `|−⟩`.
pub fn run_asp(schedule: &AdiabaticSchedule) -> Result<AspResult> {
    let target = &schedule.target;
    let delta = schedule.step_duration();
    let grounds = (0..schedule.steps)
        .map(|m| instantaneous_ground(target, schedule.s(m)))
        .collect::<Result<Vec<_>>>()?;
    let exact_ground = spectrum(target)?.ground_state;

    let mut state = PureState::minus();
    let mut propagator = UnitaryMatrix::identity(2);
    let mut per_step_fidelities = Vec::with_capacity(schedule.steps);
    for (m, ground) in grounds.iter().enumerate() {
        let step = trotter_step(target, schedule.s(m), delta)?;
        state = step.apply(&state);
        propagator = step.compose(&propagator);
        per_step_fidelities.push(state_fidelity(ground, &state)?);
    }
    // s at the last step is 1, so this equals the last per-step entry
    let fidelity = state_fidelity(&exact_ground, &state)?;
    if let Some(last) = per_step_fidelities.last_mut() {
        *last = fidelity;
    }
    Ok(AspResult {
        final_state: state,
        fidelity,
        per_step_fidelities,
        propagator,
        schedule: schedule.clone(),
    })
}

/// Final fidelity for each total time in `t_grid`, in grid order.
pub fn scan_total_time(target: &MolecularHamiltonian, steps: usize, t_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if t_grid.is_empty() {
        return Err(Error::Validation("time grid is empty".into()));
    }
    if t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::Validation("time grid must be positive".into()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Validation("time grid must be strictly ascending".into()));
    }
    t_grid
        .iter()
        .map(|&t| {
            let schedule = AdiabaticSchedule::new(target.clone(), steps, t)?;
            Ok((t, run_asp(&schedule)?.fidelity))
        })
        .collect()
}
