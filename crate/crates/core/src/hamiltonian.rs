//! Molecular Hamiltonians given as small explicit matrices.
//!
//! The built-in example is the two-configuration H₂ Hamiltonian in the
//! STO-3G basis at a bond length of 1.4 bohr. Arbitrary Hermitian matrices
//! can be loaded from JSON documents of the form
//!
//! ```json
//! { "label": "H2/STO-3G", "dim": 2,
//!   "matrix_re": [[-1.831, 0.1813], [0.1813, -0.2537]],
//!   "matrix_im": [[0, 0], [0, 0]],
//!   "metadata": { "basis": "STO-3G" } }
//! ```
//!
//! `matrix_im` and `metadata` are optional.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, hermitian_eig, ComplexMatrix, EigenDecomposition, HermitianMatrix, PureState};

/// Smallest ground-state gap (hartree) treated as nondegenerate.
pub const MIN_GAP: f64 = 1e-9;

pub const H2_LABEL: &str = "H2/STO-3G";
pub const H2_MATRIX: [[f64; 2]; 2] = [[-1.8310, 0.1813], [0.1813, -0.2537]];

/// A Hermitian matrix in hartree with a label and free-form metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct MolecularHamiltonian {
    pub matrix: HermitianMatrix,
    pub label: String,
    pub metadata: BTreeMap<String, String>,
}

/// Ascending energies and the ground eigenvector.
#[derive(Clone, Debug)]
pub struct EnergySpectrum {
    pub energies: Vec<f64>,
    pub ground_state: PureState,
}

impl EnergySpectrum {
    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }
}

impl MolecularHamiltonian {
    pub fn new(matrix: HermitianMatrix, label: impl Into<String>) -> Self {
        MolecularHamiltonian {
            matrix,
            label: label.into(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_metadata(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.metadata.insert(key.into(), value.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Full eigendecomposition, no gap requirement.
    pub fn eig(&self) -> Result<EigenDecomposition> {
        hermitian_eig(&self.matrix)
    }

    /// Serializes to the JSON document format.
    pub fn to_json(&self) -> String {
        let dim = self.dim();
        let m = self.matrix.matrix();
        let doc = HamiltonianDocument {
            label: self.label.clone(),
            dim,
            matrix_re: (0..dim).map(|i| (0..dim).map(|j| m.get(i, j).re).collect()).collect(),
            matrix_im: Some((0..dim).map(|i| (0..dim).map(|j| m.get(i, j).im).collect()).collect()),
            metadata: self.metadata.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("document serialization cannot fail")
    }
}

/// The H₂ Hamiltonian in the two-configuration STO-3G basis.
pub fn build_h2() -> MolecularHamiltonian {
    let rows: Vec<&[f64]> = H2_MATRIX.iter().map(|r| r.as_slice()).collect();
    let matrix = HermitianMatrix::from_real_rows(&rows).expect("built-in matrix is Hermitian");
    MolecularHamiltonian::new(matrix, H2_LABEL)
        .with_metadata("basis", "STO-3G")
        .with_metadata("distance", "1.4 a.u.")
        .with_metadata("units", "hartree")
}

/// Energies and ground state, requiring a nondegenerate ground level.
pub fn spectrum(h: &MolecularHamiltonian) -> Result<EnergySpectrum> {
    let eig = h.eig()?;
    if eig.eigenvalues.len() > 1 {
        let gap = eig.eigenvalues[1] - eig.eigenvalues[0];
        if gap <= MIN_GAP {
            return Err(Error::Degenerate { gap, at_s: None });
        }
    }
    Ok(EnergySpectrum {
        ground_state: eig.eigenvector(0),
        energies: eig.eigenvalues,
    })
}

/// Evolution time `π / √((2·H₁₂)² + (H₁₁ − H₂₂)²)`, the inverse of the
/// level splitting scaled so that the splitting accumulates a phase of π.
///
/// Only defined for 2×2 Hamiltonians. Fails with a range error when the
/// ground-state phase `|E_g|·τ` would reach a full turn.
pub fn choose_tau(h: &MolecularHamiltonian) -> Result<f64> {
    if h.dim() != 2 {
        return Err(Error::Validation(format!(
            "automatic tau is only defined for 2x2 Hamiltonians (got {0}x{0}); supply tau explicitly",
            h.dim()
        )));
    }
    let m = &h.matrix;
    let off = 2.0 * m.get(0, 1).norm();
    let diff = m.get(0, 0).re - m.get(1, 1).re;
    let denom = off.hypot(diff);
    if denom == 0.0 {
        return Err(Error::Range(
            "Hamiltonian has degenerate levels, tau formula is undefined; supply tau explicitly".into(),
        ));
    }
    let tau = PI / denom;
    let eg = h.eig()?.eigenvalues[0];
    if eg.abs() * tau >= 2.0 * PI {
        return Err(Error::Range(format!(
            "|E_g|·tau = {} ≥ 2π, phase would wrap; supply tau explicitly",
            eg.abs() * tau
        )));
    }
    Ok(tau)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HamiltonianDocument {
    label: String,
    dim: usize,
    matrix_re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix_im: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    metadata: BTreeMap<String, String>,
}

fn check_rows(field: &str, rows: &[Vec<f64>], dim: usize) -> Result<()> {
    if rows.len() != dim {
        return Err(Error::Parse(format!("field `{field}`: expected {dim} rows, found {}", rows.len())));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::Parse(format!(
                "field `{field}`: row {i} has {} entries, expected {dim}",
                row.len()
            )));
        }
    }
    Ok(())
}

/// Parses and validates a Hamiltonian JSON document.
pub fn load_hamiltonian(document: &str) -> Result<MolecularHamiltonian> {
    let doc: HamiltonianDocument = serde_json::from_str(document).map_err(|e| {
        Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column()))
    })?;
    let dim = doc.dim;
    if dim == 0 {
        return Err(Error::Parse("field `dim`: must be at least 1".into()));
    }
    check_rows("matrix_re", &doc.matrix_re, dim)?;
    if let Some(im) = &doc.matrix_im {
        check_rows("matrix_im", im, dim)?;
    }
    let mut data = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let im = doc.matrix_im.as_ref().map_or(0.0, |m| m[i][j]);
            data.push(c64(doc.matrix_re[i][j], im));
        }
    }
    let matrix = HermitianMatrix::new(ComplexMatrix::new(dim, data)?)?;
    Ok(MolecularHamiltonian {
        matrix,
        label: doc.label,
        metadata: doc.metadata,
    })
}
