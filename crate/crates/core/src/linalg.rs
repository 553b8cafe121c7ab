//! Dense complex linear algebra for registers of one to three qubits.
//!
//! Everything here works on small square matrices stored row-major as
//! [`C64`] values. The largest supported dimension is [`MAX_DIM`] (three
//! qubits). The types are thin validated wrappers: a [`HermitianMatrix`] is
//! a [`ComplexMatrix`] that passed a Hermiticity check, a [`UnitaryMatrix`]
//! one that passed a unitarity check, and so on.
//!
//! The eigensolver is a cyclic complex Jacobi iteration, and the matrix
//! exponential of a Hermitian generator goes through its eigendecomposition.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest supported matrix dimension (three qubits).
pub const MAX_DIM: usize = 8;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-12;

const JACOBI_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 64;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Validation("matrix dimension must be positive".into()));
        }
        if dim > MAX_DIM {
            return Err(Error::Size { dim, max: MAX_DIM });
        }
        if data.len() != dim * dim {
            return Err(Error::Validation(format!(
                "expected {} entries for dimension {dim}, got {}",
                dim * dim,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation(format!(
                "entry ({},{}) is not finite",
                pos / dim,
                pos % dim
            )));
        }
        Ok(ComplexMatrix { dim, data })
    }

    /// Builds a matrix from real rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::Validation("matrix rows must be square".into()));
            }
            data.extend(row.iter().map(|&x| c64(x, 0.0)));
        }
        ComplexMatrix::new(dim, data)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| C64::new(0.0, 0.0))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { c64(1.0, 0.0) } else { c64(0.0, 0.0) })
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { c64(0.0, 0.0) })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub(crate) fn set(&mut self, row: usize, col: usize, value: C64) {
        self.data[row * self.dim + col] = value;
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn scale(&self, factor: C64) -> Self {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest entry magnitude.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// Worst Hermiticity violation as `(row, col, |A[i][j] - conj(A[j][i])|)`.
    pub fn hermiticity_defect(&self) -> (usize, usize, f64) {
        let mut worst = (0, 0, 0.0);
        for i in 0..self.dim {
            for j in i..self.dim {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                if d > worst.2 {
                    worst = (i, j, d);
                }
            }
        }
        worst
    }

    /// max |A^dag A - I|.
    pub fn unitarity_defect(&self) -> f64 {
        (&self.adjoint() * self).max_abs_diff(&ComplexMatrix::identity(self.dim))
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self.get(i, j);
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = vec![c64(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == c64(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        ComplexMatrix { dim: n, data: out }
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::new(2, vec![c64(0.0, 0.0), c64(0.0, -1.0), c64(0.0, 1.0), c64(0.0, 0.0)]).unwrap()
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap()
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let dim = a.dim * b.dim;
    if dim > MAX_DIM {
        return Err(Error::Size { dim, max: MAX_DIM });
    }
    Ok(ComplexMatrix::from_fn(dim, |i, j| {
        a.get(i / b.dim, j / b.dim) * b.get(i % b.dim, j % b.dim)
    }))
}

/// A [`ComplexMatrix`] equal to its own conjugate transpose.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let (row, col, deviation) = m.hermiticity_defect();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { row, col, deviation });
        }
        Ok(HermitianMatrix(m))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_rows(rows)?)
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0.get(row, col)
    }

    /// Real linear combination `a·self + b·other`, which stays Hermitian.
    pub fn combine(&self, a: f64, other: &HermitianMatrix, b: f64) -> HermitianMatrix {
        let m = &self.0.scale(c64(a, 0.0)) + &other.0.scale(c64(b, 0.0));
        HermitianMatrix(m)
    }

    /// Adds `shift` times the identity.
    pub fn shifted(&self, shift: f64) -> HermitianMatrix {
        self.combine(1.0, &HermitianMatrix(ComplexMatrix::identity(self.dim())), shift)
    }
}

/// A [`ComplexMatrix`] with `U^dag U = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix(ComplexMatrix);

impl UnitaryMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let deviation = m.unitarity_defect();
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(UnitaryMatrix(m))
    }

    /// Wraps a product of unitaries without re-checking.
    pub(crate) fn from_trusted(m: ComplexMatrix) -> Self {
        debug_assert!(m.unitarity_defect() < 1e-8);
        UnitaryMatrix(m)
    }

    pub fn identity(dim: usize) -> Self {
        UnitaryMatrix(ComplexMatrix::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0.get(row, col)
    }

    pub fn adjoint(&self) -> UnitaryMatrix {
        UnitaryMatrix(self.0.adjoint())
    }

    /// `self · rhs`.
    pub fn compose(&self, rhs: &UnitaryMatrix) -> UnitaryMatrix {
        UnitaryMatrix(&self.0 * &rhs.0)
    }

    /// Multiplies by the scalar `e^{iθ}`.
    pub fn with_phase(&self, theta: f64) -> UnitaryMatrix {
        UnitaryMatrix(self.0.scale(C64::from_polar(1.0, theta)))
    }

    /// `self^(2^squarings)` by repeated squaring.
    ///
    /// Columns are re-orthonormalized after every squaring; otherwise the
    /// rounding drift doubles with each step and leaves the unitary set
    /// after a few dozen squarings.
    pub fn pow2(&self, squarings: u32) -> UnitaryMatrix {
        let mut acc = self.0.clone();
        for _ in 0..squarings {
            acc = &acc * &acc;
            orthonormalize_columns(&mut acc);
        }
        UnitaryMatrix(acc)
    }

    pub fn tensor(&self, other: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        Ok(UnitaryMatrix(tensor(&self.0, &other.0)?))
    }

    pub fn apply(&self, state: &PureState) -> PureState {
        PureState {
            amplitudes: self.0.apply(&state.amplitudes),
        }
    }

    /// Gate fidelity modulo global phase, `|Tr(self^dag · other)| / dim`.
    pub fn phase_insensitive_fidelity(&self, other: &UnitaryMatrix) -> f64 {
        (&self.0.adjoint() * &other.0).trace().norm() / self.dim() as f64
    }
}

/// Normalized state vector.
/// Modified Gram-Schmidt on the columns, in place.
fn orthonormalize_columns(m: &mut ComplexMatrix) {
    let n = m.dim();
    for j in 0..n {
        for i in 0..j {
            let overlap: C64 = (0..n).map(|r| m.get(r, i).conj() * m.get(r, j)).sum();
            for r in 0..n {
                let v = m.get(r, j) - overlap * m.get(r, i);
                m.set(r, j, v);
            }
        }
        let norm = (0..n).map(|r| m.get(r, j).norm_sqr()).sum::<f64>().sqrt();
        for r in 0..n {
            let v = m.get(r, j) / norm;
            m.set(r, j, v);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() || amplitudes.len() > MAX_DIM {
            return Err(Error::Size {
                dim: amplitudes.len(),
                max: MAX_DIM,
            });
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("state amplitude is not finite".into()));
        }
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Validation(format!("state norm² is {norm}, expected 1")));
        }
        Ok(PureState { amplitudes })
    }

    /// Rescales the amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Validation("cannot normalize a zero vector".into()));
        }
        PureState::new(amplitudes.into_iter().map(|z| z / norm).collect())
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        PureState::normalized(amplitudes.iter().map(|&x| c64(x, 0.0)).collect())
    }

    /// Computational basis state.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![c64(0.0, 0.0); dim];
        amplitudes[index] = c64(1.0, 0.0);
        PureState { amplitudes }
    }

    /// `|+⟩ = (|↑⟩ + |↓⟩)/√2`.
    pub fn plus() -> Self {
        PureState::from_real(&[1.0, 1.0]).unwrap()
    }

    /// `|−⟩ = (|↑⟩ − |↓⟩)/√2`.
    pub fn minus() -> Self {
        PureState::from_real(&[1.0, -1.0]).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let dim = self.dim() * other.dim();
        if dim > MAX_DIM {
            return Err(Error::Size { dim, max: MAX_DIM });
        }
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Ok(PureState { amplitudes })
    }

    /// Expectation value `⟨ψ|A|ψ⟩`.
    pub fn expectation(&self, op: &ComplexMatrix) -> C64 {
        let applied = op.apply(&self.amplitudes);
        self.amplitudes.iter().zip(&applied).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let h = HermitianMatrix::new(m)?;
        let tr = h.matrix().trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::Validation(format!("density matrix trace is {tr}, expected 1")));
        }
        let eig = hermitian_eig(&h)?;
        if eig.eigenvalues[0] < -1e-10 {
            return Err(Error::Validation(format!(
                "density matrix has negative eigenvalue {}",
                eig.eigenvalues[0]
            )));
        }
        Ok(DensityMatrix(h.into_matrix()))
    }

    pub fn from_pure(state: &PureState) -> Self {
        let a = state.amplitudes();
        DensityMatrix(ComplexMatrix::from_fn(a.len(), |i, j| a[i] * a[j].conj()))
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0.get(row, col)
    }

    /// `U ρ U^dag`.
    pub fn conjugate_by(&self, u: &UnitaryMatrix) -> DensityMatrix {
        let m = &(u.matrix() * &self.0) * &u.matrix().adjoint();
        DensityMatrix(m)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(DensityMatrix(tensor(&self.0, &other.0)?))
    }
}

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// as columns.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: UnitaryMatrix,
}

impl EigenDecomposition {
    pub fn eigenvector(&self, index: usize) -> PureState {
        let v = &self.eigenvectors;
        PureState {
            amplitudes: (0..v.dim()).map(|i| v.get(i, index)).collect(),
        }
    }

    /// `V · diag(λ) · V^dag`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = self.eigenvectors.matrix();
        let d = ComplexMatrix::diagonal(
            &self.eigenvalues.iter().map(|&l| c64(l, 0.0)).collect::<Vec<_>>(),
        );
        &(v * &d) * &v.adjoint()
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a.get(i, j).norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Each rotation first removes the phase of the pivot `a[p][q]` and then
/// applies a real Givens rotation that zeroes it. Sweeps continue until the
/// off-diagonal Frobenius norm drops below `1e-13` times the input norm.
/// Eigenvectors are returned with their first non-negligible component real
/// and positive, so the output is deterministic for a given input.
pub fn hermitian_eig(h: &HermitianMatrix) -> Result<EigenDecomposition> {
    let n = h.dim();
    // symmetrize away sub-tolerance asymmetry
    let mut a = ComplexMatrix::from_fn(n, |i, j| (h.get(i, j) + h.get(j, i).conj()) * 0.5);
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();
    let threshold = JACOBI_TOL * scale;

    let mut sweeps = 0;
    while off_diagonal_norm(&a) > threshold {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off: off_diagonal_norm(&a),
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                // w removes the pivot phase: (D^dag A D)[p][q] = r with D[q][q] = w
                let w = (apq / r).conj();
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let theta = 0.5 * (2.0 * r).atan2(aqq - app);
                let (s, c) = theta.sin_cos();

                // A <- A G, V <- V G with G e_p = c e_p - s w e_q, G e_q = s e_p + c w e_q
                for k in 0..n {
                    let (xp, xq) = (a.get(k, p), a.get(k, q));
                    a.set(k, p, xp * c - xq * w * s);
                    a.set(k, q, xp * s + xq * w * c);
                    let (yp, yq) = (v.get(k, p), v.get(k, q));
                    v.set(k, p, yp * c - yq * w * s);
                    v.set(k, q, yp * s + yq * w * c);
                }
                // A <- G^dag A
                for k in 0..n {
                    let (xp, xq) = (a.get(p, k), a.get(q, k));
                    a.set(p, k, xp * c - xq * w.conj() * s);
                    a.set(q, k, xp * s + xq * w.conj() * c);
                }
                a.set(p, q, c64(0.0, 0.0));
                a.set(q, p, c64(0.0, 0.0));
                a.set(p, p, c64(a.get(p, p).re, 0.0));
                a.set(q, q, c64(a.get(q, q).re, 0.0));
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).re.total_cmp(&a.get(j, j).re));
    let eigenvalues = order.iter().map(|&i| a.get(i, i).re).collect();
    let vectors = ComplexMatrix::from_fn(n, |row, col| v.get(row, order[col]));
    let mut vectors = vectors;
    for col in 0..n {
        let lead = (0..n)
            .map(|row| vectors.get(row, col))
            .find(|z| z.norm() > 1e-8)
            .unwrap_or(c64(1.0, 0.0));
        let fix = (lead / lead.norm()).conj();
        for row in 0..n {
            let z = vectors.get(row, col);
            vectors.set(row, col, z * fix);
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors: UnitaryMatrix::from_trusted(vectors),
    })
}

/// `exp(-i·h·t)` via the eigendecomposition `V·exp(-iΛt)·V^dag`.
pub fn expm_herm(h: &HermitianMatrix, t: f64) -> Result<UnitaryMatrix> {
    if !t.is_finite() {
        return Err(Error::Validation(format!("evolution time {t} is not finite")));
    }
    let eig = hermitian_eig(h)?;
    Ok(expm_from_eig(&eig, t))
}

pub(crate) fn expm_from_eig(eig: &EigenDecomposition, t: f64) -> UnitaryMatrix {
    let phases: Vec<C64> = eig
        .eigenvalues
        .iter()
        .map(|&l| C64::from_polar(1.0, -l * t))
        .collect();
    let v = eig.eigenvectors.matrix();
    let m = &(v * &ComplexMatrix::diagonal(&phases)) * &v.adjoint();
    UnitaryMatrix::from_trusted(m)
}

/// Partial trace of a bipartite density matrix with subsystem dimensions
/// `dims`, keeping subsystem `keep` (0 = first tensor factor).
pub fn partial_trace_dims(rho: &DensityMatrix, dims: (usize, usize), keep: usize) -> Result<DensityMatrix> {
    let (da, db) = dims;
    if da * db != rho.dim() {
        return Err(Error::Validation(format!(
            "subsystem dimensions {da}x{db} do not match density matrix dimension {}",
            rho.dim()
        )));
    }
    let m = match keep {
        0 => ComplexMatrix::from_fn(da, |i, j| (0..db).map(|k| rho.get(i * db + k, j * db + k)).sum()),
        1 => ComplexMatrix::from_fn(db, |i, j| (0..da).map(|k| rho.get(k * db + i, k * db + j)).sum()),
        _ => {
            return Err(Error::Validation(format!(
                "subsystem index {keep} is invalid for a bipartite system"
            )))
        }
    };
    Ok(DensityMatrix(m))
}

/// Reduced state of one qubit of a two-qubit density matrix.
pub fn partial_trace(rho: &DensityMatrix, keep: usize) -> Result<DensityMatrix> {
    if rho.dim() != 4 {
        return Err(Error::Validation(format!(
            "partial_trace expects a two-qubit (4x4) density matrix, got {0}x{0}",
            rho.dim()
        )));
    }
    partial_trace_dims(rho, (2, 2), keep)
}

/// `|⟨a|b⟩|²`.
pub fn state_fidelity(a: &PureState, b: &PureState) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Validation(format!(
            "state dimensions differ: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(a.inner(b).norm_sqr().min(1.0))
}

/// Distance between two phases measured in turns, on the circle.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Maps an angle in radians to a fraction of a turn in `[0, 1)`.
pub fn turns_from_radians(angle: f64) -> f64 {
    let t = (angle / (2.0 * PI)).rem_euclid(1.0);
    if t >= 1.0 {
        0.0
    } else {
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut impl Rng, dim: usize) -> HermitianMatrix {
        let mut m = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            m.set(i, i, c64(rng.gen_range(-2.0..2.0), 0.0));
            for j in (i + 1)..dim {
                let z = c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m.set(i, j, z);
                m.set(j, i, z.conj());
            }
        }
        HermitianMatrix::new(m).unwrap()
    }

    #[test]
    fn h2_ground_energy() {
        let h = HermitianMatrix::from_real_rows(&[&[-1.8310, 0.1813], &[0.1813, -0.2537]]).unwrap();
        let eig = hermitian_eig(&h).unwrap();
        assert!((eig.eigenvalues[0] - -1.8516).abs() < 5e-5);
    }

    #[test]
    fn identity_and_pauli_x_spectra() {
        let eig = hermitian_eig(&HermitianMatrix::new(ComplexMatrix::identity(2)).unwrap()).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 1.0]);

        let eig = hermitian_eig(&HermitianMatrix::new(pauli_x()).unwrap()).unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-14);
        let g = eig.eigenvector(0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((g.amplitudes()[0] - c64(s, 0.0)).norm() < 1e-14);
        assert!((g.amplitudes()[1] - c64(-s, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.5, 0.0]]).unwrap();
        match HermitianMatrix::new(m) {
            Err(Error::NotHermitian { row: 0, col: 1, deviation }) => assert!((deviation - 0.5).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn eig_is_deterministic_for_degenerate_input() {
        let h = HermitianMatrix::from_real_rows(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, -3.0]]).unwrap();
        let a = hermitian_eig(&h).unwrap();
        let b = hermitian_eig(&h).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert_eq!(a.eigenvectors, b.eigenvectors);
    }

    #[test]
    fn expm_zero_time_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(&mut rng, 4);
        let u = expm_herm(&h, 0.0).unwrap();
        assert!(u.matrix().max_abs_diff(&ComplexMatrix::identity(4)) < 1e-14);
    }

    #[test]
    fn expm_pauli_z() {
        let z = HermitianMatrix::new(pauli_z()).unwrap();
        // exp(-i σ_z π/2) = diag(-i, i)
        let u = expm_herm(&z, PI / 2.0).unwrap();
        let want = ComplexMatrix::diagonal(&[c64(0.0, -1.0), c64(0.0, 1.0)]);
        assert!(u.matrix().max_abs_diff(&want) < 1e-15);
        // exp(-i σ_z π) = -I
        let u = expm_herm(&z, PI).unwrap();
        assert!(u.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale(c64(-1.0, 0.0))) < 1e-15);
    }

    #[test]
    fn expm_rejects_non_finite_time() {
        let z = HermitianMatrix::new(pauli_z()).unwrap();
        assert!(matches!(expm_herm(&z, f64::NAN), Err(Error::Validation(_))));
    }

    #[test]
    fn h2_evolution_eigenphase_matches_oracle() {
        let h = HermitianMatrix::from_real_rows(&[&[-1.8310, 0.1813], &[0.1813, -0.2537]]).unwrap();
        let tau = 1.941122;
        let eig = hermitian_eig(&h).unwrap();
        let u = expm_herm(&h, tau).unwrap();
        let g = eig.eigenvector(0);
        let ug = u.apply(&g);
        let want = C64::from_polar(1.0, -eig.eigenvalues[0] * tau);
        for (a, b) in ug.amplitudes().iter().zip(g.amplitudes()) {
            assert!((a - b * want).norm() < 1e-13);
        }
    }

    #[test]
    fn tensor_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(tensor(&i2, &i2).unwrap(), ComplexMatrix::identity(4));
        let zz = tensor(&pauli_z(), &pauli_z()).unwrap();
        let want = ComplexMatrix::from_real_rows(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, -1.0, 0.0, 0.0],
            &[0.0, 0.0, -1.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert_eq!(zz, want);

        let up = ComplexMatrix::diagonal(&[c64(1.0, 0.0), c64(0.0, 0.0)]);
        let down = ComplexMatrix::diagonal(&[c64(0.0, 0.0), c64(1.0, 0.0)]);
        let cu = &tensor(&up, &i2).unwrap() + &tensor(&down, &i2).unwrap();
        assert_eq!(cu, ComplexMatrix::identity(4));

        let big = ComplexMatrix::identity(4);
        assert!(matches!(tensor(&big, &big), Err(Error::Size { dim: 16, .. })));
    }

    #[test]
    fn partial_trace_examples() {
        let a = DensityMatrix::from_pure(&PureState::from_real(&[0.6, 0.8]).unwrap());
        let b = DensityMatrix::from_pure(&PureState::plus());
        let ab = a.tensor(&b).unwrap();
        assert!(partial_trace(&ab, 0).unwrap().matrix().max_abs_diff(a.matrix()) < 1e-15);
        assert!(partial_trace(&ab, 1).unwrap().matrix().max_abs_diff(b.matrix()) < 1e-15);

        let bell = DensityMatrix::from_pure(&PureState::from_real(&[1.0, 0.0, 0.0, 1.0]).unwrap());
        let half = ComplexMatrix::identity(2).scale(c64(0.5, 0.0));
        for keep in 0..2 {
            assert!(partial_trace(&bell, keep).unwrap().matrix().max_abs_diff(&half) < 1e-15);
        }
        assert!(matches!(partial_trace(&bell, 2), Err(Error::Validation(_))));
    }

    #[test]
    fn partial_trace_recovers_kickback_coherence() {
        let theta = 1.234_f64;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let probe = PureState::new(vec![c64(s, 0.0), C64::from_polar(s, theta)]).unwrap();
        let sys = PureState::from_real(&[0.9, -0.3]).unwrap();
        let rho = DensityMatrix::from_pure(&probe.tensor(&sys).unwrap());
        let reduced = partial_trace(&rho, 0).unwrap();
        assert!((reduced.get(0, 1) - C64::from_polar(0.5, -theta)).norm() < 1e-15);
    }

    #[test]
    fn fidelity_examples() {
        let up = PureState::basis(2, 0);
        let down = PureState::basis(2, 1);
        assert_eq!(state_fidelity(&up, &up).unwrap(), 1.0);
        assert_eq!(state_fidelity(&up, &down).unwrap(), 0.0);
        assert!((state_fidelity(&PureState::plus(), &up).unwrap() - 0.5).abs() < 1e-15);
        assert!(state_fidelity(&up, &PureState::basis(4, 0)).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        let bad = ComplexMatrix::diagonal(&[c64(1.5, 0.0), c64(-0.5, 0.0)]);
        assert!(DensityMatrix::new(bad).is_err());
        let ok = ComplexMatrix::diagonal(&[c64(0.25, 0.0), c64(0.75, 0.0)]);
        assert!(DensityMatrix::new(ok).is_ok());
    }

    #[test]
    fn eig_reconstruction_over_many_seeds() {
        for seed in 0..1000u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dim = [2, 4, 8][(seed % 3) as usize];
            let h = random_hermitian(&mut rng, dim);
            let eig = hermitian_eig(&h).unwrap();
            assert!(eig.reconstruct().max_abs_diff(h.matrix()) <= 1e-11, "seed {seed}");
            assert!(eig.eigenvectors.matrix().unitarity_defect() <= 1e-11, "seed {seed}");
            assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    proptest! {
        #[test]
        fn expm_inverse_and_group_law(seed in any::<u64>(), t1 in -5.0f64..5.0, t2 in -5.0f64..5.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = random_hermitian(&mut rng, 4);
            let fwd = expm_herm(&h, t1).unwrap();
            let back = expm_herm(&h, -t1).unwrap();
            prop_assert!(fwd.compose(&back).matrix().max_abs_diff(&ComplexMatrix::identity(4)) <= 1e-10);
            let sum = expm_herm(&h, t1 + t2).unwrap();
            let prod = fwd.compose(&expm_herm(&h, t2).unwrap());
            prop_assert!(sum.matrix().max_abs_diff(prod.matrix()) <= 1e-10);
            prop_assert!(fwd.matrix().unitarity_defect() <= 1e-10);
        }

        #[test]
        fn partial_trace_of_product(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let state = |rng: &mut ChaCha8Rng| {
                PureState::normalized((0..2).map(|_| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()).unwrap()
            };
            let a = DensityMatrix::from_pure(&state(&mut rng));
            let b = DensityMatrix::from_pure(&state(&mut rng));
            let reduced = partial_trace(&a.tensor(&b).unwrap(), 0).unwrap();
            prop_assert!(reduced.matrix().max_abs_diff(a.matrix()) <= 1e-12);
        }

        #[test]
        fn fidelity_is_symmetric(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut state = || PureState::normalized((0..4).map(|_| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()).unwrap();
            let (a, b) = (state(), state());
            let f = state_fidelity(&a, &b).unwrap();
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert!((f - state_fidelity(&b, &a).unwrap()).abs() < 1e-15);
        }
    }
}
