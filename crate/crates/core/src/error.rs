use thiserror::Error;

/// Everything that can go wrong inside the library.
///
/// Variants split into two families: input problems ([`Error::is_validation`])
/// and failures discovered while computing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("size error: dimension {dim} exceeds the supported maximum of {max}")]
    Size { dim: usize, max: usize },

    #[error("matrix is not Hermitian: entries ({row},{col}) and ({col},{row}) differ by {deviation:e}")]
    NotHermitian {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("matrix is not unitary: max |U^dag U - I| = {deviation:e}")]
    NotUnitary { deviation: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("degenerate ground state{}: gap {gap:e} hartree", at_s.map(|s| format!(" at s = {s}")).unwrap_or_default())]
    Degenerate { gap: f64, at_s: Option<f64> },

    #[error("range error: {0}")]
    Range(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("readout error: probe coherence {coherence:e} is too small to define a phase")]
    Readout { coherence: f64 },

    #[error("reference spectrum integral {magnitude:e} is too small")]
    Reference { magnitude: f64 },

    #[error("compilation error: fidelity {fidelity} falls short (residual {residual:e})")]
    Compilation { fidelity: f64, residual: f64 },

    #[error("iteration {k}: {source}")]
    AtIteration {
        k: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at_iteration(self, k: usize) -> Error {
        Error::AtIteration {
            k,
            source: Box::new(self),
        }
    }

    /// True for errors caused by bad input rather than by a failed computation.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Validation(_)
            | Error::Size { .. }
            | Error::NotHermitian { .. }
            | Error::NotUnitary { .. }
            | Error::Parse(_)
            | Error::Range(_)
            | Error::Config(_) => true,
            Error::AtIteration { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
