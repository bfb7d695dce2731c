use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("the k-space shell ({lo:.6e}, {hi:.6e}) m^-1 contains no lattice points")]
    EmptyShell { lo: f64, hi: f64 },

    #[error("secular root in bracket ({lo:.17e}, {hi:.17e}) did not converge after {iterations} iterations")]
    Convergence { lo: f64, hi: f64, iterations: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("Hamiltonian of dimension {dim} exceeds the limit of {limit}")]
    SizeGuard { dim: usize, limit: usize },

    #[error("fit failed: {0}")]
    Fit(String),
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
