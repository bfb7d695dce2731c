//! Eigendecomposition of single-photon-subspace Hamiltonians.
//!
//! Single-atom Hamiltonians are arrowheads and are solved through their
//! secular equation; two-atom Hamiltonians are reduced to two nested
//! arrowheads. Eigenvectors of both stay matrix-free, so memory is linear in
//! the number of oscillators while projections cost one pass over the
//! implicit matrix. A dense solver serves as the test oracle.

mod amp;
mod bordered;
mod dense;
mod secular;

use nalgebra::DMatrix;

pub use amp::Amp;
pub use bordered::BorderedVectors;
pub use dense::DENSE_LIMIT;
pub use secular::{ArrowheadVectors, SecularSolveReport, MAX_ITERATIONS, ROOT_TOLERANCE};

use crate::error::{domain, Error, Result};
use crate::model::ArrowheadHamiltonian;

/// Default cap on the Hamiltonian dimension.
pub const DEFAULT_MAX_DIM: usize = 20_001;

#[derive(Debug, Clone)]
pub enum Eigenvectors {
    Dense(DMatrix<f64>),
    Arrowhead(ArrowheadVectors),
    Bordered(BorderedVectors),
}

/// Ascending eigenvalues with their orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    eigenvalues: Vec<f64>,
    vectors: Eigenvectors,
    atoms: usize,
    atomic_rows: Vec<Vec<f64>>,
    report: Option<SecularSolveReport>,
}

impl EigenDecomposition {
    /// Wrap dense eigenpairs; columns must be ordered like `eigenvalues`.
    pub fn from_dense(eigenvalues: Vec<f64>, vectors: DMatrix<f64>, atoms: usize) -> Result<Self> {
        let n = eigenvalues.len();
        if vectors.nrows() != n || vectors.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: vectors.nrows() });
        }
        if atoms == 0 || atoms > n {
            return domain("atom count out of range");
        }
        let atomic_rows = (0..atoms).map(|i| vectors.row(i).iter().copied().collect()).collect();
        Ok(Self { eigenvalues, vectors: Eigenvectors::Dense(vectors), atoms, atomic_rows, report: None })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn vectors(&self) -> &Eigenvectors {
        &self.vectors
    }

    pub fn report(&self) -> Option<&SecularSolveReport> {
        self.report.as_ref()
    }

    /// Component of every eigenvector on atomic site `atom`.
    pub fn atomic_row(&self, atom: usize) -> &[f64] {
        &self.atomic_rows[atom]
    }

    /// Coefficients `U^T x` of a site-basis vector.
    pub fn project<T: Amp>(&self, x: &[T]) -> Vec<T> {
        match &self.vectors {
            Eigenvectors::Dense(u) => (0..u.ncols())
                .map(|j| {
                    let mut acc = T::zero();
                    for (i, &xi) in x.iter().enumerate() {
                        acc += xi * u[(i, j)];
                    }
                    acc
                })
                .collect(),
            Eigenvectors::Arrowhead(v) => v.project(x),
            Eigenvectors::Bordered(v) => v.project(x),
        }
    }

    /// Site-basis vector `U c` from eigen coefficients.
    pub fn expand<T: Amp>(&self, c: &[T]) -> Vec<T> {
        match &self.vectors {
            Eigenvectors::Dense(u) => {
                let mut out = vec![T::zero(); u.nrows()];
                for (j, &cj) in c.iter().enumerate() {
                    for (i, o) in out.iter_mut().enumerate() {
                        *o += cj * u[(i, j)];
                    }
                }
                out
            }
            Eigenvectors::Arrowhead(v) => v.expand(c),
            Eigenvectors::Bordered(v) => v.expand(c),
        }
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        match &self.vectors {
            Eigenvectors::Dense(u) => u.column(j).iter().copied().collect(),
            Eigenvectors::Arrowhead(v) => v.column(j),
            Eigenvectors::Bordered(v) => v.column(j),
        }
    }

    /// Materialize the eigenvector matrix.
    pub fn to_dense(&self) -> DMatrix<f64> {
        if let Eigenvectors::Dense(u) = &self.vectors {
            return u.clone();
        }
        let n = self.dim();
        let mut u = DMatrix::zeros(n, n);
        for j in 0..n {
            u.set_column(j, &nalgebra::DVector::from_vec(self.column(j)));
        }
        u
    }
}

/// Uniform chain of `n` oscillators at `k ε` for `k` in the symmetric range
/// `-(n-1)/2 ..= (n-1)/2` (shifted by one half for even `n`), each coupled to
/// the atom with `η`.
pub fn build_1d_hamiltonian(n: usize, epsilon: f64, eta: f64) -> Result<ArrowheadHamiltonian> {
    if n < 1 {
        return domain("need at least one oscillator");
    }
    if !(epsilon > 0.0) {
        return domain("oscillator spacing must be positive");
    }
    let half = (n as f64 - 1.0) / 2.0;
    let diag = (0..n).map(|i| (i as f64 - half) * epsilon).collect();
    ArrowheadHamiltonian::new(vec![0.0], diag, vec![vec![eta; n]])
}

/// The pseudo-1D model: oscillators at `k ε` for `1 <= |k| <= half_width`
/// (none on resonance), all coupled with `η`; `2 half_width + 1` states.
pub fn build_symmetric_1d_hamiltonian(half_width: usize, epsilon: f64, eta: f64) -> Result<ArrowheadHamiltonian> {
    if !(epsilon > 0.0) {
        return domain("oscillator spacing must be positive");
    }
    let modes = crate::model::ModeSet::uniform_1d(half_width, epsilon, eta)?;
    ArrowheadHamiltonian::single_atom(0.0, &modes)
}

fn check_dim(h: &ArrowheadHamiltonian, max_dim: usize) -> Result<()> {
    if h.dim() > max_dim {
        return Err(Error::SizeGuard { dim: h.dim(), limit: max_dim });
    }
    Ok(())
}

/// Single-atom arrowhead through its secular equation.
pub fn eigendecompose_arrowhead(h: &ArrowheadHamiltonian) -> Result<EigenDecomposition> {
    eigendecompose_arrowhead_capped(h, DEFAULT_MAX_DIM)
}

pub fn eigendecompose_arrowhead_capped(h: &ArrowheadHamiltonian, max_dim: usize) -> Result<EigenDecomposition> {
    if h.atoms() != 1 {
        return domain("arrowhead solver needs exactly one atom");
    }
    check_dim(h, max_dim)?;
    let s = secular::solve(h.head()[0], h.diag(), h.border(0))?;
    let atomic_rows = vec![s.vectors.head_row()];
    Ok(EigenDecomposition {
        eigenvalues: s.eigenvalues,
        vectors: Eigenvectors::Arrowhead(s.vectors),
        atoms: 1,
        atomic_rows,
        report: Some(s.report),
    })
}

/// Two-atom bordered arrowhead by two nested secular solves.
pub fn eigendecompose_bordered(h: &ArrowheadHamiltonian) -> Result<EigenDecomposition> {
    eigendecompose_bordered_capped(h, DEFAULT_MAX_DIM)
}

pub fn eigendecompose_bordered_capped(h: &ArrowheadHamiltonian, max_dim: usize) -> Result<EigenDecomposition> {
    if h.atoms() != 2 {
        return domain("bordered solver needs exactly two atoms");
    }
    check_dim(h, max_dim)?;
    let s = bordered::solve(h)?;
    let dim = h.dim();
    let atomic_rows = (0..2)
        .map(|i| {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            s.vectors.project(&e)
        })
        .collect();
    Ok(EigenDecomposition {
        eigenvalues: s.eigenvalues,
        vectors: Eigenvectors::Bordered(s.vectors),
        atoms: 2,
        atomic_rows,
        report: Some(s.report),
    })
}

/// Structured solver matching the number of atoms.
pub fn eigendecompose(h: &ArrowheadHamiltonian) -> Result<EigenDecomposition> {
    match h.atoms() {
        1 => eigendecompose_arrowhead(h),
        _ => eigendecompose_bordered(h),
    }
}

/// Dense reference decomposition from a general self-adjoint eigensolver.
pub fn dense_eig_oracle(h: &ArrowheadHamiltonian) -> Result<EigenDecomposition> {
    let (values, vectors) = dense::dense_eigh(h)?;
    EigenDecomposition::from_dense(values, vectors, h.atoms())
}
