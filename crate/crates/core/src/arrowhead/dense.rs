//! Dense symmetric eigensolver used as an independent test oracle.

use faer::{Mat, Side};
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::ArrowheadHamiltonian;

/// Largest dimension the oracle accepts.
pub const DENSE_LIMIT: usize = 2000;

/// Ascending eigenvalues and matching orthonormal eigenvector columns.
pub(crate) fn dense_eigh(h: &ArrowheadHamiltonian) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let dim = h.dim();
    if dim > DENSE_LIMIT {
        return Err(Error::SizeGuard { dim, limit: DENSE_LIMIT });
    }
    let dense = h.to_dense();
    let eig = Mat::<f64>::from_fn(dim, dim, |r, c| dense[(r, c)]).selfadjoint_eigendecomposition(Side::Lower);
    let (s, u) = (eig.s().column_vector(), eig.u());
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| s.read(a).total_cmp(&s.read(b)));
    let values = order.iter().map(|&i| s.read(i)).collect();
    let vectors = DMatrix::from_fn(dim, dim, |r, c| u.read(r, order[c]));
    Ok((values, vectors))
}
