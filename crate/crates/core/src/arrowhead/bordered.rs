//! Two-atom (bordered) arrowheads, reduced to two nested single arrowheads.
//!
//! The atomic pair is rotated so that one combination carries the dominant
//! coupling direction. That combination plus the oscillators forms a plain
//! arrowhead. The other combination then couples to each of its eigenvectors
//! through the rotated head off-diagonal and the residual couplings, which is
//! again an arrowhead, this time over the first stage's eigenvalues.

use super::amp::Amp;
use super::secular::{self, ArrowheadVectors, SecularSolveReport};
use crate::error::Result;
use crate::model::ArrowheadHamiltonian;

#[derive(Debug, Clone)]
pub struct BorderedVectors {
    cos: f64,
    sin: f64,
    inner: ArrowheadVectors,
    outer: ArrowheadVectors,
}

pub(crate) struct SolvedBordered {
    pub eigenvalues: Vec<f64>,
    pub vectors: BorderedVectors,
    pub report: SecularSolveReport,
}

/// Rotation (cos, sin) whose first combination `cos e1 + sin e2` carries the
/// principal direction of the two coupling rows.
fn principal_rotation(b1: &[f64], b2: &[f64]) -> (f64, f64) {
    let a: f64 = b1.iter().map(|x| x * x).sum();
    let d: f64 = b2.iter().map(|x| x * x).sum();
    let b: f64 = b1.iter().zip(b2).map(|(x, y)| x * y).sum();
    if a == d && b != 0.0 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        return (s, s.copysign(b));
    }
    let phi = 0.5 * (2.0 * b).atan2(a - d);
    (phi.cos(), phi.sin())
}

pub(crate) fn solve(h: &ArrowheadHamiltonian) -> Result<SolvedBordered> {
    let (b1, b2) = (h.border(0), h.border(1));
    let (c, s) = principal_rotation(b1, b2);
    let (h11, h12, h22) = (h.head_entry(0, 0), h.head_entry(0, 1), h.head_entry(1, 1));
    let h_cc = c * c * h11 + 2.0 * c * s * h12 + s * s * h22;
    let h_rr = s * s * h11 - 2.0 * c * s * h12 + c * c * h22;
    let h_cr = c * s * (h22 - h11) + (c * c - s * s) * h12;
    let b_c: Vec<f64> = b1.iter().zip(b2).map(|(x, y)| c * x + s * y).collect();
    let b_r: Vec<f64> = b1.iter().zip(b2).map(|(x, y)| -s * x + c * y).collect();

    let first = secular::solve(h_cc, h.diag(), &b_c)?;
    let mut residual = Vec::with_capacity(b_r.len() + 1);
    residual.push(h_cr);
    residual.extend_from_slice(&b_r);
    let w = first.vectors.project(&residual);
    let second = secular::solve(h_rr, &first.eigenvalues, &w)?;

    let mut iterations = first.report.iterations;
    iterations.extend(second.report.iterations);
    let report = SecularSolveReport {
        iterations,
        max_residual: first.report.max_residual.max(second.report.max_residual),
        deflated: first.report.deflated + second.report.deflated,
    };
    Ok(SolvedBordered {
        eigenvalues: second.eigenvalues,
        vectors: BorderedVectors { cos: c, sin: s, inner: first.vectors, outer: second.vectors },
        report,
    })
}

impl BorderedVectors {
    pub fn dim(&self) -> usize {
        self.outer.dim() + 1
    }

    /// Site vector -> outer-stage coordinates [r, inner eigenvectors...].
    fn to_outer<T: Amp>(&self, x: &[T]) -> Vec<T> {
        let (c, s) = (self.cos, self.sin);
        let mut inner_site = Vec::with_capacity(x.len() - 1);
        inner_site.push(x[0] * c + x[1] * s);
        inner_site.extend_from_slice(&x[2..]);
        let mut y = Vec::with_capacity(x.len() - 1);
        y.push(x[0] * (-s) + x[1] * c);
        y.extend(self.inner.project(&inner_site));
        y
    }

    fn unfold_outer<T: Amp>(&self, y: &[T]) -> Vec<T> {
        let (c, s) = (self.cos, self.sin);
        let inner_site = self.inner.expand(&y[1..]);
        let mut x = Vec::with_capacity(y.len() + 1);
        x.push(inner_site[0] * c + y[0] * (-s));
        x.push(inner_site[0] * s + y[0] * c);
        x.extend_from_slice(&inner_site[1..]);
        x
    }

    pub fn project<T: Amp>(&self, x: &[T]) -> Vec<T> {
        self.outer.project(&self.to_outer(x))
    }

    pub fn expand<T: Amp>(&self, c: &[T]) -> Vec<T> {
        self.unfold_outer(&self.outer.expand(c))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.unfold_outer(&self.outer.column(j))
    }
}
