//! Secular-equation solver for a single arrowhead
//!
//! ```text
//!     [ alpha  z^T ]
//!     [ z      D   ]
//! ```
//!
//! Tiny couplings and coincident diagonal entries are deflated first. The
//! remaining poles interlace the eigenvalues, so every root has a guaranteed
//! bracket. Roots are stored as an offset from their nearest pole so that
//! the differences `lambda - d_k` entering the eigenvectors keep full
//! relative accuracy. Couplings are then recomputed from the converged roots
//! (Löwner formula), which makes the eigenvector columns orthogonal to
//! working precision.
//!
//! Eigenvectors are never stored densely; they are applied on the fly.

use rayon::prelude::*;

use super::amp::Amp;
use crate::error::{Error, Result};

/// Relative step on the pole offset at which a root counts as converged.
pub const ROOT_TOLERANCE: f64 = 1e-13;
/// Iteration cap per root.
pub const MAX_ITERATIONS: usize = 200;
/// Couplings below this multiple of the matrix scale are treated as zero.
const COUPLING_DEFLATION: f64 = 4.0 * f64::EPSILON;
/// Diagonal entries closer than this multiple of the matrix scale are merged.
const POLE_DEFLATION: f64 = 1e-14;

/// Diagnostics from one arrowhead solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SecularSolveReport {
    pub iterations: Vec<usize>,
    /// Largest final relative step over all roots.
    pub max_residual: f64,
    pub deflated: usize,
}

/// Oscillators sharing one diagonal value; `q` is an orthonormal basis
/// (row-major, `members.len()` square) whose first column is the direction
/// of their combined coupling.
#[derive(Debug, Clone)]
struct Cluster {
    members: Vec<usize>,
    q: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
enum Column {
    /// A reduced-basis unit vector.
    Unit(usize),
    /// Index into the secular root arrays.
    Secular(usize),
}

/// Matrix-free eigenvectors of one arrowhead. Index 0 is the head, indices
/// `1..dim` the diagonal entries in their original order.
#[derive(Debug, Clone)]
pub struct ArrowheadVectors {
    dim: usize,
    clusters: Vec<Cluster>,
    /// Reduced indices of the poles taking part in the secular equation.
    active: Vec<usize>,
    poles: Vec<f64>,
    zhat: Vec<f64>,
    /// Root j is `base[j] + offset[j]`, with `base` a pole value or zero.
    base: Vec<f64>,
    offset: Vec<f64>,
    scale: Vec<f64>,
    columns: Vec<Column>,
}

pub(crate) struct Solved {
    pub eigenvalues: Vec<f64>,
    pub vectors: ArrowheadVectors,
    pub report: SecularSolveReport,
}

pub(crate) fn solve(alpha: f64, diag: &[f64], z: &[f64]) -> Result<Solved> {
    let n = diag.len();
    let dim = n + 1;
    let znorm = z.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = diag.iter().fold(alpha.abs().max(znorm), |a, d| a.max(d.abs()));
    let scale = if scale == 0.0 { 1.0 } else { scale };

    // Deflate uncoupled oscillators, then merge coincident poles.
    let mut coupled: Vec<usize> = (0..n).filter(|&k| z[k].abs() > COUPLING_DEFLATION * scale).collect();
    coupled.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]).then(a.cmp(&b)));
    let mut deflated_units: Vec<(f64, usize)> =
        (0..n).filter(|&k| z[k].abs() <= COUPLING_DEFLATION * scale).map(|k| (diag[k], k + 1)).collect();

    let mut clusters = Vec::new();
    let mut active = Vec::new();
    let mut poles = Vec::new();
    let mut z_active = Vec::new();
    let mut i = 0;
    while i < coupled.len() {
        let mut j = i + 1;
        while j < coupled.len() && diag[coupled[j]] - diag[coupled[j - 1]] <= POLE_DEFLATION * scale {
            j += 1;
        }
        let group = &coupled[i..j];
        let pole = diag[group[0]];
        if group.len() == 1 {
            active.push(group[0] + 1);
            poles.push(pole);
            z_active.push(z[group[0]]);
        } else {
            let zs: Vec<f64> = group.iter().map(|&k| z[k]).collect();
            let (q, combined) = householder_basis(&zs);
            let members: Vec<usize> = group.iter().map(|&k| k + 1).collect();
            active.push(members[0]);
            poles.push(pole);
            z_active.push(combined);
            for &mem in &members[1..] {
                deflated_units.push((pole, mem));
            }
            clusters.push(Cluster { members, q });
        }
        i = j;
    }
    let deflated = deflated_units.len();

    let m = poles.len();
    let z2: Vec<f64> = z_active.iter().map(|x| x * x).collect();
    let mut base = Vec::with_capacity(m + 1);
    let mut offset = Vec::with_capacity(m + 1);
    let mut iterations = Vec::with_capacity(m + 1);
    let mut max_residual: f64 = 0.0;

    if m > 0 {
        let symmetric = is_mirror_symmetric(alpha, &poles, &z2);
        let first = if symmetric { m / 2 } else { 0 };
        let solved: Vec<Result<Root>> =
            (first..=m).into_par_iter().map(|j| solve_root(alpha, &poles, &z2, znorm, j)).collect();
        let mut roots = vec![Root::default(); m + 1];
        for (j, r) in (first..=m).zip(solved) {
            roots[j] = r?;
        }
        if symmetric {
            if m % 2 == 0 {
                // The middle root of a mirror-symmetric arrowhead is exactly zero.
                roots[m / 2] = Root { anchor: None, offset: 0.0, iterations: 0, residual: 0.0 };
            }
            for j in 0..first {
                let mirror = roots[m - j];
                roots[j] = Root {
                    anchor: mirror.anchor.map(|a| m - 1 - a),
                    offset: -mirror.offset,
                    iterations: mirror.iterations,
                    residual: mirror.residual,
                };
            }
        }
        for r in &roots {
            base.push(r.anchor.map_or(0.0, |a| poles[a]));
            offset.push(r.offset);
            iterations.push(r.iterations);
            max_residual = max_residual.max(r.residual);
        }
    }

    let zhat = lowner_couplings(&poles, &z_active, &base, &offset);
    let scale_col: Vec<f64> = (0..base.len())
        .into_par_iter()
        .map(|j| {
            let s: f64 = (0..m)
                .map(|k| {
                    let w = zhat[k] / ((base[j] - poles[k]) + offset[j]);
                    w * w
                })
                .sum();
            1.0 / (1.0 + s).sqrt()
        })
        .collect();

    let mut entries: Vec<(f64, Column)> = Vec::with_capacity(dim);
    if m == 0 {
        entries.push((alpha, Column::Unit(0)));
    }
    for j in 0..base.len() {
        entries.push((base[j] + offset[j], Column::Secular(j)));
    }
    for &(value, idx) in &deflated_units {
        entries.push((value, Column::Unit(idx)));
    }
    entries.sort_by(|a, b| a.0.total_cmp(&b.0));
    let eigenvalues = entries.iter().map(|e| e.0).collect();
    let columns = entries.into_iter().map(|e| e.1).collect();

    Ok(Solved {
        eigenvalues,
        vectors: ArrowheadVectors { dim, clusters, active, poles, zhat, base, offset, scale: scale_col, columns },
        report: SecularSolveReport { iterations, max_residual, deflated },
    })
}

/// Orthonormal basis whose first column is `z / |z|`, via a Householder
/// reflector. Returns the basis and the combined coupling `q_0 . z`.
fn householder_basis(z: &[f64]) -> (Vec<f64>, f64) {
    let s = z.len();
    let norm = z.iter().map(|x| x * x).sum::<f64>().sqrt();
    let u: Vec<f64> = z.iter().map(|x| x / norm).collect();
    // Reflect e_0 onto sign(u_0) u, avoiding cancellation in e_0 - u.
    let sign = if u[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut w: Vec<f64> = u.iter().map(|x| -sign * x).collect();
    w[0] += 1.0;
    let wn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut q = vec![0.0; s * s];
    for r in 0..s {
        for c in 0..s {
            let id = if r == c { 1.0 } else { 0.0 };
            q[r * s + c] = if wn == 0.0 { id } else { id - 2.0 * w[r] * w[c] / (wn * wn) };
        }
    }
    // First column is sign * u; the combined coupling is sign * |z|.
    (q, sign * norm)
}

fn is_mirror_symmetric(alpha: f64, poles: &[f64], z2: &[f64]) -> bool {
    let m = poles.len();
    alpha == 0.0 && (0..m).all(|i| poles[i] == -poles[m - 1 - i] && z2[i] == z2[m - 1 - i])
}

#[derive(Debug, Clone, Copy, Default)]
struct Root {
    anchor: Option<usize>,
    offset: f64,
    iterations: usize,
    residual: f64,
}

/// Secular function at `poles[a] + tau`, split into the anchor pole term
/// and the smooth remainder: returns (remainder, remainder derivative).
fn remainder(alpha: f64, poles: &[f64], z2: &[f64], a: usize, tau: f64) -> (f64, f64) {
    let pa = poles[a];
    let mut value = (pa - alpha) + tau;
    let mut deriv = 1.0;
    for k in 0..poles.len() {
        if k == a {
            continue;
        }
        let d = (pa - poles[k]) + tau;
        let t = z2[k] / d;
        value -= t;
        deriv += t / d;
    }
    (value, deriv)
}

/// Root `j` of the secular equation: `j = 0` lies left of every pole,
/// `j = m` right of every pole, otherwise in `(poles[j-1], poles[j])`.
fn solve_root(alpha: f64, poles: &[f64], z2: &[f64], znorm: f64, j: usize) -> Result<Root> {
    let m = poles.len();
    let g = |a: usize, tau: f64| {
        let (r, _) = remainder(alpha, poles, z2, a, tau);
        r - z2[a] / tau
    };

    // (anchor, lo, hi, start) with the root in (lo, hi) relative to the anchor.
    let (anchor, mut lo, mut hi) = if j == 0 {
        let mut lo = (alpha.min(poles[0]) - poles[0]) - znorm;
        if !(lo < 0.0) {
            lo = -znorm.max(f64::MIN_POSITIVE);
        }
        while g(0, lo) > 0.0 {
            lo *= 2.0;
        }
        (0, lo, 0.0)
    } else if j == m {
        let mut hi = (alpha.max(poles[m - 1]) - poles[m - 1]) + znorm;
        if !(hi > 0.0) {
            hi = znorm.max(f64::MIN_POSITIVE);
        }
        while g(m - 1, hi) < 0.0 {
            hi *= 2.0;
        }
        (m - 1, 0.0, hi)
    } else {
        let gap = poles[j] - poles[j - 1];
        if g(j - 1, 0.5 * gap) >= 0.0 {
            (j - 1, 0.0, 0.5 * gap)
        } else {
            (j, -0.5 * gap, 0.0)
        }
    };
    let bracket = (poles[anchor] + lo, poles[anchor] + hi);
    let positive = hi > 0.0;
    let za2 = z2[anchor];

    let mut tau = if positive { hi } else { lo };
    for it in 1..=MAX_ITERATIONS {
        let (r, dr) = remainder(alpha, poles, z2, anchor, tau);
        let value = r - za2 / tau;
        if value == 0.0 {
            return Ok(Root { anchor: Some(anchor), offset: tau, iterations: it, residual: 0.0 });
        }
        if value < 0.0 {
            lo = tau;
        } else {
            hi = tau;
        }
        // Model: r + dr (t - tau) - za2 / t = 0, i.e. dr t^2 + b t - za2 = 0.
        let b = r - dr * tau;
        let disc = (b * b + 4.0 * dr * za2).sqrt();
        let mut next = if positive {
            if b <= 0.0 {
                (disc - b) / (2.0 * dr)
            } else {
                2.0 * za2 / (b + disc)
            }
        } else if b >= 0.0 {
            -(b + disc) / (2.0 * dr)
        } else {
            -2.0 * za2 / (disc - b)
        };
        let inside = next >= lo && next <= hi;
        let step = (next - tau).abs();
        let converged = inside && step <= ROOT_TOLERANCE * next.abs();
        if !converged && !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - tau).abs();
        if converged || hi - lo <= 4.0 * f64::EPSILON * next.abs() {
            let residual = if next == 0.0 { 0.0 } else { step / next.abs() };
            return Ok(Root {
                anchor: Some(anchor),
                offset: next,
                iterations: it,
                residual: residual.min(ROOT_TOLERANCE),
            });
        }
        tau = next;
    }
    Err(Error::Convergence { lo: bracket.0, hi: bracket.1, iterations: MAX_ITERATIONS })
}

/// Couplings for which the computed roots are exact eigenvalues:
/// `zhat_i^2 = prod_j |lambda_j - d_i| / prod_{k != i} |d_k - d_i|`,
/// evaluated with the interlacing pairing so every factor stays near one.
fn lowner_couplings(poles: &[f64], z: &[f64], base: &[f64], offset: &[f64]) -> Vec<f64> {
    let m = poles.len();
    (0..m)
        .into_par_iter()
        .map(|i| {
            let pi = poles[i];
            let diff = |j: usize| ((base[j] - pi) + offset[j]).abs();
            let mut prod = diff(i) * diff(i + 1);
            for j in 0..i {
                prod *= diff(j) / (pi - poles[j]);
            }
            for j in i + 1..m {
                prod *= diff(j + 1) / (poles[j] - pi);
            }
            prod.sqrt().copysign(z[i])
        })
        .collect()
}

impl ArrowheadVectors {
    pub fn dim(&self) -> usize {
        self.dim
    }

    fn diff(&self, j: usize, k: usize) -> f64 {
        (self.base[j] - self.poles[k]) + self.offset[j]
    }

    /// Reduced coordinates: apply the transpose of the cluster rotations.
    fn reduce<T: Amp>(&self, x: &[T]) -> Vec<T> {
        let mut y = x.to_vec();
        for c in &self.clusters {
            let s = c.members.len();
            for col in 0..s {
                let mut acc = T::zero();
                for row in 0..s {
                    acc += x[c.members[row]] * c.q[row * s + col];
                }
                y[c.members[col]] = acc;
            }
        }
        y
    }

    fn unreduce<T: Amp>(&self, y: &[T]) -> Vec<T> {
        let mut x = y.to_vec();
        for c in &self.clusters {
            let s = c.members.len();
            for row in 0..s {
                let mut acc = T::zero();
                for col in 0..s {
                    acc += y[c.members[col]] * c.q[row * s + col];
                }
                x[c.members[row]] = acc;
            }
        }
        x
    }

    /// Coefficients `U^T x`.
    pub fn project<T: Amp>(&self, x: &[T]) -> Vec<T> {
        let y = self.reduce(x);
        let ya: Vec<T> = self.active.iter().map(|&r| y[r]).collect();
        self.columns
            .par_iter()
            .map(|col| match *col {
                Column::Unit(r) => y[r],
                Column::Secular(j) => {
                    let mut acc = y[0];
                    for k in 0..self.poles.len() {
                        acc += ya[k] * (self.zhat[k] / self.diff(j, k));
                    }
                    acc * self.scale[j]
                }
            })
            .collect()
    }

    /// Site vector `U c`.
    pub fn expand<T: Amp>(&self, c: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.dim];
        let mut secular = vec![T::zero(); self.base.len()];
        for (col, &cj) in self.columns.iter().zip(c) {
            match *col {
                Column::Unit(r) => y[r] += cj,
                Column::Secular(j) => {
                    let w = cj * self.scale[j];
                    secular[j] = w;
                    y[0] += w;
                }
            }
        }
        let osc: Vec<T> = (0..self.poles.len())
            .into_par_iter()
            .map(|k| {
                let mut acc = T::zero();
                for (j, &w) in secular.iter().enumerate() {
                    acc += w * (1.0 / self.diff(j, k));
                }
                acc * self.zhat[k]
            })
            .collect();
        for (k, v) in osc.into_iter().enumerate() {
            y[self.active[k]] += v;
        }
        self.unreduce(&y)
    }

    /// Head component of every eigenvector, in column order.
    pub fn head_row(&self) -> Vec<f64> {
        self.columns
            .iter()
            .map(|col| match *col {
                Column::Unit(r) => {
                    if r == 0 {
                        1.0
                    } else {
                        0.0
                    }
                }
                Column::Secular(j) => self.scale[j],
            })
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        match self.columns[j] {
            Column::Unit(r) => y[r] = 1.0,
            Column::Secular(s) => {
                y[0] = self.scale[s];
                for k in 0..self.poles.len() {
                    y[self.active[k]] = self.scale[s] * self.zhat[k] / self.diff(s, k);
                }
            }
        }
        self.unreduce(&y)
    }
}
