use std::ops::{Add, AddAssign, Mul};

use num_complex::Complex64;
use num_traits::Zero;

/// Scalars the eigenbases can act on: real vectors (for coupling transforms)
/// and complex amplitudes.
pub trait Amp: Copy + Send + Sync + Zero + Add<Output = Self> + AddAssign + Mul<f64, Output = Self> {}

impl Amp for f64 {}
impl Amp for Complex64 {}
