//! Simulation of spontaneous emission restricted to the single-photon
//! subspace: one or two two-level atoms coupled to a finite set of field
//! oscillators.

pub mod arrowhead;
pub mod box3d;
pub mod dynamics;
pub mod error;
pub mod exact1d;
pub mod model;
pub mod observables;
pub mod sum;

pub use error::{Error, Result};
