//! Numerical laboratory for two-term asymptotics of period-integral counting
//! functions on model geometries.
//!
//! The spectral side enumerates exact eigendata and builds the counting
//! function N(lambda) with Tauberian smoothings; the dynamical side computes
//! conormal geodesic returns, density Jacobians, Maslov indices, the loop
//! invariants q(t), and the oscillating correction Q(lambda). The two sides
//! are built independently so they can be cross-checked.

pub mod config;
pub mod counting;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod num;
pub mod par;
pub mod spectral;

pub use error::{Error, Result};
pub use nalgebra;
pub use par::Threads;
