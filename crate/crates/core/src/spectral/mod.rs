//! Exact eigendata for the model manifolds: special functions, spectrum
//! enumeration, and period integrals.

mod bessel;
mod legendre;
mod spectrum;

pub use bessel::bessel_j0;
pub use legendre::{legendre_p, spherical_y_l0};
pub use spectrum::{
    enumerate_spectrum, period_integral, EigenItem, EigenLabel, SpectrumTable, DEFAULT_ITEM_CAP,
};
