//! Spherical harmonic coefficients, sampling grids and exact transforms for
//! bandlimited signals.
//!
//! Harmonics are orthonormal and complex, with the Condon-Shortley phase:
//! `Y_1^0(θ, φ) = sqrt(3 / 4π) cos θ`. Coefficients are ordered by the flat
//! index `l² + l + m` everywhere, file formats included.

mod coeffs;
mod grid;
pub mod legendre;
mod sht;

pub use coeffs::{degree_order, flat_index, HarmonicCoeffs};
pub use grid::{gauss_legendre_rule, make_gauss_legendre_grid, RingRule, SphereGrid, SphereMap};
pub use sht::{forward_sht, inverse_sht, ylm, ShtPlan};
