//! Denoising of bandlimited signals on the 2-sphere by minimum mean square
//! error filtering of their scale-discretized wavelet coefficients.
//!
//! The pipeline is spectral end to end:
//!
//! * [`harmonic`]: coefficients, Gauss-Legendre grids, exact transforms.
//! * [`wigner`]: Wigner-d/D functions and rotation of coefficient sets.
//! * [`bank`]: scale-discretized tiling functions and admissibility.
//! * [`xform`]: wavelet analysis and synthesis.
//! * [`filter`]: the optimal per-degree filter and its closed form for
//!   azimuthally symmetric wavelets.
//! * [`baselines`]: hard thresholding and Gauss-Weierstrass smoothing.
//! * [`stochastics`]: noise synthesis, covariance models, SNR.
//! * [`io`]: CSV coefficient, map and filter files.

pub mod baselines;
pub mod bank;
pub mod error;
pub mod filter;
pub mod harmonic;
pub mod io;
pub mod stochastics;
pub mod wigner;
pub mod xform;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use harmonic::{HarmonicCoeffs, SphereGrid, SphereMap};
