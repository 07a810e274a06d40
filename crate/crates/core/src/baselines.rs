//! Reference denoisers: hard thresholding of wavelet coefficient maps and
//! Gauss-Weierstrass kernel smoothing (weighted-SPHARM).

use num_complex::Complex64;

use crate::bank::WaveletBank;
use crate::error::{Error, Result};
use crate::harmonic::{forward_sht, inverse_sht, ylm, HarmonicCoeffs, SphereGrid, SphereMap};
use crate::xform::{analyze, synthesize, WaveletCoefficients};
use std::sync::Arc;

/// Threshold `multiplier · σ_j` with `σ_j² = σ² Σ_l |(ψ_j)_l^0|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPolicy {
    multiplier: f64,
    sigma_sq: f64,
}

impl ThresholdPolicy {
    pub fn new(multiplier: f64, sigma_sq: f64) -> Result<Self> {
        if !(multiplier > 0.0) {
            return Err(Error::InvalidInput(format!(
                "threshold multiplier must be positive, got {multiplier}"
            )));
        }
        if !(sigma_sq >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "noise variance must be non-negative, got {sigma_sq}"
            )));
        }
        Ok(Self {
            multiplier,
            sigma_sq,
        })
    }

    /// The customary `3σ_j` policy.
    pub fn three_sigma(sigma_sq: f64) -> Result<Self> {
        Self::new(3.0, sigma_sq)
    }

    pub fn multiplier(&self) -> f64 {
        self.multiplier
    }

    pub fn sigma_sq(&self) -> f64 {
        self.sigma_sq
    }
}

/// Noise variance of the scale-`j` wavelet coefficient map for white noise
/// of spectral variance `σ²`.
pub fn scale_noise_variance(bank: &WaveletBank, j: usize, sigma_sq: f64) -> Result<f64> {
    if !bank.is_axisymmetric() {
        return Err(Error::UnsupportedMode(
            "per-scale noise variance needs an axisymmetric bank",
        ));
    }
    let psi = bank.wavelet_spectrum(j)?;
    let sum: f64 = (0..bank.bandlimit())
        .map(|l| psi.get(l, 0).map(|v| v.norm_sqr()))
        .sum::<Result<f64>>()?;
    Ok(sigma_sq * sum)
}

/// Zeroes samples below `threshold`: compares the real part when `real_field`,
/// the modulus otherwise.
pub fn threshold_map(map: &SphereMap, threshold: f64, real_field: bool) -> SphereMap {
    let mut out = map.clone();
    for v in out.samples_mut() {
        let size = if real_field { v.re.abs() } else { v.norm() };
        if size < threshold {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    out
}

/// Hard thresholding in the wavelet domain. Each scale's coefficients are
/// sampled on `grid`, thresholded and transformed back; the scaling
/// coefficients are kept.
pub fn hard_threshold_denoise(
    f: &HarmonicCoeffs,
    bank: &Arc<WaveletBank>,
    policy: &ThresholdPolicy,
    grid: &SphereGrid,
) -> Result<HarmonicCoeffs> {
    let bl = bank.bandlimit();
    grid.check_bandlimit(bl)?;
    let real_field = f.is_real_field();
    let mut dec = analyze(f, bank)?;
    for j in bank.scales() {
        let threshold = policy.multiplier * scale_noise_variance(bank, j, policy.sigma_sq)?.sqrt();
        let WaveletCoefficients::Sphere(w) = dec.wavelet_mut(j)? else {
            return Err(Error::UnsupportedMode("hard thresholding needs an axisymmetric bank"));
        };
        let map = threshold_map(&inverse_sht(w, grid)?, threshold, real_field);
        *w = forward_sht(&map, bl)?;
    }
    synthesize(&dec)
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::KappaOutOfRange(kappa));
    }
    Ok(())
}

/// Weighted-SPHARM estimate: degree `l` attenuated by `exp(-l(l+1)κ)`.
pub fn gwks_denoise(f: &HarmonicCoeffs, kappa: f64) -> Result<HarmonicCoeffs> {
    check_kappa(kappa)?;
    let mut out = f.clone();
    for l in 0..f.bandlimit() {
        let g = (-((l * (l + 1)) as f64) * kappa).exp();
        out.degree_mut(l).iter_mut().for_each(|v| *v *= g);
    }
    Ok(out)
}

/// `K(x, y) = Σ_{l<L} Σ_m exp(-l(l+1)κ) Y_l^m(x) conj(Y_l^m(y))`, points as `(θ, φ)`.
pub fn gw_kernel(x: (f64, f64), y: (f64, f64), kappa: f64, bandlimit: usize) -> Result<Complex64> {
    check_kappa(kappa)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for l in 0..bandlimit {
        let g = (-((l * (l + 1)) as f64) * kappa).exp();
        let li = l as isize;
        for m in -li..=li {
            acc += ylm(l, m, x.0, x.1)? * ylm(l, m, y.0, y.1)?.conj() * g;
        }
    }
    Ok(acc)
}

/// `κ = 0` followed by 17 logarithmically spaced values from `1e-5` to `1`.
pub fn default_kappa_grid() -> Vec<f64> {
    std::iter::once(0.0)
        .chain((0..17).map(|k| 10f64.powf(-5.0 + 5.0 * k as f64 / 16.0)))
        .collect()
}
