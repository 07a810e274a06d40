//! Scale-discretized wavelet banks: harmonic tiling functions and
//! directionality weights.
//!
//! The tiling generators follow the smooth-bump construction
//!
//! ```text
//! s(t)    = exp(-1 / (1 - t²)) on (-1, 1)
//! s_λ(t)  = s(2λ(t - 1/λ)/(λ - 1) - 1)
//! k_λ(t)  = ∫_t^1 s_λ²(u)/u du / ∫_{1/λ}^1 s_λ²(u)/u du
//! κ_λ(t)  = sqrt(k_λ(t/λ) - k_λ(t)),   η_λ(t) = sqrt(k_λ(t))
//! ```
//!
//! with `κ_j(l) = κ_λ(l/λ^j)` and `η(l) = η_λ(l/λ^{j1})`. The sum
//! `η² + Σ_j κ_j²` telescopes to `k_λ(l/λ^{j2+1}) = 1` for every `l < L`.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::harmonic::{flat_index, HarmonicCoeffs};

const SIMPSON_TOL: f64 = 1e-13;

/// `8π² / (2l + 1)`, the squared norm of a Wigner-D function over SO(3).
#[inline]
pub fn wigner_norm(l: usize) -> f64 {
    8.0 * PI * PI / (2 * l + 1) as f64
}

fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// The cumulative generator `k_λ` with its normalization integral cached.
#[derive(Debug, Clone)]
struct Tiling {
    lambda: f64,
    norm: f64,
    cache: HashMap<u64, f64>,
}

impl Tiling {
    fn new(lambda: f64) -> Self {
        let lo = 1.0 / lambda;
        let norm = adaptive_simpson(&|u| Self::integrand(lambda, u), lo, 1.0, SIMPSON_TOL);
        Self {
            lambda,
            norm,
            cache: HashMap::new(),
        }
    }

    fn integrand(lambda: f64, u: f64) -> f64 {
        let s = bump(2.0 * lambda * (u - 1.0 / lambda) / (lambda - 1.0) - 1.0);
        s * s / u
    }

    fn k(&mut self, t: f64) -> f64 {
        let lo = 1.0 / self.lambda;
        if t <= lo {
            return 1.0;
        }
        if t >= 1.0 {
            return 0.0;
        }
        let lambda = self.lambda;
        let norm = self.norm;
        *self.cache.entry(t.to_bits()).or_insert_with(|| {
            adaptive_simpson(&|u| Self::integrand(lambda, u), t, 1.0, SIMPSON_TOL) / norm
        })
    }
}

/// Smallest `j` with `λ^j >= L - 1`.
pub fn max_scale(bandlimit: usize, lambda: f64) -> usize {
    let target = bandlimit.saturating_sub(1) as f64;
    let mut j = 0usize;
    while lambda.powi(j as i32) < target {
        j += 1;
    }
    j
}

/// Tiling values and directionality defining the analysis and synthesis kernels.
#[derive(Debug, Clone)]
pub struct WaveletBank {
    bandlimit: usize,
    lambda: f64,
    j1: usize,
    j2: usize,
    kappa: Vec<Vec<f64>>,
    eta: Vec<f64>,
    zeta: HarmonicCoeffs,
}

/// Builds the axisymmetric bank for bandlimit `L`, dilation `λ` and minimum scale `j1`.
pub fn build_bank(bandlimit: usize, lambda: f64, j1: usize) -> Result<WaveletBank> {
    WaveletBank::new(bandlimit, lambda, j1)
}

impl WaveletBank {
    pub fn new(bandlimit: usize, lambda: f64, j1: usize) -> Result<Self> {
        if bandlimit < 2 {
            return Err(Error::InvalidBandlimit {
                found: bandlimit,
                min: 2,
            });
        }
        if !(lambda > 1.0) || !lambda.is_finite() {
            return Err(Error::InvalidDilation(lambda));
        }
        let j2 = max_scale(bandlimit, lambda);
        if j1 > j2 {
            return Err(Error::InvalidScaleRange { j1, j2 });
        }
        let mut tiling = Tiling::new(lambda);
        // the same argument expression feeds neighbouring scales so the sum telescopes exactly
        let arg = |l: usize, j: usize| l as f64 / lambda.powi(j as i32);
        let kappa = (j1..=j2)
            .map(|j| {
                (0..bandlimit)
                    .map(|l| {
                        let v = tiling.k(arg(l, j + 1)) - tiling.k(arg(l, j));
                        v.max(0.0).sqrt()
                    })
                    .collect()
            })
            .collect();
        let eta = (0..bandlimit).map(|l| tiling.k(arg(l, j1)).sqrt()).collect();
        let zeta = HarmonicCoeffs::from_fn(bandlimit, |_, m| {
            if m == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Ok(Self {
            bandlimit,
            lambda,
            j1,
            j2,
            kappa,
            eta,
            zeta,
        })
    }

    /// Replaces the directionality weights `ζ_{l,m}`.
    ///
    /// Every degree with a nonzero row must have unit norm; all-zero rows are
    /// accepted and simply remove that degree from the wavelets.
    pub fn with_directionality(mut self, zeta: HarmonicCoeffs) -> Result<Self> {
        if zeta.bandlimit() != self.bandlimit {
            return Err(Error::BandlimitMismatch {
                expected: self.bandlimit,
                found: zeta.bandlimit(),
            });
        }
        for l in 0..self.bandlimit {
            let norm_sq: f64 = zeta.degree(l).iter().map(|v| v.norm_sqr()).sum();
            if norm_sq != 0.0 && (norm_sq - 1.0).abs() > 1e-10 {
                return Err(Error::NotUnitNorm { l, norm_sq });
            }
        }
        self.zeta = zeta;
        Ok(self)
    }

    /// Copy of the bank with scale `j` silenced. Admissibility no longer holds.
    pub fn with_scale_zeroed(mut self, j: usize) -> Result<Self> {
        let idx = self.scale_index(j)?;
        self.kappa[idx].iter_mut().for_each(|v| *v = 0.0);
        Ok(self)
    }

    fn scale_index(&self, j: usize) -> Result<usize> {
        if j < self.j1 || j > self.j2 {
            return Err(Error::ScaleOutOfRange {
                j,
                j1: self.j1,
                j2: self.j2,
            });
        }
        Ok(j - self.j1)
    }

    pub fn bandlimit(&self) -> usize {
        self.bandlimit
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn j1(&self) -> usize {
        self.j1
    }

    pub fn j2(&self) -> usize {
        self.j2
    }

    pub fn scales(&self) -> std::ops::RangeInclusive<usize> {
        self.j1..=self.j2
    }

    /// Tiling values `κ_j(l)`, `l < L`.
    pub fn kappa(&self, j: usize) -> Result<&[f64]> {
        Ok(&self.kappa[self.scale_index(j)?])
    }

    /// Scaling tiling values `η(l)`, `l < L`.
    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn zeta(&self) -> &HarmonicCoeffs {
        &self.zeta
    }

    /// True when every `ζ_{l,m}` with `m != 0` vanishes.
    pub fn is_axisymmetric(&self) -> bool {
        self.zeta
            .iter()
            .all(|(_, m, v)| m == 0 || v == Complex64::new(0.0, 0.0))
    }

    /// `(ψ_j)_l^m = κ_j(l) ζ_{l,m} / sqrt(8π²/(2l+1))`.
    pub fn wavelet_spectrum(&self, j: usize) -> Result<HarmonicCoeffs> {
        let kappa = self.kappa(j)?;
        Ok(HarmonicCoeffs::from_fn(self.bandlimit, |l, m| {
            self.zeta.values()[flat_index(l, m)] * (kappa[l] / wigner_norm(l).sqrt())
        }))
    }

    /// `(Φ)_l^0 = sqrt(2π / (8π²/(2l+1))) η(l)`, zero for `m != 0`.
    pub fn scaling_spectrum(&self) -> HarmonicCoeffs {
        HarmonicCoeffs::from_fn(self.bandlimit, |l, m| {
            if m == 0 {
                Complex64::new((2.0 * PI / wigner_norm(l)).sqrt() * self.eta[l], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Per-degree left side of the admissibility identity,
    /// `c_l ((1/2π)|Φ_l^0|² + Σ_j Σ_m |(ψ_j)_l^m|²)`.
    pub fn admissibility_profile(&self) -> Vec<f64> {
        let scaling = self.scaling_spectrum();
        let wavelets: Vec<HarmonicCoeffs> = self
            .scales()
            .map(|j| self.wavelet_spectrum(j).expect("scale in range"))
            .collect();
        (0..self.bandlimit)
            .map(|l| {
                let c = wigner_norm(l);
                let phi = scaling.values()[flat_index(l, 0)].norm_sqr() / (2.0 * PI);
                let psi: f64 = wavelets
                    .iter()
                    .map(|w| w.degree(l).iter().map(|v| v.norm_sqr()).sum::<f64>())
                    .sum();
                c * (phi + psi)
            })
            .collect()
    }

    /// Largest deviation of the admissibility identity from 1 over `l < L`.
    pub fn check_admissibility(&self) -> f64 {
        self.admissibility_profile()
            .into_iter()
            .map(|v| (v - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Free-function form of [`WaveletBank::check_admissibility`].
pub fn check_admissibility(bank: &WaveletBank) -> f64 {
    bank.check_admissibility()
}
