//! Noise synthesis, source fixtures and the SNR metric.
//!
//! Every Gaussian draw comes from a ChaCha8 stream keyed by `(seed, coefficient
//! index)` and is produced with the Marsaglia polar method, so a coefficient's
//! value depends only on the seed and its position, never on evaluation order.

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::filter::DegreeCovariance;
use crate::harmonic::{flat_index, HarmonicCoeffs};

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent seed from a master seed and a path of indices.
pub fn split_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(master), |acc, &p| mix(acc ^ mix(p)))
}

/// Standard normal draws from one ChaCha8 stream.
pub struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, spare: None }
    }

    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }
}

/// Unit-variance complex normal for coefficient `index` (real and imaginary parts `N(0, 1/2)`).
fn complex_normal(seed: u64, index: usize) -> Complex64 {
    let mut g = GaussianStream::new(seed, index as u64);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Complex64::new(g.next_normal() * h, g.next_normal() * h)
}

/// Real normal for coefficient `index`.
fn real_normal(seed: u64, index: usize) -> f64 {
    GaussianStream::new(seed, index as u64).next_normal()
}

/// Zero-mean Gaussian with per-coefficient variances `var[flat_index(l, m)]`.
/// For real fields `m = 0` draws are real and `m < 0` follows from
/// `z_l^{-m} = (-1)^m conj(z_l^m)`, so `E|z_l^m|² = var` for every `(l, m)`.
fn diagonal_gaussian(bandlimit: usize, var: &[f64], seed: u64, real_field: bool) -> HarmonicCoeffs {
    let mut out = HarmonicCoeffs::zeros(bandlimit);
    for l in 0..bandlimit {
        let li = l as isize;
        if real_field {
            let i0 = flat_index(l, 0);
            out.values_mut()[i0] = Complex64::new(var[i0].sqrt() * real_normal(seed, i0), 0.0);
            for m in 1..=li {
                let i = flat_index(l, m);
                let v = complex_normal(seed, i) * var[i].sqrt();
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                out.values_mut()[i] = v;
                out.values_mut()[flat_index(l, -m)] = v.conj() * sign;
            }
        } else {
            for m in -li..=li {
                let i = flat_index(l, m);
                out.values_mut()[i] = complex_normal(seed, i) * var[i].sqrt();
            }
        }
    }
    out
}

/// Noise covariance structure.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseKind {
    /// `σ² I`.
    White { sigma2: f64 },
    /// Independent coefficients with flat-indexed variances.
    Diagonal { variances: Vec<f64> },
    /// Correlated orders within each degree.
    FullBlock(DegreeCovariance),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub seed: u64,
    /// Draw conjugate-symmetric coefficients so the noise map is real.
    pub real_field: bool,
}

impl NoiseModel {
    pub fn white(sigma2: f64, seed: u64, real_field: bool) -> Self {
        Self {
            kind: NoiseKind::White { sigma2 },
            seed,
            real_field,
        }
    }

    /// Covariance of the coefficients drawn by [`sample_noise`].
    pub fn covariance(&self, bandlimit: usize) -> Result<DegreeCovariance> {
        match &self.kind {
            NoiseKind::White { sigma2 } => DegreeCovariance::white(bandlimit, *sigma2),
            NoiseKind::Diagonal { variances } => {
                check_len(variances, bandlimit)?;
                DegreeCovariance::diagonal(bandlimit, |l, m| variances[flat_index(l, m)])
            }
            NoiseKind::FullBlock(c) => Ok(c.clone()),
        }
    }
}

fn check_len(v: &[f64], bandlimit: usize) -> Result<()> {
    if v.len() != bandlimit * bandlimit {
        return Err(Error::DimensionMismatch(format!(
            "{} variances for bandlimit {bandlimit}",
            v.len()
        )));
    }
    Ok(())
}

fn check_variances(v: &[f64]) -> Result<()> {
    for (i, &x) in v.iter().enumerate() {
        if !(x >= 0.0) || !x.is_finite() {
            let (l, m) = crate::harmonic::degree_order(i);
            return Err(Error::NegativeVariance { l, m, value: x });
        }
    }
    Ok(())
}

/// Draws one noise realization with bandlimit `L`.
pub fn sample_noise(model: &NoiseModel, bandlimit: usize) -> Result<HarmonicCoeffs> {
    match &model.kind {
        NoiseKind::White { sigma2 } => {
            let var = vec![*sigma2; bandlimit * bandlimit];
            check_variances(&var)?;
            Ok(diagonal_gaussian(bandlimit, &var, model.seed, model.real_field))
        }
        NoiseKind::Diagonal { variances } => {
            check_len(variances, bandlimit)?;
            check_variances(variances)?;
            if model.real_field {
                for l in 0..bandlimit {
                    for m in 1..=l as isize {
                        let (a, b) = (variances[flat_index(l, m)], variances[flat_index(l, -m)]);
                        if a != b {
                            return Err(Error::InvalidInput(format!(
                                "real-field noise needs var(l, m) = var(l, -m); differs at l={l}, m={m}"
                            )));
                        }
                    }
                }
            }
            Ok(diagonal_gaussian(bandlimit, variances, model.seed, model.real_field))
        }
        NoiseKind::FullBlock(cov) => {
            if model.real_field {
                return Err(Error::UnsupportedMode(
                    "real-field sampling of full-block covariances",
                ));
            }
            if cov.bandlimit() != bandlimit {
                return Err(Error::BandlimitMismatch {
                    expected: bandlimit,
                    found: cov.bandlimit(),
                });
            }
            // revalidate: blocks may come from an unchecked constructor
            let cov = DegreeCovariance::new(cov.blocks().to_vec())?;
            let mut out = HarmonicCoeffs::zeros(bandlimit);
            for l in 0..bandlimit {
                let eig = SymmetricEigen::new(cov.block(l).clone());
                let w = DVector::from_fn(2 * l + 1, |i, _| {
                    let lam = eig.eigenvalues[i].max(0.0);
                    complex_normal(model.seed, l * l + i) * lam.sqrt()
                });
                let z = &eig.eigenvectors * w;
                out.degree_mut(l).copy_from_slice(z.as_slice());
            }
            Ok(out)
        }
    }
}

/// `σ² = 10^{-snr/10} Σ|s|² / L²`, the white-noise level giving the requested
/// expected input SNR.
pub fn sigma_from_input_snr(s: &HarmonicCoeffs, snr_in_db: f64) -> Result<f64> {
    let energy = s.norm_sqr();
    if energy == 0.0 {
        return Err(Error::UndefinedSnr);
    }
    let l = s.bandlimit() as f64;
    Ok(10f64.powf(-snr_in_db / 10.0) * energy / (l * l))
}

/// Rank-1 per-degree covariance `s_l s_l^H` of a single realization.
pub fn empirical_source_covariance(s: &HarmonicCoeffs) -> DegreeCovariance {
    DegreeCovariance::rank_one(s)
}

/// `20 log10(‖s‖ / ‖d - s‖)`, norms by Parseval. `+∞` when `d == s`.
pub fn snr_db(d: &HarmonicCoeffs, s: &HarmonicCoeffs) -> Result<f64> {
    if d.bandlimit() != s.bandlimit() {
        return Err(Error::BandlimitMismatch {
            expected: s.bandlimit(),
            found: d.bandlimit(),
        });
    }
    let signal = s.norm_sqr();
    if signal == 0.0 {
        return Err(Error::UndefinedSnr);
    }
    let err = (d - s).norm_sqr();
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (signal / err).log10())
}

/// Expected power law of a synthetic source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectrumLaw {
    Flat,
    /// `E|s_l^m|² ∝ (l + 1)^{-exponent}`.
    Red(f64),
}

impl SpectrumLaw {
    /// Unnormalized expected power per coefficient at degree `l`.
    pub fn power(&self, l: usize) -> f64 {
        match *self {
            Self::Flat => 1.0,
            Self::Red(e) => (l as f64 + 1.0).powf(-e),
        }
    }
}

impl std::str::FromStr for SpectrumLaw {
    type Err = Error;

    /// `flat` or `red(<exponent>)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "flat" {
            return Ok(Self::Flat);
        }
        if let Some(inner) = s.strip_prefix("red(").and_then(|r| r.strip_suffix(')')) {
            let e: f64 = inner
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad exponent in '{s}'")))?;
            return Ok(Self::Red(e));
        }
        Err(Error::InvalidInput(format!("unknown spectrum law '{s}'")))
    }
}

/// Real-field Gaussian source with the given power law, scaled to unit energy.
pub fn synthetic_source(bandlimit: usize, law: SpectrumLaw, seed: u64) -> Result<HarmonicCoeffs> {
    if bandlimit < 2 {
        return Err(Error::InvalidBandlimit {
            found: bandlimit,
            min: 2,
        });
    }
    let var: Vec<f64> = (0..bandlimit)
        .flat_map(|l| std::iter::repeat(law.power(l)).take(2 * l + 1))
        .collect();
    let s = diagonal_gaussian(bandlimit, &var, seed, true);
    let e = s.norm_sqr();
    Ok(s.scale(1.0 / e.sqrt()))
}
