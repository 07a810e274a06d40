//! Minimum mean square error filtering of wavelet coefficients.
//!
//! For a noisy observation `f = s + z` with per-degree covariance blocks
//! `C^s_l` and `C^z_l`, the optimal filter `Ξ` acts on the wavelet
//! coefficients of `f` as `W~ = c_l Ξ_l W` (matrix product over the order
//! index) and solves, row by row,
//!
//! ```text
//! Σ_k Ξ_{m,k} c_l (C^s + C^z)_{k,k'} = C^s_{m,k'}
//! ```
//!
//! i.e. `c_l Ξ_l = C^s_l (C^s_l + C^z_l)^{-1}`. The system has no scale
//! dependence, so a single set of blocks serves every scale. For diagonal
//! covariances it collapses to the Wiener gains `C^s/(C^s + C^z)`.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::bank::{wigner_norm, WaveletBank};
use crate::error::{Error, Result};
use crate::harmonic::{degree_order, HarmonicCoeffs};
use crate::xform::{analyze, synthesize, WaveletCoefficients, WaveletDecomposition};

const HERMITIAN_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;
const PIVOT_RATIO: f64 = 1e-12;
const PINV_CUTOFF: f64 = 1e-12;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Same-degree covariance blocks `C_{lm,lm'}`, one `(2l+1)×(2l+1)` Hermitian
/// positive semi-definite matrix per degree.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeCovariance {
    bandlimit: usize,
    blocks: Vec<DMatrix<Complex64>>,
}

fn block_scale(b: &DMatrix<Complex64>) -> f64 {
    b.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn is_diagonal(b: &DMatrix<Complex64>) -> bool {
    let n = b.nrows();
    (0..n).all(|i| (0..n).all(|k| i == k || b[(i, k)] == zero()))
}

impl DegreeCovariance {
    /// Validates shapes, Hermitian symmetry (`1e-12` relative to the largest
    /// entry) and positive semi-definiteness (`-1e-10`, same scaling).
    pub fn new(blocks: Vec<DMatrix<Complex64>>) -> Result<Self> {
        for (l, b) in blocks.iter().enumerate() {
            let n = 2 * l + 1;
            if b.nrows() != n || b.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "degree {l} block is {}x{}, expected {n}x{n}",
                    b.nrows(),
                    b.ncols()
                )));
            }
            let scale = block_scale(b).max(f64::MIN_POSITIVE);
            if !b.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite covariance at degree {l}")));
            }
            if is_diagonal(b) {
                for i in 0..n {
                    let v = b[(i, i)];
                    if v.im.abs() > HERMITIAN_TOL * scale {
                        return Err(Error::NotHermitian {
                            l,
                            deviation: v.im.abs() / scale,
                        });
                    }
                    if v.re < -PSD_TOL * scale {
                        return Err(Error::NotPsd { l, eigenvalue: v.re });
                    }
                }
                continue;
            }
            let deviation = (b - b.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max) / scale;
            if deviation > HERMITIAN_TOL {
                return Err(Error::NotHermitian { l, deviation });
            }
            let eig = SymmetricEigen::new(b.clone()).eigenvalues;
            let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
            if min < -PSD_TOL * scale {
                return Err(Error::NotPsd { l, eigenvalue: min });
            }
        }
        Ok(Self {
            bandlimit: blocks.len(),
            blocks,
        })
    }

    /// Diagonal covariance with variances `var(l, m)`.
    pub fn diagonal(bandlimit: usize, mut var: impl FnMut(usize, isize) -> f64) -> Result<Self> {
        let mut blocks = Vec::with_capacity(bandlimit);
        for l in 0..bandlimit {
            let li = l as isize;
            let mut b = DMatrix::zeros(2 * l + 1, 2 * l + 1);
            for m in -li..=li {
                let v = var(l, m);
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::NegativeVariance { l, m, value: v });
                }
                let i = (m + li) as usize;
                b[(i, i)] = Complex64::new(v, 0.0);
            }
            blocks.push(b);
        }
        Ok(Self { bandlimit, blocks })
    }

    /// White noise, `σ² I` in every degree.
    pub fn white(bandlimit: usize, sigma2: f64) -> Result<Self> {
        Self::diagonal(bandlimit, |_, _| sigma2)
    }

    /// Empirical covariance of a single realization, `s_l s_l^H` per degree.
    pub fn rank_one(s: &HarmonicCoeffs) -> Self {
        let blocks = (0..s.bandlimit())
            .map(|l| {
                let v = nalgebra::DVector::from_column_slice(s.degree(l));
                &v * v.adjoint()
            })
            .collect();
        Self {
            bandlimit: s.bandlimit(),
            blocks,
        }
    }

    pub fn bandlimit(&self) -> usize {
        self.bandlimit
    }

    pub fn block(&self, l: usize) -> &DMatrix<Complex64> {
        &self.blocks[l]
    }

    pub fn blocks(&self) -> &[DMatrix<Complex64>] {
        &self.blocks
    }

    /// Diagonal entries `C_{lm,lm}`, flat-indexed.
    pub fn diagonal_values(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .flat_map(|b| (0..b.nrows()).map(move |i| b[(i, i)].re))
            .collect()
    }

    pub fn is_diagonal(&self) -> bool {
        self.blocks.iter().all(is_diagonal)
    }
}

/// Filter blocks per scale. Blocks are stored as `Ξ_l`, so the action on
/// wavelet coefficients is `c_l Ξ_l`.
#[derive(Debug, Clone)]
pub struct FilterSpectrum {
    bandlimit: usize,
    j1: usize,
    per_scale: Vec<Arc<Vec<DMatrix<Complex64>>>>,
    scaling_gains: Option<Vec<f64>>,
}

impl FilterSpectrum {
    /// One set of degree blocks shared by all scales `j1..=j2`.
    pub fn shared(j1: usize, j2: usize, blocks: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if j1 > j2 {
            return Err(Error::InvalidScaleRange { j1, j2 });
        }
        for (l, b) in blocks.iter().enumerate() {
            if b.nrows() != 2 * l + 1 || b.ncols() != 2 * l + 1 {
                return Err(Error::DimensionMismatch(format!("filter block at degree {l}")));
            }
        }
        let bandlimit = blocks.len();
        let shared = Arc::new(blocks);
        Ok(Self {
            bandlimit,
            j1,
            per_scale: (j1..=j2).map(|_| shared.clone()).collect(),
            scaling_gains: None,
        })
    }

    /// Diagonal filter `Ξ_{m,m} = g_{lm}/c_l` from flat-indexed gains.
    pub fn from_gains(bandlimit: usize, j1: usize, j2: usize, gains: &[f64]) -> Result<Self> {
        if gains.len() != bandlimit * bandlimit {
            return Err(Error::DimensionMismatch(format!(
                "{} gains for bandlimit {bandlimit}",
                gains.len()
            )));
        }
        let blocks = (0..bandlimit)
            .map(|l| {
                let n = 2 * l + 1;
                let c = wigner_norm(l);
                let o = l * l;
                DMatrix::from_fn(n, n, |i, k| {
                    if i == k {
                        Complex64::new(gains[o + i] / c, 0.0)
                    } else {
                        zero()
                    }
                })
            })
            .collect();
        Self::shared(j1, j2, blocks)
    }

    /// Applies flat-indexed gains to the scaling coefficients as well.
    pub fn with_scaling_gains(mut self, gains: Vec<f64>) -> Result<Self> {
        if gains.len() != self.bandlimit * self.bandlimit {
            return Err(Error::DimensionMismatch("scaling gains".into()));
        }
        self.scaling_gains = Some(gains);
        Ok(self)
    }

    pub fn bandlimit(&self) -> usize {
        self.bandlimit
    }

    pub fn j1(&self) -> usize {
        self.j1
    }

    pub fn j2(&self) -> usize {
        self.j1 + self.per_scale.len() - 1
    }

    pub fn scaling_gains(&self) -> Option<&[f64]> {
        self.scaling_gains.as_deref()
    }

    /// Degree blocks `Ξ_l` at scale `j`.
    pub fn coeffs(&self, j: usize) -> Result<&[DMatrix<Complex64>]> {
        if j < self.j1 || j > self.j2() {
            return Err(Error::ScaleOutOfRange {
                j,
                j1: self.j1,
                j2: self.j2(),
            });
        }
        Ok(&self.per_scale[j - self.j1])
    }

    /// True when every scale refers to the same block storage.
    pub fn is_scale_independent(&self) -> bool {
        self.per_scale.windows(2).all(|w| Arc::ptr_eq(&w[0], &w[1]))
    }

    /// Mutable blocks at scale `j`; the scale gets its own copy first.
    pub fn coeffs_mut(&mut self, j: usize) -> Result<&mut Vec<DMatrix<Complex64>>> {
        self.coeffs(j)?;
        Ok(Arc::make_mut(&mut self.per_scale[j - self.j1]))
    }
}

fn check_pair(cs: &DegreeCovariance, cz: &DegreeCovariance) -> Result<()> {
    if cs.bandlimit != cz.bandlimit {
        return Err(Error::BandlimitMismatch {
            expected: cs.bandlimit,
            found: cz.bandlimit,
        });
    }
    Ok(())
}

/// `A^+ B` for Hermitian PSD `A`: Cholesky when well conditioned, otherwise a
/// minimum-norm solution from the eigendecomposition with relative cutoff.
fn hermitian_solve(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    if let Some(chol) = Cholesky::new(a.clone()) {
        let d: Vec<f64> = chol.l_dirty().diagonal().iter().map(|v| v.norm_sqr()).collect();
        let max = d.iter().cloned().fold(0.0, f64::max);
        let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
        if max > 0.0 && min / max >= PIVOT_RATIO {
            return chol.solve(b);
        }
    }
    let eig = SymmetricEigen::new(a.clone());
    let max = eig.eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let n = a.nrows();
    let inv = DMatrix::from_fn(n, n, |i, k| {
        if i == k {
            let v = eig.eigenvalues[i];
            if max > 0.0 && v > PINV_CUTOFF * max {
                Complex64::new(1.0 / v, 0.0)
            } else {
                zero()
            }
        } else {
            zero()
        }
    });
    &eig.eigenvectors * inv * eig.eigenvectors.adjoint() * b
}

/// Solves the normal equations per degree for the scales `j1..=j2`.
pub fn solve_filter(
    cs: &DegreeCovariance,
    cz: &DegreeCovariance,
    j1: usize,
    j2: usize,
) -> Result<FilterSpectrum> {
    check_pair(cs, cz)?;
    let blocks = (0..cs.bandlimit)
        .map(|l| {
            let c = wigner_norm(l);
            let a = (&cs.blocks[l] + &cz.blocks[l]) * Complex64::new(c, 0.0);
            // Ξ A = C^s  <=>  A Ξ^H = C^s, with A and C^s Hermitian
            hermitian_solve(&a, &cs.blocks[l]).adjoint()
        })
        .collect();
    FilterSpectrum::shared(j1, j2, blocks)
}

/// Wiener gains `C^s/(C^s + C^z)` from flat-indexed variances; `0/0` gives 0.
pub fn wiener_axisym_gains(cs: &[f64], cz: &[f64]) -> Result<Vec<f64>> {
    if cs.len() != cz.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} signal and {} noise variances",
            cs.len(),
            cz.len()
        )));
    }
    cs.iter()
        .zip(cz)
        .enumerate()
        .map(|(i, (&s, &z))| {
            for v in [s, z] {
                if !(v >= 0.0) {
                    let (l, m) = degree_order(i);
                    return Err(Error::NegativeVariance { l, m, value: v });
                }
            }
            Ok(if s + z > 0.0 { s / (s + z) } else { 0.0 })
        })
        .collect()
}

fn apply_block(block: &DMatrix<Complex64>, c: f64, rows: &mut [Complex64], stride: usize, n: usize) {
    // rows holds an n×stride row-major matrix; replace it by c Ξ rows
    let input = DMatrix::from_row_slice(n, stride, rows);
    let out = block * input * Complex64::new(c, 0.0);
    for i in 0..n {
        for k in 0..stride {
            rows[i * stride + k] = out[(i, k)];
        }
    }
}

/// Filters the wavelet coefficients of `dec`. Scaling coefficients pass
/// through unless the filter carries scaling gains.
pub fn apply_filter(dec: &WaveletDecomposition, filt: &FilterSpectrum) -> Result<WaveletDecomposition> {
    let bank = dec.bank();
    if filt.bandlimit != bank.bandlimit() {
        return Err(Error::BandlimitMismatch {
            expected: bank.bandlimit(),
            found: filt.bandlimit,
        });
    }
    if filt.j1 != bank.j1() || filt.j2() != bank.j2() {
        return Err(Error::ModeMismatch("filter scales do not match the bank"));
    }
    let mut out = dec.clone();
    if let Some(g) = &filt.scaling_gains {
        for (v, gain) in out.scaling_mut().values_mut().iter_mut().zip(g) {
            *v *= gain;
        }
    }
    for j in bank.scales() {
        let blocks = filt.coeffs(j)?;
        match out.wavelet_mut(j)? {
            WaveletCoefficients::Sphere(w) => {
                for (l, block) in blocks.iter().enumerate() {
                    apply_block(block, wigner_norm(l), w.degree_mut(l), 1, 2 * l + 1);
                }
            }
            WaveletCoefficients::Wigner(w) => {
                for (l, block) in blocks.iter().enumerate() {
                    let n = 2 * l + 1;
                    apply_block(block, wigner_norm(l), w.degree_mut(l), n, n);
                }
            }
        }
    }
    Ok(out)
}

/// How the filter is obtained from the covariances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterMode {
    /// Full per-degree normal equations.
    Matrix,
    /// Diagonal Wiener gains from the covariance diagonals.
    AxisymClosedForm,
}

impl std::str::FromStr for FilterMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "matrix" => Ok(Self::Matrix),
            "axisym-closed-form" => Ok(Self::AxisymClosedForm),
            other => Err(Error::InvalidInput(format!("unknown filter mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DenoiseOptions {
    pub mode: FilterMode,
    /// Also apply the diagonal Wiener gains to the scaling coefficients.
    pub filter_scaling: bool,
}

impl Default for DenoiseOptions {
    fn default() -> Self {
        Self {
            mode: FilterMode::Matrix,
            filter_scaling: false,
        }
    }
}

/// Builds the filter selected by `opts` for `bank`.
pub fn build_filter(
    cs: &DegreeCovariance,
    cz: &DegreeCovariance,
    bank: &WaveletBank,
    opts: DenoiseOptions,
) -> Result<FilterSpectrum> {
    check_pair(cs, cz)?;
    if cs.bandlimit != bank.bandlimit() {
        return Err(Error::BandlimitMismatch {
            expected: bank.bandlimit(),
            found: cs.bandlimit,
        });
    }
    let diag_gains = || wiener_axisym_gains(&cs.diagonal_values(), &cz.diagonal_values());
    let filt = match opts.mode {
        FilterMode::Matrix => solve_filter(cs, cz, bank.j1(), bank.j2())?,
        FilterMode::AxisymClosedForm => {
            FilterSpectrum::from_gains(bank.bandlimit(), bank.j1(), bank.j2(), &diag_gains()?)?
        }
    };
    if opts.filter_scaling {
        filt.with_scaling_gains(diag_gains()?)
    } else {
        Ok(filt)
    }
}

/// Analysis, filtering and synthesis of a noisy signal.
pub fn denoise(
    f: &HarmonicCoeffs,
    cs: &DegreeCovariance,
    cz: &DegreeCovariance,
    bank: &Arc<WaveletBank>,
    opts: DenoiseOptions,
) -> Result<HarmonicCoeffs> {
    let filt = build_filter(cs, cz, bank, opts)?;
    let dec = analyze(f, bank)?;
    synthesize(&apply_filter(&dec, &filt)?)
}

/// Analytic joint SO(3)-scale mean square error of the filtered wavelet
/// coefficients against those of the source:
///
/// ```text
/// Σ_j Σ_l c_l (Σ_{m'} |(ψ_j)_l^{m'}|²) Σ_m [a C a^H - 2 Re(a C^s_{:,m}) + C^s_{m,m}]
/// ```
///
/// with `a = c_l Ξ_l[m, :]` and `C = C^s + C^z`.
pub fn expected_mse(
    filt: &FilterSpectrum,
    cs: &DegreeCovariance,
    cz: &DegreeCovariance,
    bank: &WaveletBank,
) -> Result<f64> {
    check_pair(cs, cz)?;
    if filt.bandlimit != bank.bandlimit() || cs.bandlimit != bank.bandlimit() {
        return Err(Error::BandlimitMismatch {
            expected: bank.bandlimit(),
            found: filt.bandlimit,
        });
    }
    let mut total = 0.0;
    for j in bank.scales() {
        let psi = bank.wavelet_spectrum(j)?;
        let blocks = filt.coeffs(j)?;
        for l in 0..bank.bandlimit() {
            let c = wigner_norm(l);
            let weight = c * psi.degree(l).iter().map(|v| v.norm_sqr()).sum::<f64>();
            if weight == 0.0 {
                continue;
            }
            let cf = &cs.blocks[l] + &cz.blocks[l];
            let a = &blocks[l] * Complex64::new(c, 0.0);
            let aca = &a * &cf * a.adjoint();
            let acs = &a * &cs.blocks[l];
            let per_m: f64 = (0..2 * l + 1)
                .map(|m| aca[(m, m)].re - 2.0 * acs[(m, m)].re + cs.blocks[l][(m, m)].re)
                .sum();
            total += weight * per_m;
        }
    }
    Ok(total)
}
