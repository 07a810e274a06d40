//! Scale-discretized wavelet analysis and synthesis in spectral form.
//!
//! Axisymmetric banks give wavelet coefficients that are functions on the
//! sphere and are stored as harmonic coefficients:
//!
//! ```text
//! (W_j)_l^m = sqrt(c_l/2π) f_l^m conj((ψ_j)_l^0),   S_l^m = sqrt(c_l/2π) f_l^m conj(Φ_l^0)
//! ```
//!
//! Directional banks give functions on SO(3), stored as Wigner coefficients
//! `(W_j)^l_{m,m'} = f_l^m conj((ψ_j)_l^{m'})`. Here `c_l = 8π²/(2l+1)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::bank::{wigner_norm, WaveletBank};
use crate::error::{Error, Result};
use crate::harmonic::{inverse_sht, HarmonicCoeffs, SphereGrid, SphereMap};
use crate::wigner::{wigner_D, EulerAngles};

/// Offset of degree `l` in a Wigner spectrum: `Σ_{k<l} (2k+1)²`.
#[inline]
fn degree_offset(l: usize) -> usize {
    if l == 0 {
        0
    } else {
        l * (2 * l - 1) * (2 * l + 1) / 3
    }
}

/// Coefficients of a bandlimited function on SO(3) with respect to `conj(D^l_{m,m'})`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerSpectrum {
    bandlimit: usize,
    values: Vec<Complex64>,
}

impl WignerSpectrum {
    pub fn zeros(bandlimit: usize) -> Self {
        Self {
            bandlimit,
            values: vec![Complex64::new(0.0, 0.0); Self::len_for(bandlimit)],
        }
    }

    pub fn len_for(bandlimit: usize) -> usize {
        if bandlimit == 0 {
            0
        } else {
            degree_offset(bandlimit)
        }
    }

    pub fn from_fn(bandlimit: usize, mut f: impl FnMut(usize, isize, isize) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(Self::len_for(bandlimit));
        for l in 0..bandlimit {
            let li = l as isize;
            for m in -li..=li {
                for mp in -li..=li {
                    values.push(f(l, m, mp));
                }
            }
        }
        Self { bandlimit, values }
    }

    pub fn bandlimit(&self) -> usize {
        self.bandlimit
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    fn index(&self, l: usize, m: isize, mp: isize) -> Result<usize> {
        let li = l as isize;
        if l >= self.bandlimit {
            return Err(Error::BandlimitMismatch {
                expected: self.bandlimit,
                found: l + 1,
            });
        }
        if m.abs() > li || mp.abs() > li {
            return Err(Error::InvalidOrder { l, m: if m.abs() > li { m } else { mp } });
        }
        let n = 2 * l + 1;
        Ok(degree_offset(l) + (m + li) as usize * n + (mp + li) as usize)
    }

    pub fn get(&self, l: usize, m: isize, mp: isize) -> Result<Complex64> {
        Ok(self.values[self.index(l, m, mp)?])
    }

    pub fn set(&mut self, l: usize, m: isize, mp: isize, v: Complex64) -> Result<()> {
        let i = self.index(l, m, mp)?;
        self.values[i] = v;
        Ok(())
    }

    /// Degree-`l` block, row-major in `(m, m')`, `(2l+1)²` entries.
    pub fn degree(&self, l: usize) -> &[Complex64] {
        let n = 2 * l + 1;
        let o = degree_offset(l);
        &self.values[o..o + n * n]
    }

    pub fn degree_mut(&mut self, l: usize) -> &mut [Complex64] {
        let n = 2 * l + 1;
        let o = degree_offset(l);
        &mut self.values[o..o + n * n]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Evaluates `g(ρ) = Σ g^l_{m,m'} conj(D^l_{m,m'}(ρ))`.
pub fn eval_so3_point(w: &WignerSpectrum, rho: &EulerAngles) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for l in 0..w.bandlimit {
        let li = l as isize;
        let block = w.degree(l);
        let n = 2 * l + 1;
        for m in -li..=li {
            for mp in -li..=li {
                let v = block[(m + li) as usize * n + (mp + li) as usize];
                if v.norm_sqr() == 0.0 {
                    continue;
                }
                let d = wigner_D(l, m, mp, rho).expect("orders within degree");
                acc += v * d.conj();
            }
        }
    }
    acc
}

/// Wavelet coefficients at one scale.
#[derive(Debug, Clone, PartialEq)]
pub enum WaveletCoefficients {
    /// Sphere-spectral coefficients (axisymmetric banks).
    Sphere(HarmonicCoeffs),
    /// Wigner coefficients on SO(3) (directional banks).
    Wigner(WignerSpectrum),
}

impl WaveletCoefficients {
    pub fn bandlimit(&self) -> usize {
        match self {
            Self::Sphere(c) => c.bandlimit(),
            Self::Wigner(w) => w.bandlimit(),
        }
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self, Self::Sphere(_))
    }

    pub fn norm_sqr(&self) -> f64 {
        match self {
            Self::Sphere(c) => c.norm_sqr(),
            Self::Wigner(w) => w.norm_sqr(),
        }
    }
}

/// Scaling and per-scale wavelet coefficients of a signal.
#[derive(Debug, Clone)]
pub struct WaveletDecomposition {
    bank: Arc<WaveletBank>,
    scaling: HarmonicCoeffs,
    wavelets: Vec<WaveletCoefficients>,
}

impl WaveletDecomposition {
    /// Assembles a decomposition, checking one entry per scale, bandlimits and mode.
    pub fn from_parts(
        bank: Arc<WaveletBank>,
        scaling: HarmonicCoeffs,
        wavelets: Vec<WaveletCoefficients>,
    ) -> Result<Self> {
        let dec = Self {
            bank,
            scaling,
            wavelets,
        };
        dec.validate()?;
        Ok(dec)
    }

    fn validate(&self) -> Result<()> {
        let bl = self.bank.bandlimit();
        let n_scales = self.bank.scales().count();
        if self.wavelets.len() != n_scales {
            return Err(Error::DimensionMismatch(format!(
                "{} wavelet entries for {} scales",
                self.wavelets.len(),
                n_scales
            )));
        }
        if self.scaling.bandlimit() != bl {
            return Err(Error::BandlimitMismatch {
                expected: bl,
                found: self.scaling.bandlimit(),
            });
        }
        let axisym = self.bank.is_axisymmetric();
        for w in &self.wavelets {
            if w.bandlimit() != bl {
                return Err(Error::BandlimitMismatch {
                    expected: bl,
                    found: w.bandlimit(),
                });
            }
            if w.is_sphere() != axisym {
                return Err(Error::ModeMismatch(
                    "wavelet coefficient type does not match the bank's directionality",
                ));
            }
        }
        Ok(())
    }

    pub fn bank(&self) -> &Arc<WaveletBank> {
        &self.bank
    }

    pub fn bandlimit(&self) -> usize {
        self.bank.bandlimit()
    }

    pub fn is_axisymmetric(&self) -> bool {
        self.bank.is_axisymmetric()
    }

    pub fn scaling(&self) -> &HarmonicCoeffs {
        &self.scaling
    }

    pub fn scaling_mut(&mut self) -> &mut HarmonicCoeffs {
        &mut self.scaling
    }

    fn slot(&self, j: usize) -> Result<usize> {
        if j < self.bank.j1() || j > self.bank.j2() {
            return Err(Error::ScaleOutOfRange {
                j,
                j1: self.bank.j1(),
                j2: self.bank.j2(),
            });
        }
        Ok(j - self.bank.j1())
    }

    pub fn wavelet(&self, j: usize) -> Result<&WaveletCoefficients> {
        Ok(&self.wavelets[self.slot(j)?])
    }

    pub fn wavelet_mut(&mut self, j: usize) -> Result<&mut WaveletCoefficients> {
        let s = self.slot(j)?;
        Ok(&mut self.wavelets[s])
    }

    pub fn wavelets(&self) -> &[WaveletCoefficients] {
        &self.wavelets
    }

    /// Sphere-spectral coefficients at scale `j`; mode error for directional banks.
    pub fn sphere_wavelet(&self, j: usize) -> Result<&HarmonicCoeffs> {
        match self.wavelet(j)? {
            WaveletCoefficients::Sphere(c) => Ok(c),
            WaveletCoefficients::Wigner(_) => Err(Error::ModeMismatch(
                "sphere coefficients requested from a directional decomposition",
            )),
        }
    }

    /// Measure-weighted energy: `Σ|S|² + 2π Σ_j Σ|W_j|²` (axisymmetric) or
    /// `Σ|S|² + Σ_j Σ_l c_l Σ|W_j^l|²` (directional). Equals `Σ|f|²` when the
    /// bank is admissible.
    pub fn energy(&self) -> f64 {
        let mut e = self.scaling.norm_sqr();
        for w in &self.wavelets {
            e += match w {
                WaveletCoefficients::Sphere(c) => 2.0 * PI * c.norm_sqr(),
                WaveletCoefficients::Wigner(s) => (0..s.bandlimit())
                    .map(|l| {
                        wigner_norm(l) * s.degree(l).iter().map(|v| v.norm_sqr()).sum::<f64>()
                    })
                    .sum(),
            };
        }
        e
    }

    /// Pointwise `a·self + b·other`, for decompositions over the same bank.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        if !Arc::ptr_eq(&self.bank, &other.bank) {
            return Err(Error::ModeMismatch("decompositions over different banks"));
        }
        let lin = |x: &[Complex64], y: &[Complex64]| -> Vec<Complex64> {
            x.iter().zip(y).map(|(p, q)| a * p + b * q).collect()
        };
        let scaling = HarmonicCoeffs::from_values(
            self.bandlimit(),
            lin(self.scaling.values(), other.scaling.values()),
        )?;
        let wavelets = self
            .wavelets
            .iter()
            .zip(&other.wavelets)
            .map(|(x, y)| match (x, y) {
                (WaveletCoefficients::Sphere(p), WaveletCoefficients::Sphere(q)) => {
                    HarmonicCoeffs::from_values(p.bandlimit(), lin(p.values(), q.values()))
                        .map(WaveletCoefficients::Sphere)
                }
                (WaveletCoefficients::Wigner(p), WaveletCoefficients::Wigner(q)) => {
                    Ok(WaveletCoefficients::Wigner(WignerSpectrum {
                        bandlimit: p.bandlimit,
                        values: lin(&p.values, &q.values),
                    }))
                }
                _ => Err(Error::ModeMismatch("mixed coefficient types")),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(self.bank.clone(), scaling, wavelets)
    }

    /// Largest coefficient difference over the scaling and all wavelet parts.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        let diff = self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))?;
        let mut d = diff.scaling.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        for w in &diff.wavelets {
            let vals = match w {
                WaveletCoefficients::Sphere(c) => c.values(),
                WaveletCoefficients::Wigner(s) => s.values(),
            };
            d = vals.iter().map(|v| v.norm()).fold(d, f64::max);
        }
        Ok(d)
    }
}

fn sphere_factor(l: usize) -> f64 {
    (wigner_norm(l) / (2.0 * PI)).sqrt()
}

/// Wavelet and scaling coefficients of `f`. Signals with a smaller bandlimit
/// than the bank are zero-padded.
pub fn analyze(f: &HarmonicCoeffs, bank: &Arc<WaveletBank>) -> Result<WaveletDecomposition> {
    let bl = bank.bandlimit();
    if f.bandlimit() > bl {
        return Err(Error::BandlimitMismatch {
            expected: bl,
            found: f.bandlimit(),
        });
    }
    let f = if f.bandlimit() < bl {
        f.resized(bl)
    } else {
        f.clone()
    };
    let phi = bank.scaling_spectrum();
    let scaling = HarmonicCoeffs::from_fn(bl, |l, m| {
        f.get(l, m).unwrap() * phi.get(l, 0).unwrap().conj() * sphere_factor(l)
    });
    let axisym = bank.is_axisymmetric();
    let wavelets = bank
        .scales()
        .map(|j| {
            let psi = bank.wavelet_spectrum(j)?;
            Ok(if axisym {
                WaveletCoefficients::Sphere(HarmonicCoeffs::from_fn(bl, |l, m| {
                    f.get(l, m).unwrap() * psi.get(l, 0).unwrap().conj() * sphere_factor(l)
                }))
            } else {
                WaveletCoefficients::Wigner(WignerSpectrum::from_fn(bl, |l, m, mp| {
                    f.get(l, m).unwrap() * psi.get(l, mp).unwrap().conj()
                }))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    WaveletDecomposition::from_parts(bank.clone(), scaling, wavelets)
}

/// Reconstructs the signal from its decomposition.
pub fn synthesize(dec: &WaveletDecomposition) -> Result<HarmonicCoeffs> {
    dec.validate()?;
    let bank = &dec.bank;
    let bl = bank.bandlimit();
    let phi = bank.scaling_spectrum();
    let mut out = HarmonicCoeffs::from_fn(bl, |l, m| {
        dec.scaling.get(l, m).unwrap() * phi.get(l, 0).unwrap() * sphere_factor(l)
    });
    for (j, w) in bank.scales().zip(&dec.wavelets) {
        let psi = bank.wavelet_spectrum(j)?;
        match w {
            WaveletCoefficients::Sphere(c) => {
                for l in 0..bl {
                    let g = psi.get(l, 0)? * (2.0 * PI * wigner_norm(l)).sqrt();
                    if g.norm_sqr() == 0.0 {
                        continue;
                    }
                    for (o, v) in out.degree_mut(l).iter_mut().zip(c.degree(l)) {
                        *o += v * g;
                    }
                }
            }
            WaveletCoefficients::Wigner(s) => {
                for l in 0..bl {
                    let n = 2 * l + 1;
                    let c = wigner_norm(l);
                    let psi_l = psi.degree(l);
                    if psi_l.iter().all(|v| v.norm_sqr() == 0.0) {
                        continue;
                    }
                    let block = s.degree(l);
                    let row_out = out.degree_mut(l);
                    for (mi, o) in row_out.iter_mut().enumerate() {
                        let row = &block[mi * n..(mi + 1) * n];
                        let acc: Complex64 = row.iter().zip(psi_l).map(|(w, p)| w * p).sum();
                        *o += acc * c;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Scale-`j` wavelet coefficients of an axisymmetric decomposition sampled on
/// the bank's Gauss-Legendre grid.
pub fn wavelet_coeff_map(dec: &WaveletDecomposition, j: usize) -> Result<SphereMap> {
    let c = dec.sphere_wavelet(j)?;
    let grid = SphereGrid::gauss_legendre(dec.bandlimit())?;
    inverse_sht(c, &grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bank::build_bank;
    use crate::harmonic::{forward_sht, gauss_legendre_rule, ylm};
    use crate::testutil::{random_coeffs, random_real_coeffs, Uniform};
    use crate::wigner::rotate_coeffs;

    fn default_bank(bandlimit: usize) -> Arc<WaveletBank> {
        Arc::new(build_bank(bandlimit, 2.0, 0).unwrap())
    }

    fn random_zeta(bandlimit: usize, support: usize, seed: u64) -> HarmonicCoeffs {
        let mut u = Uniform::new(seed);
        let mut z = HarmonicCoeffs::from_fn(bandlimit, |l, _| {
            if l < support {
                u.complex()
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        for l in 0..bandlimit {
            let row = z.degree_mut(l);
            let n: f64 = row.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if n == 0.0 {
                row[l] = Complex64::new(1.0, 0.0);
            } else {
                row.iter_mut().for_each(|v| *v /= n);
            }
        }
        z
    }

    fn directional_bank(bandlimit: usize, seed: u64) -> Arc<WaveletBank> {
        let bank = build_bank(bandlimit, 2.0, 0).unwrap();
        Arc::new(bank.with_directionality(random_zeta(bandlimit, 16, seed)).unwrap())
    }

    #[test]
    fn wigner_spectrum_layout() {
        assert_eq!(WignerSpectrum::len_for(0), 0);
        assert_eq!(WignerSpectrum::len_for(1), 1);
        assert_eq!(WignerSpectrum::len_for(3), 1 + 9 + 25);
        let w = WignerSpectrum::from_fn(4, |l, m, mp| Complex64::new(l as f64, (10 * m + mp) as f64));
        assert_eq!(w.get(2, -1, 2).unwrap(), Complex64::new(2.0, -8.0));
        assert_eq!(w.get(3, 3, -3).unwrap(), Complex64::new(3.0, 27.0));
        assert!(w.get(1, 2, 0).is_err());
        assert!(w.get(4, 0, 0).is_err());
    }

    #[test]
    fn zero_signal_zero_decomposition() {
        let bank = default_bank(16);
        let dec = analyze(&HarmonicCoeffs::zeros(16), &bank).unwrap();
        assert_eq!(dec.energy(), 0.0);
        assert_eq!(synthesize(&dec).unwrap().norm_sqr(), 0.0);
    }

    #[test]
    fn monopole_lives_in_scaling_part() {
        let bank = default_bank(16);
        let mut f = HarmonicCoeffs::zeros(16);
        f.set(0, 0, Complex64::new(2.5, 0.0)).unwrap();
        let dec = analyze(&f, &bank).unwrap();
        for w in dec.wavelets() {
            assert_eq!(w.norm_sqr(), 0.0);
        }
        assert!(dec.scaling().get(0, 0).unwrap().norm() > 0.0);
        assert!(synthesize(&dec).unwrap().max_abs_diff(&f) < 1e-14);
    }

    #[test]
    fn bandlimit_checks() {
        let bank = default_bank(8);
        assert!(matches!(
            analyze(&HarmonicCoeffs::zeros(9), &bank),
            Err(Error::BandlimitMismatch { .. })
        ));
        let f = random_coeffs(5, 1);
        let dec = analyze(&f, &bank).unwrap();
        assert!(synthesize(&dec).unwrap().max_abs_diff(&f.resized(8)) < 1e-12);
    }

    #[test]
    fn axisymmetric_coefficients_match_spatial_inner_products() {
        // W_j(x) = ∫ f(y) conj(R_x ψ_j)(y) dy, R_x the rotation (φ, θ, 0)
        let bl = 16;
        let bank = default_bank(bl);
        let grid = SphereGrid::gauss_legendre(bl).unwrap();
        let f = random_coeffs(bl, 7);
        let f_map = inverse_sht(&f, &grid).unwrap();
        let dec = analyze(&f, &bank).unwrap();
        for j in [1usize, 3] {
            let psi = bank.wavelet_spectrum(j).unwrap();
            let w = dec.sphere_wavelet(j).unwrap();
            for &(theta, phi) in &[(0.4, 1.1), (2.0, 5.3), (1.3, 0.0)] {
                let rho = EulerAngles::new(phi, theta, 0.0);
                let rotated = inverse_sht(&rotate_coeffs(&psi, &rho), &grid).unwrap();
                let quad = f_map.inner(&rotated).unwrap();
                let spectral: Complex64 = w
                    .iter()
                    .map(|(l, m, v)| v * ylm(l, m, theta, phi).unwrap())
                    .sum();
                assert!((quad - spectral).norm() < 1e-10, "j={j}: {quad} vs {spectral}");
            }
        }
    }

    #[test]
    fn directional_coefficients_match_spatial_inner_products() {
        let bl = 8;
        let bank = directional_bank(bl, 3);
        let grid = SphereGrid::gauss_legendre(bl).unwrap();
        let f = random_coeffs(bl, 8);
        let f_map = inverse_sht(&f, &grid).unwrap();
        let dec = analyze(&f, &bank).unwrap();
        let j = 2;
        let psi = bank.wavelet_spectrum(j).unwrap();
        let WaveletCoefficients::Wigner(w) = dec.wavelet(j).unwrap() else {
            panic!("expected Wigner coefficients");
        };
        for rho in [EulerAngles::new(0.3, 1.2, 2.2), EulerAngles::new(4.0, 2.9, 0.7)] {
            let rotated = inverse_sht(&rotate_coeffs(&psi, &rho), &grid).unwrap();
            let quad = f_map.inner(&rotated).unwrap();
            let spectral = eval_so3_point(w, &rho);
            assert!((quad - spectral).norm() < 1e-10);
        }
    }

    #[test]
    fn perfect_reconstruction_default_bank() {
        let bank = default_bank(64);
        let f = random_coeffs(64, 11);
        let dec = analyze(&f, &bank).unwrap();
        let err = synthesize(&dec).unwrap().max_abs_diff(&f);
        assert!(err < 1e-8, "{err}");
        let rel = (dec.energy() - f.norm_sqr()).abs() / f.norm_sqr();
        assert!(rel < 1e-9, "{rel}");
    }

    #[test]
    fn perfect_reconstruction_directional_bank() {
        let bank = directional_bank(32, 5);
        assert!(!bank.is_axisymmetric());
        let f = random_coeffs(32, 12);
        let dec = analyze(&f, &bank).unwrap();
        assert!(!dec.is_axisymmetric());
        let err = synthesize(&dec).unwrap().max_abs_diff(&f);
        assert!(err < 1e-8, "{err}");
        let rel = (dec.energy() - f.norm_sqr()).abs() / f.norm_sqr();
        assert!(rel < 1e-9, "{rel}");
    }

    #[test]
    fn broken_bank_fails_to_reconstruct() {
        let bank = Arc::new(build_bank(64, 2.0, 0).unwrap().with_scale_zeroed(3).unwrap());
        let f = random_coeffs(64, 13);
        let dec = analyze(&f, &bank).unwrap();
        assert!(synthesize(&dec).unwrap().max_abs_diff(&f) > 1e-2);
    }

    #[test]
    fn analysis_is_linear() {
        let bank = default_bank(32);
        let f = random_coeffs(32, 20);
        let g = random_coeffs(32, 21);
        let a = Complex64::new(0.7, -1.3);
        let b = Complex64::new(-2.0, 0.25);
        let lhs = analyze(&(&(&f * a) + &(&g * b)), &bank).unwrap();
        let rhs = analyze(&f, &bank)
            .unwrap()
            .combine(a, &analyze(&g, &bank).unwrap(), b)
            .unwrap();
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-13);
    }

    #[test]
    fn coefficient_maps() {
        let bl = 32;
        let bank = default_bank(bl);
        let f = random_real_coeffs(bl, 30);
        let dec = analyze(&f, &bank).unwrap();
        for j in bank.scales() {
            let map = wavelet_coeff_map(&dec, j).unwrap();
            let scale = map.samples().iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!(map.max_abs_imag() <= 1e-10 * scale.max(1e-300));
            let spectral = dec.sphere_wavelet(j).unwrap().norm_sqr();
            assert!((map.energy() - spectral).abs() <= 1e-10 * spectral.max(1.0));
            assert!(forward_sht(&map, bl).unwrap().max_abs_diff(dec.sphere_wavelet(j).unwrap()) < 1e-10);
        }
        // scale 0 only sees l = 1, so a signal without dipole content gives a zero map
        let mut g = f.clone();
        g.degree_mut(1).iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        let dec = analyze(&g, &bank).unwrap();
        let map = wavelet_coeff_map(&dec, 0).unwrap();
        assert!(map.samples().iter().all(|v| v.norm() == 0.0));
        let dir = analyze(&f, &directional_bank(bl, 1)).unwrap();
        assert!(matches!(wavelet_coeff_map(&dir, 1), Err(Error::ModeMismatch(_))));
    }

    #[test]
    fn mode_inconsistency_rejected() {
        let bank = default_bank(8);
        let wavelets = bank
            .scales()
            .map(|_| WaveletCoefficients::Wigner(WignerSpectrum::zeros(8)))
            .collect();
        assert!(matches!(
            WaveletDecomposition::from_parts(bank.clone(), HarmonicCoeffs::zeros(8), wavelets),
            Err(Error::ModeMismatch(_))
        ));
        assert!(WaveletDecomposition::from_parts(bank, HarmonicCoeffs::zeros(8), vec![]).is_err());
    }

    #[test]
    fn so3_point_evaluation() {
        let zero = WignerSpectrum::zeros(4);
        assert_eq!(eval_so3_point(&zero, &EulerAngles::new(0.1, 0.2, 0.3)), Complex64::new(0.0, 0.0));
        let mut w = WignerSpectrum::zeros(4);
        w.set(1, 0, 0, Complex64::new(1.0, 0.0)).unwrap();
        assert!((eval_so3_point(&w, &EulerAngles::identity()) - 1.0).norm() < 1e-15);
    }

    #[test]
    fn so3_quadrature_recovers_wigner_coefficients() {
        // g^l_{m,m'} = (1/c_l) ∫ g D^l_{m,m'} dρ, exact with Gauss-Legendre in cos θ
        // and 2L-1 uniform nodes in each of φ and ω
        let bl = 8;
        let mut u = Uniform::new(99);
        let w = WignerSpectrum::from_fn(bl, |_, _, _| u.complex());
        let (nodes, weights) = gauss_legendre_rule(bl);
        let n = 2 * bl - 1;
        let step = 2.0 * PI / n as f64;
        let mut samples = Vec::new();
        for (x, wt) in nodes.iter().zip(&weights) {
            for a in 0..n {
                for c in 0..n {
                    let rho = EulerAngles::new(a as f64 * step, x.acos(), c as f64 * step);
                    samples.push((rho, wt * step * step, eval_so3_point(&w, &rho)));
                }
            }
        }
        let mut worst = 0.0f64;
        for l in 0..bl {
            let li = l as isize;
            for m in -li..=li {
                for mp in -li..=li {
                    let q: Complex64 = samples
                        .iter()
                        .map(|(rho, wt, g)| g * wigner_D(l, m, mp, rho).unwrap() * *wt)
                        .sum();
                    let got = q / wigner_norm(l);
                    worst = worst.max((got - w.get(l, m, mp).unwrap()).norm());
                }
            }
        }
        assert!(worst < 1e-10, "{worst}");
    }
}
