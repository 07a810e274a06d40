use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Flat position of `(l, m)` in the canonical `l² + l + m` ordering.
#[inline]
pub fn flat_index(l: usize, m: isize) -> usize {
    ((l * l + l) as isize + m) as usize
}

/// Inverse of [`flat_index`].
#[inline]
pub fn degree_order(index: usize) -> (usize, isize) {
    let l = (index as f64).sqrt() as usize;
    // sqrt can land one off for large perfect squares
    let l = if (l + 1) * (l + 1) <= index {
        l + 1
    } else if l * l > index {
        l - 1
    } else {
        l
    };
    (l, index as isize - (l * l + l) as isize)
}

/// Spherical harmonic coefficients `(f)_l^m` of a signal bandlimited to `L`.
///
/// Storage is the triangular array `0 <= l < L, |m| <= l` in flat order, so
/// degree `l` occupies the contiguous slice `l²..(l+1)²` with `m` ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicCoeffs {
    bandlimit: usize,
    values: Vec<Complex64>,
}

impl HarmonicCoeffs {
    pub fn zeros(bandlimit: usize) -> Self {
        Self {
            bandlimit,
            values: vec![Complex64::new(0.0, 0.0); bandlimit * bandlimit],
        }
    }

    pub fn from_values(bandlimit: usize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != bandlimit * bandlimit {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients given for bandlimit {bandlimit} (expected {})",
                values.len(),
                bandlimit * bandlimit
            )));
        }
        Ok(Self { bandlimit, values })
    }

    /// Builds coefficients from a function of `(l, m)`.
    pub fn from_fn(bandlimit: usize, mut f: impl FnMut(usize, isize) -> Complex64) -> Self {
        let values = (0..bandlimit * bandlimit)
            .map(|i| {
                let (l, m) = degree_order(i);
                f(l, m)
            })
            .collect();
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

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    fn check(&self, l: usize, m: isize) -> Result<()> {
        if l >= self.bandlimit {
            return Err(Error::BandlimitMismatch {
                expected: self.bandlimit,
                found: l + 1,
            });
        }
        if m.unsigned_abs() > l {
            return Err(Error::InvalidOrder { l, m });
        }
        Ok(())
    }

    pub fn get(&self, l: usize, m: isize) -> Result<Complex64> {
        self.check(l, m)?;
        Ok(self.values[flat_index(l, m)])
    }

    pub fn set(&mut self, l: usize, m: isize, value: Complex64) -> Result<()> {
        self.check(l, m)?;
        self.values[flat_index(l, m)] = value;
        Ok(())
    }

    /// Coefficients of degree `l`, ordered `m = -l..=l`.
    pub fn degree(&self, l: usize) -> &[Complex64] {
        &self.values[l * l..(l + 1) * (l + 1)]
    }

    pub fn degree_mut(&mut self, l: usize) -> &mut [Complex64] {
        &mut self.values[l * l..(l + 1) * (l + 1)]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, isize, Complex64)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| {
            let (l, m) = degree_order(i);
            (l, m, v)
        })
    }

    /// Squared l2 norm, which by Parseval is the signal energy on the sphere.
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

    /// Copies into a larger (zero padded) or smaller (truncated) bandlimit.
    pub fn resized(&self, bandlimit: usize) -> Self {
        let mut out = Self::zeros(bandlimit);
        let n = bandlimit.min(self.bandlimit);
        out.values[..n * n].copy_from_slice(&self.values[..n * n]);
        out
    }

    /// Largest deviation from `(f)_l^{-m} = (-1)^m conj((f)_l^m)`, relative to
    /// the largest coefficient magnitude.
    pub fn real_field_deviation(&self) -> f64 {
        let scale = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for l in 0..self.bandlimit {
            for m in 0..=l as isize {
                let pos = self.values[flat_index(l, m)];
                let neg = self.values[flat_index(l, -m)];
                let expect = if m % 2 == 0 { pos.conj() } else { -pos.conj() };
                worst = worst.max((neg - expect).norm());
            }
        }
        worst / scale
    }

    pub fn is_real_field(&self) -> bool {
        self.real_field_deviation() < 1e-12
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            bandlimit: self.bandlimit,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(
            self.bandlimit, other.bandlimit,
            "bandlimit mismatch in coefficient arithmetic"
        );
        Self {
            bandlimit: self.bandlimit,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

impl Add for &HarmonicCoeffs {
    type Output = HarmonicCoeffs;
    fn add(self, rhs: Self) -> HarmonicCoeffs {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &HarmonicCoeffs {
    type Output = HarmonicCoeffs;
    fn sub(self, rhs: Self) -> HarmonicCoeffs {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<Complex64> for &HarmonicCoeffs {
    type Output = HarmonicCoeffs;
    fn mul(self, rhs: Complex64) -> HarmonicCoeffs {
        HarmonicCoeffs {
            bandlimit: self.bandlimit,
            values: self.values.iter().map(|v| v * rhs).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn flat_index_round_trips(index in 0usize..200_000) {
            let (l, m) = degree_order(index);
            prop_assert!(m.unsigned_abs() <= l);
            prop_assert_eq!(flat_index(l, m), index);
        }
    }

    #[test]
    fn degree_slices_cover_orders() {
        let c = HarmonicCoeffs::from_fn(4, |l, m| Complex64::new(l as f64, m as f64));
        assert_eq!(c.values().len(), 16);
        let d2 = c.degree(2);
        assert_eq!(d2.len(), 5);
        assert_eq!(d2[0], Complex64::new(2.0, -2.0));
        assert_eq!(d2[4], Complex64::new(2.0, 2.0));
    }

    #[test]
    fn rejects_bad_orders() {
        let c = HarmonicCoeffs::zeros(4);
        assert!(matches!(c.get(2, 3), Err(Error::InvalidOrder { .. })));
        assert!(c.get(4, 0).is_err());
        assert!(HarmonicCoeffs::from_values(3, vec![Complex64::default(); 8]).is_err());
    }

    #[test]
    fn real_field_symmetry_check() {
        let mut c = HarmonicCoeffs::zeros(3);
        c.set(1, 1, Complex64::new(0.5, 0.25)).unwrap();
        c.set(1, -1, Complex64::new(-0.5, 0.25)).unwrap();
        c.set(2, 2, Complex64::new(1.0, -2.0)).unwrap();
        c.set(2, -2, Complex64::new(1.0, 2.0)).unwrap();
        assert!(c.is_real_field());
        c.set(2, -2, Complex64::new(1.0, -2.0)).unwrap();
        assert!(!c.is_real_field());
    }
}
