use std::f64::consts::PI;

use num_complex::Complex64;

use super::coeffs::{flat_index, HarmonicCoeffs};
use super::grid::{SphereGrid, SphereMap};
use super::legendre::{plm, plm_table, tri_index};
use crate::error::{Error, Result};

/// Orthonormal spherical harmonic `Y_l^m(θ, φ)` with Condon-Shortley phase.
pub fn ylm(l: usize, m: isize, theta: f64, phi: f64) -> Result<Complex64> {
    let am = m.unsigned_abs();
    if am > l {
        return Err(Error::InvalidOrder { l, m });
    }
    let p = plm(l, am, theta);
    let y = Complex64::from_polar(p, am as f64 * phi);
    Ok(if m >= 0 {
        y
    } else if am % 2 == 0 {
        y.conj()
    } else {
        -y.conj()
    })
}

/// Precomputed Legendre and Fourier tables for transforms at one bandlimit on one grid.
///
/// Both directions are separable: a longitude DFT per ring and a weighted
/// Legendre sum across rings. Summation order is fixed, so results do not
/// depend on how callers schedule plans across threads.
#[derive(Debug, Clone)]
pub struct ShtPlan {
    bandlimit: usize,
    grid: SphereGrid,
    plm: Vec<Vec<f64>>,
    // e^{-2πi j / n_phi} for j in 0..n_phi
    roots: Vec<Complex64>,
}

impl ShtPlan {
    pub fn new(bandlimit: usize, grid: &SphereGrid) -> Result<Self> {
        if bandlimit == 0 {
            return Err(Error::InvalidBandlimit { found: 0, min: 1 });
        }
        let plm = grid
            .thetas()
            .iter()
            .map(|&t| plm_table(bandlimit, t))
            .collect();
        let n = grid.n_phi();
        let roots = (0..n)
            .map(|j| Complex64::from_polar(1.0, -2.0 * PI * j as f64 / n as f64))
            .collect();
        Ok(Self {
            bandlimit,
            grid: grid.clone(),
            plm,
            roots,
        })
    }

    pub fn bandlimit(&self) -> usize {
        self.bandlimit
    }

    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    fn root(&self, m: isize, k: usize) -> Complex64 {
        let n = self.grid.n_phi() as isize;
        let j = (m * k as isize).rem_euclid(n) as usize;
        self.roots[j]
    }

    /// Projects a map onto `Y_l^m`, `l < L`. Exact when the grid resolves `L`.
    pub fn forward(&self, map: &SphereMap) -> Result<HarmonicCoeffs> {
        if map.grid() != &self.grid {
            return Err(Error::DimensionMismatch("map grid differs from plan grid".into()));
        }
        self.grid.check_bandlimit(self.bandlimit)?;
        let big_l = self.bandlimit;
        let n_phi = self.grid.n_phi();
        let mut out = HarmonicCoeffs::zeros(big_l);
        let values = out.values_mut();
        let mut fourier = vec![Complex64::new(0.0, 0.0); 2 * big_l - 1];
        for (i, table) in self.plm.iter().enumerate() {
            let ring = map.ring(i);
            let scale = self.grid.area_weight(i);
            for (slot, m) in fourier.iter_mut().zip(-(big_l as isize - 1)..) {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, v) in ring.iter().enumerate() {
                    acc += v * self.root(m, k);
                }
                *slot = acc * scale;
            }
            for l in 0..big_l {
                for m in -(l as isize)..=l as isize {
                    let am = m.unsigned_abs();
                    let mut p = table[tri_index(l, am)];
                    if m < 0 && am % 2 == 1 {
                        p = -p;
                    }
                    values[flat_index(l, m)] += fourier[(m + big_l as isize - 1) as usize] * p;
                }
            }
        }
        debug_assert_eq!(n_phi, self.grid.n_phi());
        Ok(out)
    }

    /// Evaluates the finite expansion `Σ (f)_l^m Y_l^m` at every grid sample.
    pub fn inverse(&self, coeffs: &HarmonicCoeffs) -> Result<SphereMap> {
        if coeffs.bandlimit() > self.bandlimit {
            return Err(Error::BandlimitMismatch {
                expected: self.bandlimit,
                found: coeffs.bandlimit(),
            });
        }
        let big_l = coeffs.bandlimit();
        let n_phi = self.grid.n_phi();
        let mut samples = Vec::with_capacity(self.grid.len());
        let values = coeffs.values();
        let mut fourier = vec![Complex64::new(0.0, 0.0); (2 * big_l).saturating_sub(1)];
        for table in &self.plm {
            for (slot, m) in fourier.iter_mut().zip(-(big_l as isize - 1)..) {
                let am = m.unsigned_abs();
                let mut acc = Complex64::new(0.0, 0.0);
                for l in am..big_l {
                    acc += values[flat_index(l, m)] * table[tri_index(l, am)];
                }
                *slot = if m < 0 && am % 2 == 1 { -acc } else { acc };
            }
            for k in 0..n_phi {
                let mut acc = Complex64::new(0.0, 0.0);
                for (g, m) in fourier.iter().zip(-(big_l as isize - 1)..) {
                    acc += g * self.root(m, k).conj();
                }
                samples.push(acc);
            }
        }
        SphereMap::new(self.grid.clone(), samples)
    }
}

/// Forward transform of `map` to bandlimit `L`.
pub fn forward_sht(map: &SphereMap, bandlimit: usize) -> Result<HarmonicCoeffs> {
    map.grid().check_bandlimit(bandlimit)?;
    ShtPlan::new(bandlimit, map.grid())?.forward(map)
}

/// Synthesis of `coeffs` on `grid`.
pub fn inverse_sht(coeffs: &HarmonicCoeffs, grid: &SphereGrid) -> Result<SphereMap> {
    ShtPlan::new(coeffs.bandlimit().max(1), grid)?.inverse(coeffs)
}
