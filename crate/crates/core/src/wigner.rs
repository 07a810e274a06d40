//! Wigner-d and Wigner-D functions in the zyz convention, and rotation of
//! spherical harmonic coefficients.
//!
//! `D^l_{m,m'}(φ, ϑ, ω) = e^{-imφ} d^l_{m,m'}(ϑ) e^{-im'ω}`, with the small-d
//! phase chosen so that `D^l_{m,0}(φ, ϑ, 0) = sqrt(4π / (2l+1)) conj(Y_l^m(ϑ, φ))`.
//! Rotating a signal acts per degree: `(D_ρ f)_l^m = Σ_{m'} D^l_{m,m'}(ρ) (f)_l^{m'}`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::harmonic::{ylm, HarmonicCoeffs};

/// Euler angles `(φ, ϑ, ω)` of a rotation, normalized to `[0,2π) × [0,π] × [0,2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles {
    varphi: f64,
    vartheta: f64,
    omega: f64,
}

impl EulerAngles {
    pub fn new(varphi: f64, vartheta: f64, omega: f64) -> Self {
        let mut varphi = varphi;
        let mut omega = omega;
        let mut vartheta = vartheta.rem_euclid(TAU);
        if vartheta > PI {
            // R_y(2π - ϑ) = R_z(π) R_y(ϑ) R_z(π)
            vartheta = TAU - vartheta;
            varphi += PI;
            omega += PI;
        }
        Self {
            varphi: varphi.rem_euclid(TAU),
            vartheta,
            omega: omega.rem_euclid(TAU),
        }
    }

    pub fn identity() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn varphi(&self) -> f64 {
        self.varphi
    }

    pub fn vartheta(&self) -> f64 {
        self.vartheta
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Angles of the inverse rotation, `(-ω, -ϑ, -φ)` after normalization.
    pub fn inverse(&self) -> Self {
        Self::new(-self.omega, -self.vartheta, -self.varphi)
    }
}

fn check_orders(l: usize, m: isize, mp: isize) -> Result<()> {
    if m.unsigned_abs() > l {
        return Err(Error::InvalidOrder { l, m });
    }
    if mp.unsigned_abs() > l {
        return Err(Error::InvalidOrder { l, m: mp });
    }
    Ok(())
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `d^{l0}_{m,mp}(β)` at the lowest degree `l0 = max(|m|, |mp|)`, where the
/// Wigner sum collapses to a single term.
fn seed(m: isize, mp: isize, beta: f64) -> f64 {
    let l0 = m.abs().max(mp.abs());
    // terms s with l0+mp-s, s, m-mp+s, l0-m-s all >= 0
    let s = 0.max(mp - m);
    debug_assert!(l0 + mp - s >= 0 && l0 - m - s >= 0);
    let (sh, ch) = (beta / 2.0).sin_cos();
    let cos_pow = (2 * l0 + mp - m - 2 * s) as i32;
    let sin_pow = (m - mp + 2 * s) as i32;
    let f = |k: isize| ln_factorial(k as usize);
    let log_mag = 0.5 * (f(l0 + m) + f(l0 - m) + f(l0 + mp) + f(l0 - mp))
        - (f(l0 + mp - s) + f(s) + f(m - mp + s) + f(l0 - m - s));
    let sign = if (m - mp + s) % 2 == 0 { 1.0 } else { -1.0 };
    sign * log_mag.exp() * ch.powi(cos_pow) * sh.powi(sin_pow)
}

/// Runs the degree recursion for fixed `(m, mp)` from `l0` up to `lmax`,
/// calling `emit(l, value)` for every degree.
fn recurse(m: isize, mp: isize, beta: f64, lmax: usize, mut emit: impl FnMut(usize, f64)) {
    let l0 = m.unsigned_abs().max(mp.unsigned_abs());
    if l0 > lmax {
        return;
    }
    let c = beta.cos();
    let (mf, mpf) = (m as f64, mp as f64);
    let mut prev = 0.0;
    let mut cur = seed(m, mp, beta);
    emit(l0, cur);
    for l in l0..lmax {
        let lf = l as f64;
        let l1 = lf + 1.0;
        let lead = l1 * (2.0 * lf + 1.0) / ((l1 * l1 - mf * mf) * (l1 * l1 - mpf * mpf)).sqrt();
        let (mix, back) = if l == 0 {
            (0.0, 0.0)
        } else {
            (
                mf * mpf / (lf * l1),
                ((lf * lf - mf * mf) * (lf * lf - mpf * mpf)).sqrt() / (lf * (2.0 * lf + 1.0)),
            )
        };
        let next = lead * ((c - mix) * cur - back * prev);
        prev = cur;
        cur = next;
        emit(l + 1, cur);
    }
}

/// Wigner small-d function `d^l_{m,mp}(β)`.
pub fn wigner_small_d(l: usize, m: isize, mp: isize, beta: f64) -> Result<f64> {
    check_orders(l, m, mp)?;
    let mut out = 0.0;
    recurse(m, mp, beta, l, |deg, v| {
        if deg == l {
            out = v;
        }
    });
    Ok(out)
}

/// Wigner-D function `D^l_{m,mp}(ρ)`.
#[allow(non_snake_case)]
pub fn wigner_D(l: usize, m: isize, mp: isize, rho: &EulerAngles) -> Result<Complex64> {
    let d = wigner_small_d(l, m, mp, rho.vartheta)?;
    let phase = -(m as f64) * rho.varphi - mp as f64 * rho.omega;
    Ok(Complex64::from_polar(d, phase))
}

/// All small-d matrices for `l < bandlimit` at one angle.
///
/// Degree `l` is a row-major `(2l+1) × (2l+1)` block indexed by `(m + l, mp + l)`.
#[derive(Debug, Clone)]
pub struct SmallDTable {
    bandlimit: usize,
    blocks: Vec<Vec<f64>>,
}

impl SmallDTable {
    pub fn new(bandlimit: usize, beta: f64) -> Self {
        let mut blocks: Vec<Vec<f64>> = (0..bandlimit)
            .map(|l| vec![0.0; (2 * l + 1) * (2 * l + 1)])
            .collect();
        if bandlimit > 0 {
            let top = bandlimit as isize - 1;
            for m in -top..=top {
                for mp in -top..=top {
                    recurse(m, mp, beta, bandlimit - 1, |l, v| {
                        let w = 2 * l + 1;
                        let li = l as isize;
                        blocks[l][(m + li) as usize * w + (mp + li) as usize] = v;
                    });
                }
            }
        }
        Self { bandlimit, blocks }
    }

    pub fn bandlimit(&self) -> usize {
        self.bandlimit
    }

    pub fn get(&self, l: usize, m: isize, mp: isize) -> f64 {
        let w = 2 * l + 1;
        let li = l as isize;
        self.blocks[l][(m + li) as usize * w + (mp + li) as usize]
    }

    pub fn block(&self, l: usize) -> &[f64] {
        &self.blocks[l]
    }
}

/// `|D^l_{m,0}(φ, ϑ, 0) - sqrt(4π/(2l+1)) conj(Y_l^m(ϑ, φ))|`.
///
/// Both modules share one phase convention exactly when this vanishes.
pub fn check_y_bridge(l: usize, m: isize, vartheta: f64, varphi: f64) -> Result<f64> {
    let d = wigner_D(l, m, 0, &EulerAngles::new(varphi, vartheta, 0.0))?;
    let y = ylm(l, m, vartheta, varphi)?;
    let k = (4.0 * PI / (2 * l + 1) as f64).sqrt();
    Ok((d - y.conj() * k).norm())
}

/// Rotates a coefficient set: `(D_ρ f)_l^m = Σ_{m'} D^l_{m,m'}(ρ) (f)_l^{m'}`.
pub fn rotate_coeffs(f: &HarmonicCoeffs, rho: &EulerAngles) -> HarmonicCoeffs {
    let big_l = f.bandlimit();
    let table = SmallDTable::new(big_l, rho.vartheta);
    let mut out = HarmonicCoeffs::zeros(big_l);
    for l in 0..big_l {
        let li = l as isize;
        // fold e^{-im'ω} into the input, e^{-imφ} into the output
        let src: Vec<Complex64> = f
            .degree(l)
            .iter()
            .zip(-li..)
            .map(|(v, mp)| v * Complex64::from_polar(1.0, -(mp as f64) * rho.omega))
            .collect();
        let dst = out.degree_mut(l);
        for (slot, m) in dst.iter_mut().zip(-li..) {
            let mut acc = Complex64::new(0.0, 0.0);
            for (s, mp) in src.iter().zip(-li..) {
                acc += s * table.get(l, m, mp);
            }
            *slot = acc * Complex64::from_polar(1.0, -(m as f64) * rho.varphi);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::{gauss_legendre_rule as gauss_legendre, make_gauss_legendre_grid, inverse_sht};

    /// Explicit factorial-sum formula, usable for small degrees only.
    fn small_d_factorial(l: isize, m: isize, mp: isize, beta: f64) -> f64 {
        let fact = |n: isize| -> f64 { (1..=n).map(|k| k as f64).product() };
        let (sh, ch) = (beta / 2.0).sin_cos();
        let pre = (fact(l + m) * fact(l - m) * fact(l + mp) * fact(l - mp)).sqrt();
        let mut sum = 0.0;
        for s in 0..=2 * l {
            let a = l + mp - s;
            let b = m - mp + s;
            let c = l - m - s;
            if a < 0 || b < 0 || c < 0 {
                continue;
            }
            let sign = if b % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign / (fact(a) * fact(s) * fact(b) * fact(c))
                * ch.powi((2 * l + mp - m - 2 * s) as i32)
                * sh.powi((m - mp + 2 * s) as i32);
        }
        pre * sum
    }

    #[test]
    fn trivial_values() {
        assert_eq!(wigner_small_d(0, 0, 0, 1.3).unwrap(), 1.0);
        for beta in [0.0, 0.4, 1.7, 3.0] {
            assert!((wigner_small_d(1, 0, 0, beta).unwrap() - beta.cos()).abs() < 1e-15);
        }
        assert!(wigner_small_d(2, 3, 0, 0.1).is_err());
    }

    #[test]
    fn matches_factorial_formula() {
        let v = wigner_small_d(3, 2, -1, 0.9).unwrap();
        assert!((v - small_d_factorial(3, 2, -1, 0.9)).abs() < 1e-12);
        for l in 0..10isize {
            for m in -l..=l {
                for mp in -l..=l {
                    for beta in [0.3, 1.1, 2.5, -0.7] {
                        let got = wigner_small_d(l as usize, m, mp, beta).unwrap();
                        let want = small_d_factorial(l, m, mp, beta);
                        assert!((got - want).abs() < 1e-12, "l={l} m={m} mp={mp} β={beta}: {got} vs {want}");
                    }
                }
            }
        }
    }

    #[test]
    fn transpose_symmetry() {
        for l in 0..20usize {
            let li = l as isize;
            for m in -li..=li {
                for mp in -li..=li {
                    let a = wigner_small_d(l, m, mp, 1.234).unwrap();
                    let b = wigner_small_d(l, mp, m, 1.234).unwrap();
                    let sign = if (m - mp) % 2 == 0 { 1.0 } else { -1.0 };
                    assert!((a - sign * b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn recursion_stays_orthogonal_at_high_degree() {
        let l = 256usize;
        let li = l as isize;
        for m in [-256isize, -100, 0, 3, 255] {
            let row: Vec<f64> = (-li..=li)
                .map(|mp| wigner_small_d(l, m, mp, 1.0).unwrap())
                .collect();
            assert!(row.iter().all(|v| v.is_finite()));
            let n: f64 = row.iter().map(|v| v * v).sum();
            assert!((n - 1.0).abs() < 1e-9, "row {m}: {n}");
        }
    }

    #[test]
    fn big_d_identity_and_trivial() {
        let id = EulerAngles::identity();
        for l in 0..5usize {
            let li = l as isize;
            for m in -li..=li {
                for mp in -li..=li {
                    let v = wigner_D(l, m, mp, &id).unwrap();
                    let expect = if m == mp { 1.0 } else { 0.0 };
                    assert!((v - expect).norm() < 1e-14);
                }
            }
        }
        let rho = EulerAngles::new(0.3, 1.2, 2.2);
        assert!((wigner_D(0, 0, 0, &rho).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn orthogonality_constant_by_quadrature() {
        // Gauss in cos ϑ, uniform in φ and ω
        let bandlimit = 9usize;
        let (nodes, weights) = gauss_legendre(bandlimit);
        let n = 2 * bandlimit - 1;
        let quad = |l: usize, m: isize, mp: isize, p: usize, q: isize, qp: isize| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, w) in nodes.iter().zip(&weights) {
                let beta = x.acos();
                for a in 0..n {
                    for g in 0..n {
                        let rho = EulerAngles::new(TAU * a as f64 / n as f64, beta, TAU * g as f64 / n as f64);
                        acc += wigner_D(l, m, mp, &rho).unwrap() * wigner_D(p, q, qp, &rho).unwrap().conj() * *w;
                    }
                }
            }
            acc * (TAU / n as f64).powi(2)
        };
        let v = quad(2, 1, -1, 2, 1, -1);
        assert!((v.re - 8.0 * PI * PI / 5.0).abs() < 1e-10 && v.im.abs() < 1e-10);
        for l in 0..=8usize {
            let c = quad(l, 0, l as isize, l, 0, l as isize);
            let expect = 8.0 * PI * PI / (2 * l + 1) as f64;
            assert!(((c.re - expect) / expect).abs() < 1e-10);
        }
        assert!(quad(3, 1, 2, 4, 1, 2).norm() < 1e-10);
        assert!(quad(3, 1, 2, 3, 1, 1).norm() < 1e-10);
    }

    #[test]
    fn y_bridge() {
        // exact up to the rounding of sqrt(4π)·sqrt(1/4π)
        assert!(check_y_bridge(0, 0, 0.4, 1.0).unwrap() <= f64::EPSILON);
        assert!(check_y_bridge(1, 0, 0.4, 0.0).unwrap() < 1e-14);
        let mut worst: f64 = 0.0;
        let mut k = 0u32;
        for l in 0..16usize {
            for m in -(l as isize)..=l as isize {
                k += 1;
                let t = (k as f64 * 0.618_033_988_75).fract() * PI;
                let p = (k as f64 * 0.414_213_562_37).fract() * TAU;
                worst = worst.max(check_y_bridge(l, m, t, p).unwrap());
            }
        }
        assert!(worst < 1e-12, "worst = {worst}");
    }

    #[test]
    fn euler_normalization() {
        let e = EulerAngles::new(-0.5, -0.3, 7.0);
        assert!((0.0..TAU).contains(&e.varphi()));
        assert!((0.0..=PI).contains(&e.vartheta()));
        assert!((0.0..TAU).contains(&e.omega()));
        // normalized angles describe the same rotation
        for l in 0..5usize {
            let li = l as isize;
            for m in -li..=li {
                for mp in -li..=li {
                    let raw = Complex64::from_polar(
                        small_d_factorial(li, m, mp, -0.3),
                        0.5 * m as f64 - 7.0 * mp as f64,
                    );
                    assert!((wigner_D(l, m, mp, &e).unwrap() - raw).norm() < 1e-12);
                }
            }
        }
    }

    fn fixture(bandlimit: usize) -> HarmonicCoeffs {
        HarmonicCoeffs::from_fn(bandlimit, |l, m| {
            let x = (l * 31 + (m + 40) as usize * 7) as f64;
            Complex64::new((x * 0.37).sin(), (x * 0.71).cos())
        })
    }

    #[test]
    fn rotation_identity_and_azimuthal_invariance() {
        let f = fixture(16);
        let same = rotate_coeffs(&f, &EulerAngles::identity());
        assert!(same.max_abs_diff(&f) < 1e-14);
        let mut dipole = HarmonicCoeffs::zeros(4);
        dipole.set(1, 0, Complex64::new(1.0, 0.0)).unwrap();
        let turned = rotate_coeffs(&dipole, &EulerAngles::new(PI / 2.0, 0.0, 0.0));
        assert!(turned.max_abs_diff(&dipole) < 1e-15);
    }

    #[test]
    fn rotation_is_unitary_and_invertible() {
        let f = fixture(16);
        let rho = EulerAngles::new(0.4, 2.2, 5.1);
        let g = rotate_coeffs(&f, &rho);
        for l in 0..16 {
            let a: f64 = f.degree(l).iter().map(|v| v.norm_sqr()).sum();
            let b: f64 = g.degree(l).iter().map(|v| v.norm_sqr()).sum();
            assert!((a - b).abs() / a < 1e-12);
        }
        let back = rotate_coeffs(&g, &rho.inverse());
        assert!(back.max_abs_diff(&f) < 1e-12);
    }

    #[test]
    fn rotating_the_z_dipole_tilts_it_towards_x() {
        // D_ρ f(x) = f(R⁻¹x): rotating Y_1^0 by ϑ about y gives a dipole along (sin ϑ, 0, cos ϑ)
        let beta = 0.8_f64;
        let mut dipole = HarmonicCoeffs::zeros(2);
        dipole.set(1, 0, Complex64::new(1.0, 0.0)).unwrap();
        let rotated = rotate_coeffs(&dipole, &EulerAngles::new(0.0, beta, 0.0));
        let grid = make_gauss_legendre_grid(2).unwrap();
        let map = inverse_sht(&rotated, &grid).unwrap();
        let k = (3.0 / (4.0 * PI)).sqrt();
        for (i, &t) in grid.thetas().iter().enumerate() {
            for j in 0..grid.n_phi() {
                let p = grid.phi(j);
                let dot = t.sin() * p.cos() * beta.sin() + t.cos() * beta.cos();
                assert!((map.get(i, j) - k * dot).norm() < 1e-14);
            }
        }
    }
}
