//! Orthonormalized associated Legendre functions.
//!
//! `plm(l, m, θ)` is normalized so that `Y_l^m(θ, φ) = plm(l, m, θ) e^{imφ}`
//! for `m >= 0`, Condon-Shortley phase included. Values are produced by the
//! three-term recursion in `l` at fixed `m`, seeded by the closed-form
//! sectoral term. The seed is carried as a mantissa and a log-scale so that
//! `sin^m θ` never underflows before the recursion has a chance to grow.

use std::f64::consts::PI;

const RESCALE_THRESHOLD: f64 = 1e150;

/// Position of `(l, m)`, `0 <= m <= l`, in a packed lower-triangular table.
#[inline]
pub fn tri_index(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// All `plm(l, m, θ)` for `0 <= m <= l < bandlimit`, packed by [`tri_index`].
pub fn plm_table(bandlimit: usize, theta: f64) -> Vec<f64> {
    let mut out = vec![0.0; bandlimit * (bandlimit + 1) / 2];
    let (s, c) = theta.sin_cos();
    let log_sin = s.abs().ln();
    // ln of sqrt((2m+1)/(4π) Π_{k<=m} (2k-1)/(2k)), accumulated in m
    let mut log_prod = 0.0;
    for m in 0..bandlimit {
        if m > 0 {
            let k = m as f64;
            log_prod += 0.5 * ((2.0 * k - 1.0) / (2.0 * k)).ln();
        }
        let mf = m as f64;
        let norm = ((2.0 * mf + 1.0) / (4.0 * PI)).sqrt();
        let mut log_scale = log_prod;
        if m > 0 {
            if s == 0.0 {
                continue;
            }
            log_scale += mf * log_sin;
        }
        let mut p_prev = 0.0;
        let mut p = if m % 2 == 0 { 1.0 } else { -1.0 };
        out[tri_index(m, m)] = p * norm * log_scale.exp();
        for l in m + 1..bandlimit {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = if l == m + 1 {
                0.0
            } else {
                let lm1 = lf - 1.0;
                ((lm1 * lm1 - mf * mf) / (4.0 * lm1 * lm1 - 1.0)).sqrt()
            };
            let next = a * (c * p - b * p_prev);
            p_prev = p;
            p = next;
            if p.abs() > RESCALE_THRESHOLD {
                p /= RESCALE_THRESHOLD;
                p_prev /= RESCALE_THRESHOLD;
                log_scale += RESCALE_THRESHOLD.ln();
            }
            out[tri_index(l, m)] = p * norm * log_scale.exp();
        }
    }
    out
}

/// Single value of the orthonormalized associated Legendre function, `m >= 0`.
pub fn plm(l: usize, m: usize, theta: f64) -> f64 {
    debug_assert!(m <= l);
    plm_table(l + 1, theta)[tri_index(l, m)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_degree_closed_forms() {
        let t = 0.83_f64;
        let (s, c) = t.sin_cos();
        let tab = plm_table(3, t);
        let k = 1.0 / (4.0 * PI);
        assert!((tab[tri_index(0, 0)] - k.sqrt()).abs() < 1e-15);
        assert!((tab[tri_index(1, 0)] - (3.0 * k).sqrt() * c).abs() < 1e-15);
        assert!((tab[tri_index(1, 1)] + (3.0 * k / 2.0).sqrt() * s).abs() < 1e-15);
        let p20 = (5.0 * k).sqrt() * 0.5 * (3.0 * c * c - 1.0);
        assert!((tab[tri_index(2, 0)] - p20).abs() < 1e-15);
        let p22 = (15.0 * k / 8.0).sqrt() * s * s;
        assert!((tab[tri_index(2, 2)] - p22).abs() < 1e-15);
    }

    #[test]
    fn stable_near_poles_to_high_degree() {
        for theta in [1e-9, PI - 1e-9, 1e-300, 0.0, PI] {
            let tab = plm_table(257, theta);
            assert!(tab.iter().all(|v| v.is_finite()), "non-finite at θ={theta}");
        }
        // zonal value at the pole is sqrt((2l+1)/4π)
        let tab = plm_table(257, 1e-9);
        let v = tab[tri_index(256, 0)];
        assert!((v - (513.0 / (4.0 * PI)).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn rescaling_preserves_deep_sectoral_values() {
        // sectoral seed at l=m=200, θ=0.3 is ~1e-105: check against logs directly
        let theta = 0.3_f64;
        let tab = plm_table(201, theta);
        let m = 200usize;
        let mut log_expect = 0.5 * ((2.0 * m as f64 + 1.0) / (4.0 * PI)).ln();
        for k in 1..=m {
            let k = k as f64;
            log_expect += 0.5 * ((2.0 * k - 1.0) / (2.0 * k)).ln();
        }
        log_expect += m as f64 * theta.sin().ln();
        let v = tab[tri_index(m, m)];
        assert!((v.abs().ln() - log_expect).abs() < 1e-10);
    }
}
