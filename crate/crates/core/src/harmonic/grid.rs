use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Colatitude quadrature rule of a [`SphereGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingRule {
    /// Gauss-Legendre nodes in `cos θ`; `n` rings are exact to polynomial degree `2n - 1`.
    GaussLegendre,
    /// Fejér's first rule on equiangular midpoint rings; `n` rings are exact to degree `n - 1`.
    Fejer,
}

/// Iso-latitude sampling of the sphere: `n_theta` rings of `n_phi` uniform
/// longitudes, with one quadrature weight (in `cos θ`) per ring.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    rule: RingRule,
    thetas: Vec<f64>,
    weights: Vec<f64>,
    n_phi: usize,
}

impl SphereGrid {
    /// Gauss-Legendre grid with `L` rings and `2L - 1` longitudes, exact for bandlimit `L`.
    pub fn gauss_legendre(bandlimit: usize) -> Result<Self> {
        if bandlimit == 0 {
            return Err(Error::InvalidBandlimit { found: 0, min: 1 });
        }
        let (nodes, weights) = gauss_legendre_rule(bandlimit);
        // nodes come out with cos θ descending, i.e. θ ascending
        let thetas = nodes.iter().map(|x| x.acos()).collect();
        Ok(Self {
            rule: RingRule::GaussLegendre,
            thetas,
            weights,
            n_phi: 2 * bandlimit - 1,
        })
    }

    /// Equiangular grid with rings at `θ_i = (i + 1/2) π / n_theta` and Fejér weights.
    pub fn fejer(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta == 0 || n_phi == 0 {
            return Err(Error::InvalidInput("grid dimensions must be positive".into()));
        }
        let n = n_theta as f64;
        let thetas: Vec<f64> = (0..n_theta).map(|i| (i as f64 + 0.5) * PI / n).collect();
        let weights = thetas
            .iter()
            .map(|&t| {
                let tail: f64 = (1..=n_theta / 2)
                    .map(|j| {
                        let j = j as f64;
                        (2.0 * j * t).cos() / (4.0 * j * j - 1.0)
                    })
                    .sum();
                2.0 / n * (1.0 - 2.0 * tail)
            })
            .collect();
        Ok(Self {
            rule: RingRule::Fejer,
            thetas,
            weights,
            n_phi,
        })
    }

    pub fn rule(&self) -> RingRule {
        self.rule
    }

    pub fn n_theta(&self) -> usize {
        self.thetas.len()
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn phi(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.n_phi as f64
    }

    pub fn phis(&self) -> Vec<f64> {
        (0..self.n_phi).map(|k| self.phi(k)).collect()
    }

    pub fn len(&self) -> usize {
        self.thetas.len() * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest bandlimit for which the forward transform on this grid is exact.
    pub fn exact_bandlimit(&self) -> usize {
        let n = self.thetas.len();
        let from_rings = match self.rule {
            RingRule::GaussLegendre => n,
            RingRule::Fejer => n.div_ceil(2),
        };
        from_rings.min(self.n_phi.div_ceil(2))
    }

    pub fn check_bandlimit(&self, bandlimit: usize) -> Result<()> {
        let exact = self.exact_bandlimit();
        if bandlimit > exact {
            return Err(Error::UndersampledGrid {
                requested: bandlimit,
                exact,
            });
        }
        Ok(())
    }

    /// Area element for sample `(i, k)`: ring weight times longitude spacing.
    pub fn area_weight(&self, ring: usize) -> f64 {
        self.weights[ring] * 2.0 * PI / self.n_phi as f64
    }
}

/// Builds the default exact grid for bandlimit `L`.
pub fn make_gauss_legendre_grid(bandlimit: usize) -> Result<SphereGrid> {
    SphereGrid::gauss_legendre(bandlimit)
}

/// `n`-point Gauss-Legendre nodes (descending) and weights on `[-1, 1]`.
pub fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Samples of a signal on a [`SphereGrid`], stored ring-major (`θ` rows, `φ` columns).
#[derive(Debug, Clone, PartialEq)]
pub struct SphereMap {
    grid: SphereGrid,
    samples: Vec<Complex64>,
}

impl SphereMap {
    pub fn new(grid: SphereGrid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} samples for a {}x{} grid",
                samples.len(),
                grid.n_theta(),
                grid.n_phi()
            )));
        }
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: SphereGrid) -> Self {
        let samples = vec![Complex64::new(0.0, 0.0); grid.len()];
        Self { grid, samples }
    }

    /// Samples a function of `(θ, φ)` on the grid.
    pub fn from_fn(grid: SphereGrid, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let mut samples = Vec::with_capacity(grid.len());
        for &theta in grid.thetas() {
            for k in 0..grid.n_phi() {
                samples.push(f(theta, grid.phi(k)));
            }
        }
        Self { grid, samples }
    }

    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn ring(&self, i: usize) -> &[Complex64] {
        let n = self.grid.n_phi();
        &self.samples[i * n..(i + 1) * n]
    }

    pub fn get(&self, ring: usize, k: usize) -> Complex64 {
        self.samples[ring * self.grid.n_phi() + k]
    }

    /// Quadrature of `|f|²` over the sphere.
    pub fn energy(&self) -> f64 {
        (0..self.grid.n_theta())
            .map(|i| {
                self.grid.area_weight(i) * self.ring(i).iter().map(|v| v.norm_sqr()).sum::<f64>()
            })
            .sum()
    }

    /// Quadrature of `f · conj(g)` over the sphere.
    pub fn inner(&self, other: &SphereMap) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::DimensionMismatch("maps live on different grids".into()));
        }
        Ok((0..self.grid.n_theta())
            .map(|i| {
                let s: Complex64 = self
                    .ring(i)
                    .iter()
                    .zip(other.ring(i))
                    .map(|(a, b)| a * b.conj())
                    .sum();
                s * self.grid.area_weight(i)
            })
            .sum())
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.samples.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.samples.iter().map(|v| v.re).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn legendre_poly(n: usize, x: f64) -> f64 {
        legendre_with_derivative(n, x).0
    }

    #[test]
    fn one_point_rule() {
        let g = make_gauss_legendre_grid(1).unwrap();
        assert_eq!(g.n_theta(), 1);
        assert_eq!(g.n_phi(), 1);
        assert!((g.thetas()[0] - PI / 2.0).abs() < 1e-15);
        assert!((g.weights()[0] - 2.0).abs() < 1e-15);
        assert_eq!(g.phi(0), 0.0);
    }

    #[test]
    fn two_point_rule() {
        let g = make_gauss_legendre_grid(2).unwrap();
        let c: Vec<f64> = g.thetas().iter().map(|t| t.cos()).collect();
        let r = 1.0 / 3f64.sqrt();
        assert!((c[0] - r).abs() < 1e-15 && (c[1] + r).abs() < 1e-15);
        assert!((g.weights()[0] - 1.0).abs() < 1e-15);
        assert!((g.weights()[1] - 1.0).abs() < 1e-15);
        assert_eq!(g.n_phi(), 3);
    }

    #[test]
    fn weights_sum_to_two() {
        let g = make_gauss_legendre_grid(64).unwrap();
        let sum: f64 = g.weights().iter().sum();
        assert!((sum - 2.0).abs() < 1e-14, "sum = {sum}");
        assert!(g.weights().iter().all(|&w| w > 0.0));
        assert!(g.thetas().iter().all(|&t| t > 0.0 && t < PI));
    }

    #[test]
    fn zero_bandlimit_rejected() {
        assert!(matches!(
            make_gauss_legendre_grid(0),
            Err(Error::InvalidBandlimit { .. })
        ));
    }

    #[test]
    fn even_legendre_integrated_exactly() {
        // ∫ P_n = 2 δ_{n0}
        for l in [1usize, 8, 33, 64] {
            let g = make_gauss_legendre_grid(l).unwrap();
            for n in (0..=2 * l - 2).step_by(2) {
                let q: f64 = g
                    .thetas()
                    .iter()
                    .zip(g.weights())
                    .map(|(t, w)| w * legendre_poly(n, t.cos()))
                    .sum();
                let expect = if n == 0 { 2.0 } else { 0.0 };
                assert!((q - expect).abs() < 1e-12, "L={l} n={n}: {q}");
            }
            assert_eq!(g.exact_bandlimit(), l);
        }
    }

    #[test]
    fn fejer_rule_is_exact_to_its_degree() {
        let g = SphereGrid::fejer(17, 17).unwrap();
        for n in 0..17 {
            let q: f64 = g
                .thetas()
                .iter()
                .zip(g.weights())
                .map(|(t, w)| w * legendre_poly(n, t.cos()))
                .sum();
            let expect = if n == 0 { 2.0 } else { 0.0 };
            assert!((q - expect).abs() < 1e-13, "n={n}: {q}");
        }
        assert_eq!(g.exact_bandlimit(), 9);
    }

    #[test]
    fn map_sample_count_checked() {
        let g = make_gauss_legendre_grid(3).unwrap();
        assert!(SphereMap::new(g.clone(), vec![Complex64::default(); 14]).is_err());
        assert_eq!(SphereMap::zeros(g).samples().len(), 15);
    }
}
