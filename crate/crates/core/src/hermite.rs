//! Hermite-function basis propagator for the constant-frequency oscillator on an equidistant grid.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::state::WaveState;

/// Boundary magnitude above which a basis function no longer counts as contained in the grid.
const CONTAINMENT_LIMIT: f64 = 1e-4;

/// First `m` oscillator eigenfunctions sampled on a grid, `K[n][j] = ψ_n(x_j)`.
#[derive(Debug, Clone)]
pub struct HermiteBasis {
    grid: Arc<Grid>,
    m: usize,
    /// Row-major `m × n`.
    k: Vec<f64>,
    energies: Vec<f64>,
}

impl HermiteBasis {
    /// Unit oscillator `(p² + x²)/2`: `h_n(x) = H_n(x) e^{-x²/2} / (π^{1/4} √(2ⁿ n!))`, `E_n = n + 1/2`.
    pub fn new(m: usize, grid: Arc<Grid>) -> Result<Self> {
        Self::for_oscillator(m, grid, 1.0, 1.0)
    }

    /// Eigenbasis of `p²/(2μ) + μω²x²/2`: `ψ_n(x) = (μω)^{1/4} h_n(√(μω) x)`, `E_n = ω(n + 1/2)`.
    pub fn for_oscillator(m: usize, grid: Arc<Grid>, mu: f64, omega: f64) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidParameter("basis size must be at least 1".into()));
        }
        if !(mu > 0.0 && omega > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need positive mass and frequency, got mu = {mu}, omega = {omega}"
            )));
        }
        let n = grid.len();
        let scale = (mu * omega).sqrt();
        let amplitude = scale.sqrt();
        let mut k = vec![0.0; m * n];
        let mut rows = HermiteRows::new(&grid, scale);
        for row in 0..m {
            let values = rows.next_row();
            for (dst, v) in k[row * n..(row + 1) * n].iter_mut().zip(values) {
                *dst = amplitude * v;
            }
        }
        let basis = Self {
            m,
            energies: (0..m).map(|i| omega * (i as f64 + 0.5)).collect(),
            grid,
            k,
        };
        let edge = basis.boundary_magnitude(m - 1);
        if edge > 1e-14 {
            log::warn!("Hermite function {} is {edge:e} at the grid boundary", m - 1);
        }
        Ok(basis)
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.grid.len();
        &self.k[i * n..(i + 1) * n]
    }

    fn boundary_magnitude(&self, i: usize) -> f64 {
        let row = self.row(i);
        row[0].abs().max(row[row.len() - 1].abs())
    }

    /// Max-entry defect of `dx·K·Kᵀ` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let dx = self.grid.dx();
        let mut defect: f64 = 0.0;
        for i in 0..self.m {
            for j in 0..=i {
                let dot: f64 = self.row(i).iter().zip(self.row(j)).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((dx * dot - target).abs());
            }
        }
        defect
    }

    /// `c = dx·K·u`
    pub fn coefficients(&self, u: &[Complex64]) -> Vec<Complex64> {
        let dx = self.grid.dx();
        (0..self.m)
            .map(|i| {
                let sum: Complex64 = self.row(i).iter().zip(u).map(|(k, z)| z * k).sum();
                sum * dx
            })
            .collect()
    }

    /// `u = Kᵀ·c`
    pub fn synthesize(&self, coefficients: &[Complex64], out: &mut [Complex64]) {
        out.fill(Complex64::new(0.0, 0.0));
        for (i, c) in coefficients.iter().enumerate() {
            for (dst, k) in out.iter_mut().zip(self.row(i)) {
                *dst += c * k;
            }
        }
    }

    /// `u ← Kᵀ e^{-i·dt·E} (dx·K·u)`. Components outside the span are discarded.
    pub fn propagate(&self, u: &mut WaveState, dt: f64) -> Result<()> {
        if !self.grid.same_as(u.grid()) {
            return Err(Error::GridMismatch);
        }
        let mut c = self.coefficients(u.amplitudes());
        for (c, e) in c.iter_mut().zip(&self.energies) {
            *c *= Complex64::from_polar(1.0, -dt * e);
        }
        self.synthesize(&c, u.amplitudes_mut());
        Ok(())
    }

    /// Mesh-weighted norm of `u - Kᵀ(dx·K·u)`.
    pub fn projection_residual(&self, u: &WaveState) -> f64 {
        let c = self.coefficients(u.amplitudes());
        let mut projected = vec![Complex64::new(0.0, 0.0); u.amplitudes().len()];
        self.synthesize(&c, &mut projected);
        let sum: f64 = u
            .amplitudes()
            .iter()
            .zip(&projected)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        (self.grid.dx() * sum).sqrt()
    }
}

/// Normalized three-term recursion `h_{n+1} = x√(2/(n+1)) h_n - √(n/(n+1)) h_{n-1}`,
/// which stays O(1) where the raw Hermite polynomials overflow.
struct HermiteRows {
    xs: Vec<f64>,
    prev: Vec<f64>,
    curr: Vec<f64>,
    index: usize,
}

impl HermiteRows {
    fn new(grid: &Grid, scale: f64) -> Self {
        let xs: Vec<f64> = grid.points().iter().map(|x| x * scale).collect();
        let curr = xs.iter().map(|x| PI.powf(-0.25) * (-0.5 * x * x).exp()).collect();
        Self {
            prev: vec![0.0; xs.len()],
            xs,
            curr,
            index: 0,
        }
    }

    /// Returns `h_index` and advances.
    fn next_row(&mut self) -> Vec<f64> {
        let out = self.curr.clone();
        let n = self.index as f64;
        let a = (2.0 / (n + 1.0)).sqrt();
        let b = (n / (n + 1.0)).sqrt();
        let next: Vec<f64> = self
            .xs
            .iter()
            .zip(self.curr.iter().zip(&self.prev))
            .map(|(x, (c, p))| x * a * c - b * p)
            .collect();
        self.prev = std::mem::replace(&mut self.curr, next);
        self.index += 1;
        out
    }
}

/// Result of [`required_basis_size`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisSize {
    pub m: usize,
    pub residual: f64,
}

/// Smallest `M` whose unit-oscillator basis reproduces `u0` to `tolerance` (mesh-weighted).
///
/// The search stops with [`Error::BasisCeiling`] once the next basis function is no longer
/// contained in the grid (boundary value above `1e-4`) or would exceed the grid's Nyquist
/// wavenumber.
pub fn required_basis_size(u0: &WaveState, tolerance: f64) -> Result<BasisSize> {
    if !(tolerance > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tolerance}")));
    }
    let grid = u0.grid();
    let dx = grid.dx();
    let k_max = grid.k_unit() * (grid.len() / 2) as f64;
    let mut residual: Vec<Complex64> = u0.amplitudes().to_vec();
    let mut rows = HermiteRows::new(grid, 1.0);
    let residual_norm =
        |r: &[Complex64]| (dx * r.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
    let mut achieved = residual_norm(&residual);

    for m in 1..=grid.len() {
        let row = rows.next_row();
        let edge = row[0].abs().max(row[row.len() - 1].abs());
        let turning = (2.0 * (m - 1) as f64 + 1.0).sqrt();
        if edge > CONTAINMENT_LIMIT || turning >= k_max {
            return Err(Error::BasisCeiling {
                ceiling: m - 1,
                residual: achieved,
            });
        }
        let c: Complex64 = row
            .iter()
            .zip(u0.amplitudes())
            .map(|(k, z)| z * k)
            .sum::<Complex64>()
            * dx;
        for (r, k) in residual.iter_mut().zip(&row) {
            *r -= c * k;
        }
        achieved = residual_norm(&residual);
        if achieved <= tolerance {
            return Ok(BasisSize { m, residual: achieved });
        }
    }
    Err(Error::BasisCeiling {
        ceiling: grid.len(),
        residual: achieved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::coherent_state;
    use approx::assert_abs_diff_eq;

    fn grid(a: f64, n: usize) -> Arc<Grid> {
        Arc::new(Grid::new(-a, a, n).unwrap())
    }

    #[test]
    fn first_functions() {
        let g = grid(10.0, 512);
        let basis = HermiteBasis::new(2, g.clone()).unwrap();
        let origin = g.len() / 2;
        assert_eq!(g.points()[origin], 0.0);
        assert_abs_diff_eq!(basis.row(0)[origin], 0.751_125_544_464_942_5, epsilon = 1e-15);
        assert_eq!(basis.row(1)[origin], 0.0);
        for (j, &x) in g.points().iter().enumerate() {
            assert_abs_diff_eq!(basis.row(1)[j], 2f64.sqrt() * x * basis.row(0)[j], epsilon = 1e-15);
        }
    }

    #[test]
    fn discrete_orthonormality() {
        let basis = HermiteBasis::new(30, grid(10.0, 512)).unwrap();
        assert!(basis.orthonormality_defect() < 1e-8);
    }

    #[test]
    fn large_basis_stays_finite() {
        let basis = HermiteBasis::new(200, grid(30.0, 2048)).unwrap();
        assert!(basis.k.iter().all(|v| v.is_finite()));
        assert!(basis.orthonormality_defect() < 1e-8);
    }

    #[test]
    fn eigenstate_gets_phase() {
        let g = grid(10.0, 512);
        let basis = HermiteBasis::new(5, g.clone()).unwrap();
        let mut u = WaveState::from_fn(g.clone(), |x| coherent_state(x, 0.0, 0.0));
        basis.propagate(&mut u, 2.7).unwrap();
        let exact = WaveState::from_fn(g, |x| coherent_state(x, 0.0, 2.7));
        assert!(u.error_l2(&exact).unwrap() < 1e-12);
    }

    #[test]
    fn coherent_state_with_small_basis() {
        let g = grid(10.0, 512);
        let exact = WaveState::from_fn(g.clone(), |x| coherent_state(x, 0.1, 10.0));
        let mut u = WaveState::from_fn(g.clone(), |x| coherent_state(x, 0.1, 0.0));
        HermiteBasis::new(8, g).unwrap().propagate(&mut u, 10.0).unwrap();
        assert!(u.error_l2(&exact).unwrap() < 1e-10);
    }

    #[test]
    fn displaced_state_needs_larger_basis() {
        let g = grid(10.0, 512);
        let exact = WaveState::from_fn(g.clone(), |x| coherent_state(x, 2.0, 10.0));
        let start = WaveState::from_fn(g.clone(), |x| coherent_state(x, 2.0, 0.0));
        let error = |m| {
            let mut u = start.clone();
            HermiteBasis::new(m, g.clone()).unwrap().propagate(&mut u, 10.0).unwrap();
            u.error_l2(&exact).unwrap()
        };
        assert!(error(29) < 1e-10);
        assert!(error(20) > 1e-8);
    }

    #[test]
    fn basis_size_search() {
        let g = grid(10.0, 512);
        let ground = WaveState::from_fn(g.clone(), |x| coherent_state(x, 0.0, 0.0));
        assert_eq!(required_basis_size(&ground, 1e-12).unwrap().m, 1);
        let near = WaveState::from_fn(g.clone(), |x| coherent_state(x, 0.1, 0.0));
        assert_eq!(required_basis_size(&near, 1e-11).unwrap().m, 8);
        let far = WaveState::from_fn(g.clone(), |x| coherent_state(x, 2.0, 0.0));
        assert_eq!(required_basis_size(&far, 1e-11).unwrap().m, 29);

        let outside = WaveState::from_fn(g, |x| coherent_state(x, 6.0, 0.0));
        match required_basis_size(&outside, 1e-11) {
            Err(Error::BasisCeiling { ceiling, residual }) => {
                assert!(ceiling > 20 && residual > 1e-11);
            }
            other => panic!("expected ceiling, got {other:?}"),
        }
        assert!(required_basis_size(&ground, 0.0).is_err());
    }

    #[test]
    fn scaled_oscillator_basis() {
        let g = grid(10.0, 512);
        let (mu, omega) = (2.0, 1.5);
        let basis = HermiteBasis::for_oscillator(12, g, mu, omega).unwrap();
        assert!(basis.orthonormality_defect() < 1e-12);
        assert_eq!(basis.energies()[3], omega * 3.5);
    }
}
