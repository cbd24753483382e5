use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::FourierTransform;
use crate::grid::Grid;
use crate::problem::Problem;

/// How a discrete 2-norm is weighted.
///
/// `Mesh` multiplies the sum of squares by `dx`, which approximates the continuous L2 norm and
/// is what every norm in this crate returns by default. `Plain` is the bare Euclidean vector norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormWeighting {
    #[default]
    Mesh,
    Plain,
}

/// Sampled wavefunction `u_i ≈ ψ(x_i, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    grid: Arc<Grid>,
    amplitudes: Vec<Complex64>,
    time: f64,
}

impl WaveState {
    pub fn new(grid: Arc<Grid>, amplitudes: Vec<Complex64>, time: f64) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                found: amplitudes.len(),
            });
        }
        Ok(Self {
            grid,
            amplitudes,
            time,
        })
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> Complex64) -> Self {
        let amplitudes = grid.points().iter().map(|&x| f(x)).collect();
        Self {
            grid,
            amplitudes,
            time: 0.0,
        }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        Self {
            grid,
            amplitudes: vec![Complex64::new(0.0, 0.0); n],
            time: 0.0,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn scale(&mut self, factor: f64) {
        for z in &mut self.amplitudes {
            *z *= factor;
        }
    }

    /// Rescales to unit mesh-weighted norm. A zero state is left untouched.
    pub fn normalize(&mut self) {
        let n = self.norm_l2();
        if n > 0.0 {
            self.scale(1.0 / n);
        }
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    /// `sqrt(dx · Σ|u_i|²)`
    pub fn norm_l2(&self) -> f64 {
        self.norm_with(NormWeighting::Mesh)
    }

    pub fn norm_with(&self, weighting: NormWeighting) -> f64 {
        let sum: f64 = self.amplitudes.iter().map(|z| z.norm_sqr()).sum();
        (weight(&self.grid, weighting) * sum).sqrt()
    }

    /// Mesh-weighted L2 distance between two states on the same grid.
    pub fn error_l2(&self, other: &WaveState) -> Result<f64> {
        self.error_with(other, NormWeighting::Mesh)
    }

    pub fn error_with(&self, other: &WaveState, weighting: NormWeighting) -> Result<f64> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        let sum: f64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((weight(&self.grid, weighting) * sum).sqrt())
    }

    /// Total energy at time `t`, the kinetic part evaluated spectrally on the grid wavenumbers.
    pub fn energy(&self, problem: &Problem, t: f64) -> f64 {
        let mut ft = FourierTransform::new(self.grid.len());
        self.energy_with(problem, t, &mut ft)
    }

    pub(crate) fn energy_with(&self, problem: &Problem, t: f64, ft: &mut FourierTransform) -> f64 {
        let grid = &self.grid;
        let n = grid.len() as f64;
        let mut spectrum = self.amplitudes.clone();
        ft.forward(&mut spectrum);
        // Parseval: dx·Σ|∂x u|² = dx/n · Σ k²|û|²
        let kinetic: f64 = spectrum
            .iter()
            .zip(grid.wavenumbers())
            .map(|(z, k)| k * k * z.norm_sqr())
            .sum::<f64>()
            / n
            / (2.0 * problem.mu());

        let half_mu_w2 = 0.5 * problem.mu() * problem.omega_sq().eval(t);
        let sigma = problem.sigma().eval(t);
        let potential: f64 = grid
            .points()
            .iter()
            .zip(&self.amplitudes)
            .map(|(&x, z)| {
                let rho = z.norm_sqr();
                (half_mu_w2 * x * x + problem.perturbation().eval(x, t)) * rho + 0.5 * sigma * rho * rho
            })
            .sum();
        grid.dx() * (kinetic + potential)
    }
}

fn weight(grid: &Grid, weighting: NormWeighting) -> f64 {
    match weighting {
        NormWeighting::Mesh => grid.dx(),
        NormWeighting::Plain => 1.0,
    }
}
