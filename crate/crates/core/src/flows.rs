//! The two unitary building blocks of every integrator: the momentum-space drift and the
//! coordinate-space kick, with cost accounting.

use std::ops::Sub;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::FourierTransform;
use crate::grid::Grid;
use crate::problem::Problem;
use crate::state::WaveState;

/// Counts of FFT pairs and diagonal exponentials applied during a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CostCounter {
    pub n_fft_pairs: u64,
    pub n_exponentials: u64,
}

impl Sub for CostCounter {
    type Output = CostCounter;

    fn sub(self, rhs: CostCounter) -> CostCounter {
        CostCounter {
            n_fft_pairs: self.n_fft_pairs - rhs.n_fft_pairs,
            n_exponentials: self.n_exponentials - rhs.n_exponentials,
        }
    }
}

/// Precomputed `e^{-i·θ·k_j²/2}` for one drift coefficient `θ`.
#[derive(Debug, Clone)]
pub struct DriftCache {
    theta: f64,
    phase_factors: Vec<Complex64>,
}

impl DriftCache {
    pub fn new(grid: &Grid, theta: f64) -> Self {
        let phase_factors = grid
            .wavenumbers()
            .iter()
            .map(|k| Complex64::from_polar(1.0, -0.5 * theta * k * k))
            .collect();
        Self {
            theta,
            phase_factors,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phase_factors(&self) -> &[Complex64] {
        &self.phase_factors
    }

    /// Rebuilds in place when `theta` differs from the cached value.
    pub fn ensure(&mut self, grid: &Grid, theta: f64) {
        if self.theta != theta || self.phase_factors.len() != grid.len() {
            *self = DriftCache::new(grid, theta);
        }
    }
}

/// What [`SpectralFlows::apply_drift`] does when a supplied cache was built for another `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CachePolicy {
    #[default]
    Rebuild,
    Strict,
}

/// FFT plans plus the cost counter for one propagation.
#[derive(Debug, Clone)]
pub struct SpectralFlows {
    grid: Arc<Grid>,
    ft: FourierTransform,
    counter: CostCounter,
    policy: CachePolicy,
}

impl SpectralFlows {
    pub fn new(grid: Arc<Grid>) -> Self {
        let ft = FourierTransform::new(grid.len());
        Self {
            grid,
            ft,
            counter: CostCounter::default(),
            policy: CachePolicy::Rebuild,
        }
    }

    pub fn with_policy(mut self, policy: CachePolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn counter(&self) -> CostCounter {
        self.counter
    }

    pub fn reset_counter(&mut self) {
        self.counter = CostCounter::default();
    }

    pub(crate) fn transform(&mut self) -> &mut FourierTransform {
        &mut self.ft
    }

    /// Counts a diagonal exponential applied outside this type (e.g. in a Hermite basis).
    pub(crate) fn record_exponential(&mut self) {
        self.counter.n_exponentials += 1;
    }

    /// `u ← F⁻¹ e^{-iθk²/2} F u`. Time is not advanced.
    pub fn apply_drift(
        &mut self,
        u: &mut WaveState,
        theta: f64,
        cache: Option<&mut DriftCache>,
    ) -> Result<()> {
        self.check_len(u.amplitudes().len())?;
        if !theta.is_finite() {
            return Err(Error::NonFinite("drift coefficient".into()));
        }
        let data = u.amplitudes_mut();
        self.ft.forward(data);
        match cache {
            Some(cache) => {
                if cache.theta != theta {
                    if self.policy == CachePolicy::Strict {
                        self.ft.inverse(data);
                        return Err(Error::DriftCacheMismatch {
                            cached: cache.theta,
                            requested: theta,
                        });
                    }
                    cache.ensure(&self.grid, theta);
                }
                for (z, w) in data.iter_mut().zip(&cache.phase_factors) {
                    *z *= w;
                }
            }
            None => {
                for (z, k) in data.iter_mut().zip(self.grid.wavenumbers()) {
                    *z *= Complex64::from_polar(1.0, -0.5 * theta * k * k);
                }
            }
        }
        self.ft.inverse(data);
        self.counter.n_fft_pairs += 1;
        self.counter.n_exponentials += 1;
        Ok(())
    }

    /// `u_i ← e^{-i·phase_i} u_i`
    pub fn apply_kick(&mut self, u: &mut WaveState, phase: &[f64]) -> Result<()> {
        self.check_len(u.amplitudes().len())?;
        self.check_len(phase.len())?;
        for (z, &p) in u.amplitudes_mut().iter_mut().zip(phase) {
            *z *= Complex64::from_polar(1.0, -p);
        }
        self.counter.n_exponentials += 1;
        Ok(())
    }

    fn check_len(&self, found: usize) -> Result<()> {
        if found != self.grid.len() {
            return Err(Error::LengthMismatch {
                expected: self.grid.len(),
                found,
            });
        }
        Ok(())
    }
}

/// Kick phase `dt_b·(εV_I(x, t) + σ(t)|u|²) + alpha_x2·x²/2` with time frozen at `t_frozen`.
///
/// `|u|²` is read from the current state; the kick leaves it invariant, so the resulting
/// phase multiplication is the exact flow of the nonlinear potential.
pub fn build_kick_phase(
    problem: &Problem,
    u: &WaveState,
    t_frozen: f64,
    dt_b: f64,
    alpha_x2: f64,
) -> Result<Vec<f64>> {
    let mut phase = Vec::with_capacity(u.amplitudes().len());
    build_kick_phase_into(problem, u, t_frozen, dt_b, alpha_x2, &mut phase)?;
    Ok(phase)
}

pub(crate) fn build_kick_phase_into(
    problem: &Problem,
    u: &WaveState,
    t_frozen: f64,
    dt_b: f64,
    alpha_x2: f64,
    phase: &mut Vec<f64>,
) -> Result<()> {
    let grid = u.grid();
    phase.clear();
    let half_alpha = 0.5 * alpha_x2;
    if dt_b == 0.0 {
        phase.extend(grid.points().iter().map(|&x| half_alpha * x * x));
        return Ok(());
    }
    let sigma = problem.sigma().eval(t_frozen);
    let perturbation = problem.perturbation();
    let skip_v = perturbation.is_zero();
    for (&x, z) in grid.points().iter().zip(u.amplitudes()) {
        let v = if skip_v { 0.0 } else { perturbation.eval(x, t_frozen) };
        phase.push(dt_b * (v + sigma * z.norm_sqr()) + half_alpha * x * x);
    }
    if phase.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite("kick phase".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use crate::problem::TimeFunction;
    use approx::assert_abs_diff_eq;

    fn setup() -> (Arc<Grid>, SpectralFlows) {
        let grid = Arc::new(Grid::new(-10.0, 10.0, 1024).unwrap());
        (grid.clone(), SpectralFlows::new(grid))
    }

    fn max_diff(a: &WaveState, b: &WaveState) -> f64 {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn zero_drift_is_identity() {
        let (grid, mut flows) = setup();
        let u0 = WaveState::from_fn(grid, |x| analytic::coherent_state(x, 1.0, 0.3));
        let mut u = u0.clone();
        flows.apply_drift(&mut u, 0.0, None).unwrap();
        assert!(max_diff(&u, &u0) < 1e-15);
        assert_eq!(
            flows.counter(),
            CostCounter {
                n_fft_pairs: 1,
                n_exponentials: 1
            }
        );
    }

    #[test]
    fn plane_wave_picks_up_global_phase() {
        let (grid, mut flows) = setup();
        let k1 = grid.k_unit();
        let u0 = WaveState::from_fn(grid.clone(), |x| Complex64::from_polar(1.0, k1 * x));
        let mut u = u0.clone();
        let t = 0.8;
        flows.apply_drift(&mut u, t, None).unwrap();
        let phase = Complex64::from_polar(1.0, -t * k1 * k1 / 2.0);
        for (a, b) in u.amplitudes().iter().zip(u0.amplitudes()) {
            assert!((a - phase * b).norm() < 1e-13);
        }
    }

    #[test]
    fn free_gaussian_spreads_analytically() {
        let (grid, mut flows) = setup();
        let mut u = WaveState::from_fn(grid.clone(), |x| analytic::free_gaussian(x, 0.0));
        flows.apply_drift(&mut u, 1.0, None).unwrap();
        let exact = WaveState::from_fn(grid, |x| analytic::free_gaussian(x, 1.0));
        assert!(u.error_l2(&exact).unwrap() < 1e-10);
    }

    #[test]
    fn drifts_add() {
        let (grid, mut flows) = setup();
        let u0 = WaveState::from_fn(grid.clone(), |x| analytic::coherent_state(x, 2.0, 0.0));
        let mut a = u0.clone();
        flows.apply_drift(&mut a, 0.37, None).unwrap();
        flows.apply_drift(&mut a, -1.2, None).unwrap();
        let mut b = u0;
        let mut cache = DriftCache::new(&grid, 0.37 - 1.2);
        flows.apply_drift(&mut b, 0.37 - 1.2, Some(&mut cache)).unwrap();
        assert!(max_diff(&a, &b) < 1e-13);
    }

    #[test]
    fn cache_mismatch_policy() {
        let (grid, flows) = setup();
        let u0 = WaveState::from_fn(grid.clone(), |x| analytic::coherent_state(x, 0.0, 0.0));

        let mut rebuild = flows.clone();
        let mut cache = DriftCache::new(&grid, 0.5);
        let mut u = u0.clone();
        rebuild.apply_drift(&mut u, 0.25, Some(&mut cache)).unwrap();
        assert_eq!(cache.theta(), 0.25);

        let mut strict = flows.with_policy(CachePolicy::Strict);
        let mut cache = DriftCache::new(&grid, 0.5);
        let mut u = u0.clone();
        let err = strict.apply_drift(&mut u, 0.25, Some(&mut cache)).unwrap_err();
        assert_eq!(
            err,
            Error::DriftCacheMismatch {
                cached: 0.5,
                requested: 0.25
            }
        );
        assert!(max_diff(&u, &u0) < 1e-15);
    }

    #[test]
    fn cached_factors_are_unitary() {
        let grid = Grid::new(-30.0, 30.0, 2048).unwrap();
        let cache = DriftCache::new(&grid, -0.731);
        for w in cache.phase_factors() {
            assert_abs_diff_eq!(w.norm(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn kicks() {
        let (grid, mut flows) = setup();
        let problem = Problem::harmonic(grid.clone()).with_sigma(TimeFunction::Constant(3.0));
        let u0 = WaveState::from_fn(grid.clone(), |x| analytic::coherent_state(x, 1.0, 0.0));

        let mut u = u0.clone();
        flows.apply_kick(&mut u, &vec![0.0; grid.len()]).unwrap();
        assert_eq!(u, u0);

        let c = 0.7;
        flows.apply_kick(&mut u, &vec![c; grid.len()]).unwrap();
        for (a, b) in u.amplitudes().iter().zip(u0.amplitudes()) {
            assert!((a - Complex64::from_polar(1.0, -c) * b).norm() < 1e-15);
            assert_abs_diff_eq!(a.norm(), b.norm(), epsilon = 1e-15);
        }

        let mut u = u0.clone();
        let t = 0.3;
        let forward = build_kick_phase(&problem, &u, 0.0, t, t).unwrap();
        flows.apply_kick(&mut u, &forward).unwrap();
        let backward = build_kick_phase(&problem, &u, 0.0, -t, -t).unwrap();
        flows.apply_kick(&mut u, &backward).unwrap();
        assert!(max_diff(&u, &u0) < 1e-15);

        assert!(flows.apply_kick(&mut u, &[0.0; 3]).is_err());
    }

    #[test]
    fn kick_phase_cases() {
        let (grid, _) = setup();
        let sigma = 2.0;
        let problem = Problem::harmonic(grid.clone()).with_sigma(TimeFunction::Constant(sigma));
        let u = WaveState::from_fn(grid.clone(), |x| analytic::coherent_state(x, 0.5, 0.0));

        let zero = build_kick_phase(&problem, &u, 0.0, 0.0, 0.0).unwrap();
        assert!(zero.iter().all(|&p| p == 0.0));

        let h = 0.2;
        let f = (h / 2.0f64).tan();
        let phase = build_kick_phase(&problem, &u, 0.0, h / 2.0, f).unwrap();
        for ((p, x), z) in phase.iter().zip(grid.points()).zip(u.amplitudes()) {
            assert_abs_diff_eq!(*p, h / 2.0 * sigma * z.norm_sqr() + f * x * x / 2.0, epsilon = 1e-15);
        }

        let linear = Problem::harmonic(grid.clone());
        let phase = build_kick_phase(&linear, &u, 0.0, 0.9, 1.0).unwrap();
        for (p, x) in phase.iter().zip(grid.points()) {
            assert_eq!(*p, x * x / 2.0);
        }
    }

    #[test]
    fn non_finite_potential_is_rejected() {
        let (grid, _) = setup();
        let problem = Problem::harmonic(grid.clone()).with_perturbation(
            crate::problem::Perturbation::Custom(Arc::new(|x, _| 1.0 / x)),
        );
        let u = WaveState::from_fn(grid, |x| analytic::coherent_state(x, 0.0, 0.0));
        assert!(build_kick_phase(&problem, &u, 0.0, 0.1, 0.0).is_err());
    }
}
