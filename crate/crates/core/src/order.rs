//! Empirical convergence orders from error-versus-step-size data.

use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::propagator::{MethodSpec, Propagator};
use crate::state::WaveState;

/// Errors below this are treated as round-off and left out of fits.
pub const ROUND_OFF_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSample {
    pub h: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderFit {
    pub slope: f64,
    pub intercept: f64,
    /// Samples that entered the fit.
    pub used: Vec<ErrorSample>,
    pub excluded: usize,
}

/// Geometric step counts `n₀·2^{k/2}`, `k = 0..points`, rounded and deduplicated.
pub fn geometric_step_counts(n0: usize, points: usize) -> Vec<usize> {
    let mut counts: Vec<usize> = (0..points)
        .map(|k| (n0 as f64 * 2f64.powf(0.5 * k as f64)).round() as usize)
        .collect();
    counts.dedup();
    counts
}

/// Least-squares slope of `log error` against `log h`, ignoring samples below `floor`.
pub fn fit_order(samples: &[ErrorSample], floor: f64) -> Result<OrderFit> {
    let used: Vec<ErrorSample> = samples
        .iter()
        .copied()
        .filter(|s| s.error.is_finite() && s.error >= floor && s.h > 0.0)
        .collect();
    let excluded = samples.len() - used.len();
    if used.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "only {} samples above the error floor {floor:e}",
            used.len()
        )));
    }
    let n = used.len() as f64;
    let xs: Vec<f64> = used.iter().map(|s| s.h.ln()).collect();
    let ys: Vec<f64> = used.iter().map(|s| s.error.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all step sizes are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(OrderFit {
        slope,
        intercept: my - slope * mx,
        used,
        excluded,
    })
}

/// Errors at `t_final` of `method` for each step count, measured against `reference`.
pub fn error_samples(
    problem: &Problem,
    u0: &WaveState,
    method: &MethodSpec,
    t_final: f64,
    step_counts: &[usize],
    reference: &WaveState,
) -> Result<Vec<ErrorSample>> {
    let span = t_final - u0.time();
    step_counts
        .iter()
        .map(|&n| {
            let mut u = u0.clone();
            Propagator::new(problem.clone(), method.clone())?.propagate(&mut u, t_final, n)?;
            Ok(ErrorSample {
                h: span.abs() / n as f64,
                error: u.error_l2(reference)?,
            })
        })
        .collect()
}

/// Measured global order of `method` on `problem`.
pub fn empirical_order(
    problem: &Problem,
    u0: &WaveState,
    method: &MethodSpec,
    t_final: f64,
    step_counts: &[usize],
    reference: &WaveState,
) -> Result<OrderFit> {
    let samples = error_samples(problem, u0, method, t_final, step_counts, reference)?;
    fit_order(&samples, ROUND_OFF_FLOOR)
}

/// Two-term model `C₁εh^r + C₂ε²h^p` for near-integrable problems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearIntegrableFit {
    pub r: u32,
    pub p: u32,
    pub c1: f64,
    pub c2: f64,
    /// Root-mean-square relative misfit.
    pub misfit: f64,
}

impl NearIntegrableFit {
    pub fn predict(&self, eps: f64, h: f64) -> f64 {
        self.c1 * eps * h.powi(self.r as i32) + self.c2 * eps * eps * h.powi(self.p as i32)
    }
}

/// Fits the two-term model to `(ε, sample)` pairs by least squares in relative error.
pub fn fit_near_integrable(samples: &[(f64, ErrorSample)], r: u32, p: u32) -> Result<NearIntegrableFit> {
    let used: Vec<&(f64, ErrorSample)> = samples
        .iter()
        .filter(|(_, s)| s.error.is_finite() && s.error >= ROUND_OFF_FLOOR)
        .collect();
    if used.len() < 3 {
        return Err(Error::InvalidParameter("need at least three samples above the floor".into()));
    }
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (eps, s) in &used {
        let u = eps * s.h.powi(r as i32) / s.error;
        let v = eps * eps * s.h.powi(p as i32) / s.error;
        a11 += u * u;
        a12 += u * v;
        a22 += v * v;
        b1 += u;
        b2 += v;
    }
    let det = a11 * a22 - a12 * a12;
    if det.abs() <= f64::EPSILON * a11 * a22 {
        return Err(Error::InvalidParameter("degenerate two-term fit".into()));
    }
    let c1 = (b1 * a22 - b2 * a12) / det;
    let c2 = (a11 * b2 - a12 * b1) / det;
    let mut fit = NearIntegrableFit { r, p, c1, c2, misfit: 0.0 };
    let sq: f64 = used
        .iter()
        .map(|(eps, s)| (fit.predict(*eps, s.h) / s.error - 1.0).powi(2))
        .sum();
    fit.misfit = (sq / used.len() as f64).sqrt();
    Ok(fit)
}

/// Error at one step size split into the parts linear and quadratic in the perturbation strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonSplit {
    pub h: f64,
    /// `‖ε·a(h)‖` for the error expansion `ε·a(h) + ε²·b(h) + O(ε³)`.
    pub linear: f64,
    /// `‖ε²·b(h)‖`.
    pub quadratic: f64,
}

/// Separates the error of `method` into its `ε` and `ε²` components by running the problem
/// at `±eps` and `±eps/10` and combining the signed error vectors. The linear part is exact
/// through `ε⁴`, the quadratic part through `ε³`.
pub fn epsilon_split(
    make_problem: impl Fn(f64) -> Problem,
    u0: &WaveState,
    method: &MethodSpec,
    t_final: f64,
    step_counts: &[usize],
    eps: f64,
    reference: crate::propagator::ReferenceSpec,
) -> Result<Vec<EpsilonSplit>> {
    let mut errors = Vec::with_capacity(4);
    for e in [eps, -eps, eps / 10.0, -eps / 10.0] {
        let problem = make_problem(e);
        let exact = crate::propagator::reference_solution(&problem, u0, t_final, reference)?.state;
        let mut per_h = Vec::with_capacity(step_counts.len());
        for &n in step_counts {
            let mut u = u0.clone();
            Propagator::new(problem.clone(), method.clone())?.propagate(&mut u, t_final, n)?;
            let diff: Vec<_> = u
                .amplitudes()
                .iter()
                .zip(exact.amplitudes())
                .map(|(a, b)| a - b)
                .collect();
            per_h.push(diff);
        }
        errors.push(per_h);
    }
    let grid = u0.grid().clone();
    let span = (t_final - u0.time()).abs();
    step_counts
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let (bp, bm, sp, sm) = (&errors[0][i], &errors[1][i], &errors[2][i], &errors[3][i]);
            let mut linear = Vec::with_capacity(bp.len());
            let mut quadratic = Vec::with_capacity(bp.len());
            for j in 0..bp.len() {
                // odd parts: εa + ε³c and εa/10 + ε³c/1000; even parts: ε²b + ε⁴d and ε²b/100 + ε⁴d/10⁴
                let (odd_big, odd_small) = (0.5 * (bp[j] - bm[j]), 0.5 * (sp[j] - sm[j]));
                let (even_big, even_small) = (0.5 * (bp[j] + bm[j]), 0.5 * (sp[j] + sm[j]));
                linear.push((1000.0 * odd_small - odd_big) / 99.0);
                quadratic.push((10000.0 * even_small - even_big) / 99.0);
            }
            Ok(EpsilonSplit {
                h: span / n as f64,
                linear: WaveState::new(grid.clone(), linear, t_final)?.norm_l2(),
                quadratic: WaveState::new(grid.clone(), quadratic, t_final)?.norm_l2(),
            })
        })
        .collect()
}
