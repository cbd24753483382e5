//! Magnus-type approximations of the time-dependent oscillator `p²/2 + ω²(t)x²/2` over one stage.
//!
//! Quadrature samples `ω²` directly, so a frequency profile whose square dips below zero is
//! still well defined.

use crate::error::{Error, Result};
use crate::factorization::{kdk_constant, kdk_quadratic, kdk_two_exponential_sq, KdkCoefficients};
use crate::problem::{Problem, TimeFunction};

/// Averaged squared frequencies of the fourth-order two-exponential approximation
/// `e^{-i(dt/2)H_L} e^{-i(dt/2)H_R}` (right factor first).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoExpAverages {
    pub omega_l_sq: f64,
    pub omega_r_sq: f64,
}

/// Generator of `e^{-i(dt/2)(αx² + β(xp+px) + γp²)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticGenerator {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub stage_dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MagnusOrder {
    /// Closed-form oscillator; requires a constant frequency.
    #[default]
    ExactConstant,
    Magnus4,
    Magnus6,
}

impl MagnusOrder {
    pub fn name(self) -> &'static str {
        match self {
            MagnusOrder::ExactConstant => "exact",
            MagnusOrder::Magnus4 => "magnus4",
            MagnusOrder::Magnus6 => "magnus6",
        }
    }
}

fn sample(omega_sq: &TimeFunction, t: f64) -> Result<f64> {
    let w = omega_sq.eval(t);
    if w.is_finite() {
        Ok(w)
    } else {
        Err(Error::NonFinite(format!("squared frequency at t = {t}")))
    }
}

/// Two-point Gauss–Legendre averages: `ω_L² = αω₁² + βω₂²`, `ω_R² = βω₁² + αω₂²`
/// with nodes `1/2 ∓ √3/6` and `α = 1/2 - 1/√3`, `β = 1 - α`.
pub fn magnus4_averages(omega_sq: &TimeFunction, t: f64, dt: f64) -> Result<TwoExpAverages> {
    let r = 3f64.sqrt() / 6.0;
    let w1 = sample(omega_sq, t + (0.5 - r) * dt)?;
    let w2 = sample(omega_sq, t + (0.5 + r) * dt)?;
    let a = 0.5 - 1.0 / 3f64.sqrt();
    let b = 1.0 - a;
    Ok(TwoExpAverages {
        omega_l_sq: a * w1 + b * w2,
        omega_r_sq: b * w1 + a * w2,
    })
}

/// Sixth-order Magnus generator from three-point Gauss–Legendre samples `w_i = ω²(t + c_i dt)`.
pub fn magnus6_generator(omega_sq: &TimeFunction, t: f64, dt: f64) -> Result<QuadraticGenerator> {
    let r = 15f64.sqrt() / 10.0;
    let w1 = sample(omega_sq, t + (0.5 - r) * dt)?;
    let w2 = sample(omega_sq, t + 0.5 * dt)?;
    let w3 = sample(omega_sq, t + (0.5 + r) * dt)?;
    let dt2 = dt * dt;
    let mean = 5.0 * w1 + 8.0 * w2 + 5.0 * w3;
    let alpha = mean / 18.0
        + dt2 / 486.0
            * (17.0 / 4.0 * (w1 * w1 + w3 * w3) + 8.0 * w2 * w2 + w1 * w2 + w2 * w3
                - 37.0 / 2.0 * w1 * w3);
    let beta = dt * (5.0f64 / 3.0).sqrt() * (w3 - w1) * (1.0 / 12.0 + dt2 / 3240.0 * mean);
    let gamma = 1.0 + dt2 / 54.0 * (w1 - 2.0 * w2 + w3);
    Ok(QuadraticGenerator {
        alpha,
        beta,
        gamma,
        stage_dt: dt,
    })
}

/// Kick–drift–kick coefficients for the harmonic part of `problem` over `[t, t + dt]`.
pub fn stage_kdk(problem: &Problem, t: f64, dt: f64, order: MagnusOrder) -> Result<KdkCoefficients> {
    if dt == 0.0 {
        return Ok(KdkCoefficients::IDENTITY);
    }
    let mu = problem.mu();
    let omega_sq = problem.omega_sq();
    match order {
        MagnusOrder::ExactConstant => {
            let w2 = omega_sq.constant_value().ok_or_else(|| {
                Error::InvalidParameter(
                    "the exact oscillator factorization needs a constant frequency".into(),
                )
            })?;
            if !(w2 > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "squared frequency must be positive, got {w2}"
                )));
            }
            kdk_constant(dt, mu, w2.sqrt())
        }
        MagnusOrder::Magnus4 => {
            let avg = magnus4_averages(omega_sq, t, dt)?;
            Ok(kdk_two_exponential_sq(dt, avg.omega_l_sq, avg.omega_r_sq)?.with_mass(mu))
        }
        MagnusOrder::Magnus6 => {
            let gen = magnus6_generator(omega_sq, t, dt)?;
            Ok(kdk_quadratic(dt, gen.alpha, gen.beta, gen.gamma)?.with_mass(mu))
        }
    }
}
