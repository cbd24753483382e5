//! Closed-form solutions of the unit harmonic oscillator and the free particle.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Coherent state of `H = (p² + x²)/2` started from the displaced ground state
/// `π^{-1/4} e^{-(x-δ)²/2}` and evolved to time `t`. Its center moves as `δ·cos t`.
pub fn coherent_state(x: f64, delta: f64, t: f64) -> Complex64 {
    let i = Complex64::i();
    let alpha = Complex64::from_polar(delta / 2f64.sqrt(), -t);
    let exponent = -0.5 * x * x + 2f64.sqrt() * alpha * x - 0.5 * alpha * alpha
        - 0.5 * alpha.norm_sqr()
        - 0.5 * i * t;
    PI.powf(-0.25) * exponent.exp()
}

/// Free evolution under `p²/2` of the unnormalized Gaussian `e^{-x²/2}`.
pub fn free_gaussian(x: f64, t: f64) -> Complex64 {
    let denom = Complex64::new(1.0, t);
    denom.powf(-0.5) * (-x * x / (2.0 * denom)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn coherent_state_at_rest_is_ground_state() {
        for x in [-1.5, 0.0, 0.3, 2.0] {
            let z = coherent_state(x, 0.0, 0.0);
            assert_abs_diff_eq!(z.re, PI.powf(-0.25) * (-x * x / 2.0).exp(), epsilon = 1e-15);
            assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn coherent_state_center_follows_cosine() {
        let delta = 1.3;
        for t in [0.0, 0.7, 2.0, 10.0] {
            let dx = 1e-3;
            let (mut mass, mut first) = (0.0, 0.0);
            let mut x = -12.0;
            while x < 12.0 {
                let rho = coherent_state(x, delta, t).norm_sqr();
                mass += rho * dx;
                first += x * rho * dx;
                x += dx;
            }
            assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-9);
            assert_abs_diff_eq!(first, delta * t.cos(), epsilon = 1e-9);
        }
    }
}
