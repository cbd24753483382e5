//! Closed-form kick–drift–kick factorizations of quadratic-Hamiltonian propagators.
//!
//! Every factorization returns coefficients `(f, g, e)` such that
//!
//! ```text
//! U = e^{-i f x²/2} · e^{-i g p²/2} · e^{-i e x²/2}
//! ```
//!
//! Operators act right to left, so on a state the `e` kick is applied first, then the drift `g`,
//! then the `f` kick. The same product of linear canonical maps,
//! `K(f)·D(g)·K(e)` with `K(c) = [[1, 0], [-c, 1]]` and `D(c) = [[1, c], [0, 1]]`,
//! is what [`classical_map`] returns; each factorization is checked against the exact 2×2
//! flow of its target Hamiltonian.
//!
//! Trigonometric expressions are evaluated through even functions of `η²t²`
//! ([`cos_sqrt`], [`sinc_sqrt`]), so negative `η²` continues smoothly into the hyperbolic
//! branch and `η → 0` needs no special case.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `cos(√z)` for `z ≥ 0`, `cosh(√-z)` for `z < 0`.
pub fn cos_sqrt(z: f64) -> f64 {
    if z.abs() < 1e-3 {
        1.0 - z / 2.0 * (1.0 - z / 12.0 * (1.0 - z / 30.0 * (1.0 - z / 56.0)))
    } else if z > 0.0 {
        z.sqrt().cos()
    } else {
        (-z).sqrt().cosh()
    }
}

/// `sin(√z)/√z` for `z ≥ 0`, `sinh(√-z)/√-z` for `z < 0`.
pub fn sinc_sqrt(z: f64) -> f64 {
    if z.abs() < 1e-3 {
        1.0 - z / 6.0 * (1.0 - z / 20.0 * (1.0 - z / 42.0 * (1.0 - z / 72.0)))
    } else if z > 0.0 {
        let r = z.sqrt();
        r.sin() / r
    } else {
        let r = (-z).sqrt();
        r.sinh() / r
    }
}

/// `(1 - cos(√z)) / z`, free of cancellation near zero.
fn one_minus_cos_over(z: f64) -> f64 {
    let s = sinc_sqrt(z / 4.0);
    0.5 * s * s
}

/// Coefficients of `e^{-i f x²/2} e^{-i g p²/2} e^{-i e x²/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdkCoefficients {
    /// Kick applied last.
    pub f: f64,
    pub g: f64,
    /// Kick applied first.
    pub e: f64,
    /// First singularity of the factorization (`+∞` if none).
    pub t_star: f64,
}

impl KdkCoefficients {
    pub const IDENTITY: KdkCoefficients = KdkCoefficients {
        f: 0.0,
        g: 0.0,
        e: 0.0,
        t_star: f64::INFINITY,
    };

    /// Canonical rescaling `x → √μ x`, `p → p/√μ`: kicks scale by `μ`, the drift by `1/μ`.
    pub fn with_mass(self, mu: f64) -> Self {
        Self {
            f: self.f * mu,
            g: self.g / mu,
            e: self.e * mu,
            t_star: self.t_star,
        }
    }

    /// True when `g/t` has collapsed, i.e. `f` and `e` are dominated by a vanishing divisor.
    pub fn is_near_singular(&self, t: f64) -> bool {
        t != 0.0 && (self.g / t).abs() < 1e-8
    }

    fn is_finite(&self) -> bool {
        self.f.is_finite() && self.g.is_finite() && self.e.is_finite()
    }
}

/// Drift–kick–drift coefficients `e^{-i d p²/2} e^{-i k x²/2} e^{-i d p²/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DkdCoefficients {
    pub drift: f64,
    pub kick: f64,
    pub t_star: f64,
}

/// Unimodular 2×2 linear map acting on `(q, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classical2x2(pub [[f64; 2]; 2]);

impl Classical2x2 {
    pub const IDENTITY: Classical2x2 = Classical2x2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn kick(c: f64) -> Self {
        Classical2x2([[1.0, 0.0], [-c, 1.0]])
    }

    pub fn drift(c: f64) -> Self {
        Classical2x2([[1.0, c], [0.0, 1.0]])
    }

    /// Exact flow of `H = p²/(2μ) + μω²q²/2` over time `t`.
    pub fn oscillator(t: f64, mu: f64, omega: f64) -> Self {
        let (s, c) = (omega * t).sin_cos();
        Classical2x2([[c, s / (mu * omega)], [-mu * omega * s, c]])
    }

    /// `exp(t·[[β, γ], [-α, -β]])`, the flow of `H = (αq² + 2βqp + γp²)/2`.
    pub fn quadratic(t: f64, alpha: f64, beta: f64, gamma: f64) -> Self {
        let z = (alpha * gamma - beta * beta) * t * t;
        let c = cos_sqrt(z);
        let s = t * sinc_sqrt(z);
        Classical2x2([[c + beta * s, gamma * s], [-alpha * s, c - beta * s]])
    }

    pub fn matmul(&self, rhs: &Classical2x2) -> Classical2x2 {
        let a = &self.0;
        let b = &rhs.0;
        Classical2x2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn max_abs_diff(&self, other: &Classical2x2) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        d
    }
}

/// `K(f)·D(g)·K(e)`, the classical image of the quantum kick–drift–kick product.
pub fn classical_map(coeffs: &KdkCoefficients) -> Classical2x2 {
    let KdkCoefficients { f, g, e, .. } = *coeffs;
    Classical2x2([[1.0 - g * e, g], [-f - e + f * g * e, 1.0 - f * g]])
}

fn warn_if_near_singular(coeffs: &KdkCoefficients, t: f64) {
    if coeffs.is_near_singular(t) {
        log::warn!("kick-drift-kick factorization close to its singularity at t = {t}");
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite("stage time".into()))
    }
}

/// Oscillator `p²/(2μ) + μω²x²/2`: `f = e = μω·tan(ωt/2)`, `g = sin(ωt)/(μω)`, valid for `|t| < π/ω`.
pub fn kdk_constant(t: f64, mu: f64, omega: f64) -> Result<KdkCoefficients> {
    check_time(t)?;
    if !(mu > 0.0) || !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need positive mass and frequency, got mu = {mu}, omega = {omega}"
        )));
    }
    let t_star = PI / omega;
    if t.abs() >= t_star {
        return Err(Error::Horizon {
            stage: None,
            t,
            t_star,
            max_step: None,
        });
    }
    let f = mu * omega * (0.5 * omega * t).tan();
    let coeffs = KdkCoefficients {
        f,
        g: (omega * t).sin() / (mu * omega),
        e: f,
        t_star,
    };
    warn_if_near_singular(&coeffs, t);
    Ok(coeffs)
}

/// Drift–kick–drift variant of [`kdk_constant`]: `d = tan(ωt/2)/(μω)`, `k = μω·sin(ωt)`.
pub fn kdk_constant_aba(t: f64, mu: f64, omega: f64) -> Result<DkdCoefficients> {
    let kdk = kdk_constant(t, mu, omega)?;
    Ok(DkdCoefficients {
        drift: kdk.f / (mu * omega * mu * omega),
        kick: kdk.g * mu * omega * mu * omega,
        t_star: kdk.t_star,
    })
}

/// Factorizes `e^{-i(t/2)(αx² + β(xp+px) + γp²)}`.
///
/// With `η² = αγ - β²`: `g = γ sin(ηt)/η`,
/// `f = (1 - cos ηt + β sin(ηt)/η)/g`, `e = (1 - cos ηt - β sin(ηt)/η)/g`.
/// The horizon is `π/η` for `η² > 0` and infinite otherwise. Negative `t` is evaluated with the
/// same (odd) closed forms.
pub fn kdk_quadratic(t: f64, alpha: f64, beta: f64, gamma: f64) -> Result<KdkCoefficients> {
    check_time(t)?;
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "p² coefficient must be positive, got {gamma}"
        )));
    }
    if !(alpha.is_finite() && beta.is_finite() && gamma.is_finite()) {
        return Err(Error::NonFinite("quadratic generator".into()));
    }
    let eta_sq = alpha * gamma - beta * beta;
    let t_star = if eta_sq > 0.0 {
        PI / eta_sq.sqrt()
    } else {
        f64::INFINITY
    };
    if t.abs() >= t_star {
        return Err(Error::Horizon {
            stage: None,
            t,
            t_star,
            max_step: None,
        });
    }
    let z = eta_sq * t * t;
    let s = sinc_sqrt(z);
    // (1 - cos ηt)/t = η²t·(1 - cos)/z
    let omc_over_t = eta_sq * t * one_minus_cos_over(z);
    let denom = gamma * s;
    let coeffs = KdkCoefficients {
        f: (omc_over_t + beta * s) / denom,
        g: gamma * t * s,
        e: (omc_over_t - beta * s) / denom,
        t_star,
    };
    if !coeffs.is_finite() || (t != 0.0 && denom == 0.0) {
        return Err(Error::Singular { t, g: coeffs.g });
    }
    warn_if_near_singular(&coeffs, t);
    Ok(coeffs)
}

/// Factorizes `e^{-i(t/2)(p²/2 + ω_L²x²/2)} · e^{-i(t/2)(p²/2 + ω_R²x²/2)}` (right factor first).
pub fn kdk_two_exponential(t: f64, omega_l: f64, omega_r: f64) -> Result<KdkCoefficients> {
    if !(omega_l > 0.0 && omega_r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "frequencies must be positive, got {omega_l}, {omega_r}"
        )));
    }
    kdk_two_exponential_sq(t, omega_l * omega_l, omega_r * omega_r)
}

/// [`kdk_two_exponential`] parameterized by squared frequencies, which may be zero or negative.
pub fn kdk_two_exponential_sq(t: f64, omega_l_sq: f64, omega_r_sq: f64) -> Result<KdkCoefficients> {
    check_time(t)?;
    if !(omega_l_sq.is_finite() && omega_r_sq.is_finite()) {
        return Err(Error::NonFinite("averaged frequencies".into()));
    }
    let t_star = two_exponential_horizon(omega_l_sq, omega_r_sq, t.abs());
    if t.abs() >= t_star {
        return Err(Error::Horizon {
            stage: None,
            t,
            t_star,
            max_step: None,
        });
    }
    let tau = 0.5 * t;
    let parts = TwoExpParts::new(tau, omega_l_sq, omega_r_sq);
    // 1 - c_L c_R = (1 - c_L) + c_L (1 - c_R), each term O(τ²)
    let omc = omega_l_sq * one_minus_cos_over(parts.z_l)
        + parts.c_l * omega_r_sq * one_minus_cos_over(parts.z_r);
    let cross = parts.s_l * parts.s_r;
    let denom = parts.g_over_tau();
    let coeffs = KdkCoefficients {
        f: tau * (omc + omega_l_sq * cross) / denom,
        g: tau * denom,
        e: tau * (omc + omega_r_sq * cross) / denom,
        t_star,
    };
    if !coeffs.is_finite() {
        return Err(Error::Singular { t, g: coeffs.g });
    }
    warn_if_near_singular(&coeffs, t);
    Ok(coeffs)
}

struct TwoExpParts {
    z_l: f64,
    z_r: f64,
    c_l: f64,
    c_r: f64,
    /// `sin(ω_L τ)/(ω_L τ)`
    s_l: f64,
    s_r: f64,
}

impl TwoExpParts {
    fn new(tau: f64, omega_l_sq: f64, omega_r_sq: f64) -> Self {
        let z_l = omega_l_sq * tau * tau;
        let z_r = omega_r_sq * tau * tau;
        Self {
            z_l,
            z_r,
            c_l: cos_sqrt(z_l),
            c_r: cos_sqrt(z_r),
            s_l: sinc_sqrt(z_l),
            s_r: sinc_sqrt(z_r),
        }
    }

    fn g_over_tau(&self) -> f64 {
        self.s_l * self.c_r + self.c_l * self.s_r
    }
}

/// Smallest positive root of `g(t)` for the two-exponential product, `+∞` if none exists.
///
/// Scans past `at_least` in steps of `π/(8·ω_max)` for a sign change and bisects it to `1e-12`.
pub fn two_exponential_horizon(omega_l_sq: f64, omega_r_sq: f64, at_least: f64) -> f64 {
    let g = |t: f64| TwoExpParts::new(0.5 * t, omega_l_sq, omega_r_sq).g_over_tau();
    let positive: Vec<f64> = [omega_l_sq, omega_r_sq]
        .into_iter()
        .filter(|w| *w > 0.0)
        .collect();
    if positive.is_empty() {
        return f64::INFINITY;
    }
    let w_max = omega_l_sq.abs().max(omega_r_sq.abs()).sqrt();
    let w_min = positive.iter().cloned().fold(f64::INFINITY, f64::min).sqrt();
    let step = PI / (8.0 * w_max);
    let limit = at_least.max(2.0 * PI / w_min) + step;

    let mut lo = 0.0;
    let mut g_lo = g(0.0);
    while lo < limit {
        let hi = lo + step;
        let g_hi = g(hi);
        if g_hi.signum() != g_lo.signum() || g_hi == 0.0 {
            let (mut a, mut b) = (lo, hi);
            while b - a > 1e-12 {
                let mid = 0.5 * (a + b);
                if g(mid).signum() == g_lo.signum() {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return 0.5 * (a + b);
        }
        lo = hi;
        g_lo = g_hi;
    }
    f64::INFINITY
}

/// Merged harmonic kicks and drifts for one step of a kick-leading composition.
///
/// `alphas[k]` is the `x²/2` coefficient of the kick preceding drift `k` (and `alphas[m]` the
/// trailing one): the first-applied kick of stage `k` plus the last-applied kick of stage `k-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct KickChain {
    pub alphas: Vec<f64>,
    pub drifts: Vec<f64>,
}

/// Builds the [`KickChain`] of a scheme with drift coefficients `a_i` for step `h`.
///
/// `kdk` receives the stage index and the stage time `a_i h` and returns that stage's
/// factorization. Horizon violations are re-reported with the offending stage index and the
/// largest admissible step.
pub fn merge_kick_chain(
    drift_coefficients: &[f64],
    h: f64,
    mut kdk: impl FnMut(usize, f64) -> Result<KdkCoefficients>,
) -> Result<KickChain> {
    let m = drift_coefficients.len();
    let mut alphas = vec![0.0; m + 1];
    let mut drifts = Vec::with_capacity(m);
    for (i, &a) in drift_coefficients.iter().enumerate() {
        let coeffs = if a == 0.0 || h == 0.0 {
            KdkCoefficients::IDENTITY
        } else {
            kdk(i, a * h).map_err(|err| match err {
                Error::Horizon { t, t_star, .. } => Error::Horizon {
                    stage: Some(i),
                    t,
                    t_star,
                    max_step: Some(t_star / a.abs()),
                },
                other => other,
            })?
        };
        alphas[i] += coeffs.e;
        alphas[i + 1] += coeffs.f;
        drifts.push(coeffs.g);
    }
    Ok(KickChain { alphas, drifts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn series_branches_agree() {
        for z in [-2e-3, -1.0001e-3, -0.999e-3, 0.0, 0.999e-3, 1.0001e-3, 2e-3] {
            let r = (z as f64).abs().sqrt();
            let (c, s) = if z >= 0.0 {
                (r.cos(), if r == 0.0 { 1.0 } else { r.sin() / r })
            } else {
                (r.cosh(), r.sinh() / r)
            };
            assert_abs_diff_eq!(cos_sqrt(z), c, epsilon = 4e-16);
            assert_abs_diff_eq!(sinc_sqrt(z), s, epsilon = 4e-16);
        }
    }

    #[test]
    fn constant_oscillator_values() {
        assert_eq!(
            kdk_constant(0.0, 1.0, 1.0).unwrap(),
            KdkCoefficients {
                f: 0.0,
                g: 0.0,
                e: 0.0,
                t_star: PI
            }
        );
        let c = kdk_constant(PI / 2.0, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(c.f, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.g, 1.0, epsilon = 1e-15);
        assert_eq!(c.f, c.e);

        let c = kdk_constant(1.0, 1.0, 2.0).unwrap();
        assert_abs_diff_eq!(c.f, 3.114815449309804, epsilon = 1e-12);
        assert_abs_diff_eq!(c.g, 0.454648713412841, epsilon = 1e-12);
        let exact = Classical2x2::oscillator(1.0, 1.0, 2.0);
        assert!(classical_map(&c).max_abs_diff(&exact) < 1e-13);
    }

    #[test]
    fn constant_oscillator_horizon() {
        match kdk_constant(PI, 1.0, 1.0) {
            Err(Error::Horizon { t_star, .. }) => assert_eq!(t_star, PI),
            other => panic!("expected horizon error, got {other:?}"),
        }
        assert!(kdk_constant(-0.8, 1.0, 4.0).is_err());
        assert!(kdk_constant(0.1, 0.0, 1.0).is_err());
    }

    #[test]
    fn rotation_reproduced() {
        for t in [0.1, -0.1, 1.0, -1.0, 3.0, -3.0] {
            let c = kdk_constant(t, 1.0, 1.0).unwrap();
            let exact = Classical2x2::oscillator(t, 1.0, 1.0);
            assert!(classical_map(&c).max_abs_diff(&exact) < 1e-13, "t = {t}");
        }
    }

    #[test]
    fn aba_variant_reproduces_rotation() {
        for (t, mu, omega) in [(0.5, 1.0, 1.0), (-1.2, 2.0, 0.7), (0.3, 0.5, 3.0)] {
            let d = kdk_constant_aba(t, mu, omega).unwrap();
            let m = Classical2x2::drift(d.drift)
                .matmul(&Classical2x2::kick(d.kick))
                .matmul(&Classical2x2::drift(d.drift));
            assert!(m.max_abs_diff(&Classical2x2::oscillator(t, mu, omega)) < 1e-13);
        }
    }

    #[test]
    fn quadratic_reduces_to_constant() {
        let c = kdk_quadratic(1.0, 1.0, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(c.f, 0.5f64.tan(), epsilon = 1e-15);
        assert_abs_diff_eq!(c.e, 0.5f64.tan(), epsilon = 1e-15);
        assert_abs_diff_eq!(c.g, 1f64.sin(), epsilon = 1e-15);

        for omega in [0.5, 1.0, 2.0] {
            for frac in [0.05, 0.3, 0.6, 0.9] {
                let t = frac * PI / omega;
                let q = kdk_quadratic(t, omega * omega, 0.0, 1.0).unwrap();
                let c = kdk_constant(t, 1.0, omega).unwrap();
                assert_abs_diff_eq!(q.f, c.f, epsilon = 1e-12 * c.f.abs().max(1.0));
                assert_abs_diff_eq!(q.g, c.g, epsilon = 1e-13);
                assert_abs_diff_eq!(q.e, c.e, epsilon = 1e-12 * c.e.abs().max(1.0));
            }
        }
    }

    #[test]
    fn quadratic_with_cross_term() {
        let (alpha, beta, gamma, t) = (1.0, 0.3, 1.0, 0.7);
        let c = kdk_quadratic(t, alpha, beta, gamma).unwrap();
        assert!(c.f != c.e);
        let exact = Classical2x2::quadratic(t, alpha, beta, gamma);
        assert!(classical_map(&c).max_abs_diff(&exact) < 1e-12);
    }

    #[test]
    fn quadratic_hyperbolic_and_degenerate() {
        // η² < 0 and η² = 0
        for (alpha, beta, gamma) in [(-0.5, 0.1, 1.2), (0.09, 0.3, 1.0), (0.0, 0.0, 2.0)] {
            let c = kdk_quadratic(0.9, alpha, beta, gamma).unwrap();
            assert_eq!(c.t_star, f64::INFINITY);
            let exact = Classical2x2::quadratic(0.9, alpha, beta, gamma);
            assert!(classical_map(&c).max_abs_diff(&exact) < 1e-13);
        }
        assert!(kdk_quadratic(0.1, 1.0, 0.0, 0.0).is_err());
        assert!(kdk_quadratic(4.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn two_exponential_reductions() {
        assert_eq!(kdk_two_exponential(0.0, 1.0, 2.0).unwrap().g, 0.0);
        for omega in [0.5, 1.0, 2.0] {
            let t = 0.8 * PI / omega;
            let two = kdk_two_exponential(t, omega, omega).unwrap();
            let one = kdk_constant(t, 1.0, omega).unwrap();
            assert_abs_diff_eq!(two.g, one.g, epsilon = 1e-14);
            assert_abs_diff_eq!(two.f, one.f, epsilon = 1e-12 * one.f.abs());
            assert_abs_diff_eq!(two.e, one.e, epsilon = 1e-12 * one.e.abs());
            assert_abs_diff_eq!(two.t_star, PI / omega, epsilon = 1e-11);
        }
    }

    #[test]
    fn two_exponential_unequal_frequencies() {
        let c = kdk_two_exponential(1.0, 1.0, 2.0).unwrap();
        // frozen from the product of half-step rotations
        let exact = Classical2x2::oscillator(0.5, 1.0, 1.0).matmul(&Classical2x2::oscillator(0.5, 1.0, 2.0));
        assert_abs_diff_eq!(c.g, exact.0[0][1], epsilon = 1e-15);
        assert_abs_diff_eq!(c.g, 0.628_264_855_301_990_2, epsilon = 1e-14);
        assert_abs_diff_eq!(c.f, 1.158_033_036_762_680_3, epsilon = 1e-13);
        assert_abs_diff_eq!(c.e, 2.121_216_024_097_107_4, epsilon = 1e-13);
        assert!(classical_map(&c).max_abs_diff(&exact) < 1e-12);
    }

    #[test]
    fn two_exponential_horizon_is_root_of_g() {
        let t_star = two_exponential_horizon(1.0, 4.0, 0.0);
        let parts = TwoExpParts::new(0.5 * t_star, 1.0, 4.0);
        assert!(parts.g_over_tau().abs() < 1e-11);
        assert!(t_star > 0.0 && t_star < 2.0 * PI);
        assert!(kdk_two_exponential(t_star + 1e-6, 1.0, 2.0).is_err());
        assert_eq!(two_exponential_horizon(-1.0, -0.5, 3.0), f64::INFINITY);
    }

    #[test]
    fn merge_chain_strang() {
        let h = 0.4;
        let chain = merge_kick_chain(&[1.0], h, |_, t| kdk_constant(t, 1.0, 1.0)).unwrap();
        let f = (h / 2.0).tan();
        assert_eq!(chain.alphas, vec![f, f]);
        assert_eq!(chain.drifts, vec![h.sin()]);

        let zero = merge_kick_chain(&[0.3, 0.4, 0.3], 0.0, |_, t| kdk_constant(t, 1.0, 1.0)).unwrap();
        assert!(zero.alphas.iter().chain(&zero.drifts).all(|&v| v == 0.0));
    }

    #[test]
    fn merge_chain_reports_stage() {
        let err = merge_kick_chain(&[0.2, 0.6, 0.2], 6.0, |_, t| kdk_constant(t, 1.0, 1.0)).unwrap_err();
        match err {
            Error::Horizon {
                stage, max_step, ..
            } => {
                assert_eq!(stage, Some(1));
                assert_abs_diff_eq!(max_step.unwrap(), PI / 0.6, epsilon = 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn odd_symmetry() {
        for t in [0.1, 0.9, 2.5] {
            let p = kdk_constant(t, 1.3, 1.1).unwrap();
            let n = kdk_constant(-t, 1.3, 1.1).unwrap();
            assert_eq!((p.f, p.g, p.e), (-n.f, -n.g, -n.e));
        }
    }

    proptest! {
        #[test]
        fn constant_matches_rotation(t in -0.99f64..0.99, mu in 0.2f64..5.0, omega in 0.2f64..5.0) {
            let t = t * PI / omega;
            let c = kdk_constant(t, mu, omega).unwrap();
            let m = classical_map(&c);
            prop_assert!(m.max_abs_diff(&Classical2x2::oscillator(t, mu, omega)) < 1e-12 * (1.0 + c.f.abs()));
            prop_assert!((m.det() - 1.0).abs() < 1e-12 * (1.0 + c.f.abs() * c.g.abs()));
        }

        #[test]
        fn quadratic_matches_exponential(
            alpha in -2.0f64..4.0, beta in -1.0f64..1.0, gamma in 0.5f64..2.0, frac in -0.9f64..0.9
        ) {
            let eta_sq = alpha * gamma - beta * beta;
            let t = if eta_sq > 0.0 { frac * PI / eta_sq.sqrt() } else { 2.0 * frac };
            let c = kdk_quadratic(t, alpha, beta, gamma).unwrap();
            let exact = Classical2x2::quadratic(t, alpha, beta, gamma);
            let scale = 1.0 + c.f.abs().max(c.e.abs());
            prop_assert!(classical_map(&c).max_abs_diff(&exact) < 1e-12 * scale);
        }
    }
}
