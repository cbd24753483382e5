use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Scalar function of time, used for the squared trap frequency and the nonlinearity.
#[derive(Clone)]
pub enum TimeFunction {
    Constant(f64),
    /// `amplitude · (1 + modulation · cos(frequency · t))`
    Cosine {
        amplitude: f64,
        modulation: f64,
        frequency: f64,
    },
    /// Square of `base · (1 + strength · t / cosh²(sharpness · (t - center)))`.
    SquaredPulse {
        base: f64,
        strength: f64,
        sharpness: f64,
        center: f64,
    },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl TimeFunction {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeFunction::Constant(c) => *c,
            TimeFunction::Cosine {
                amplitude,
                modulation,
                frequency,
            } => amplitude * (1.0 + modulation * (frequency * t).cos()),
            TimeFunction::SquaredPulse {
                base,
                strength,
                sharpness,
                center,
            } => {
                let c = (sharpness * (t - center)).cosh();
                let w = base * (1.0 + strength * t / (c * c));
                w * w
            }
            TimeFunction::Custom(f) => f(t),
        }
    }

    pub fn constant_value(&self) -> Option<f64> {
        match self {
            TimeFunction::Constant(c) => Some(*c),
            TimeFunction::Cosine {
                amplitude,
                modulation,
                ..
            } if *modulation == 0.0 => Some(*amplitude),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.constant_value().is_some()
    }
}

impl fmt::Debug for TimeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeFunction::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            TimeFunction::Cosine {
                amplitude,
                modulation,
                frequency,
            } => f
                .debug_struct("Cosine")
                .field("amplitude", amplitude)
                .field("modulation", modulation)
                .field("frequency", frequency)
                .finish(),
            TimeFunction::SquaredPulse {
                base,
                strength,
                sharpness,
                center,
            } => f
                .debug_struct("SquaredPulse")
                .field("base", base)
                .field("strength", strength)
                .field("sharpness", sharpness)
                .field("center", center)
                .finish(),
            TimeFunction::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl From<f64> for TimeFunction {
    fn from(c: f64) -> Self {
        TimeFunction::Constant(c)
    }
}

/// The small perturbation `ε·V_I(x, t)` of the harmonic trap.
#[derive(Clone, Default)]
pub enum Perturbation {
    #[default]
    None,
    /// `strength · x⁴ / 4`
    Quartic { strength: f64 },
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl Perturbation {
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        match self {
            Perturbation::None => 0.0,
            Perturbation::Quartic { strength } => 0.25 * strength * x * x * x * x,
            Perturbation::Custom(f) => f(x, t),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Perturbation::None => true,
            Perturbation::Quartic { strength } => *strength == 0.0,
            Perturbation::Custom(_) => false,
        }
    }
}

impl fmt::Debug for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Perturbation::None => f.write_str("None"),
            Perturbation::Quartic { strength } => f
                .debug_struct("Quartic")
                .field("strength", strength)
                .finish(),
            Perturbation::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// `i ψ_t = (p²/(2μ) + ½μω²(t)x² + εV_I(x,t) + σ(t)|ψ|²) ψ` on a periodic grid.
#[derive(Debug, Clone)]
pub struct Problem {
    mu: f64,
    omega_sq: TimeFunction,
    perturbation: Perturbation,
    sigma: TimeFunction,
    grid: Arc<Grid>,
}

impl Problem {
    /// Unit-mass, unit-frequency linear oscillator on `grid`.
    pub fn harmonic(grid: Arc<Grid>) -> Self {
        Self {
            mu: 1.0,
            omega_sq: TimeFunction::Constant(1.0),
            perturbation: Perturbation::None,
            sigma: TimeFunction::Constant(0.0),
            grid,
        }
    }

    pub fn with_mass(mut self, mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {mu}")));
        }
        self.mu = mu;
        Ok(self)
    }

    pub fn with_omega_sq(mut self, omega_sq: impl Into<TimeFunction>) -> Self {
        self.omega_sq = omega_sq.into();
        self
    }

    pub fn with_perturbation(mut self, perturbation: Perturbation) -> Self {
        self.perturbation = perturbation;
        self
    }

    pub fn with_sigma(mut self, sigma: impl Into<TimeFunction>) -> Self {
        self.sigma = sigma.into();
        self
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn omega_sq(&self) -> &TimeFunction {
        &self.omega_sq
    }

    pub fn perturbation(&self) -> &Perturbation {
        &self.perturbation
    }

    pub fn sigma(&self) -> &TimeFunction {
        &self.sigma
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// True when `ω²` and `σ` are constant and the perturbation carries no explicit time.
    pub fn is_autonomous(&self) -> bool {
        self.omega_sq.is_constant()
            && self.sigma.is_constant()
            && !matches!(self.perturbation, Perturbation::Custom(_))
    }

    pub fn is_linear(&self) -> bool {
        self.sigma.constant_value() == Some(0.0)
    }
}
