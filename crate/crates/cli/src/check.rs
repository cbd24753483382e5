//! Empirical order of one scheme on a preset problem.

use hermite_fourier::order::{fit_order, geometric_step_counts, ErrorSample, OrderFit, ROUND_OFF_FLOOR};
use hermite_fourier::propagator::{reference_solution, ReferenceSpec};
use hermite_fourier::Propagator;

use crate::config::{ConfigError, MagnusName, MethodConfig, SplitName, StudyConfig};
use crate::presets::{preset, T_FINAL};
use crate::runner::RunError;

#[derive(Debug, Clone)]
pub struct OrderCheck {
    pub method: String,
    /// `(n_steps, h, l2_error)` per sweep point.
    pub samples: Vec<(usize, f64, f64)>,
    pub fit: OrderFit,
}

impl OrderCheck {
    pub fn rows(&self) -> Vec<(String, usize, f64, f64)> {
        self.samples
            .iter()
            .map(|&(n, h, e)| (self.method.clone(), n, h, e))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct OrderCheckSpec {
    pub scheme: String,
    pub problem: String,
    pub split: SplitName,
    pub magnus: MagnusName,
    pub basis_size: Option<usize>,
    pub first_steps: usize,
    pub points: usize,
}

impl OrderCheckSpec {
    pub fn new(scheme: &str, problem: &str) -> Self {
        Self {
            scheme: scheme.into(),
            problem: problem.into(),
            split: SplitName::Hf,
            magnus: MagnusName::Exact,
            basis_size: None,
            first_steps: 20,
            points: 8,
        }
    }
}

/// Runs `spec.points` geometric step counts against the preset's reference and fits the slope.
pub fn order_check(spec: &OrderCheckSpec) -> Result<OrderCheck, RunError> {
    let config = preset(&spec.problem).ok_or_else(|| ConfigError::Field {
        path: "problem".into(),
        message: format!("unknown preset '{}'", spec.problem),
    })?;
    let case = &config.cases[0];
    let (t_final, reference): (f64, ReferenceSpec) = match &case.study {
        StudyConfig::Convergence { t_final, reference, .. } => (*t_final, (*reference).into()),
        _ => (T_FINAL, ReferenceSpec::default()),
    };
    let method = MethodConfig {
        split: spec.split,
        scheme: spec.scheme.clone(),
        magnus: spec.magnus,
        basis_size: spec.basis_size,
    };
    method.validate(&case.problem, "method")?;
    let method = method
        .build()
        .map_err(|e| RunError::from_core(format!("method {}", spec.scheme), e))?;
    let (problem, u0) = case
        .problem
        .build()
        .map_err(|e| RunError::from_core("problem", e))?;
    let exact = reference_solution(&problem, &u0, t_final, reference)
        .map_err(|e| RunError::from_core("reference", e))?
        .state;
    let span = t_final - u0.time();
    let mut samples = Vec::new();
    for n in geometric_step_counts(spec.first_steps, spec.points) {
        let mut u = u0.clone();
        Propagator::new(problem.clone(), method.clone())
            .and_then(|mut p| p.propagate(&mut u, t_final, n))
            .map_err(|e| RunError::from_core(format!("{} with {n} steps", method.id()), e))?;
        samples.push((n, span / n as f64, u.error_l2(&exact).expect("same grid")));
    }
    let points: Vec<ErrorSample> = samples.iter().map(|&(_, h, error)| ErrorSample { h, error }).collect();
    let fit = fit_order(&points, ROUND_OFF_FLOOR).map_err(|e| RunError::from_core("fit", e))?;
    Ok(OrderCheck {
        method: method.id(),
        samples,
        fit,
    })
}
