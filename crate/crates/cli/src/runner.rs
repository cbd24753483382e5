//! Executes experiment configurations on a bounded worker pool.

use std::time::Instant;

use hermite_fourier::analytic::coherent_state;
use hermite_fourier::hermite::{required_basis_size, HermiteBasis};
use hermite_fourier::propagator::reference_solution;
use hermite_fourier::{Error, MethodSpec, NormWeighting, Problem, Propagator, Split, WaveState};
use rayon::prelude::*;

use crate::config::{CaseConfig, ConfigError, ExperimentConfig, MethodConfig, StudyConfig, SweepConfig};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "HF_WORKERS";

/// Largest relative norm change tolerated for unitary (Fourier and Hermite–Fourier) runs.
pub const NORM_DEFECT_LIMIT: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Invalid { context: String, source: Error },
    #[error("{context}: {source}")]
    Numerical { context: String, source: Error },
    #[error("{0}")]
    NormDefect(String),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl RunError {
    /// 2 for validation problems, 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Invalid { .. } => 2,
            RunError::Numerical { .. } | RunError::NormDefect(_) => 3,
            RunError::Pool(_) | RunError::Io(_) | RunError::Csv(_) => 1,
        }
    }

    pub(crate) fn from_core(context: impl Into<String>, source: Error) -> Self {
        let context = context.into();
        match source {
            Error::Horizon { .. }
            | Error::NonFinite(_)
            | Error::Singular { .. }
            | Error::ReferenceNotConverged { .. }
            | Error::BasisCeiling { .. } => RunError::Numerical { context, source },
            _ => RunError::Invalid { context, source },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub case: String,
    pub method: String,
    pub scheme: String,
    pub n_steps: usize,
    pub n_fft_pairs: u64,
    pub n_exponentials: u64,
    pub l2_error: f64,
    pub l2_error_plain: f64,
    pub energy_error: f64,
    pub norm_defect: f64,
    pub wall_time_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleStepRow {
    pub case: String,
    pub method: String,
    pub t: f64,
    pub l2_error: f64,
    pub l2_error_plain: f64,
    pub norm_defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisSizeRow {
    pub case: String,
    pub delta: f64,
    pub basis_size: usize,
    pub residual: f64,
    /// Error after propagating in the basis to the study's final time.
    pub l2_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Table {
    Convergence(Vec<ResultRow>),
    SingleStep(Vec<SingleStepRow>),
    BasisSize(Vec<BasisSizeRow>),
}

impl Table {
    pub fn len(&self) -> usize {
        match self {
            Table::Convergence(r) => r.len(),
            Table::SingleStep(r) => r.len(),
            Table::BasisSize(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn convergence(&self) -> Option<&[ResultRow]> {
        match self {
            Table::Convergence(r) => Some(r),
            _ => None,
        }
    }
}

/// Worker count from [`WORKERS_ENV`], defaulting to the available parallelism.
pub fn workers_from_env() -> Result<usize, ConfigError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(ConfigError::Field {
                path: WORKERS_ENV.into(),
                message: format!("expected a positive integer, got '{v}'"),
            }),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

pub struct Runner {
    pool: rayon::ThreadPool,
}

impl Runner {
    pub fn new(workers: usize) -> Result<Self, RunError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| RunError::Pool(e.to_string()))?;
        Ok(Self { pool })
    }

    pub fn from_env() -> Result<Self, RunError> {
        Self::new(workers_from_env()?)
    }

    pub fn run(&self, config: &ExperimentConfig) -> Result<Table, RunError> {
        config.validate()?;
        let mut tables = Vec::with_capacity(config.cases.len());
        for case in &config.cases {
            tables.push(self.run_case(case, config.wall_time)?);
        }
        let mut merged = tables.remove(0);
        for t in tables {
            match (&mut merged, t) {
                (Table::Convergence(a), Table::Convergence(b)) => a.extend(b),
                (Table::SingleStep(a), Table::SingleStep(b)) => a.extend(b),
                (Table::BasisSize(a), Table::BasisSize(b)) => a.extend(b),
                _ => unreachable!("validated: cases share one study kind"),
            }
        }
        Ok(merged)
    }

    pub fn run_case(&self, case: &CaseConfig, wall_time: bool) -> Result<Table, RunError> {
        let ctx = |what: &str| format!("{}: {what}", case.label);
        let (problem, u0) = case
            .problem
            .build()
            .map_err(|e| RunError::from_core(ctx("problem"), e))?;
        match &case.study {
            StudyConfig::Convergence {
                t_final,
                methods,
                sweep,
                reference,
            } => {
                let specs = build_methods(methods, &case.label)?;
                let reference = reference_solution(&problem, &u0, *t_final, (*reference).into())
                    .map_err(|e| RunError::from_core(ctx("reference"), e))?
                    .state;
                let mut jobs = Vec::new();
                for (i, spec) in specs.iter().enumerate() {
                    let mut counts = match sweep {
                        SweepConfig::Steps(s) => s.clone(),
                        SweepConfig::Budgets(b) => {
                            let (base, per_step) = cost_model(&problem, &u0, spec)
                                .map_err(|e| RunError::from_core(ctx(&spec.id()), e))?;
                            b.iter().map(|&budget| steps_for_budget(budget, base, per_step)).collect()
                        }
                    };
                    counts.sort_unstable();
                    counts.dedup();
                    jobs.extend(counts.into_iter().map(|n| (i, n)));
                }
                let job = |&(i, n): &(usize, usize)| {
                    run_convergence_job(&case.label, &problem, &u0, &specs[i], *t_final, n, &reference, wall_time)
                        .map(|row| (i, row))
                };
                let mut rows: Vec<(usize, ResultRow)> =
                    self.pool.install(|| jobs.par_iter().map(job).collect::<Result<_, _>>())?;
                rows.sort_by(|a, b| (a.0, a.1.n_steps).cmp(&(b.0, b.1.n_steps)));
                Ok(Table::Convergence(rows.into_iter().map(|(_, r)| r).collect()))
            }
            StudyConfig::SingleStep { method, times } => {
                let spec = build_methods(std::slice::from_ref(method), &case.label)?.remove(0);
                let delta = match case.problem.initial {
                    crate::config::InitialConfig::Coherent { delta } => delta,
                    crate::config::InitialConfig::Gaussian { .. } => unreachable!("validated"),
                };
                let job = |&t: &f64| -> Result<SingleStepRow, RunError> {
                    let mut u = u0.clone();
                    let mut p = Propagator::new(problem.clone(), spec.clone())
                        .map_err(|e| RunError::from_core(ctx(&spec.id()), e))?;
                    p.step(&mut u, t)
                        .map_err(|e| RunError::from_core(format!("{}: step to t = {t}", case.label), e))?;
                    let exact = WaveState::from_fn(u.grid().clone(), |x| coherent_state(x, delta, t));
                    Ok(SingleStepRow {
                        case: case.label.clone(),
                        method: spec.id(),
                        t,
                        l2_error: u.error_l2(&exact).expect("same grid"),
                        l2_error_plain: u.error_with(&exact, NormWeighting::Plain).expect("same grid"),
                        norm_defect: relative_norm_change(&u0, &u),
                    })
                };
                let rows: Vec<SingleStepRow> = self.pool.install(|| times.par_iter().map(job).collect::<Result<_, _>>())?;
                Ok(Table::SingleStep(rows))
            }
            StudyConfig::BasisSize {
                deltas,
                tolerance,
                t_final,
            } => {
                let grid = u0.grid().clone();
                let job = |&delta: &f64| -> Result<BasisSizeRow, RunError> {
                    let start = WaveState::from_fn(grid.clone(), |x| coherent_state(x, delta, 0.0));
                    let size = required_basis_size(&start, *tolerance)
                        .map_err(|e| RunError::from_core(format!("{}: delta = {delta}", case.label), e))?;
                    let basis = HermiteBasis::new(size.m, grid.clone())
                        .map_err(|e| RunError::from_core(ctx("basis"), e))?;
                    let mut u = start;
                    basis
                        .propagate(&mut u, *t_final)
                        .map_err(|e| RunError::from_core(ctx("basis"), e))?;
                    let exact = WaveState::from_fn(grid.clone(), |x| coherent_state(x, delta, *t_final));
                    Ok(BasisSizeRow {
                        case: case.label.clone(),
                        delta,
                        basis_size: size.m,
                        residual: size.residual,
                        l2_error: u.error_l2(&exact).expect("same grid"),
                    })
                };
                let rows: Vec<BasisSizeRow> = self.pool.install(|| deltas.par_iter().map(job).collect::<Result<_, _>>())?;
                Ok(Table::BasisSize(rows))
            }
        }
    }
}

fn build_methods(methods: &[MethodConfig], label: &str) -> Result<Vec<MethodSpec>, RunError> {
    methods
        .iter()
        .map(|m| m.build().map_err(|e| RunError::from_core(format!("{label}: method {}", m.scheme), e)))
        .collect()
}

fn relative_norm_change(before: &WaveState, after: &WaveState) -> f64 {
    let n0 = before.norm_l2();
    (after.norm_l2() - n0).abs() / n0
}

/// Exponentials used by `n` steps of `method` are `base + n·per_step`; measured with two tiny runs.
pub fn cost_model(problem: &Problem, u0: &WaveState, method: &MethodSpec) -> hermite_fourier::Result<(f64, f64)> {
    let count = |n: usize| -> hermite_fourier::Result<f64> {
        let mut u = u0.clone();
        let mut p = Propagator::new(problem.clone(), method.clone())?;
        let t0 = u.time();
        Ok(p.propagate(&mut u, t0 + 1e-6 * n as f64, n)?.cost.n_exponentials as f64)
    };
    let (one, two) = (count(1)?, count(2)?);
    Ok((2.0 * one - two, two - one))
}

pub fn steps_for_budget(budget: u64, base: f64, per_step: f64) -> usize {
    (((budget as f64 - base) / per_step).round() as usize).max(1)
}

#[allow(clippy::too_many_arguments)]
fn run_convergence_job(
    label: &str,
    problem: &Problem,
    u0: &WaveState,
    spec: &MethodSpec,
    t_final: f64,
    n_steps: usize,
    reference: &WaveState,
    wall_time: bool,
) -> Result<ResultRow, RunError> {
    let ctx = || format!("{label}: {} with {n_steps} steps", spec.id());
    let started = Instant::now();
    let mut u = u0.clone();
    let mut p = Propagator::new(problem.clone(), spec.clone()).map_err(|e| RunError::from_core(ctx(), e))?;
    let report = p
        .propagate(&mut u, t_final, n_steps)
        .map_err(|e| RunError::from_core(ctx(), e))?;
    let elapsed = started.elapsed().as_secs_f64();
    let l2_error = u.error_l2(reference).expect("same grid");
    let l2_error_plain = u.error_with(reference, NormWeighting::Plain).expect("same grid");
    let energy_error = (p.energy(&u) - p.energy(reference)).abs();
    let norm_defect = relative_norm_change(u0, &u);
    for (name, v) in [
        ("l2_error", l2_error),
        ("energy_error", energy_error),
        ("norm_defect", norm_defect),
    ] {
        if !v.is_finite() {
            return Err(RunError::from_core(ctx(), Error::NonFinite(name.into())));
        }
    }
    let unitary = !matches!(spec.split, Split::HoHermite { .. });
    if unitary && norm_defect >= NORM_DEFECT_LIMIT {
        return Err(RunError::NormDefect(format!(
            "{}: norm defect {norm_defect:e} exceeds {NORM_DEFECT_LIMIT:e}",
            ctx()
        )));
    }
    Ok(ResultRow {
        case: label.to_string(),
        method: spec.id(),
        scheme: spec.scheme.name().to_string(),
        n_steps,
        n_fft_pairs: report.cost.n_fft_pairs,
        n_exponentials: report.cost.n_exponentials,
        l2_error,
        l2_error_plain,
        energy_error,
        norm_defect,
        wall_time_seconds: if wall_time { elapsed } else { 0.0 },
    })
}
