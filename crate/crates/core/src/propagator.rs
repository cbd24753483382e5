//! Time stepping of the semidiscrete equation by a splitting scheme.
//!
//! Three ways of splitting the Hamiltonian are supported:
//!
//! * [`Split::Fourier`]: kinetic drift `p²/(2μ)` against a kick carrying the whole potential
//!   `½μω²x² + εV_I + σ|u|²`.
//! * [`Split::HoFourier`]: the (time-dependent) oscillator against `εV_I + σ|u|²`, where each
//!   oscillator stage is factorized into kick–drift–kick and adjacent kicks are merged, so a
//!   stage costs one FFT pair.
//! * [`Split::HoHermite`]: the same split, with the oscillator stages evaluated in a truncated
//!   Hermite basis.
//!
//! Within a step the kick of stage `i` is evaluated with time frozen at the start of the stage,
//! and only drift stages advance the running time. Consecutive steps of [`Propagator::propagate`]
//! merge the trailing kick of one step into the leading kick of the next.


use crate::error::{Error, Result};
use crate::factorization::{merge_kick_chain, KdkCoefficients, KickChain};
use crate::flows::{build_kick_phase_into, CostCounter, DriftCache, SpectralFlows};
use crate::hermite::HermiteBasis;
use crate::magnus::{stage_kdk, MagnusOrder};
use crate::problem::Problem;
use crate::schemes::SplittingScheme;
use crate::state::WaveState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Fourier,
    HoFourier,
    HoHermite { basis_size: usize },
}

impl Split {
    pub fn label(&self) -> String {
        match self {
            Split::Fourier => "F".into(),
            Split::HoFourier => "HF".into(),
            Split::HoHermite { basis_size } => format!("H{basis_size}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec {
    pub split: Split,
    pub scheme: SplittingScheme,
    /// Oscillator-stage approximation; ignored by [`Split::Fourier`].
    pub magnus: MagnusOrder,
}

impl MethodSpec {
    pub fn fourier(scheme: SplittingScheme) -> Self {
        Self {
            split: Split::Fourier,
            scheme,
            magnus: MagnusOrder::ExactConstant,
        }
    }

    pub fn ho_fourier(scheme: SplittingScheme, magnus: MagnusOrder) -> Self {
        Self {
            split: Split::HoFourier,
            scheme,
            magnus,
        }
    }

    pub fn ho_hermite(scheme: SplittingScheme, basis_size: usize) -> Self {
        Self {
            split: Split::HoHermite { basis_size },
            scheme,
            magnus: MagnusOrder::ExactConstant,
        }
    }

    /// e.g. `ni5_84/HF/magnus6`, `strang_bab/F`, `srkn6_4/H150`.
    pub fn id(&self) -> String {
        match self.split {
            Split::HoFourier => format!(
                "{}/{}/{}",
                self.scheme.name(),
                self.split.label(),
                self.magnus.name()
            ),
            _ => format!("{}/{}", self.scheme.name(), self.split.label()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepReport {
    pub cost: CostCounter,
    pub warnings: Vec<String>,
}

/// Stateful stepper holding FFT plans, drift caches and the pending merged kick.
#[derive(Debug, Clone)]
pub struct Propagator {
    problem: Problem,
    method: MethodSpec,
    flows: SpectralFlows,
    caches: Vec<DriftCache>,
    phase: Vec<f64>,
    pending: Option<Vec<f64>>,
    basis: Option<HermiteBasis>,
    constant_chain: Option<(f64, KickChain)>,
    strict: bool,
    warnings: Vec<String>,
}

impl Propagator {
    pub fn new(problem: Problem, method: MethodSpec) -> Result<Self> {
        let grid = problem.grid().clone();
        let basis = match method.split {
            Split::HoHermite { basis_size } => {
                let w2 = problem
                    .omega_sq()
                    .constant_value()
                    .ok_or(Error::TimeDependentHermite)?;
                if !(w2 > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "squared frequency must be positive, got {w2}"
                    )));
                }
                Some(HermiteBasis::for_oscillator(
                    basis_size,
                    grid.clone(),
                    problem.mu(),
                    w2.sqrt(),
                )?)
            }
            _ => None,
        };
        if method.split == Split::HoFourier
            && method.magnus == MagnusOrder::ExactConstant
            && !problem.omega_sq().is_constant()
        {
            return Err(Error::InvalidParameter(
                "time-dependent frequency needs magnus4 or magnus6".into(),
            ));
        }
        let caches = method
            .scheme
            .drifts()
            .iter()
            .map(|_| DriftCache::new(&grid, 0.0))
            .collect();
        Ok(Self {
            flows: SpectralFlows::new(grid.clone()),
            caches,
            phase: Vec::with_capacity(grid.len()),
            pending: None,
            basis,
            constant_chain: None,
            strict: false,
            warnings: Vec::new(),
            problem,
            method,
        })
    }

    /// In strict mode a near-singular factorization is an error instead of a warning.
    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn method(&self) -> &MethodSpec {
        &self.method
    }

    pub fn counter(&self) -> CostCounter {
        self.flows.counter()
    }

    /// Energy of `u` at its current time.
    pub fn energy(&mut self, u: &WaveState) -> f64 {
        u.energy_with(&self.problem, u.time(), self.flows.transform())
    }

    /// One full step of size `h` (no kick merging with neighbouring steps).
    pub fn step(&mut self, u: &mut WaveState, h: f64) -> Result<StepReport> {
        self.check_grid(u)?;
        let before = self.counter();
        self.warnings.clear();
        self.flush(u)?;
        self.advance(u, h, false)?;
        Ok(StepReport {
            cost: self.counter() - before,
            warnings: std::mem::take(&mut self.warnings),
        })
    }

    /// `n_steps` equal steps from `u.time()` to `t_final`, merging kicks across step boundaries.
    pub fn propagate(&mut self, u: &mut WaveState, t_final: f64, n_steps: usize) -> Result<StepReport> {
        self.propagate_observed(u, t_final, n_steps, 0, |_, _| {})
    }

    /// Like [`propagate`](Self::propagate), calling `observer(step, state)` after every
    /// `every`-th step (`every == 0` disables observation). Observed steps apply their trailing
    /// kick instead of merging it, costing one extra exponential each.
    pub fn propagate_observed(
        &mut self,
        u: &mut WaveState,
        t_final: f64,
        n_steps: usize,
        every: usize,
        mut observer: impl FnMut(usize, &WaveState),
    ) -> Result<StepReport> {
        self.check_grid(u)?;
        if n_steps == 0 {
            return Err(Error::InvalidParameter("need at least one step".into()));
        }
        let before = self.counter();
        self.warnings.clear();
        self.flush(u)?;
        let t0 = u.time();
        let h = (t_final - t0) / n_steps as f64;
        for i in 0..n_steps {
            let last = i + 1 == n_steps;
            let observe = every > 0 && (i + 1) % every == 0;
            let result = self.advance(u, h, !(last || observe));
            if result.is_err() {
                self.pending = None;
            }
            result?;
            u.set_time(if last { t_final } else { t0 + (i + 1) as f64 * h });
            if observe {
                observer(i + 1, u);
            }
        }
        Ok(StepReport {
            cost: self.counter() - before,
            warnings: std::mem::take(&mut self.warnings),
        })
    }

    fn check_grid(&self, u: &WaveState) -> Result<()> {
        if self.problem.grid().same_as(u.grid()) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    fn flush(&mut self, u: &mut WaveState) -> Result<()> {
        if let Some(phase) = self.pending.take() {
            self.flows.apply_kick(u, &phase)?;
        }
        Ok(())
    }

    fn advance(&mut self, u: &mut WaveState, h: f64, defer_trailing: bool) -> Result<()> {
        let t_n = u.time();
        let split = self.method.split;
        let chain = match split {
            Split::HoFourier => Some(self.kick_chain(t_n, h)?),
            _ => None,
        };
        let m = self.method.scheme.stages();
        let mu = self.problem.mu();
        let mut t = t_n;
        for k in 0..=m {
            let dt_b = self.method.scheme.kicks()[k] * h;
            let alpha = match split {
                Split::Fourier => dt_b * mu * self.problem.omega_sq().eval(t),
                Split::HoFourier => chain.as_ref().map_or(0.0, |c| c.alphas[k]),
                Split::HoHermite { .. } => 0.0,
            };
            self.kick(u, t, dt_b, alpha, k == m && defer_trailing)?;
            if k == m {
                break;
            }
            let a_h = self.method.scheme.drifts()[k] * h;
            match split {
                Split::Fourier => self.drift(u, k, a_h / mu)?,
                Split::HoFourier => {
                    let g = chain.as_ref().map_or(0.0, |c| c.drifts[k]);
                    self.drift(u, k, g)?
                }
                Split::HoHermite { .. } => {
                    if a_h != 0.0 {
                        if let Some(basis) = &self.basis {
                            basis.propagate(u, a_h)?;
                        }
                        self.flows.record_exponential();
                    }
                }
            }
            t += a_h;
        }
        u.set_time(t_n + h);
        Ok(())
    }

    fn drift(&mut self, u: &mut WaveState, stage: usize, theta: f64) -> Result<()> {
        if theta == 0.0 {
            return Ok(());
        }
        let grid = self.problem.grid().clone();
        let cache = &mut self.caches[stage];
        cache.ensure(&grid, theta);
        self.flows.apply_drift(u, theta, Some(cache))
    }

    fn kick(&mut self, u: &mut WaveState, t: f64, dt_b: f64, alpha: f64, defer: bool) -> Result<()> {
        let structural_zero = dt_b == 0.0 && alpha == 0.0;
        if structural_zero && self.pending.is_none() {
            return Ok(());
        }
        if structural_zero {
            self.phase.clear();
            self.phase.resize(u.amplitudes().len(), 0.0);
        } else {
            build_kick_phase_into(&self.problem, u, t, dt_b, alpha, &mut self.phase)?;
        }
        if let Some(pending) = self.pending.take() {
            for (p, q) in self.phase.iter_mut().zip(&pending) {
                *p += q;
            }
        }
        if defer {
            self.pending = Some(self.phase.clone());
            return Ok(());
        }
        let phase = std::mem::take(&mut self.phase);
        let result = self.flows.apply_kick(u, &phase);
        self.phase = phase;
        result
    }

    fn kick_chain(&mut self, t_n: f64, h: f64) -> Result<KickChain> {
        let autonomous_trap = self.problem.omega_sq().is_constant();
        if autonomous_trap {
            if let Some((cached_h, chain)) = &self.constant_chain {
                if *cached_h == h {
                    return Ok(chain.clone());
                }
            }
        }
        let drifts = self.method.scheme.drifts().to_vec();
        let starts: Vec<f64> = drifts
            .iter()
            .scan(t_n, |t, a| {
                let start = *t;
                *t += a * h;
                Some(start)
            })
            .collect();
        let problem = &self.problem;
        let order = self.method.magnus;
        let strict = self.strict;
        let mut warnings = Vec::new();
        let chain = merge_kick_chain(&drifts, h, |i, dt| {
            let coeffs: KdkCoefficients = stage_kdk(problem, starts[i], dt, order)?;
            if coeffs.is_near_singular(dt) {
                if strict {
                    return Err(Error::Singular { t: dt, g: coeffs.g });
                }
                warnings.push(format!("stage {i}: factorization near its singularity (g = {:e})", coeffs.g));
            }
            Ok(coeffs)
        })?;
        self.warnings.extend(warnings);
        if autonomous_trap {
            self.constant_chain = Some((h, chain.clone()));
        }
        Ok(chain)
    }
}

/// Single step of `method` applied to `u`.
pub fn step(u: &mut WaveState, problem: &Problem, method: &MethodSpec, h: f64) -> Result<StepReport> {
    Propagator::new(problem.clone(), method.clone())?.step(u, h)
}

/// `n_steps` equal steps from `u.time()` to `t_final`.
pub fn propagate(
    u: &mut WaveState,
    problem: &Problem,
    method: &MethodSpec,
    t_final: f64,
    n_steps: usize,
) -> Result<StepReport> {
    Propagator::new(problem.clone(), method.clone())?.propagate(u, t_final, n_steps)
}

/// Resolution and acceptance threshold of a [`reference_solution`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSpec {
    /// Coarsest of the three runs (`steps`, `2·steps`, `4·steps`).
    pub steps: usize,
    pub tolerance: f64,
}

impl Default for ReferenceSpec {
    fn default() -> Self {
        Self {
            steps: 1024,
            tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub state: WaveState,
    /// Finest step count used.
    pub steps: usize,
    /// Change of the extrapolated answer when the step is halved.
    pub richardson_difference: f64,
}

/// The method used for reference solutions: SRKN₆4 on the oscillator split (Magnus-6 stages if
/// the trap varies in time), or on the Fourier split when there is no trap.
pub fn reference_method(problem: &Problem) -> MethodSpec {
    let scheme = SplittingScheme::builtin("srkn6_4").expect("builtin scheme");
    match problem.omega_sq().constant_value() {
        Some(w2) if w2 > 0.0 => MethodSpec::ho_fourier(scheme, MagnusOrder::ExactConstant),
        Some(_) => MethodSpec::fourier(scheme),
        None => MethodSpec::ho_fourier(scheme, MagnusOrder::Magnus6),
    }
}

/// High-accuracy solution at `t_final`.
///
/// The reference method is symmetric, so its global error expands in even powers of the step.
/// Runs at `n`, `2n` and `4n` steps give two `h⁴`-eliminated solutions; the finer one is returned
/// if the two differ by less than `spec.tolerance`.
pub fn reference_solution(
    problem: &Problem,
    u0: &WaveState,
    t_final: f64,
    spec: ReferenceSpec,
) -> Result<ReferenceSolution> {
    let method = reference_method(problem);
    let base = spec.steps.max(1);
    let run = |steps: usize| -> Result<WaveState> {
        let mut u = u0.clone();
        Propagator::new(problem.clone(), method.clone())?.propagate(&mut u, t_final, steps)?;
        Ok(u)
    };
    let runs = [run(base)?, run(2 * base)?, run(4 * base)?];
    let coarse = extrapolate(&runs[1], &runs[0])?;
    let fine = extrapolate(&runs[2], &runs[1])?;
    let difference = fine.error_l2(&coarse)?;
    if !(difference < spec.tolerance) {
        return Err(Error::ReferenceNotConverged {
            difference,
            tolerance: spec.tolerance,
        });
    }
    Ok(ReferenceSolution {
        state: fine,
        steps: 4 * base,
        richardson_difference: difference,
    })
}

fn extrapolate(fine: &WaveState, coarse: &WaveState) -> Result<WaveState> {
    let amplitudes = fine
        .amplitudes()
        .iter()
        .zip(coarse.amplitudes())
        .map(|(f, c)| f + (f - c) / 15.0)
        .collect();
    WaveState::new(fine.grid().clone(), amplitudes, fine.time())
}
