//! Built-in experiment presets.

use std::f64::consts::PI;

use crate::config::{
    CaseConfig, ExperimentConfig, InitialConfig, MagnusName, MethodConfig, ProblemConfig, ReferenceConfig,
    SplitName, StudyConfig, SweepConfig, TrapConfig, SCHEMA_VERSION,
};

pub const PRESET_NAMES: [&str; 8] = [
    "fig1_single_step",
    "hermite_count",
    "fig3_sigma0.01",
    "fig3_sigma1",
    "fig3_sigma100",
    "fig4_6_methods",
    "timedep_cos",
    "timedep_pulse",
];

/// Final time of the convergence presets.
pub const T_FINAL: f64 = 10.0;

const METHOD_SCHEMES: [&str; 4] = ["strang_bab", "ni4_82", "srkn6_4", "ni5_84"];

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let cases = match name {
        "fig1_single_step" => vec![fig1()],
        "hermite_count" => vec![hermite_count()],
        "fig3_sigma0.01" => vec![fig3(0.01)],
        "fig3_sigma1" => vec![fig3(1.0)],
        "fig3_sigma100" => vec![fig3(100.0)],
        "fig4_6_methods" => [0.01, 1.0, 100.0].into_iter().map(fig4_6).collect(),
        "timedep_cos" => vec![timedep(
            "timedep_cos",
            100.0,
            TrapConfig::Cosine {
                amplitude: 4.0,
                modulation: 0.1,
                frequency: 0.5,
            },
        )],
        // the pulse raises ω to 6, so the coarsest steps would cross the factorization horizon
        "timedep_pulse" => vec![timedep(
            "timedep_pulse",
            200.0,
            TrapConfig::Pulse {
                base: 4.0,
                strength: 0.25,
                sharpness: 2.0,
                center: 2.0,
            },
        )],
        _ => return None,
    };
    Some(ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        name: name.to_string(),
        cases,
        wall_time: true,
    })
}

fn unit_oscillator(domain: [f64; 2], points: usize, initial: InitialConfig) -> ProblemConfig {
    ProblemConfig {
        domain,
        points,
        mass: 1.0,
        trap: TrapConfig::Constant { omega_sq: 1.0 },
        quartic: 0.0,
        sigma: 0.0,
        initial,
    }
}

fn fig1() -> CaseConfig {
    let margin = 1e-3;
    let count = 121;
    let mut times: Vec<f64> = (0..count)
        .map(|i| -PI + margin + (2.0 * (PI - margin)) * i as f64 / (count - 1) as f64)
        .chain([-3.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 3.0])
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    CaseConfig {
        label: "fig1_single_step".into(),
        problem: unit_oscillator([-10.0, 10.0], 1024, InitialConfig::Coherent { delta: 0.0 }),
        study: StudyConfig::SingleStep {
            method: MethodConfig::new(SplitName::Hf, "strang_bab"),
            times,
        },
    }
}

fn hermite_count() -> CaseConfig {
    CaseConfig {
        label: "hermite_count".into(),
        problem: unit_oscillator([-10.0, 10.0], 512, InitialConfig::Coherent { delta: 0.0 }),
        study: StudyConfig::BasisSize {
            deltas: vec![0.1, 2.0],
            tolerance: 1e-11,
            t_final: 10.0,
        },
    }
}

/// Nonlinear oscillator with `ψ(x,0) = ρ·exp(−(x−1)²/2)`.
pub fn nonlinear_problem(sigma: f64) -> ProblemConfig {
    let (domain, points) = if sigma < 0.1 {
        ([-20.0, 20.0], 256)
    } else if sigma <= 1.0 {
        ([-30.0, 30.0], 512)
    } else {
        ([-30.0, 30.0], 2048)
    };
    ProblemConfig {
        domain,
        points,
        mass: 1.0,
        trap: TrapConfig::Constant { omega_sq: 1.0 },
        quartic: 0.0,
        sigma,
        initial: InitialConfig::Gaussian { center: 1.0 },
    }
}

/// Reference settings for the nonlinear problems; see the decisions ledger for the tolerances.
pub fn nonlinear_reference(sigma: f64) -> ReferenceConfig {
    if sigma < 0.1 {
        ReferenceConfig {
            steps: 128,
            tolerance: 1e-12,
        }
    } else if sigma <= 1.0 {
        ReferenceConfig {
            steps: 256,
            tolerance: 5e-12,
        }
    } else {
        ReferenceConfig {
            steps: 4096,
            tolerance: 1e-8,
        }
    }
}

/// Basis sizes for the Hermite split.
pub fn hermite_sizes(sigma: f64) -> Vec<usize> {
    if sigma < 0.1 {
        vec![10, 20]
    } else if sigma <= 1.0 {
        vec![20, 40]
    } else {
        vec![150]
    }
}

/// Exponential budgets `b₀·2^{k/2}`. The strongly nonlinear problem starts and ends higher
/// because every scheme is unstable below a few thousand exponentials there.
pub fn budget_sweep(sigma: f64) -> Vec<u64> {
    if sigma > 1.0 {
        geometric_budgets(400.0, 13)
    } else {
        geometric_budgets(100.0, 12)
    }
}

fn geometric_budgets(b0: f64, last: i32) -> Vec<u64> {
    (0..=last).map(|k| (b0 * 2f64.powf(0.5 * k as f64)).round() as u64).collect()
}

fn label(prefix: &str, sigma: f64) -> String {
    format!("{prefix}_sigma{sigma}")
}

fn fig3(sigma: f64) -> CaseConfig {
    let mut methods = vec![
        MethodConfig::new(SplitName::F, "strang_bab"),
        MethodConfig::new(SplitName::Hf, "strang_bab"),
    ];
    methods.extend(hermite_sizes(sigma).into_iter().map(|m| MethodConfig::hermite("strang_bab", m)));
    CaseConfig {
        label: label("fig3", sigma),
        problem: nonlinear_problem(sigma),
        study: StudyConfig::Convergence {
            t_final: T_FINAL,
            methods,
            sweep: SweepConfig::Budgets(budget_sweep(sigma)),
            reference: nonlinear_reference(sigma),
        },
    }
}

fn fig4_6(sigma: f64) -> CaseConfig {
    let m = *hermite_sizes(sigma).last().expect("nonempty");
    let methods = METHOD_SCHEMES
        .iter()
        .flat_map(|s| {
            [
                MethodConfig::new(SplitName::F, s),
                MethodConfig::new(SplitName::Hf, s),
                MethodConfig::hermite(s, m),
            ]
        })
        .collect();
    CaseConfig {
        label: label("fig4_6", sigma),
        problem: nonlinear_problem(sigma),
        study: StudyConfig::Convergence {
            t_final: T_FINAL,
            methods,
            sweep: SweepConfig::Budgets(budget_sweep(sigma)),
            reference: nonlinear_reference(sigma),
        },
    }
}

fn timedep(name: &str, first_budget: f64, trap: TrapConfig) -> CaseConfig {
    let methods = ["srkn6_4", "ni5_84"]
        .iter()
        .flat_map(|s| {
            [
                MethodConfig::new(SplitName::F, s),
                MethodConfig::new(SplitName::Hf, s).magnus(MagnusName::Magnus4),
                MethodConfig::new(SplitName::Hf, s).magnus(MagnusName::Magnus6),
            ]
        })
        .collect();
    CaseConfig {
        label: name.to_string(),
        problem: ProblemConfig {
            domain: [-20.0, 20.0],
            points: 512,
            mass: 1.0,
            trap,
            quartic: 0.01,
            sigma: 0.0,
            initial: InitialConfig::Gaussian { center: 1.0 },
        },
        study: StudyConfig::Convergence {
            t_final: T_FINAL,
            methods,
            sweep: SweepConfig::Budgets(geometric_budgets(first_budget, 12)),
            reference: ReferenceConfig {
                steps: 512,
                tolerance: 1e-11,
            },
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_validate() {
        for name in PRESET_NAMES {
            let p = preset(name).unwrap();
            p.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(ExperimentConfig::from_json(&p.to_json()).unwrap(), p);
        }
        assert!(preset("fig7").is_none());
    }

    #[test]
    fn fig1_covers_required_times() {
        let StudyConfig::SingleStep { times, .. } = preset("fig1_single_step").unwrap().cases[0].study.clone() else {
            unreachable!()
        };
        for t in [-3.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 3.0, PI - 1e-3, -PI + 1e-3] {
            assert!(times.iter().any(|&s| (s - t).abs() < 1e-15), "{t}");
        }
        assert!(times.iter().all(|t| t.abs() < PI));
    }
}
