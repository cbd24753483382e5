//! Declarative experiment configuration (JSON).

use std::fmt;
use std::sync::Arc;

use hermite_fourier::propagator::ReferenceSpec;
use hermite_fourier::{
    Grid, MagnusOrder, MethodSpec, Perturbation, Problem, SplittingScheme, TimeFunction, WaveState,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub name: String,
    pub cases: Vec<CaseConfig>,
    /// Record wall-clock time per row. Disable for byte-reproducible output.
    #[serde(default = "default_true")]
    pub wall_time: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub label: String,
    pub problem: ProblemConfig,
    pub study: StudyConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub domain: [f64; 2],
    pub points: usize,
    #[serde(default = "default_one")]
    pub mass: f64,
    pub trap: TrapConfig,
    /// Strength of the static `x⁴/4` perturbation.
    #[serde(default)]
    pub quartic: f64,
    #[serde(default)]
    pub sigma: f64,
    pub initial: InitialConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrapConfig {
    Constant {
        omega_sq: f64,
    },
    /// `ω² = amplitude·(1 + modulation·cos(frequency·t))`
    Cosine {
        amplitude: f64,
        modulation: f64,
        frequency: f64,
    },
    /// `ω = base·(1 + strength·t/cosh²(sharpness·(t − center)))`
    Pulse {
        base: f64,
        strength: f64,
        sharpness: f64,
        center: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    /// `ρ·exp(−(x − center)²/2)` with `ρ` fixed numerically to unit norm.
    Gaussian { center: f64 },
    /// Displaced oscillator ground state, normalized analytically.
    Coherent { delta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitName {
    F,
    Hf,
    Hermite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MagnusName {
    #[default]
    Exact,
    Magnus4,
    Magnus6,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    pub split: SplitName,
    pub scheme: String,
    #[serde(default)]
    pub magnus: MagnusName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepConfig {
    Steps(Vec<usize>),
    /// Target numbers of exponentials; each is mapped to the nearest step count per method.
    Budgets(Vec<u64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    pub steps: usize,
    pub tolerance: f64,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        let spec = ReferenceSpec::default();
        Self {
            steps: spec.steps,
            tolerance: spec.tolerance,
        }
    }
}

impl From<ReferenceConfig> for ReferenceSpec {
    fn from(r: ReferenceConfig) -> Self {
        ReferenceSpec {
            steps: r.steps,
            tolerance: r.tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StudyConfig {
    /// Error against a reference solution over a sweep of step counts.
    Convergence {
        t_final: f64,
        methods: Vec<MethodConfig>,
        sweep: SweepConfig,
        #[serde(default)]
        reference: ReferenceConfig,
    },
    /// One step of each length in `times`, compared with the closed-form coherent state.
    SingleStep { method: MethodConfig, times: Vec<f64> },
    /// Hermite basis size needed per initial displacement.
    BasisSize {
        deltas: Vec<f64>,
        tolerance: f64,
        t_final: f64,
    },
}

impl StudyConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            StudyConfig::Convergence { .. } => "convergence",
            StudyConfig::SingleStep { .. } => "single_step",
            StudyConfig::BasisSize { .. } => "basis_size",
        }
    }
}

fn default_true() -> bool {
    true
}

fn default_one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Parse { line: usize, column: usize, message: String },
    Field { path: String, message: String },
}

impl ConfigError {
    fn field(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Field {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse {
                line,
                column,
                message,
            } => write!(f, "line {line}, column {column}: {message}"),
            ConfigError::Field { path, message } => write!(f, "{path}: {message}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl From<serde_json::Error> for ConfigError {
    fn from(e: serde_json::Error) -> Self {
        ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Applies `key=value` overrides. Keys are dotted paths; a key that does not start with
    /// `cases.`, `name`, `wall_time` or `schema_version` is applied to every case.
    /// Values are parsed as JSON, falling back to a plain string.
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut doc = serde_json::to_value(self).expect("config serializes");
        for item in overrides {
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| ConfigError::field(item.as_str(), "override must look like key=value"))?;
            let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
            let absolute = ["cases", "name", "wall_time", "schema_version"]
                .iter()
                .any(|root| key == *root || key.starts_with(&format!("{root}.")));
            if absolute {
                set_path(&mut doc, key, value).map_err(|m| ConfigError::field(key, m))?;
            } else {
                let n = doc["cases"].as_array().map_or(0, Vec::len);
                for i in 0..n {
                    set_path(&mut doc["cases"][i], key, value.clone())
                        .map_err(|m| ConfigError::field(format!("cases.{i}.{key}"), m))?;
                }
            }
        }
        let config: Self = serde_json::from_value(doc).map_err(|e| ConfigError::field("override", e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::field(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        if self.cases.is_empty() {
            return Err(ConfigError::field("cases", "at least one case is required"));
        }
        let kind = self.cases[0].study.kind();
        for (i, case) in self.cases.iter().enumerate() {
            let at = |field: &str| format!("cases[{i}].{field}");
            if case.study.kind() != kind {
                return Err(ConfigError::field(at("study.kind"), format!("all cases must be of kind {kind}")));
            }
            case.problem.validate(&at("problem"))?;
            case.study.validate(&case.problem, &at("study"))?;
        }
        Ok(())
    }
}

fn set_path(doc: &mut Value, path: &str, value: Value) -> Result<(), String> {
    let mut node = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for (depth, part) in parts.iter().enumerate() {
        let last = depth + 1 == parts.len();
        node = match node {
            Value::Object(map) => {
                if !map.contains_key(*part) && !last {
                    return Err(format!("no field '{part}'"));
                }
                if last {
                    map.insert(part.to_string(), value);
                    return Ok(());
                }
                map.get_mut(*part).expect("checked")
            }
            Value::Array(items) => {
                let index: usize = part.parse().map_err(|_| format!("'{part}' is not an index"))?;
                let len = items.len();
                let slot = items
                    .get_mut(index)
                    .ok_or_else(|| format!("index {index} out of range (length {len})"))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(format!("cannot descend into '{part}'")),
        };
    }
    Err("empty path".into())
}

impl ProblemConfig {
    fn validate(&self, at: &str) -> Result<(), ConfigError> {
        let [a, b] = self.domain;
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(ConfigError::field(format!("{at}.domain"), "need finite a < b"));
        }
        if self.points < 4 || self.points % 2 != 0 {
            return Err(ConfigError::field(format!("{at}.points"), "need an even number ≥ 4"));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(ConfigError::field(format!("{at}.mass"), "must be positive"));
        }
        let finite = |v: f64, name: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::field(format!("{at}.{name}"), "must be finite"))
            }
        };
        finite(self.quartic, "quartic")?;
        finite(self.sigma, "sigma")?;
        match self.trap {
            TrapConfig::Constant { omega_sq } => finite(omega_sq, "trap.omega_sq")?,
            TrapConfig::Cosine {
                amplitude,
                modulation,
                frequency,
            } => {
                for (v, n) in [(amplitude, "amplitude"), (modulation, "modulation"), (frequency, "frequency")] {
                    finite(v, &format!("trap.{n}"))?;
                }
            }
            TrapConfig::Pulse {
                base,
                strength,
                sharpness,
                center,
            } => {
                for (v, n) in [(base, "base"), (strength, "strength"), (sharpness, "sharpness"), (center, "center")] {
                    finite(v, &format!("trap.{n}"))?;
                }
            }
        }
        match self.initial {
            InitialConfig::Gaussian { center } => finite(center, "initial.center"),
            InitialConfig::Coherent { delta } => finite(delta, "initial.delta"),
        }
    }

    pub fn trap_function(&self) -> TimeFunction {
        match self.trap {
            TrapConfig::Constant { omega_sq } => TimeFunction::Constant(omega_sq),
            TrapConfig::Cosine {
                amplitude,
                modulation,
                frequency,
            } => TimeFunction::Cosine {
                amplitude,
                modulation,
                frequency,
            },
            TrapConfig::Pulse {
                base,
                strength,
                sharpness,
                center,
            } => TimeFunction::SquaredPulse {
                base,
                strength,
                sharpness,
                center,
            },
        }
    }

    fn trap_is_constant(&self) -> bool {
        self.trap_function().is_constant()
    }

    /// Unit oscillator without perturbation: closed-form solutions exist.
    pub fn is_unit_oscillator(&self) -> bool {
        self.mass == 1.0
            && self.quartic == 0.0
            && self.sigma == 0.0
            && matches!(self.trap, TrapConfig::Constant { omega_sq } if omega_sq == 1.0)
    }

    pub fn grid(&self) -> hermite_fourier::Result<Arc<Grid>> {
        Ok(Arc::new(Grid::new(self.domain[0], self.domain[1], self.points)?))
    }

    pub fn build(&self) -> hermite_fourier::Result<(Problem, WaveState)> {
        let grid = self.grid()?;
        let mut problem = Problem::harmonic(grid.clone())
            .with_mass(self.mass)?
            .with_omega_sq(self.trap_function())
            .with_sigma(TimeFunction::Constant(self.sigma));
        if self.quartic != 0.0 {
            problem = problem.with_perturbation(Perturbation::Quartic {
                strength: self.quartic,
            });
        }
        let u0 = match self.initial {
            InitialConfig::Gaussian { center } => WaveState::from_fn(grid, |x| {
                Complex64::new((-(x - center) * (x - center) / 2.0).exp(), 0.0)
            })
            .normalized(),
            InitialConfig::Coherent { delta } => {
                WaveState::from_fn(grid, |x| hermite_fourier::analytic::coherent_state(x, delta, 0.0))
            }
        };
        Ok((problem, u0))
    }
}

impl MethodConfig {
    pub fn new(split: SplitName, scheme: &str) -> Self {
        Self {
            split,
            scheme: scheme.to_string(),
            magnus: MagnusName::Exact,
            basis_size: None,
        }
    }

    pub fn magnus(mut self, magnus: MagnusName) -> Self {
        self.magnus = magnus;
        self
    }

    pub fn hermite(scheme: &str, basis_size: usize) -> Self {
        Self {
            split: SplitName::Hermite,
            scheme: scheme.to_string(),
            magnus: MagnusName::Exact,
            basis_size: Some(basis_size),
        }
    }

    pub(crate) fn validate(&self, problem: &ProblemConfig, at: &str) -> Result<(), ConfigError> {
        SplittingScheme::builtin(&self.scheme)
            .map_err(|_| ConfigError::field(format!("{at}.scheme"), format!("unknown scheme '{}'", self.scheme)))?;
        match self.split {
            SplitName::Hermite => {
                match self.basis_size {
                    Some(m) if m >= 1 => {}
                    _ => return Err(ConfigError::field(format!("{at}.basis_size"), "hermite split needs basis_size ≥ 1")),
                }
                if !problem.trap_is_constant() {
                    return Err(ConfigError::field(format!("{at}.split"), "hermite split needs a constant trap"));
                }
            }
            SplitName::Hf => {
                if self.magnus == MagnusName::Exact && !problem.trap_is_constant() {
                    return Err(ConfigError::field(
                        format!("{at}.magnus"),
                        "time-dependent trap needs magnus4 or magnus6",
                    ));
                }
            }
            SplitName::F => {}
        }
        if self.split != SplitName::Hermite && self.basis_size.is_some() {
            return Err(ConfigError::field(format!("{at}.basis_size"), "only valid for the hermite split"));
        }
        Ok(())
    }

    pub fn build(&self) -> hermite_fourier::Result<MethodSpec> {
        let scheme = SplittingScheme::builtin(&self.scheme)?;
        Ok(match self.split {
            SplitName::F => MethodSpec::fourier(scheme),
            SplitName::Hf => MethodSpec::ho_fourier(
                scheme,
                match self.magnus {
                    MagnusName::Exact => MagnusOrder::ExactConstant,
                    MagnusName::Magnus4 => MagnusOrder::Magnus4,
                    MagnusName::Magnus6 => MagnusOrder::Magnus6,
                },
            ),
            SplitName::Hermite => MethodSpec::ho_hermite(scheme, self.basis_size.unwrap_or(1)),
        })
    }
}

impl StudyConfig {
    pub(crate) fn validate(&self, problem: &ProblemConfig, at: &str) -> Result<(), ConfigError> {
        let positive_time = |t: f64, field: &str| {
            if t.is_finite() && t != 0.0 {
                Ok(())
            } else {
                Err(ConfigError::field(format!("{at}.{field}"), "must be finite and nonzero"))
            }
        };
        match self {
            StudyConfig::Convergence {
                t_final,
                methods,
                sweep,
                reference,
            } => {
                positive_time(*t_final, "t_final")?;
                if methods.is_empty() {
                    return Err(ConfigError::field(format!("{at}.methods"), "at least one method is required"));
                }
                for (j, m) in methods.iter().enumerate() {
                    m.validate(problem, &format!("{at}.methods[{j}]"))?;
                }
                let ok = match sweep {
                    SweepConfig::Steps(s) => !s.is_empty() && s.iter().all(|&n| n > 0),
                    SweepConfig::Budgets(b) => !b.is_empty() && b.iter().all(|&n| n > 0),
                };
                if !ok {
                    return Err(ConfigError::field(format!("{at}.sweep"), "must be a nonempty list of positive entries"));
                }
                if reference.steps == 0 || !(reference.tolerance > 0.0) {
                    return Err(ConfigError::field(format!("{at}.reference"), "need steps ≥ 1 and tolerance > 0"));
                }
            }
            StudyConfig::SingleStep { method, times } => {
                method.validate(problem, &format!("{at}.method"))?;
                if times.is_empty() || times.iter().any(|t| !t.is_finite()) {
                    return Err(ConfigError::field(format!("{at}.times"), "must be a nonempty list of finite times"));
                }
                if !problem.is_unit_oscillator() || !matches!(problem.initial, InitialConfig::Coherent { .. }) {
                    return Err(ConfigError::field(
                        at,
                        "single_step needs an unperturbed unit oscillator and a coherent initial state",
                    ));
                }
            }
            StudyConfig::BasisSize {
                deltas,
                tolerance,
                t_final,
            } => {
                positive_time(*t_final, "t_final")?;
                if deltas.is_empty() || deltas.iter().any(|d| !d.is_finite()) {
                    return Err(ConfigError::field(format!("{at}.deltas"), "must be a nonempty list of finite values"));
                }
                if !(*tolerance > 0.0) {
                    return Err(ConfigError::field(format!("{at}.tolerance"), "must be positive"));
                }
                if !problem.is_unit_oscillator() {
                    return Err(ConfigError::field(at, "basis_size needs an unperturbed unit oscillator"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> &'static str {
        r#"{
  "schema_version": 1,
  "name": "minimal",
  "cases": [{
    "label": "ho",
    "problem": {
      "domain": [-10, 10],
      "points": 128,
      "trap": {"family": "constant", "omega_sq": 1},
      "initial": {"family": "coherent", "delta": 1}
    },
    "study": {
      "kind": "convergence",
      "t_final": 1,
      "methods": [{"split": "hf", "scheme": "strang_bab"}],
      "sweep": {"steps": [10]}
    }
  }]
}"#
    }

    #[test]
    fn minimal_config_parses() {
        let c = ExperimentConfig::from_json(minimal()).unwrap();
        assert_eq!(c.cases.len(), 1);
        assert!(c.wall_time);
        let again = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn unknown_scheme_names_the_field() {
        let text = minimal().replace("strang_bab", "nope");
        let err = ExperimentConfig::from_json(&text).unwrap_err();
        assert_eq!(err.to_string(), "cases[0].study.methods[0].scheme: unknown scheme 'nope'");
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = ExperimentConfig::from_json("{\n  \"schema_version\": 1,\n  oops\n}").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 3, .. }));
        let err = ExperimentConfig::from_json(&minimal().replace("\"points\"", "\"pointz\"")).unwrap_err();
        assert!(err.to_string().contains("pointz"));
    }

    #[test]
    fn overrides() {
        let c = ExperimentConfig::from_json(minimal()).unwrap();
        let o = c
            .with_overrides(&["problem.sigma=2.5".into(), "study.sweep.steps=[4,8]".into(), "name=renamed".into()])
            .unwrap();
        assert_eq!(o.cases[0].problem.sigma, 2.5);
        assert_eq!(o.name, "renamed");
        match &o.cases[0].study {
            StudyConfig::Convergence { sweep, .. } => assert_eq!(sweep, &SweepConfig::Steps(vec![4, 8])),
            _ => unreachable!(),
        }
        assert!(c.with_overrides(&["problem.nothing.here=1".into()]).is_err());
        assert!(c.with_overrides(&["problem.points=7".into()]).is_err());
        assert!(c.with_overrides(&["sigma".into()]).is_err());
    }

    #[test]
    fn hermite_needs_constant_trap() {
        let text = minimal()
            .replace(r#"{"family": "constant", "omega_sq": 1}"#, r#"{"family": "cosine", "amplitude": 4, "modulation": 0.1, "frequency": 0.5}"#)
            .replace(r#""split": "hf", "scheme": "strang_bab""#, r#""split": "hermite", "scheme": "strang_bab", "basis_size": 10"#);
        let err = ExperimentConfig::from_json(&text).unwrap_err();
        assert!(err.to_string().starts_with("cases[0].study.methods[0].split"));
    }

    #[test]
    fn gaussian_is_normalized_on_the_grid() {
        let c = ExperimentConfig::from_json(
            &minimal().replace(r#"{"family": "coherent", "delta": 1}"#, r#"{"family": "gaussian", "center": 1}"#),
        )
        .unwrap();
        let (_, u0) = c.cases[0].problem.build().unwrap();
        assert!((u0.norm_l2() - 1.0).abs() < 1e-15);
    }
}
