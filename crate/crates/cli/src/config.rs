//! JSON experiment configuration and its validation.

use std::fmt;

use halflie_core::instances::REGISTRY;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Evolve,
    Trotter,
    StrongTrotter,
    Commutator,
    Seminorms,
    CocycleSmooth,
    Bounds,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Evolve => "evolve",
            ExperimentKind::Trotter => "trotter",
            ExperimentKind::StrongTrotter => "strong-trotter",
            ExperimentKind::Commutator => "commutator",
            ExperimentKind::Seminorms => "seminorms",
            ExperimentKind::CocycleSmooth => "cocycle-smooth",
            ExperimentKind::Bounds => "bounds",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    pub name: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

/// A bare Lie group, for experiments that do not need an action.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupConfig {
    GeneralLinear { n: usize },
    Additive { d: usize },
    ScalarLine,
    ComplexVector { d: usize },
}

/// Named closed-form curves through the identity. Vectors are flat
/// coordinate lists: reals, complex entries as `re, im` pairs, matrices
/// row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveConfig {
    /// `s ↦ exp(s (v, x))`.
    OneParameter { v: Vec<f64>, x: Vec<f64> },
    /// `s ↦ (exp(s v), 1)`.
    FiberLine { v: Vec<f64> },
    /// `s ↦ (1, exp(s x))`.
    BaseLine { x: Vec<f64> },
    /// `s ↦ (exp(sin(s) v), exp(s x))`.
    SinProduct { v: Vec<f64>, x: Vec<f64> },
    /// `s ↦ (exp(s² v), 1)`.
    FiberQuadratic { v: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    pub breakpoints: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    #[serde(default)]
    pub approx_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlsConfig {
    pub alpha: PathConfig,
    #[serde(default)]
    pub beta: Option<PathConfig>,
}

/// Oscillator truncations with `λ_n = n^lambda_power` and coefficients
/// `n^coeff_power`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderConfig {
    pub dims: Vec<usize>,
    pub lambda_power: f64,
    pub coeff_power: f64,
    #[serde(default = "default_ladder_start")]
    pub start: u64,
    #[serde(default = "default_ladder_max")]
    pub max_index: u64,
    #[serde(default = "default_ladder_tol")]
    pub tol: f64,
}

fn default_ladder_start() -> u64 {
    1 << 10
}

fn default_ladder_max() -> u64 {
    1 << 40
}

fn default_ladder_tol() -> f64 {
    1e-10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeminormConfig {
    pub orders: Vec<u32>,
    #[serde(default)]
    pub vector: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_radius")]
    pub radius: f64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self { samples: default_samples(), radius: default_radius() }
    }
}

fn default_samples() -> usize {
    10_000
}

fn default_radius() -> f64 {
    0.2
}

/// Smoothing of the coboundary `t ↦ U_t w − w` of the instance flow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleConfig {
    pub w: Vec<f64>,
    pub window: f64,
    pub bump_length: f64,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_probes")]
    pub probes: usize,
    #[serde(default = "default_fit_samples")]
    pub fit_samples: usize,
}

fn default_step() -> f64 {
    0.05
}

fn default_probes() -> usize {
    32
}

fn default_fit_samples() -> usize {
    21
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<String>,
    #[serde(default)]
    pub format: Option<Format>,
}

/// Conditions the run must meet for a zero exit code.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_final_error: Option<f64>,
    /// Largest allowed ratio of final to first error.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_error_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decreasing_tail: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitted_exponent: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_mode_deviation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_violations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_rough: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_smooth: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_defect: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_fit_residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub curves: Vec<CurveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controls: Option<ControlsConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub t_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub indices: Option<Vec<u64>>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<LadderConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seminorm: Option<SeminormConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cocycle: Option<CocycleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
    #[serde(default)]
    pub expect: Expectations,
}

fn default_tol() -> f64 {
    1e-2
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

impl ConfigError {
    pub fn field(&self) -> &str {
        match self {
            ConfigError::Schema { path, .. } => path,
            ConfigError::Invalid { field, .. } => field,
        }
    }
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.into(), message: message.into() }
}

/// Parses and validates a JSON config. Errors carry the path of the
/// offending field.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "<root>".to_string() } else { path };
        ConfigError::Schema { path, message: e.into_inner().to_string() }
    })?;
    config.validate()?;
    if let Some(kind) = config.experiment {
        config.validate_for(kind)?;
    }
    Ok(config)
}

fn check_finite(field: &str, values: &[f64]) -> Result<(), ConfigError> {
    match values.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(invalid(format!("{field}[{i}]"), "must be finite")),
        None => Ok(()),
    }
}

impl ExperimentConfig {
    /// Checks that do not depend on the experiment kind.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(invalid("tol", format!("must be a positive finite number, got {}", self.tol)));
        }
        if let Some(inst) = &self.instance {
            if !REGISTRY.contains(&inst.name.as_str()) {
                return Err(invalid(
                    "instance.name",
                    format!("unknown instance `{}`; available: {}", inst.name, REGISTRY.join(", ")),
                ));
            }
            check_finite("instance.params", &inst.params)?;
        }
        if self.instance.is_some() && self.group.is_some() {
            return Err(invalid("group", "give either `instance` or `group`, not both"));
        }
        if let Some(g) = &self.group {
            let size = match g {
                GroupConfig::GeneralLinear { n } => *n,
                GroupConfig::Additive { d } | GroupConfig::ComplexVector { d } => *d,
                GroupConfig::ScalarLine => 1,
            };
            if size == 0 {
                return Err(invalid("group", "dimension must be positive"));
            }
        }
        check_finite("t_grid", &self.t_grid)?;
        if let Some(indices) = &self.indices {
            if indices.is_empty() {
                return Err(invalid("indices", "must not be empty"));
            }
            if indices[0] == 0 {
                return Err(invalid("indices[0]", "must be positive"));
            }
            if let Some(i) = indices.windows(2).position(|w| w[1] <= w[0]) {
                return Err(invalid(format!("indices[{}]", i + 1), "must be strictly increasing"));
            }
        }
        if let Some(l) = &self.ladder {
            if l.dims.is_empty() || l.dims.contains(&0) {
                return Err(invalid("ladder.dims", "must be nonempty and positive"));
            }
            if l.dims.windows(2).any(|w| w[1] <= w[0]) {
                return Err(invalid("ladder.dims", "must be strictly increasing"));
            }
            check_finite("ladder.lambda_power", &[l.lambda_power])?;
            check_finite("ladder.coeff_power", &[l.coeff_power])?;
            if l.start == 0 || l.max_index < l.start {
                return Err(invalid("ladder.start", "need 0 < start <= max_index"));
            }
            if !(l.tol > 0.0) {
                return Err(invalid("ladder.tol", "must be positive"));
            }
        }
        if let Some(b) = &self.bounds {
            if b.samples == 0 {
                return Err(invalid("bounds.samples", "must be positive"));
            }
            if !(b.radius > 0.0 && b.radius.is_finite()) {
                return Err(invalid("bounds.radius", "must be positive"));
            }
        }
        if let Some(c) = &self.cocycle {
            check_finite("cocycle.w", &c.w)?;
            if !(c.bump_length > 0.0 && c.bump_length.is_finite()) {
                return Err(invalid("cocycle.bump_length", "must be positive"));
            }
            if !(c.window >= 2.0 * c.bump_length) {
                return Err(invalid("cocycle.window", "must be at least twice bump_length"));
            }
            if !(c.step > 0.0) || c.probes == 0 {
                return Err(invalid("cocycle.step", "step and probes must be positive"));
            }
            if c.fit_samples < 2 {
                return Err(invalid("cocycle.fit_samples", "need at least two samples"));
            }
        }
        if let Some(s) = &self.seminorm {
            if s.orders.is_empty() || s.orders.contains(&0) {
                return Err(invalid("seminorm.orders", "must be nonempty and positive"));
            }
        }
        if let Some(v) = &self.expect.verdict {
            if !["converging", "stalled", "diverging"].contains(&v.as_str()) {
                return Err(invalid("expect.verdict", "must be converging, stalled or diverging"));
            }
        }
        Ok(())
    }

    /// Checks specific to running as `kind`.
    pub fn validate_for(&self, kind: ExperimentKind) -> Result<(), ConfigError> {
        if let Some(declared) = self.experiment {
            if declared != kind {
                return Err(invalid("experiment", format!("config declares `{declared}` but `{kind}` was requested")));
            }
        }
        let needs_instance = |what: &str| {
            if self.instance.is_none() {
                Err(invalid("instance", format!("{what} needs an instance")))
            } else {
                Ok(())
            }
        };
        let needs_times = || {
            if self.t_grid.is_empty() {
                Err(invalid("t_grid", "must not be empty for limit experiments"))
            } else {
                Ok(())
            }
        };
        let curves = |n: usize| {
            if self.curves.len() != n {
                Err(invalid("curves", format!("{kind} takes exactly {n} curve(s), got {}", self.curves.len())))
            } else {
                Ok(())
            }
        };
        match kind {
            ExperimentKind::Evolve => {
                if self.instance.is_none() && self.group.is_none() {
                    return Err(invalid("instance", "evolve needs an instance or a group"));
                }
                if self.controls.is_none() {
                    return Err(invalid("controls", "evolve needs controls"));
                }
                if self.t_grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
                    return Err(invalid("t_grid", "evolution times must lie in [0, 1]"));
                }
            }
            ExperimentKind::StrongTrotter => {
                needs_instance("strong-trotter")?;
                needs_times()?;
                curves(1)?;
            }
            ExperimentKind::Trotter => {
                needs_instance("trotter")?;
                needs_times()?;
                curves(2)?;
            }
            ExperimentKind::Commutator => {
                needs_times()?;
                if self.t_grid.iter().any(|t| *t < 0.0) {
                    return Err(invalid("t_grid", "commutator times must be nonnegative"));
                }
                match &self.ladder {
                    Some(l) => {
                        if l.dims.len() < 2 {
                            return Err(invalid("ladder.dims", "need at least two truncations to fit growth"));
                        }
                    }
                    None => {
                        needs_instance("commutator")?;
                        curves(2)?;
                    }
                }
            }
            ExperimentKind::Seminorms => {
                let Some(s) = &self.seminorm else {
                    return Err(invalid("seminorm", "seminorms needs a `seminorm` section"));
                };
                if self.ladder.is_none() {
                    needs_instance("seminorms")?;
                    if s.vector.is_none() {
                        return Err(invalid("seminorm.vector", "required unless a ladder is given"));
                    }
                }
            }
            ExperimentKind::CocycleSmooth => {
                needs_instance("cocycle-smooth")?;
                if self.cocycle.is_none() {
                    return Err(invalid("cocycle", "cocycle-smooth needs a `cocycle` section"));
                }
            }
            ExperimentKind::Bounds => {
                if self.instance.is_none() && self.group.is_none() {
                    return Err(invalid("instance", "bounds needs an instance or a group"));
                }
            }
        }
        Ok(())
    }
}
