//! JSON run configuration.
//!
//! ```json
//! {
//!   "instance": { "R": 3560, "c0": 141, "c": 0.128, "mu_b": 0.5, "n_min": 1, "n_max": 100000 },
//!   "prior": { "mean": 0.55, "sd": 0.05, "lo": 0.4, "hi": 0.7 },
//!   "weights": { "lambda_fp": 1, "lambda_fn": 1 },
//!   "quadrature": { "panels": 2000 },
//!   "grids": {
//!     "alpha": { "log": { "start": 0.0001, "end": 0.9, "points": 400 } },
//!     "R": { "linear": { "start": 1000, "end": 10000, "points": 50 } },
//!     "c0": { "values": [74, 141, 183] }
//!   },
//!   "output": "out.csv"
//! }
//! ```
//!
//! Every section is optional at load time; commands state what they need
//! through the `require_*` accessors.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::agent::{EconomicInstance, InstanceRaw};
use crate::loss::{linear_grid, log_grid, LossWeights};
use crate::quadrature::QuadratureSpec;
use crate::special::TruncatedNormalPrior;

/// One invalid field, addressed by its JSON path.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub path: String,
    pub reason: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`: {}", self.path, self.reason)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config:\n{}", list(.0))]
    Invalid(Vec<FieldError>),
    #[error("`{command}` requires `{field}` in the config")]
    Missing {
        command: &'static str,
        field: &'static str,
    },
}

fn list(errors: &[FieldError]) -> String {
    errors
        .iter()
        .map(|e| format!("  {e}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// A one-dimensional grid, written as exactly one of the three forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum GridSpec {
    Linear { start: f64, end: f64, points: usize },
    Log { start: f64, end: f64, points: usize },
    Values(Vec<f64>),
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        match self {
            GridSpec::Linear { start, end, points } => linear_grid(*start, *end, *points),
            GridSpec::Log { start, end, points } => log_grid(*start, *end, *points),
            GridSpec::Values(v) => v.clone(),
        }
    }

    fn violations(&self, path: &str, open_unit: bool, out: &mut Vec<FieldError>) {
        let mut push = |reason: String| {
            out.push(FieldError {
                path: path.to_string(),
                reason,
            })
        };
        match self {
            GridSpec::Linear { start, end, points } | GridSpec::Log { start, end, points } => {
                if *points < 2 {
                    push(format!("needs at least 2 points, got {points}"));
                }
                if !(start.is_finite() && end.is_finite() && start < end) {
                    push(format!("needs finite start < end, got [{start}, {end}]"));
                }
                if matches!(self, GridSpec::Log { .. }) && !(*start > 0.0) {
                    push(format!("log grid must start above 0, got {start}"));
                }
            }
            GridSpec::Values(v) => {
                if v.is_empty() {
                    push("must not be empty".to_string());
                }
                if v.windows(2).any(|w| !(w[1] > w[0])) {
                    push("values must be strictly increasing".to_string());
                }
            }
        }
        let pts = self.points();
        if pts.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            push("all points must be positive".to_string());
        }
        if open_unit && pts.iter().any(|x| *x >= 1.0) {
            push("all points must lie in (0, 1)".to_string());
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<GridSpec>,
    #[serde(default, rename = "R", skip_serializing_if = "Option::is_none")]
    pub revenue: Option<GridSpec>,
    #[serde(default, rename = "c0", skip_serializing_if = "Option::is_none")]
    pub fixed_cost: Option<GridSpec>,
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub instance: Option<EconomicInstance>,
    pub prior: Option<TruncatedNormalPrior>,
    pub weights: LossWeights,
    pub quadrature: QuadratureSpec,
    pub grids: Grids,
    pub output: Option<PathBuf>,
}

const TOP_LEVEL: [&str; 6] = [
    "instance",
    "prior",
    "weights",
    "quadrature",
    "grids",
    "output",
];

impl RunConfig {
    pub fn require_instance(
        &self,
        command: &'static str,
    ) -> Result<&EconomicInstance, ConfigError> {
        self.instance.as_ref().ok_or(ConfigError::Missing {
            command,
            field: "instance",
        })
    }

    pub fn require_prior(
        &self,
        command: &'static str,
    ) -> Result<&TruncatedNormalPrior, ConfigError> {
        self.prior.as_ref().ok_or(ConfigError::Missing {
            command,
            field: "prior",
        })
    }

    pub fn require_grid(
        &self,
        command: &'static str,
        field: &'static str,
    ) -> Result<Vec<f64>, ConfigError> {
        let spec = match field {
            "grids.alpha" => &self.grids.alpha,
            "grids.R" => &self.grids.revenue,
            "grids.c0" => &self.grids.fixed_cost,
            _ => &None,
        };
        spec.as_ref()
            .map(GridSpec::points)
            .ok_or(ConfigError::Missing { command, field })
    }

    /// Parses and validates a JSON document, collecting every invalid field.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let doc: Value = serde_json::from_str(text)?;
        let Value::Object(map) = doc else {
            return Err(ConfigError::Invalid(vec![FieldError {
                path: "$".into(),
                reason: "top level must be an object".into(),
            }]));
        };
        let mut errors = Vec::new();
        for key in map.keys().filter(|k| !TOP_LEVEL.contains(&k.as_str())) {
            errors.push(FieldError {
                path: key.clone(),
                reason: format!("unknown key; expected one of {TOP_LEVEL:?}"),
            });
        }

        let instance = section::<InstanceRaw>(&map, "instance", &mut errors).and_then(|raw| {
            let bad = raw.violations();
            for (field, reason) in &bad {
                errors.push(FieldError {
                    path: format!("instance.{field}"),
                    reason: reason.clone(),
                });
            }
            bad.is_empty()
                .then(|| EconomicInstance::try_from(raw).expect("validated above"))
        });
        let prior = typed::<TruncatedNormalPrior>(&map, "prior", &mut errors);
        let weights = typed::<LossWeights>(&map, "weights", &mut errors).unwrap_or_default();
        let quadrature =
            typed::<QuadratureSpec>(&map, "quadrature", &mut errors).unwrap_or_default();
        let grids = section::<Grids>(&map, "grids", &mut errors).unwrap_or_default();
        for (name, spec, unit) in [
            ("grids.alpha", &grids.alpha, true),
            ("grids.R", &grids.revenue, false),
            ("grids.c0", &grids.fixed_cost, false),
        ] {
            if let Some(s) = spec {
                s.violations(name, unit, &mut errors);
            }
        }
        let output = section::<PathBuf>(&map, "output", &mut errors);

        if errors.is_empty() {
            Ok(Self {
                instance,
                prior,
                weights,
                quadrature,
                grids,
                output,
            })
        } else {
            Err(ConfigError::Invalid(errors))
        }
    }
}

/// Deserializes one top-level section, recording a failure under its name.
fn section<T: for<'de> Deserialize<'de>>(
    map: &serde_json::Map<String, Value>,
    key: &str,
    errors: &mut Vec<FieldError>,
) -> Option<T> {
    let value = map.get(key)?;
    match T::deserialize(value) {
        Ok(v) => Some(v),
        Err(e) => {
            errors.push(FieldError {
                path: key.to_string(),
                reason: e.to_string(),
            });
            None
        }
    }
}

/// Like [`section`] for types whose own validation names the field, e.g.
/// `prior.sd`.
fn typed<T: for<'de> Deserialize<'de>>(
    map: &serde_json::Map<String, Value>,
    key: &str,
    errors: &mut Vec<FieldError>,
) -> Option<T> {
    let value = map.get(key)?;
    match T::deserialize(value) {
        Ok(v) => Some(v),
        Err(e) => {
            let msg = e.to_string();
            // Validation errors read "invalid `prior.sd`: ...".
            let path = msg
                .strip_prefix("invalid `")
                .and_then(|rest| rest.split_once('`'))
                .map(|(p, _)| p.to_string())
                .unwrap_or_else(|| key.to_string());
            errors.push(FieldError { path, reason: msg });
            None
        }
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    RunConfig::from_json(&text)
}
