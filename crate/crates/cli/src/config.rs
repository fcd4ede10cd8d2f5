//! Run configuration: a JSON document plus `--key value` overrides.

use std::path::{Path, PathBuf};

use ldtail::report::Format;
use ldtail::{DistributionSpec, Method, ProcessSpec, Side};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

/// Sample count used by simulation methods when the config has none.
pub const DEFAULT_SAMPLES: u64 = 100_000;

/// Seed used when neither the config nor `--seed` provides one.
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub scale: Scale,
}

/// A parameter sweep: a single value, an explicit list, or a range of
/// `count` points from `start` to `stop` inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Scalar(f64),
    List(Vec<f64>),
    Range(Range),
}

impl Grid {
    pub fn values(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let bad = |msg: String| CliError::config(name, msg);
        let values = match self {
            Grid::Scalar(v) => vec![*v],
            Grid::List(vs) => vs.clone(),
            Grid::Range(r) => {
                if r.count == 0 {
                    return Err(bad("range count must be at least 1".into()));
                }
                if r.count == 1 {
                    vec![r.start]
                } else {
                    let last = (r.count - 1) as f64;
                    match r.scale {
                        Scale::Linear => (0..r.count)
                            .map(|i| {
                                if i + 1 == r.count {
                                    r.stop
                                } else {
                                    r.start + (r.stop - r.start) * i as f64 / last
                                }
                            })
                            .collect(),
                        Scale::Log => {
                            if !(r.start > 0.0 && r.stop > 0.0) {
                                return Err(bad("log ranges need positive start and stop".into()));
                            }
                            let (a, b) = (r.start.ln(), r.stop.ln());
                            (0..r.count)
                                .map(|i| {
                                    if i + 1 == r.count {
                                        r.stop
                                    } else {
                                        (a + (b - a) * i as f64 / last).exp()
                                    }
                                })
                                .collect()
                        }
                    }
                }
            }
        };
        if values.is_empty() {
            return Err(bad("grid is empty".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(bad(format!("grid value {v} is not finite")));
        }
        Ok(values)
    }

    /// Grid values as summand counts; each must be a positive integer.
    pub fn counts(&self, name: &str) -> Result<Vec<u64>, CliError> {
        self.values(name)?
            .into_iter()
            .map(|v| {
                let r = v.round();
                if r >= 1.0 && (v - r).abs() <= 1e-9 * r {
                    Ok(r as u64)
                } else {
                    Err(CliError::config(name, format!("{v} is not a positive integer")))
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DistributionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub process: Option<ProcessSpec>,
    /// Summand counts (distributions).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Grid>,
    /// Time horizons (processes).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Grid>,
    /// Standardized thresholds `x`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Grid>,
    /// Standardized per-unit means `c`, with `x = c sqrt(n)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Grid>,
    /// Arguments of the correction function (`series`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub methods: Option<Vec<Method>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Independent simulation runs per point (`simulate`), with seeds
    /// `seed, seed + 1, ...`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

/// The law a command runs on.
pub enum Model<'a> {
    Distribution(&'a DistributionSpec),
    Process(&'a ProcessSpec),
}

impl CliConfig {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn samples(&self) -> u64 {
        self.samples.unwrap_or(DEFAULT_SAMPLES)
    }

    pub fn side(&self) -> Side {
        self.side.unwrap_or_default()
    }

    pub fn model(&self) -> Result<Model<'_>, CliError> {
        match (&self.distribution, &self.process) {
            (Some(d), None) => Ok(Model::Distribution(d)),
            (None, Some(p)) => Ok(Model::Process(p)),
            (Some(_), Some(_)) => Err(CliError::config("", "config has both `distribution` and `process`")),
            (None, None) => Err(CliError::config("", "config needs a `distribution` or a `process`")),
        }
    }

    pub fn grid<'a>(&'a self, grid: &'a Option<Grid>, name: &str) -> Result<&'a Grid, CliError> {
        grid.as_ref()
            .ok_or_else(|| CliError::config(name, format!("`{name}` grid is required for this command")))
    }
}

/// Reads the config document at `path`, or an empty document.
pub fn load_document(path: Option<&Path>) -> Result<Value, CliError> {
    let Some(path) = path else {
        return Ok(Value::Object(Default::default()));
    };
    let text = std::fs::read_to_string(path).map_err(|source| {
        CliError::Lib(ldtail::Error::Io {
            path: path.to_path_buf(),
            source,
        })
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::config("", format!("{}: {e}", path.display())))
}

/// Sets the value at a dotted path, creating intermediate objects. The raw
/// text is parsed as JSON when possible and kept as a string otherwise.
pub fn apply_override(doc: &mut Value, key: &str, raw: &str) -> Result<(), CliError> {
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Usage(format!("malformed override key `{key}`")));
    }
    let mut node = doc;
    for (i, part) in parts.iter().enumerate() {
        if !node.is_object() {
            return Err(CliError::config(
                &parts[..i].join("."),
                format!("cannot set `{key}`: `{}` is not an object", parts[..i].join(".")),
            ));
        }
        let map = node.as_object_mut().expect("checked above");
        if i + 1 == parts.len() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("loop returns on the last part")
}

/// Deserializes a config document, reporting the path of the offending
/// field on failure.
pub fn parse_config(doc: &Value) -> Result<CliConfig, CliError> {
    serde_path_to_error::deserialize(doc).map_err(|e| {
        let path = e.path().to_string();
        CliError::config(if path == "." { "" } else { &path }, e.into_inner().to_string())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_expand() {
        assert_eq!(Grid::Scalar(2.0).values("x").unwrap(), vec![2.0]);
        let r = Grid::Range(Range {
            start: 0.0,
            stop: 1.0,
            count: 5,
            scale: Scale::Linear,
        });
        assert_eq!(r.values("x").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let r = Grid::Range(Range {
            start: 10.0,
            stop: 1000.0,
            count: 3,
            scale: Scale::Log,
        });
        let v = r.values("n").unwrap();
        assert!((v[1] - 100.0).abs() < 1e-9);
        assert_eq!(r.counts("n").unwrap(), vec![10, 100, 1000]);
        assert!(Grid::List(vec![]).values("x").is_err());
        assert!(Grid::Scalar(2.5).counts("n").is_err());
    }

    #[test]
    fn overrides_set_nested_values() {
        let mut doc = serde_json::json!({"distribution": {"family": "centered_bernoulli", "p": 0.3}});
        apply_override(&mut doc, "distribution.p", "0.4").unwrap();
        apply_override(&mut doc, "methods", r#"["thm6","exact"]"#).unwrap();
        apply_override(&mut doc, "output.path", "out.csv").unwrap();
        assert_eq!(doc["distribution"]["p"], 0.4);
        assert_eq!(doc["methods"][1], "exact");
        assert_eq!(doc["output"]["path"], "out.csv");
        let cfg = parse_config(&doc).unwrap();
        assert_eq!(cfg.methods.unwrap(), vec![Method::Thm6, Method::Exact]);
    }

    #[test]
    fn unknown_keys_are_errors_with_paths() {
        let doc = serde_json::json!({"distribution": {"family": "gaussian", "sigma": 1.0}, "bogus": 1});
        let err = parse_config(&doc).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        let doc = serde_json::json!({"methods": ["thm6", "thm9"]});
        match parse_config(&doc).unwrap_err() {
            CliError::Config { path, .. } => assert_eq!(path, "methods[1]"),
            other => panic!("{other}"),
        }
    }
}
