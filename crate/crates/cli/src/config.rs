//! Experiment files: one JSON document naming a command and its parameter block.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use noregret::dist::ValueDistribution;
use noregret::engine::SimulationConfig;
use noregret::learners::LearnerKind;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    Lp,
    Verify,
    BenchLearners,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum LpProgram {
    Single,
    Border,
    Uniform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LpBlock {
    pub program: LpProgram,
    #[serde(default = "two")]
    pub n: usize,
}

fn two() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "claim", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VerifyBlock {
    Counterexample { delta: String, scale: String },
    Nonconvex,
    Samebid { q_s: String, n: usize },
    UniformSubopt,
    /// Runs the `simulation` block and checks its empirical allocations.
    Bmsw,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchBlock {
    pub kinds: Vec<LearnerKind>,
}

/// A distribution given inline or as a path relative to the experiment file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistSource {
    Path(PathBuf),
    Inline(Value),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<DistSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lp: Option<LpBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bench: Option<BenchBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A schema problem located by its JSON path (`.` for the document root).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn schema(path: &str, message: impl fmt::Display) -> SchemaError {
    SchemaError { path: path.to_string(), message: message.to_string() }
}

/// Reads a distribution file; `support` and `probs` entries may be numbers or fraction strings.
pub fn read_dist<T: noregret::scalar::Scalar>(path: &Path) -> Result<ValueDistribution<T>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(ValueDistribution::from_json_str(&text)?)
}

fn resolve_dist(source: &DistSource, base: &Path) -> Result<Value, SchemaError> {
    match source {
        DistSource::Inline(v) => Ok(v.clone()),
        DistSource::Path(p) => {
            let full = base.join(p);
            let text = std::fs::read_to_string(&full).map_err(|e| schema("dist", format!("{}: {e}", full.display())))?;
            serde_json::from_str(&text).map_err(|e| schema("dist", format!("{}: {e}", full.display())))
        }
    }
}

fn from_value<T: serde::de::DeserializeOwned>(doc: Value, prefix: &str) -> Result<T, SchemaError> {
    serde_path_to_error::deserialize(doc).map_err(|e| {
        let inner = e.path().to_string();
        let path = match (prefix, inner.as_str()) {
            ("", p) => p.to_string(),
            (pre, ".") => pre.to_string(),
            (pre, p) => format!("{pre}.{p}"),
        };
        schema(&path, e.into_inner())
    })
}

/// Parses and validates an experiment document. A `dist` given at the top level (inline or as
/// a path relative to `base`) fills in a simulation block that has none; top-level `seed` and
/// `trials` override the simulation block's.
pub fn parse_config(text: &str, base: &Path) -> Result<ExperimentConfig, Vec<SchemaError>> {
    let mut doc: Value = serde_json::from_str(text).map_err(|e| vec![schema(".", e)])?;
    let mut errors = Vec::new();
    let top_dist = match doc.get("dist") {
        Some(d) => match serde_json::from_value::<DistSource>(d.clone()) {
            Ok(src) => match resolve_dist(&src, base) {
                Ok(v) => Some(v),
                Err(e) => {
                    errors.push(e);
                    None
                }
            },
            Err(e) => {
                errors.push(schema("dist", e));
                None
            }
        },
        None => None,
    };
    if let (Some(sim), Some(d)) = (doc.get_mut("simulation").and_then(Value::as_object_mut), &top_dist) {
        sim.entry("dist").or_insert_with(|| d.clone());
    }
    if let Some(sim) = doc.get_mut("simulation").and_then(Value::as_object_mut) {
        if let Some(Value::String(p)) = sim.get("dist").cloned() {
            match resolve_dist(&DistSource::Path(p.into()), base) {
                Ok(v) => {
                    sim.insert("dist".into(), v);
                }
                Err(e) => errors.push(schema("simulation.dist", e.message)),
            }
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    let mut cfg: ExperimentConfig = from_value(doc, "").map_err(|e| vec![e])?;
    if let Some(sim) = cfg.simulation.as_mut() {
        if let Some(seed) = cfg.seed {
            sim.seed = seed;
        }
        if let Some(trials) = cfg.trials {
            sim.trials = trials;
        }
    }
    validate(&cfg, top_dist.as_ref())?;
    Ok(cfg)
}

fn validate(cfg: &ExperimentConfig, dist: Option<&Value>) -> Result<(), Vec<SchemaError>> {
    let mut errors = Vec::new();
    let need = |present: bool, key: &str, errors: &mut Vec<SchemaError>| {
        if !present {
            errors.push(schema(key, format!("required by command {:?}", cfg.command)));
        }
    };
    match cfg.command {
        Command::Simulate | Command::BenchLearners => need(cfg.simulation.is_some(), "simulation", &mut errors),
        Command::Lp => {
            need(cfg.lp.is_some(), "lp", &mut errors);
            need(dist.is_some(), "dist", &mut errors);
        }
        Command::Verify => {
            need(cfg.verify.is_some(), "verify", &mut errors);
            if matches!(cfg.verify, Some(VerifyBlock::Bmsw)) {
                need(cfg.simulation.is_some(), "simulation", &mut errors);
            }
        }
    }
    if cfg.command == Command::BenchLearners {
        need(cfg.bench.is_some(), "bench", &mut errors);
    }
    if let Some(sim) = &cfg.simulation {
        if let Err(e) = sim.validate() {
            errors.push(schema("simulation", e));
        }
    }
    if let Some(d) = dist {
        if let Err(e) = ValueDistribution::<f64>::from_json(d) {
            errors.push(schema("dist", e));
        }
    }
    if let Some(LpBlock { n: 0, .. }) = &cfg.lp {
        errors.push(schema("lp.n", "must be at least 1"));
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

/// Loads the top-level distribution of a parsed experiment.
pub fn experiment_dist<T: noregret::scalar::Scalar>(cfg: &ExperimentConfig, base: &Path) -> Result<ValueDistribution<T>, CliError> {
    let source = cfg.dist.as_ref().ok_or_else(|| CliError::Usage("experiment has no dist".into()))?;
    let doc = resolve_dist(source, base).map_err(|e| CliError::Schema(vec![e]))?;
    Ok(ValueDistribution::from_json(&doc)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SIM: &str = r#"{
        "command": "simulate",
        "simulation": {
            "dist": {"support": [0.25, 0.5, 0.75, 1.0], "probs": [0.25, 0.25, 0.25, 0.25]},
            "n": 2, "horizon": 800, "auction": {"type": "fse", "phases": 4},
            "learners": {"type": "mw", "learning_rate": 0.5}
        },
        "seed": 3
    }"#;

    #[test]
    fn minimal_simulate_echoes_defaults() {
        let cfg = parse_config(SIM, Path::new(".")).unwrap();
        let sim = cfg.simulation.unwrap();
        assert_eq!((sim.seed, sim.trials, sim.record_sigma), (3, 1, false));
        assert_eq!(sim.learner(0).recency_eta, 1.0);
    }

    #[test]
    fn errors_carry_paths() {
        let bad = SIM.replace("\"phases\": 4", "\"phases\": 4, \"colour\": 1");
        let errs = parse_config(&bad, Path::new(".")).unwrap_err();
        assert!(errs[0].path.starts_with("simulation.auction"), "{errs:?}");
        let bad = SIM.replace("\"horizon\": 800", "\"horizon\": 900");
        let errs = parse_config(&bad, Path::new(".")).unwrap_err();
        assert_eq!(errs[0].path, "simulation");
        assert!(errs[0].message.contains("multiple of 2P"));
        let errs = parse_config(r#"{"command": "lp"}"#, Path::new(".")).unwrap_err();
        assert_eq!(errs.len(), 2);
        assert!(parse_config("{", Path::new(".")).is_err());
    }

    #[test]
    fn top_level_dist_fills_simulation() {
        let doc = r#"{
            "command": "simulate",
            "dist": {"support": [1, 2], "probs": ["1/2", "1/2"]},
            "simulation": {"n": 1, "horizon": 10, "auction": {"type": "null"}, "learners": {"type": "ftl"}},
            "trials": 0
        }"#;
        let cfg = parse_config(doc, Path::new(".")).unwrap();
        let sim = cfg.simulation.unwrap();
        assert_eq!(sim.dist.support(), &[1.0, 2.0]);
        assert_eq!(sim.trials, 0);
    }
}
