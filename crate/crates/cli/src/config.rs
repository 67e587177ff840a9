//! Run configuration: defaults, then the TOML file, then command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use citefit::corpus::{InputFormat, NameStyle};
use citefit::distributions::{Binning, DistributionKind};
use citefit::metrics::TauConvention;
use citefit::models::{Conventions, ModelKind, ScoreColumn};
use citefit::netsim::Attachment;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::failure::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown output format {other:?} (csv or json)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitnessChoice {
    Constant,
    #[default]
    Uniform,
}

impl FromStr for FitnessChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "constant" => Ok(FitnessChoice::Constant),
            "uniform" => Ok(FitnessChoice::Uniform),
            other => Err(format!("unknown fitness distribution {other:?} (constant or uniform)")),
        }
    }
}

impl fmt::Display for FitnessChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitnessChoice::Constant => "constant",
            FitnessChoice::Uniform => "uniform",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub input: Option<PathBuf>,
    pub input_format: Option<InputFormat>,
    pub corpus: Option<PathBuf>,
    pub fit: Option<PathBuf>,
    pub benchmark: Option<PathBuf>,
    pub name_overrides: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Analysis {
    pub model: ModelKind,
    pub by: ScoreColumn,
    pub normalize: ScoreColumn,
    pub kind: DistributionKind,
    pub binning: Binning,
}

impl Default for Analysis {
    fn default() -> Self {
        Analysis {
            model: ModelKind::Paper,
            by: ScoreColumn::Kt,
            normalize: ScoreColumn::K,
            kind: DistributionKind::Cumulative,
            binning: Binning::Log,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Simulation {
    pub n: usize,
    pub m: usize,
    pub fitness: FitnessChoice,
    pub attachment: Attachment,
    pub snapshots: Vec<usize>,
    pub as_corpus: bool,
    pub years_per_step: f64,
    pub start_year: i32,
}

impl Default for Simulation {
    fn default() -> Self {
        Simulation {
            n: 10_000,
            m: 3,
            fitness: FitnessChoice::Uniform,
            attachment: Attachment::DegreeTimesFitness,
            snapshots: Vec::new(),
            as_corpus: false,
            years_per_step: 0.01,
            start_year: 1970,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    pub tau: TauConvention,
    pub shift: f64,
    pub strict_years: bool,
    pub min_year: Option<i32>,
    pub collection_year: Option<i32>,
    pub name_style: NameStyle,
    pub top_n: usize,
    pub seed: u64,
    pub output_format: OutputFormat,
    pub analysis: Analysis,
    pub simulation: Simulation,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            paths: Paths::default(),
            tau: TauConvention::AgePlusOne,
            shift: 1.0,
            strict_years: false,
            min_year: None,
            collection_year: None,
            name_style: NameStyle::Initials,
            top_n: 20,
            seed: 7,
            output_format: OutputFormat::Csv,
            analysis: Analysis::default(),
            simulation: Simulation::default(),
        }
    }
}

impl RunConfig {
    /// Layers `file` (if any) and then `flags` over the defaults. Both are
    /// partial JSON objects shaped like `RunConfig`.
    pub fn resolve(file: Option<&Path>, flags: Value) -> Result<RunConfig, Failure> {
        let mut merged = serde_json::to_value(RunConfig::default()).expect("config serializes");
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::usage("config", format!("{}: {e}", path.display())))?;
            let table: Value = toml::from_str(&text)
                .map_err(|e| Failure::usage("config", format!("{}: {e}", path.display())))?;
            merge(&mut merged, table);
        }
        merge(&mut merged, flags);
        let config: RunConfig =
            serde_json::from_value(merged).map_err(|e| Failure::usage("config", e.to_string()))?;
        if !(config.shift >= 0.0 && config.shift.is_finite()) {
            return Err(Failure::usage("config", format!("shift {} must be finite and nonnegative", config.shift)));
        }
        Ok(config)
    }

    pub fn conventions(&self) -> Conventions {
        Conventions {
            tau: self.tau,
            shift: self.shift,
        }
    }

    /// Single-line JSON echoed at the top of every artifact.
    pub fn header(&self) -> String {
        format!(
            "citefit {} config: {}",
            env!("CARGO_PKG_VERSION"),
            serde_json::to_string(self).expect("config serializes")
        )
    }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Collects flag values into a partial config object.
#[derive(Default)]
pub struct FlagSet(Map<String, Value>);

impl FlagSet {
    pub fn set<T: Serialize>(&mut self, path: &str, value: Option<T>) -> &mut Self {
        let Some(value) = value else { return self };
        let value = serde_json::to_value(value).expect("flag serializes");
        let mut parts: Vec<&str> = path.split('.').collect();
        let leaf = parts.pop().expect("nonempty path");
        let mut node = &mut self.0;
        for p in parts {
            node = node
                .entry(p)
                .or_insert_with(|| Value::Object(Map::new()))
                .as_object_mut()
                .expect("object");
        }
        node.insert(leaf.to_string(), value);
        self
    }

    pub fn into_value(self) -> Value {
        Value::Object(self.0)
    }
}
