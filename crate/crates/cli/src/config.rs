//! Instance files.
//!
//! ```json
//! {
//!   "alphabets": {"A": ["00", "01", "10", "11"], "B": ["0", "1"], "C": ["0", "1"]},
//!   "source": {"alphabet": "A", "probs": [0.25, 0.25, 0.25, 0.25]},
//!   "f": {"domain": "A", "codomain": "B", "table": {"00": "0", "01": "0", "10": "0", "11": "1"}},
//!   "F": {"input": "A", "output": "C", "rows": [[0.9, 0.1], [0.9, 0.1], [0.9, 0.1], [0.1, 0.9]]},
//!   "g": {"domain": "X2", "codomain": "B", "table": {"...": "..."}},
//!   "outer_source": {"alphabet": "X2", "probs": ["..."]},
//!   "params": {"delta": 0.15, "delta2": 0.5, "epsilon": 0.1, "seed": 7, "trials": 10000, "units": "nats"}
//! }
//! ```
//!
//! `g` and `outer_source` are optional but come together; `params` and all
//! of its fields are optional.

use std::collections::BTreeMap;
use std::path::Path;

use ncl_core::pipeline::OuterProblem;
use ncl_core::{Alphabet, DMChannel, DetFunction, NoisyComputationInstance, Pmf};
use serde::Deserialize;

use crate::output::Units;
use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    alphabets: BTreeMap<String, Vec<String>>,
    source: RawPmf,
    f: RawFunction,
    #[serde(rename = "F")]
    channel: RawChannel,
    g: Option<RawFunction>,
    outer_source: Option<RawPmf>,
    #[serde(default)]
    params: Params,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPmf {
    alphabet: String,
    probs: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFunction {
    domain: String,
    codomain: String,
    table: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    input: String,
    output: String,
    rows: Vec<Vec<f64>>,
}

/// Defaults stored with the instance; command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub delta: Option<f64>,
    pub delta2: Option<f64>,
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub units: Option<Units>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceConfig {
    pub alphabets: BTreeMap<String, Alphabet>,
    pub instance: NoisyComputationInstance,
    pub g: Option<DetFunction>,
    pub outer_source: Option<Pmf>,
    pub params: Params,
}

impl InstanceConfig {
    /// The outer problem, which `pipeline` and `sweep` need.
    pub fn outer(&self) -> Result<OuterProblem, CliError> {
        match (&self.outer_source, &self.g) {
            (Some(source), Some(g)) => Ok(OuterProblem::new(source.clone(), g.clone())?),
            _ => Err(schema("g", "this command needs \"g\" and \"outer_source\"")),
        }
    }
}

fn schema(field: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Schema { field: field.into(), message: message.into() }
}

fn invalid(field: impl Into<String>, message: impl ToString) -> CliError {
    CliError::Validation { field: field.into(), message: message.to_string() }
}

pub fn parse_instance(path: &Path) -> Result<InstanceConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_instance_str(&text)
}

pub fn parse_instance_str(text: &str) -> Result<InstanceConfig, CliError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| {
        let message = e.to_string();
        let message = message.split(" at line ").next().unwrap_or_default().to_string();
        CliError::Parse { line: e.line(), column: e.column(), message }
    })?;
    let raw: RawInstance = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { "(root)".to_string() } else { path };
        schema(field, e.inner().to_string())
    })?;
    build(raw)
}

fn build(raw: RawInstance) -> Result<InstanceConfig, CliError> {
    let mut alphabets = BTreeMap::new();
    for (name, labels) in &raw.alphabets {
        let a = Alphabet::new(labels.iter().cloned()).map_err(|e| invalid(format!("alphabets.{name}"), e))?;
        alphabets.insert(name.clone(), a);
    }
    let lookup = |name: &str, field: &str| {
        alphabets.get(name).cloned().ok_or_else(|| schema(field, format!("undeclared alphabet {name:?}")))
    };

    let source = pmf(&raw.source, "source", &lookup)?;
    let f = function(&raw.f, "f", &lookup)?;
    let input = lookup(&raw.channel.input, "F.input")?;
    let output = lookup(&raw.channel.output, "F.output")?;
    if raw.channel.rows.len() != input.len() {
        return Err(invalid(
            "F.rows",
            format!(
                "expected {} rows (one per symbol of {:?}), found {}",
                input.len(),
                raw.channel.input,
                raw.channel.rows.len()
            ),
        ));
    }
    for (r, row) in raw.channel.rows.iter().enumerate() {
        Pmf::new(output.clone(), row.clone()).map_err(|e| invalid(format!("F.rows[{r}]"), e))?;
    }
    let channel = DMChannel::new(input, output, raw.channel.rows.clone()).map_err(|e| invalid("F.rows", e))?;
    if source.alphabet() != f.domain() {
        return Err(invalid("f.domain", "must be the source alphabet"));
    }
    if channel.input() != f.domain() {
        return Err(invalid("F.input", "must be the domain of f"));
    }
    let instance = NoisyComputationInstance::new(source, f, channel).map_err(|e| invalid("F", e))?;

    let (g, outer_source) = match (&raw.g, &raw.outer_source) {
        (None, None) => (None, None),
        (Some(_), None) => return Err(schema("outer_source", "required when \"g\" is given")),
        (None, Some(_)) => return Err(schema("g", "required when \"outer_source\" is given")),
        (Some(g), Some(s)) => {
            let g = function(g, "g", &lookup)?;
            let s = pmf(s, "outer_source", &lookup)?;
            if s.alphabet() != g.domain() {
                return Err(invalid("g.domain", "must be the outer source alphabet"));
            }
            (Some(g), Some(s))
        }
    };

    let p = &raw.params;
    for (name, v) in [("delta", p.delta), ("delta2", p.delta2)] {
        if let Some(v) = v {
            if !(v > 0.0) {
                return Err(invalid(format!("params.{name}"), "must be positive"));
            }
        }
    }
    if let Some(e) = p.epsilon {
        if !(e > 0.0 && e < 1.0) {
            return Err(invalid("params.epsilon", "must lie in (0, 1)"));
        }
    }
    Ok(InstanceConfig { alphabets, instance, g, outer_source, params: raw.params })
}

fn pmf(raw: &RawPmf, field: &str, lookup: &impl Fn(&str, &str) -> Result<Alphabet, CliError>) -> Result<Pmf, CliError> {
    let a = lookup(&raw.alphabet, &format!("{field}.alphabet"))?;
    Pmf::new(a, raw.probs.clone()).map_err(|e| invalid(format!("{field}.probs"), e))
}

fn function(
    raw: &RawFunction,
    field: &str,
    lookup: &impl Fn(&str, &str) -> Result<Alphabet, CliError>,
) -> Result<DetFunction, CliError> {
    let domain = lookup(&raw.domain, &format!("{field}.domain"))?;
    let codomain = lookup(&raw.codomain, &format!("{field}.codomain"))?;
    for (x, y) in &raw.table {
        if domain.index_of(x).is_err() {
            return Err(schema(format!("{field}.table"), format!("{x:?} is not a symbol of {:?}", raw.domain)));
        }
        if codomain.index_of(y).is_err() {
            return Err(schema(format!("{field}.table.{x}"), format!("{y:?} is not a symbol of {:?}", raw.codomain)));
        }
    }
    DetFunction::from_pairs(domain, codomain, raw.table.iter().map(|(x, y)| (x.as_str(), y.as_str())))
        .map_err(|e| invalid(format!("{field}.table"), e))
}
