//! One JSON document per run, merged over defaults, then `--set` overrides.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::fpp::FppConfig;
use crate::variance::CampaignConfig;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleEnvSection {
    /// Explicit box; defaults to the box needed by `solve.horizon`.
    pub lo: Option<Vec<i64>>,
    pub hi: Option<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSection {
    pub horizon: f64,
    /// Slack of the exported near-optimal paths.
    pub path_delta: f64,
    pub max_paths: usize,
    pub write_layers: bool,
}

impl Default for SolveSection {
    fn default() -> Self {
        SolveSection { horizon: 16.0, path_delta: 0.1, max_paths: 1000, write_layers: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteScan {
    /// `a`-sites on the argmax path.
    Path,
    /// Every site of the solver box.
    Box,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InfluenceSection {
    pub horizon: f64,
    /// Defaults to `(b - a) / 10`.
    pub delta: Option<f64>,
    pub sites: SiteScan,
    pub max_paths: usize,
}

impl Default for InfluenceSection {
    fn default() -> Self {
        InfluenceSection { horizon: 8.0, delta: None, sites: SiteScan::Path, max_paths: 10_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HashCheckSection {
    pub m_values: Vec<usize>,
    pub alpha: f64,
    pub random_flips: usize,
    pub seed: u64,
}

impl Default for HashCheckSection {
    fn default() -> Self {
        HashCheckSection { m_values: vec![2, 4, 8, 16, 32], alpha: 0.5, random_flips: 10_000, seed: 1 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    /// Also estimate `var / Talagrand sum` per horizon.
    pub talagrand: bool,
    /// Slopes for effective-Hamiltonian estimates.
    pub hamiltonian_etas: Vec<Vec<f64>>,
}

/// Full run configuration. `campaign.model` and `campaign.base_seed` also
/// drive `sample-env`, `solve` and `influence`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub campaign: CampaignConfig,
    pub report: ReportSection,
    pub sample_env: SampleEnvSection,
    pub solve: SolveSection,
    pub influence: InfluenceSection,
    pub fpp: FppConfig,
    pub hash_check: HashCheckSection,
}

fn key_err(key: &str, msg: impl Into<String>) -> Error {
    Error::Config { key: key.to_string(), msg: msg.into() }
}

fn merge(base: &mut Value, over: Value, path: &str) -> Result<()> {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                let key = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v, &key)?,
                    Some(slot) => *slot = v,
                    None => return Err(key_err(&key, "unknown key")),
                }
            }
            Ok(())
        }
        (_, _) => Err(key_err(if path.is_empty() { "config" } else { path }, "expected an object")),
    }
}

fn set_path(root: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut cur = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, p) in parts.iter().enumerate() {
        let obj = cur.as_object_mut().ok_or_else(|| key_err(key, "unknown key"))?;
        let slot = obj.get_mut(*p).ok_or_else(|| key_err(key, "unknown key"))?;
        if i + 1 == parts.len() {
            *slot = value;
            return Ok(());
        }
        cur = slot;
    }
    unreachable!("split yields at least one part")
}

/// Parses `key=value`; the value is read as JSON, falling back to a string.
pub fn parse_override(s: &str) -> Result<(String, Value)> {
    let (k, v) = s.split_once('=').ok_or_else(|| key_err(s, "override must look like key=value"))?;
    let v = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.trim().to_string(), v))
}

impl RunConfig {
    /// Defaults, then `doc` (a config or a manifest), then overrides; validated.
    pub fn resolve(doc: Option<Value>, overrides: &[(String, Value)]) -> Result<RunConfig> {
        let mut base = serde_json::to_value(RunConfig::default())?;
        if let Some(mut doc) = doc {
            if doc.get("hjvar_manifest").is_some() {
                doc = doc.get_mut("config").map(Value::take).ok_or_else(|| key_err("config", "manifest lacks a config"))?;
            }
            merge(&mut base, doc, "")?;
        }
        for (k, v) in overrides {
            set_path(&mut base, k, v.clone())?;
        }
        let cfg: RunConfig = serde_json::from_value(base).map_err(|e| key_err("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let prefixed = |prefix: &str, e: Error| match e {
            Error::Config { key, msg } => key_err(&format!("{prefix}.{key}"), msg),
            other => other,
        };
        self.campaign.validate().map_err(|e| prefixed("campaign", e))?;
        self.fpp.validate().map_err(|e| prefixed("fpp", e))?;
        let m = &self.campaign.model;
        for (key, t) in [("solve.horizon", self.solve.horizon), ("influence.horizon", self.influence.horizon)] {
            m.inputs(t).and_then(|i| i.grid()).map_err(|e| key_err(key, e.to_string()))?;
        }
        if !(self.solve.path_delta >= 0.0) {
            return Err(key_err("solve.path_delta", "must be nonnegative"));
        }
        if self.influence.delta.is_some_and(|d| !(d > 0.0)) {
            return Err(key_err("influence.delta", "must be positive"));
        }
        if self.hash_check.m_values.iter().any(|&m| m < 2) {
            return Err(key_err("hash_check.m_values", "every m must be at least 2"));
        }
        if !(0.0..=1.0).contains(&self.hash_check.alpha) {
            return Err(key_err("hash_check.alpha", "must lie in [0, 1]"));
        }
        if self.report.hamiltonian_etas.iter().any(|e| e.len() != m.dim()) {
            return Err(key_err("report.hamiltonian_etas", "each slope must match the model dimension"));
        }
        match (&self.sample_env.lo, &self.sample_env.hi) {
            (None, None) => {}
            (Some(lo), Some(hi)) if lo.len() == m.dim() && hi.len() == m.dim() && lo.iter().zip(hi).all(|(a, b)| a < b) => {}
            _ => return Err(key_err("sample_env.lo", "lo and hi must both be set, match the dimension and satisfy lo < hi")),
        }
        Ok(())
    }
}
