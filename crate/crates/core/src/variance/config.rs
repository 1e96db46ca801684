//! Campaign configuration.

use serde::{Deserialize, Serialize};

use crate::env::{Environment, LatticeBox, Levels};
use crate::error::{Error, Result};
use crate::influence::hash_order;
use crate::solver::{default_q_max, KineticCost, Payoff, SolverInputs, SolverParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KineticConfig {
    pub scale: f64,
    pub power: f64,
    pub nondeg_exponent: f64,
}

impl Default for KineticConfig {
    fn default() -> Self {
        KineticConfig { scale: 0.5, power: 2.0, nondeg_exponent: 3.0 }
    }
}

/// Environment law, running cost, payoff slope and discretisation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    pub kinetic: KineticConfig,
    /// Slope of the linear payoff; its length fixes the dimension.
    pub eta: Vec<f64>,
    pub h: f64,
    pub dt: f64,
    /// Defaults to the finite-speed stencil.
    pub q_max: Option<usize>,
    /// Defaults to the origin.
    pub start: Option<Vec<f64>>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            alpha: 0.5,
            a: 0.0,
            b: 1.0,
            kinetic: KineticConfig::default(),
            eta: vec![1.0, 0.0],
            h: 1.0,
            dt: 1.0,
            q_max: None,
            start: None,
        }
    }
}

fn config_err(key: &str, msg: impl Into<String>) -> Error {
    Error::Config { key: key.to_string(), msg: msg.into() }
}

/// Re-keys lower-level parameter errors under `prefix`.
fn rekey(prefix: &str, e: Error) -> Error {
    match e {
        Error::Param { key, msg } => {
            let leaf = key.strip_prefix("solver.").unwrap_or(key);
            config_err(&format!("{prefix}{leaf}"), msg)
        }
        Error::InvalidAlpha(a) => config_err(&format!("{prefix}alpha"), format!("must lie in [0, 1] (got {a})")),
        Error::InvalidLevels { a, b } => config_err(&format!("{prefix}b"), format!("levels must satisfy a < b (got a = {a}, b = {b})")),
        other => other,
    }
}

impl ModelConfig {
    pub fn dim(&self) -> usize {
        self.eta.len()
    }

    pub fn levels(&self) -> Result<Levels> {
        Levels::new(self.a, self.b).map_err(|e| rekey("model.", e))
    }

    pub fn kinetic(&self) -> Result<KineticCost> {
        let k = &self.kinetic;
        KineticCost::new(k.scale, k.power, k.nondeg_exponent).map_err(|e| rekey("model.", e))
    }

    pub fn start(&self) -> Vec<f64> {
        self.start.clone().unwrap_or_else(|| vec![0.0; self.dim()])
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(config_err("model.alpha", format!("must lie in [0, 1] (got {})", self.alpha)));
        }
        self.levels()?;
        self.kinetic()?;
        if self.eta.len() < 2 || self.eta.iter().any(|v| !v.is_finite()) {
            return Err(config_err("model.eta", "needs at least two finite components"));
        }
        if self.start().len() != self.dim() {
            return Err(config_err("model.start", "length must match eta"));
        }
        // one step of horizon dt checks h, dt, q_max and start
        self.inputs(self.dt).and_then(|i| i.grid()).map(|_| ()).map_err(|e| rekey("model.", e))
    }

    /// Solver inputs for horizon `t`.
    pub fn inputs(&self, t: f64) -> Result<SolverInputs> {
        let kinetic = self.kinetic()?;
        let payoff = Payoff::linear(self.eta.clone());
        let start = self.start();
        let q_max = match self.q_max {
            Some(q) => q,
            None => default_q_max(&kinetic, self.levels()?, &payoff, &start, self.dt, self.h)?,
        };
        let mut params = SolverParams::new(t, self.h, q_max, start);
        params.dt = self.dt;
        Ok(SolverInputs::new(payoff, kinetic, params))
    }

    /// Samples the environment on the box needed at horizon `t`, widened by
    /// `margin` cubes on the upper side of every axis.
    pub fn environment(&self, t: f64, seed: u64, margin: i64) -> Result<Environment> {
        let window = self.inputs(t)?.grid()?.required_box();
        let hi: Vec<i64> = window.hi().iter().map(|v| v + margin).collect();
        let bbox = LatticeBox::new(window.lo().to_vec(), hi)?;
        Environment::sample(bbox, self.alpha, self.levels()?, seed)
    }
}

/// Monte Carlo campaign over horizons.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub model: ModelConfig,
    pub base_seed: u64,
    /// Strictly ascending.
    pub horizons: Vec<f64>,
    /// Samples per horizon.
    pub samples: usize,
    /// Shift-hash exponent; `m = floor(t^zeta)`.
    pub zeta: f64,
    pub influence_survey: bool,
    pub shift_averaging: bool,
    /// Approximation level of the survey; defaults to `(b - a) / 10`.
    pub survey_delta: Option<f64>,
    pub bootstrap_resamples: usize,
    /// Wall-clock budget in seconds.
    pub budget_seconds: Option<f64>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            model: ModelConfig::default(),
            base_seed: 1,
            horizons: vec![8.0, 16.0, 32.0, 64.0],
            samples: 2000,
            zeta: 0.45,
            influence_survey: false,
            shift_averaging: false,
            survey_delta: None,
            bootstrap_resamples: 10_000,
            budget_seconds: None,
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.horizons.is_empty() {
            return Err(config_err("horizons", "must not be empty"));
        }
        if self.horizons.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(config_err("horizons", "must be strictly ascending"));
        }
        if self.samples < 2 {
            return Err(config_err("samples", "need at least 2 samples per horizon"));
        }
        if !(self.zeta > 0.4 && self.zeta < 0.5) {
            return Err(config_err("zeta", "must lie in (0.4, 0.5)"));
        }
        for &t in &self.horizons {
            self.model.inputs(t).and_then(|i| i.grid()).map_err(|e| match rekey("", e) {
                Error::Config { msg, .. } => config_err("horizons", format!("t = {t}: {msg}")),
                other => other,
            })?;
            if hash_order(t, self.zeta) < 2 {
                return Err(config_err("horizons", format!("t = {t} gives m = floor(t^zeta) < 2")));
            }
        }
        if let Some(d) = self.survey_delta {
            if !(d > 0.0) {
                return Err(config_err("survey_delta", "must be positive"));
            }
        }
        if self.bootstrap_resamples < 100 {
            return Err(config_err("bootstrap_resamples", "need at least 100"));
        }
        if let Some(b) = self.budget_seconds {
            if !(b > 0.0) {
                return Err(config_err("budget_seconds", "must be positive"));
            }
        }
        Ok(())
    }

    pub fn survey_delta(&self) -> f64 {
        self.survey_delta.unwrap_or(0.1 * (self.model.b - self.model.a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key_of(e: Error) -> String {
        match e {
            Error::Config { key, .. } => key,
            other => panic!("not a config error: {other}"),
        }
    }

    #[test]
    fn defaults_validate() {
        CampaignConfig::default().validate().unwrap();
        let q = CampaignConfig::default().model.inputs(8.0).unwrap().params.q_max;
        assert_eq!(q, 5);
    }

    #[test]
    fn errors_name_keys() {
        let mut c = CampaignConfig::default();
        c.model.alpha = 1.5;
        assert_eq!(key_of(c.validate().unwrap_err()), "model.alpha");
        let mut c = CampaignConfig::default();
        c.model.b = -1.0;
        assert_eq!(key_of(c.validate().unwrap_err()), "model.b");
        let mut c = CampaignConfig::default();
        c.model.h = 0.3;
        assert_eq!(key_of(c.validate().unwrap_err()), "model.h");
        let mut c = CampaignConfig::default();
        c.model.kinetic.scale = 0.1;
        assert!(key_of(c.validate().unwrap_err()).starts_with("model.kinetic"));
        let mut c = CampaignConfig::default();
        c.horizons = vec![16.0, 8.0];
        assert_eq!(key_of(c.validate().unwrap_err()), "horizons");
        let mut c = CampaignConfig::default();
        c.horizons = vec![4.0];
        assert_eq!(key_of(c.validate().unwrap_err()), "horizons");
        let mut c = CampaignConfig::default();
        c.samples = 1;
        assert_eq!(key_of(c.validate().unwrap_err()), "samples");
    }

    #[test]
    fn unknown_keys_rejected() {
        let e = serde_json::from_str::<CampaignConfig>(r#"{"sampels": 3}"#).unwrap_err();
        assert!(e.to_string().contains("sampels"));
    }
}
