//! TOML run configuration.
//!
//! Every table is optional and every missing key takes its default, so an
//! empty document describes the reference operating point. Unknown keys are
//! rejected. `key=value` overrides use dotted paths into the document
//! (`disaster.p_f=0.3`, `scenario.mode=tn`) and are applied before the
//! document is typed, so they go through the same checks as file contents.
//!
//! ```toml
//! [scenario]
//! n_users = 300
//! mode = "disaster"
//!
//! [disaster]
//! p_f = 0.5
//!
//! [run]
//! runs = 50
//!
//! [sweep]
//! parameter = "feeder_capacity"
//! values = [150e6, 450e6]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{NtnParams, TnParams};
use crate::error::{Result, SimError};
use crate::fallback::DisasterParams;
use crate::harness::{SweepParameter, SweepSpec};
use crate::scenario::{Mode, MobilityParams, Scenario};

/// Scalar scenario settings (the `[scenario]` table).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub area_side_m: f64,
    pub n_gnb: u32,
    pub isd_m: f64,
    pub perturbation_frac: f64,
    pub n_users: u32,
    pub mode: Mode,
    pub master_seed: u64,
    pub activity: f64,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        let s = Scenario::default();
        Self {
            area_side_m: s.area_side_m,
            n_gnb: s.n_gnb,
            isd_m: s.isd_m,
            perturbation_frac: s.perturbation_frac,
            n_users: s.n_users,
            mode: s.mode,
            master_seed: s.master_seed,
            activity: s.activity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Monte Carlo runs per operating point.
    pub runs: u32,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { runs: 50 }
    }
}

/// A custom one-parameter sweep. Feeder capacities are in bit/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: Option<SweepParameter>,
    pub values: Vec<f64>,
    pub common_random_numbers: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            parameter: None,
            values: Vec::new(),
            common_random_numbers: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioSection,
    pub mobility: MobilityParams,
    pub tn: TnParams,
    pub ntn: NtnParams,
    pub disaster: DisasterParams,
    pub run: RunSection,
    pub sweep: SweepSection,
}

impl RunConfig {
    /// Parses a TOML document, applies `overrides` and validates the result.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| SimError::config("config", e.message().trim().to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: RunConfig = toml::Value::Table(doc)
            .try_into()
            .map_err(|e: toml::de::Error| SimError::config("config", e.message().trim().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path` (or starts from defaults when `None`) and applies `overrides`.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| SimError::io(p, e))?,
            None => String::new(),
        };
        Self::from_toml_str(&text, overrides)
    }

    pub fn validate(&self) -> Result<()> {
        if self.run.runs == 0 {
            return Err(SimError::config("run.runs", "must be >= 1"));
        }
        self.scenario().validate()?;
        if self.sweep.parameter.is_some() {
            self.sweep_spec()?;
        } else if !self.sweep.values.is_empty() {
            return Err(SimError::config("sweep.parameter", "required when sweep.values is set"));
        }
        Ok(())
    }

    pub fn scenario(&self) -> Scenario {
        let s = &self.scenario;
        Scenario {
            area_side_m: s.area_side_m,
            n_gnb: s.n_gnb,
            isd_m: s.isd_m,
            perturbation_frac: s.perturbation_frac,
            n_users: s.n_users,
            mode: s.mode,
            master_seed: s.master_seed,
            activity: s.activity,
            mobility: self.mobility.clone(),
            tn: self.tn.clone(),
            ntn: self.ntn.clone(),
            disaster: self.disaster.clone(),
        }
    }

    /// The custom sweep described by `[sweep]`, if any.
    pub fn sweep_spec(&self) -> Result<Option<SweepSpec>> {
        let Some(parameter) = self.sweep.parameter else {
            return Ok(None);
        };
        let mut spec = SweepSpec::new(parameter, self.sweep.values.clone(), self.run.runs, self.scenario());
        spec.common_random_numbers = self.sweep.common_random_numbers;
        spec.validate()?;
        Ok(Some(spec))
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.scenario.master_seed = seed;
    }
}

fn apply_override(doc: &mut toml::Table, spec: &str) -> Result<()> {
    let Some((path, raw)) = spec.split_once('=') else {
        return Err(SimError::config(spec, "override must have the form key=value"));
    };
    let path = path.trim();
    let raw = raw.trim();
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(SimError::config(path, "empty key segment"));
    }
    // Bare words such as `tn` or `feeder_capacity` are taken as strings.
    let value = raw
        .parse::<toml::Value>()
        .unwrap_or_else(|_| toml::Value::String(raw.to_string()));

    let (last, parents) = keys.split_last().expect("split yields at least one key");
    let mut table = doc;
    for k in parents {
        let entry = table
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = match entry {
            toml::Value::Table(t) => t,
            _ => return Err(SimError::config(path, format!("`{k}` is not a table"))),
        };
    }
    table.insert(last.to_string(), value);
    Ok(())
}
