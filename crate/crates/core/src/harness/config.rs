//! Scenario files.
//!
//! A scenario file is a JSON document (conventionally `*.cfg`) with units
//! spelled out in the field names:
//!
//! ```text
//! {
//!   "schema_version": 1,
//!   "name": "...",
//!   "scene": { "tx_positions_m": [[x, y], ...], "rx_positions_m": ...,
//!              "target_location_m": [x, y], "target_velocity_mps": [vx, vy],
//!              "rcs_sq": [[...K per transmitter], ...], "channel_gain_sq": [...],
//!              "total_power_w": 1.0, "noise_var_comm_w": 10.0,
//!              "noise_var_clutter_w": 0.6 | "senr_db": 0.0 },
//!   "waveform": { "n_chirps": 16, "pulse_scale_s": 0.01, "carrier_hz": 3e9,
//!                 "sample_rate_hz": 1000.0, "t_eff_s": 0.01 },
//!   "constraints": { "rho_min": 0.01 | [...], "rho_max": 0.3 | [...],
//!                    "delta_l_sq": 250.0, "delta_v_sq": 0.13 },
//!   "solver": { <SolverConfig fields> },
//!   "solver_overrides": { "<solver name>": { <SolverConfig fields> } }
//! }
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::optimizer::{Constraints, SolverConfig, SolverKind};
use crate::scene::{Point, Scenario};
use crate::waveform::WaveformSpec;

pub const SCHEMA_VERSION: u32 = 1;

/// Scenario files shipped with the crate, addressable by name.
pub const BUNDLED: [(&str, &str); 2] = [
    ("cellfree-isac", include_str!("../../../../scenarios/cellfree-isac.cfg")),
    ("radar-4x3", include_str!("../../../../scenarios/radar-4x3.cfg")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub scene: SceneSection,
    pub waveform: WaveformSection,
    pub constraints: ConstraintsSection,
    #[serde(default)]
    pub solver: Map<String, Value>,
    #[serde(default)]
    pub solver_overrides: BTreeMap<String, Map<String, Value>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSection {
    pub tx_positions_m: Vec<Point>,
    pub rx_positions_m: Vec<Point>,
    pub target_location_m: Point,
    pub target_velocity_mps: [f64; 2],
    /// `|α_{n,k}|²`, one row per transmitter.
    pub rcs_sq: Vec<Vec<f64>>,
    pub channel_gain_sq: Vec<f64>,
    pub total_power_w: f64,
    pub noise_var_comm_w: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_var_clutter_w: Option<f64>,
    /// Alternative to `noise_var_clutter_w`: `σ_cn² = P·10^(-senr_db/10)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub senr_db: Option<f64>,
}

fn default_carrier() -> f64 {
    crate::scene::DEFAULT_CARRIER_HZ
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveformSection {
    pub n_chirps: u32,
    pub pulse_scale_s: f64,
    #[serde(default = "default_carrier")]
    pub carrier_hz: f64,
    pub sample_rate_hz: f64,
    /// Defaults to `pulse_scale_s`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_eff_s: Option<f64>,
}

/// A per-transmitter quantity given either once for all or per entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerTx {
    All(f64),
    Each(Vec<f64>),
}

impl PerTx {
    fn expand(&self, n: usize, path: &str) -> Result<Vec<f64>> {
        match self {
            PerTx::All(v) => Ok(vec![*v; n]),
            PerTx::Each(v) if v.len() == n => Ok(v.clone()),
            PerTx::Each(v) => Err(Error::config(path, format!("expected {n} entries, got {}", v.len()))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintsSection {
    pub rho_min: PerTx,
    pub rho_max: PerTx,
    /// m².
    pub delta_l_sq: f64,
    /// (m/s)².
    pub delta_v_sq: f64,
}

/// A `key=value` assignment on a dotted path into the scenario document.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub path: Vec<String>,
    pub value: Value,
}

impl Override {
    pub fn new(key: &str, value: Value) -> Self {
        Override {
            path: key.split('.').map(str::to_owned).collect(),
            value,
        }
    }

    pub fn key(&self) -> String {
        self.path.join(".")
    }

    /// Parses `key=value`; the value is read as JSON and falls back to a
    /// plain string.
    pub fn parse(text: &str) -> Result<Self> {
        let (key, raw) = split_assignment(text)?;
        Ok(Override::new(key, parse_value(raw)))
    }

    pub fn apply(&self, doc: &mut Value) -> Result<()> {
        let mut cur = doc;
        for (depth, seg) in self.path.iter().enumerate() {
            let here = || self.path[..=depth].join(".");
            cur = match cur {
                Value::Object(map) => map.entry(seg.clone()).or_insert_with(|| Value::Object(Map::new())),
                Value::Array(items) => {
                    let idx: usize = seg
                        .parse()
                        .map_err(|_| Error::config(here(), "array segments must be indices"))?;
                    let len = items.len();
                    items
                        .get_mut(idx)
                        .ok_or_else(|| Error::config(here(), format!("index out of range (length {len})")))?
                }
                _ => return Err(Error::config(here(), "cannot descend into a scalar")),
            };
        }
        *cur = self.value.clone();
        Ok(())
    }
}

pub(crate) fn split_assignment(text: &str) -> Result<(&str, &str)> {
    let (key, raw) = text
        .split_once('=')
        .ok_or_else(|| Error::InvalidInput(format!("expected key=value, got `{text}`")))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(Error::InvalidInput(format!("malformed key in `{text}`")));
    }
    Ok((key, raw.trim()))
}

pub(crate) fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()))
}

/// A fully validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedScenario {
    pub file: ScenarioFile,
    pub scenario: Scenario,
    pub waveform: WaveformSpec,
    pub constraints: Constraints,
}

impl LoadedScenario {
    pub fn name(&self) -> &str {
        &self.file.name
    }

    /// Solver defaults, then the file's common `solver` section, then its
    /// per-solver section.
    pub fn solver_config(&self, kind: SolverKind) -> Result<SolverConfig> {
        let mut doc = serde_json::to_value(SolverConfig::for_solver(kind))?;
        let Value::Object(base) = &mut doc else {
            unreachable!("SolverConfig serializes to an object")
        };
        for (k, v) in &self.file.solver {
            base.insert(k.clone(), v.clone());
        }
        let section = if let Some(extra) = self.file.solver_overrides.get(kind.name()) {
            for (k, v) in extra {
                base.insert(k.clone(), v.clone());
            }
            format!("solver_overrides.{}", kind.name())
        } else {
            "solver".to_owned()
        };
        let cfg: SolverConfig = from_value_at(doc, &section)?;
        cfg.validate().map_err(|e| Error::config(section, e.to_string()))?;
        Ok(cfg)
    }
}

fn from_value_at<T: serde::de::DeserializeOwned>(doc: Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(doc).map_err(|e| {
        let inner = e.path().to_string();
        let path = match (prefix.is_empty(), inner.as_str()) {
            (true, _) => inner.clone(),
            (false, ".") => prefix.to_owned(),
            (false, _) => format!("{prefix}.{inner}"),
        };
        Error::config(path, e.into_inner().to_string())
    })
}

/// Text of a scenario given as a path or a bundled name (with or without
/// the `.cfg` extension).
pub fn scenario_source(reference: &str) -> Result<String> {
    let path = Path::new(reference);
    if path.exists() {
        return Ok(fs::read_to_string(path)?);
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(reference);
    BUNDLED
        .iter()
        .find(|(name, _)| *name == stem)
        .map(|(_, text)| (*text).to_owned())
        .ok_or_else(|| Error::InvalidInput(format!("no scenario file or bundled scenario named `{reference}`")))
}

pub fn load_scenario(reference: &str) -> Result<LoadedScenario> {
    load_scenario_with(reference, &[])
}

pub fn load_scenario_with(reference: &str, overrides: &[Override]) -> Result<LoadedScenario> {
    parse_scenario(&scenario_source(reference)?, overrides)
}

pub fn parse_scenario(text: &str, overrides: &[Override]) -> Result<LoadedScenario> {
    let mut doc: Value = serde_json::from_str(text)?;
    for o in overrides {
        o.apply(&mut doc)?;
    }
    let file: ScenarioFile = from_value_at(doc, "")?;
    build(file)
}

fn positive(v: f64, path: &str) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(path, format!("must be positive and finite, got {v}")))
    }
}

fn build(file: ScenarioFile) -> Result<LoadedScenario> {
    if file.schema_version != SCHEMA_VERSION {
        return Err(Error::config(
            "schema_version",
            format!("unsupported version {} (expected {SCHEMA_VERSION})", file.schema_version),
        ));
    }
    let sc = &file.scene;
    let (n, k) = (sc.tx_positions_m.len(), sc.rx_positions_m.len());
    if sc.rcs_sq.len() != n {
        return Err(Error::config(
            "scene.rcs_sq",
            format!("expected {n} rows (one per transmitter), got {}", sc.rcs_sq.len()),
        ));
    }
    if let Some(i) = sc.rcs_sq.iter().position(|row| row.len() != k) {
        return Err(Error::config(
            format!("scene.rcs_sq.{i}"),
            format!("expected {k} entries (one per receiver), got {}", sc.rcs_sq[i].len()),
        ));
    }
    if sc.channel_gain_sq.len() != n {
        return Err(Error::config(
            "scene.channel_gain_sq",
            format!("expected {n} entries, got {}", sc.channel_gain_sq.len()),
        ));
    }
    let total_power = positive(sc.total_power_w, "scene.total_power_w")?;
    let clutter = match (sc.noise_var_clutter_w, sc.senr_db) {
        (Some(v), None) => positive(v, "scene.noise_var_clutter_w")?,
        (None, Some(db)) if db.is_finite() => total_power * 10f64.powf(-db / 10.0),
        (None, Some(db)) => return Err(Error::config("scene.senr_db", format!("must be finite, got {db}"))),
        _ => {
            return Err(Error::config(
                "scene",
                "exactly one of `noise_var_clutter_w` and `senr_db` must be given",
            ))
        }
    };

    let wf = &file.waveform;
    let waveform = WaveformSpec {
        n_chirps: wf.n_chirps,
        pulse_scale: wf.pulse_scale_s,
        carrier: wf.carrier_hz,
        sample_rate: wf.sample_rate_hz,
        t_eff: wf.t_eff_s.unwrap_or(wf.pulse_scale_s),
    };
    waveform.validate().map_err(|e| Error::config("waveform", e.to_string()))?;

    let scenario = Scenario {
        tx_positions: sc.tx_positions_m.clone(),
        rx_positions: sc.rx_positions_m.clone(),
        target_location: sc.target_location_m,
        target_velocity: sc.target_velocity_mps,
        wavelength: waveform.wavelength(),
        rcs_sq: DMatrix::from_fn(n, k, |i, j| sc.rcs_sq[i][j]),
        channel_gain: sc.channel_gain_sq.clone(),
        total_power,
        noise_var_comm: positive(sc.noise_var_comm_w, "scene.noise_var_comm_w")?,
        noise_var_clutter: clutter,
        sample_rate: wf.sample_rate_hz,
    };
    scenario.validate().map_err(|e| Error::config("scene", e.to_string()))?;

    let c = &file.constraints;
    let constraints = Constraints {
        rho_min: c.rho_min.expand(n, "constraints.rho_min")?,
        rho_max: c.rho_max.expand(n, "constraints.rho_max")?,
        delta_l_sq: c.delta_l_sq,
        delta_v_sq: c.delta_v_sq,
    };
    constraints.validate(n).map_err(|e| Error::config("constraints", e.to_string()))?;

    for name in file.solver_overrides.keys() {
        name.parse::<SolverKind>()
            .map_err(|e| Error::config(format!("solver_overrides.{name}"), e.to_string()))?;
    }
    let loaded = LoadedScenario {
        file,
        scenario,
        waveform,
        constraints,
    };
    // Surface bad solver sections at load time rather than at first use.
    for kind in SolverKind::ALL {
        loaded.solver_config(kind)?;
    }
    Ok(loaded)
}
