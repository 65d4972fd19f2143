//! Run configuration: JSON file plus command-line overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CliError;
use crate::thermo::{ExtensiveState, GasParameters};
use crate::toda::{ThermalInit, TodaParams, DEFAULT_SEED};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Eval,
    Residuals,
    Transform,
    ContactCheck,
    Toda,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eval => "eval",
            Command::Residuals => "residuals",
            Command::Transform => "transform",
            Command::ContactCheck => "contact-check",
            Command::Toda => "toda",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Evenly spaced values `min..=max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.min + step * i as f64).collect()
    }
}

/// Tensor grid over `(S, V)`, `S` varying slowest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub s: Axis,
    pub v: Axis,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            s: Axis {
                min: -1.0,
                max: 1.0,
                count: 10,
            },
            v: Axis {
                min: 2.0,
                max: 6.0,
                count: 10,
            },
        }
    }
}

/// Uniform random points with `S` in `s` and `V - b` in `v_above_b`, drawn
/// from the run seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sample {
    pub count: usize,
    pub s: [f64; 2],
    pub v_above_b: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TodaRun {
    pub params: TodaParams,
    /// Used by `toda`.
    pub temperature: f64,
    /// Used by `sweep`.
    pub temperatures: Vec<f64>,
    pub kb: f64,
    pub n_steps: usize,
    pub burn_in: Option<usize>,
    pub ensemble_size: usize,
    pub init: ThermalInit,
}

impl Default for TodaRun {
    fn default() -> Self {
        let sweep = crate::toda::SweepConfig::default();
        TodaRun {
            params: sweep.toda,
            temperature: 0.01,
            temperatures: sweep.temperatures,
            kb: sweep.kb,
            n_steps: sweep.n_steps,
            burn_in: sweep.burn_in,
            ensemble_size: sweep.ensemble_size,
            init: sweep.init,
        }
    }
}

/// Deliberate model errors, for checking that failures are reported.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Perturbation {
    /// Relative error added to every lifted pressure.
    pub pressure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub gas: GasParameters,
    pub grid: Grid,
    pub points: Option<Vec<ExtensiveState>>,
    pub sample: Option<Sample>,
    pub toda: TodaRun,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub perturb: Perturbation,
    pub sequential: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            gas: GasParameters::default(),
            grid: Grid::default(),
            points: None,
            sample: None,
            toda: TodaRun::default(),
            seed: DEFAULT_SEED,
            tolerances: BTreeMap::new(),
            out: None,
            format: Format::Csv,
            perturb: Perturbation::default(),
            sequential: false,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError {
            code: "io",
            message: format!("cannot read {}: {e}", path.display()),
            field: Some("config".into()),
        })?;
        serde_json::from_str(&text).map_err(|e| CliError {
            code: "config_parse",
            message: format!("{}: {e}", path.display()),
            field: Some("config".into()),
        })
    }

    /// SHA-256 of the resolved configuration, ignoring the output path.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out = None;
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Points to evaluate: explicit list, else random sample, else grid.
    pub fn points(&self) -> Result<Vec<ExtensiveState>, CliError> {
        if let Some(points) = &self.points {
            if points.is_empty() {
                return Err(CliError::field("invalid_parameter", "point list is empty", "points"));
            }
            return Ok(points.clone());
        }
        if let Some(sample) = &self.sample {
            let ordered = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] <= r[1];
            if sample.count == 0 || !ordered(sample.s) || !ordered(sample.v_above_b) || !(sample.v_above_b[0] > 0.0) {
                return Err(CliError::field(
                    "invalid_parameter",
                    "sample needs count > 0, ordered ranges, and v_above_b > 0",
                    "sample",
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            let b = self.gas.b;
            return Ok((0..sample.count)
                .map(|_| {
                    let s = rng.gen_range(sample.s[0]..=sample.s[1]);
                    let dv = rng.gen_range(sample.v_above_b[0]..=sample.v_above_b[1]);
                    ExtensiveState::new(s, b + dv)
                })
                .collect());
        }
        for (name, axis) in [("grid.s", self.grid.s), ("grid.v", self.grid.v)] {
            if axis.count == 0 || !(axis.min.is_finite() && axis.max.is_finite()) {
                return Err(CliError::field(
                    "invalid_parameter",
                    "axis needs count > 0 and finite bounds",
                    name,
                ));
            }
        }
        let vs = self.grid.v.values();
        Ok(self
            .grid
            .s
            .values()
            .into_iter()
            .flat_map(|s| vs.iter().map(move |v| ExtensiveState::new(s, *v)))
            .collect())
    }

    /// Tolerance `name`, falling back to `default`.
    pub fn tol(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }
}
