//! JSON analysis configs.
//!
//! ```json
//! {
//!   "preset": { "name": "oscillator-b", "mu": 1, "k": 1, "b": 1 },
//!   "options": { "max_quanta": 6, "n_max": 6 }
//! }
//! ```
//!
//! Exactly one of `preset` and `explicit` must be present.

use std::path::Path;

use nalgebra::DMatrix;
use quadham::model::{
    build_model, random_positive_definite, reduce_to_dimensionless, sb_operator, DimensionlessModel, PhysicalParameters,
};
use quadham::{QuadraticForm, Tolerances};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit: Option<Explicit>,
    #[serde(default)]
    pub options: Options,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Preset {
    OscillatorB {
        #[serde(default = "one")]
        mu: f64,
        #[serde(default = "one")]
        k: f64,
        b: f64,
    },
    Physical {
        m1: f64,
        m2: f64,
        k1: f64,
        k2: f64,
        omega: f64,
        #[serde(default = "one")]
        hbar: f64,
    },
    Sb {
        #[serde(rename = "B")]
        field: f64,
    },
    RandomPd {
        #[serde(default = "two")]
        modes: usize,
        #[serde(default = "default_seed")]
        seed: u64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Explicit {
    #[serde(rename = "K")]
    pub modes: usize,
    pub gamma: Vec<Vec<f64>>,
    #[serde(default)]
    pub offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_frequency: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub definiteness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_merge: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
    #[serde(default = "default_max_quanta")]
    pub max_quanta: usize,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default = "default_from")]
    pub from: f64,
    #[serde(default = "default_to")]
    pub to: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            tolerances: ToleranceOverrides::default(),
            max_quanta: default_max_quanta(),
            n_max: default_n_max(),
            format: None,
            from: default_from(),
            to: default_to(),
            steps: default_steps(),
        }
    }
}

fn one() -> f64 {
    1.0
}

fn two() -> usize {
    2
}

fn default_seed() -> u64 {
    42
}

fn default_max_quanta() -> usize {
    6
}

fn default_n_max() -> usize {
    6
}

fn default_from() -> f64 {
    0.0
}

fn default_to() -> f64 {
    4.0
}

fn default_steps() -> usize {
    81
}

/// The quadratic form a config describes, plus what is known about its origin.
pub struct Model {
    pub form: QuadraticForm,
    /// Set for presets that reduce to `p_x² + p_y²/μ + x² + k y² + b Lz`.
    pub dimensionless: Option<DimensionlessModel>,
}

impl Model {
    /// Whether the form is the symmetric rotating oscillator (`μ = k = 1`).
    pub fn symmetric_b(&self) -> Option<f64> {
        self.dimensionless.filter(|d| d.is_symmetric()).map(|d| d.b)
    }
}

impl AnalysisConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        match (&self.preset, &self.explicit) {
            (Some(_), Some(_)) => return Err(config_err("give either `preset` or `explicit`, not both")),
            (None, None) => return Err(config_err("one of `preset` or `explicit` is required")),
            _ => {}
        }
        if let Some(e) = &self.explicit {
            let n = e.gamma.len();
            if e.modes == 0 || n != 2 * e.modes {
                return Err(config_err(&format!("gamma must be {0}×{0} for K = {1}", 2 * e.modes, e.modes)));
            }
            if let Some(row) = e.gamma.iter().position(|r| r.len() != n) {
                return Err(config_err(&format!("gamma row {row} has {} entries, expected {n}", e.gamma[row].len())));
            }
        }
        let o = &self.options;
        if o.steps < 2 {
            return Err(config_err("steps must be at least 2"));
        }
        let t = &o.tolerances;
        let overrides = [t.pairing, t.zero_frequency, t.rank, t.definiteness, t.ladder_residual, t.energy_merge];
        if overrides.iter().flatten().any(|v| v.is_nan() || *v <= 0.0 || v.is_infinite()) {
            return Err(config_err("tolerance overrides must be positive and finite"));
        }
        Ok(())
    }

    pub fn tolerances(&self, scale: f64) -> Tolerances {
        let t = &self.options.tolerances;
        let d = Tolerances::default();
        Tolerances {
            pairing: t.pairing.unwrap_or(d.pairing),
            zero_frequency: t.zero_frequency.unwrap_or(d.zero_frequency),
            rank: t.rank.unwrap_or(d.rank),
            definiteness: t.definiteness.unwrap_or(d.definiteness),
            ladder_residual: t.ladder_residual.unwrap_or(d.ladder_residual),
            energy_merge: t.energy_merge.unwrap_or(d.energy_merge),
        }
        .scaled(scale)
    }

    /// Overrides the seed of a `random-pd` preset.
    pub fn set_seed(&mut self, value: u64) -> Result<(), CliError> {
        match &mut self.preset {
            Some(Preset::RandomPd { seed, .. }) => {
                *seed = value;
                Ok(())
            }
            _ => Err(config_err("--seed applies only to the random-pd preset")),
        }
    }

    pub fn model(&self) -> Result<Model, CliError> {
        let invalid = |e: quadham::error::Error| CliError::Config(e.to_string());
        if let Some(e) = &self.explicit {
            let n = 2 * e.modes;
            let gamma = DMatrix::from_fn(n, n, |i, j| e.gamma[i][j]);
            if gamma.iter().any(|v| !v.is_finite()) || !e.offset.is_finite() {
                return Err(config_err("gamma and offset must be finite"));
            }
            let form = QuadraticForm::from_matrix(&gamma, e.offset).map_err(invalid)?;
            return Ok(Model { form, dimensionless: None });
        }
        match *self.preset.as_ref().expect("validated") {
            Preset::OscillatorB { mu, k, b } => {
                if !b.is_finite() {
                    return Err(config_err("b must be finite"));
                }
                let d = DimensionlessModel::new(mu, k, b).map_err(invalid)?;
                Ok(Model { form: build_model(&d), dimensionless: Some(d) })
            }
            Preset::Physical { m1, m2, k1, k2, omega, hbar } => {
                let p = PhysicalParameters { m1, m2, k1, k2, omega, hbar };
                let d = reduce_to_dimensionless(&p).map_err(invalid)?;
                Ok(Model { form: build_model(&d), dimensionless: Some(d) })
            }
            Preset::Sb { field } => Ok(Model { form: sb_operator(field).map_err(invalid)?, dimensionless: None }),
            Preset::RandomPd { modes, seed } => {
                if !(1..=4).contains(&modes) {
                    return Err(config_err("random-pd modes must be between 1 and 4"));
                }
                Ok(Model { form: random_positive_definite(modes, seed).map_err(invalid)?, dimensionless: None })
            }
        }
    }
}

fn config_err(msg: &str) -> CliError {
    CliError::Config(msg.to_string())
}
