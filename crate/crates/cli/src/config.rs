//! Scenario configuration: one versioned, schema-validated tree.
//!
//! Configs are written in TOML; the resolved (defaults-filled) form is
//! re-emitted as JSON next to the outputs and is accepted back as input, so
//! any run can be reproduced from its own artifacts. Unknown keys are
//! rejected everywhere. All frequencies and rates are in units of the
//! declared base rate (`time_unit` names it); times are dimensionless
//! multiples of its inverse.

use std::path::Path;

use nalgebra::{DVector, Matrix2};
use serde::{Deserialize, Serialize};
use unravel_core::{
    discretize_spectral_density, DephasingSystem, ModeSet, SpectralDensityModel, SqueezingRule,
    TimeGrid, C64,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("cannot parse config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema_version {found}, this build speaks {expected}")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("invalid config: {0}")]
    Core(#[from] unravel_core::Error),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    /// Name of the base rate all frequencies are expressed in.
    pub time_unit: String,
    pub seed: u64,
    pub grid: GridConfig,
    pub system: SystemConfig,
    #[serde(default)]
    pub squeezing: SqueezingConfig,
    #[serde(default)]
    pub ensemble: EnsembleConfig,
    #[serde(default)]
    pub oracle: Option<OracleConfig>,
    #[serde(default)]
    pub optimize: Option<OptimizeConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dt: f64,
    pub n_steps: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub n_qubits: usize,
    /// "bell" (2 qubits), "ghz", "plus", or "zero".
    pub initial_state: String,
    pub qubits: Vec<QubitConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitConfig {
    #[serde(default)]
    pub h_z: f64,
    #[serde(default)]
    pub h_x: f64,
    #[serde(default)]
    pub h_y: f64,
    /// Present iff this qubit couples to its own dephasing bath.
    #[serde(default)]
    pub bath: Option<BathConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum BathConfig {
    /// Flat spectral density `J = rate / 2 pi` on `[0, omega_max]` when the
    /// discretization fields are given; without them only analytic
    /// delta-kernel rates are available (no kernel matrix, no sampling).
    Markov {
        rate: f64,
        #[serde(default)]
        omega_max: Option<f64>,
        #[serde(default)]
        n_modes: Option<usize>,
    },
    /// `J = amplitude * omega * exp(-omega / cutoff)`.
    Ohmic {
        amplitude: f64,
        cutoff: f64,
        omega_max: f64,
        n_modes: usize,
    },
    /// `J = amplitude * omega^3 * exp(-omega / cutoff)`.
    Superohmic {
        amplitude: f64,
        cutoff: f64,
        omega_max: f64,
        n_modes: usize,
    },
    /// Explicit discrete modes as `(g, omega)` pairs; squeezing comes from
    /// the squeezing rule.
    Modes { modes: Vec<(f64, f64)> },
    /// Tabulated spectral density, midpoint-discretized like the analytic
    /// families.
    Table {
        omega: Vec<f64>,
        j: Vec<f64>,
        omega_max: f64,
        n_modes: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqueezingConfig {
    /// "zero", "optimal", "restore", or "per_mode_phase".
    pub rule: String,
    #[serde(default)]
    pub target_time: Option<f64>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub phases: Option<Vec<f64>>,
    #[serde(default)]
    pub magnitude: Option<f64>,
}

fn default_epsilon() -> f64 {
    1e-3
}

impl Default for SqueezingConfig {
    fn default() -> Self {
        Self {
            rule: "zero".into(),
            target_time: None,
            epsilon: default_epsilon(),
            phases: None,
            magnitude: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    /// "modesum" or "covariance" (the `sample` subcommand only).
    #[serde(default = "default_sampler")]
    pub sampler: String,
}

fn default_samples() -> usize {
    1000
}

fn default_sampler() -> String {
    "modesum".into()
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            n_samples: default_samples(),
            sampler: default_sampler(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_quad_nodes")]
    pub quad_nodes: usize,
    /// Squeezing labels to test, as `[re, im]` pairs.
    pub xi: Vec<[f64; 2]>,
    pub sample_times: Vec<f64>,
    /// Noise labels for the residual check, `[re, im]` per mode, one row
    /// per node (single-mode baths).
    pub z_nodes: Vec<[f64; 2]>,
    #[serde(default = "default_fd_dt")]
    pub fd_dt: f64,
    #[serde(default = "default_leakage")]
    pub leakage_threshold: f64,
    #[serde(default = "default_identity_tol")]
    pub identity_tol: f64,
    #[serde(default = "default_identity_tol")]
    pub partial_trace_tol: f64,
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
}

fn default_n_max() -> usize {
    20
}
fn default_quad_nodes() -> usize {
    40
}
fn default_fd_dt() -> f64 {
    1e-3
}
fn default_leakage() -> f64 {
    1e-6
}
fn default_identity_tol() -> f64 {
    1e-8
}
fn default_residual_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    /// "minimize" or "maximize".
    pub objective: String,
    pub target_time: f64,
    #[serde(default = "default_starts")]
    pub n_starts: usize,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_gap")]
    pub gap_threshold: f64,
}

fn default_starts() -> usize {
    3
}
fn default_budget() -> usize {
    50_000
}
fn default_gap() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// How many individual trajectories to export (`t,norm_sq` files).
    #[serde(default)]
    pub trajectory_norms: usize,
    /// Also dump raw state vectors of those trajectories (little-endian
    /// f64 re/im pairs, row-major over the grid).
    #[serde(default)]
    pub state_dump: bool,
    /// Emit the bound-comparison figure data when the scenario admits an
    /// exact reference (one coupled qubit, ghz/bell initial state).
    #[serde(default = "default_true")]
    pub fig_data: bool,
}

fn default_true() -> bool {
    true
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            trajectory_norms: 0,
            state_dump: false,
            fig_data: true,
        }
    }
}

impl ScenarioConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let cfg: ScenarioConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)?
        } else {
            toml::from_str(&text)?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::SchemaVersion {
                found: self.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        if self.time_unit.trim().is_empty() {
            return Err(invalid(
                "time_unit must name the base rate (e.g. \"gamma\")",
            ));
        }
        if self.system.qubits.len() != self.system.n_qubits {
            return Err(invalid(format!(
                "system.n_qubits = {} but {} qubit blocks given",
                self.system.n_qubits,
                self.system.qubits.len()
            )));
        }
        match self.system.initial_state.as_str() {
            "bell" => {
                if self.system.n_qubits != 2 {
                    return Err(invalid("initial_state \"bell\" needs exactly 2 qubits"));
                }
            }
            "ghz" | "plus" | "zero" => {}
            other => {
                return Err(invalid(format!(
                    "unknown initial_state \"{other}\" (expected bell, ghz, plus, or zero)"
                )))
            }
        }
        match self.squeezing.rule.as_str() {
            "zero" => {}
            "optimal" | "restore" => {
                if self.squeezing.target_time.is_none() {
                    return Err(invalid(format!(
                        "squeezing rule \"{}\" needs target_time",
                        self.squeezing.rule
                    )));
                }
            }
            "per_mode_phase" => {
                if self.squeezing.phases.is_none() {
                    return Err(invalid("per_mode_phase rule needs phases"));
                }
            }
            other => return Err(invalid(format!("unknown squeezing rule \"{other}\""))),
        }
        if !(self.squeezing.epsilon > 0.0 && self.squeezing.epsilon < 1.0) {
            return Err(invalid("squeezing.epsilon must lie in (0, 1)"));
        }
        if let Some(opt) = &self.optimize {
            match opt.objective.as_str() {
                "minimize" | "maximize" => {}
                other => return Err(invalid(format!("unknown objective \"{other}\""))),
            }
        }
        if let Some(orc) = &self.oracle {
            for xi in &orc.xi {
                let norm = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
                if norm >= 1.0 {
                    return Err(invalid(format!("oracle xi modulus {norm} must be < 1")));
                }
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TimeGrid, ConfigError> {
        Ok(TimeGrid::new(self.grid.dt, self.grid.n_steps)?)
    }

    pub fn squeezing_rule(&self) -> Result<SqueezingRule, ConfigError> {
        let s = &self.squeezing;
        Ok(match s.rule.as_str() {
            "zero" => SqueezingRule::Zero,
            "optimal" => SqueezingRule::OptimalAt {
                target: s.target_time.expect("validated"),
                epsilon: s.epsilon,
            },
            "restore" => SqueezingRule::RestoreAt {
                target: s.target_time.expect("validated"),
                epsilon: s.epsilon,
            },
            "per_mode_phase" => SqueezingRule::PerModePhase {
                phases: s.phases.clone().expect("validated"),
                magnitude: s.magnitude.unwrap_or(1.0 - s.epsilon),
            },
            _ => unreachable!("validated"),
        })
    }

    /// Indices of coupled qubits, in order.
    pub fn coupled_indices(&self) -> Vec<usize> {
        self.system
            .qubits
            .iter()
            .enumerate()
            .filter_map(|(k, q)| q.bath.as_ref().map(|_| k))
            .collect()
    }

    /// Base mode set (squeezing not yet applied) of one coupled qubit, or
    /// `None` for an analytic-only Markov bath.
    pub fn base_modes(&self, qubit: usize) -> Result<Option<ModeSet>, ConfigError> {
        let bath = self.system.qubits[qubit]
            .bath
            .as_ref()
            .ok_or_else(|| invalid(format!("qubit {qubit} has no bath")))?;
        let zero = |_: f64| C64::default();
        let modes = match bath {
            BathConfig::Markov {
                rate,
                omega_max: Some(omega_max),
                n_modes: Some(n_modes),
            } => Some(discretize_spectral_density(
                &SpectralDensityModel::Markov { rate: *rate },
                *omega_max,
                *n_modes,
                zero,
            )?),
            BathConfig::Markov { .. } => None,
            BathConfig::Ohmic {
                amplitude,
                cutoff,
                omega_max,
                n_modes,
            } => Some(discretize_spectral_density(
                &SpectralDensityModel::Ohmic {
                    amplitude: *amplitude,
                    cutoff: *cutoff,
                },
                *omega_max,
                *n_modes,
                zero,
            )?),
            BathConfig::Superohmic {
                amplitude,
                cutoff,
                omega_max,
                n_modes,
            } => Some(discretize_spectral_density(
                &SpectralDensityModel::SuperOhmic {
                    amplitude: *amplitude,
                    cutoff: *cutoff,
                },
                *omega_max,
                *n_modes,
                zero,
            )?),
            BathConfig::Modes { modes } => {
                let triples: Vec<(f64, f64, C64)> =
                    modes.iter().map(|&(g, w)| (g, w, C64::default())).collect();
                Some(ModeSet::from_triples(&triples)?)
            }
            BathConfig::Table {
                omega,
                j,
                omega_max,
                n_modes,
            } => {
                if omega.len() != j.len() {
                    return Err(invalid("table omega and j must have equal length"));
                }
                let points: Vec<(f64, f64)> =
                    omega.iter().copied().zip(j.iter().copied()).collect();
                Some(discretize_spectral_density(
                    &SpectralDensityModel::CustomTable { points },
                    *omega_max,
                    *n_modes,
                    zero,
                )?)
            }
        };
        Ok(modes)
    }

    /// Mode set with the configured squeezing applied.
    pub fn squeezed_modes(&self, qubit: usize) -> Result<Option<ModeSet>, ConfigError> {
        let rule = self.squeezing_rule()?;
        match self.base_modes(qubit)? {
            Some(base) => Ok(Some(rule.apply(&base, self.squeezing.epsilon)?)),
            None => Ok(None),
        }
    }

    /// Analytic Markov rate of a bath, if that is what it is.
    pub fn markov_rate(&self, qubit: usize) -> Option<f64> {
        match self.system.qubits[qubit].bath.as_ref() {
            Some(BathConfig::Markov {
                rate,
                omega_max: None,
                ..
            })
            | Some(BathConfig::Markov {
                rate,
                n_modes: None,
                ..
            }) => Some(*rate),
            _ => None,
        }
    }

    pub fn dephasing_system(&self) -> Result<DephasingSystem, ConfigError> {
        let coupled = self.coupled_indices();
        let local_h: Vec<Matrix2<C64>> = self
            .system
            .qubits
            .iter()
            .map(|q| {
                Matrix2::new(
                    C64::new(q.h_z, 0.0),
                    C64::new(q.h_x, -q.h_y),
                    C64::new(q.h_x, q.h_y),
                    C64::new(-q.h_z, 0.0),
                )
            })
            .collect();
        Ok(DephasingSystem::new(
            self.system.n_qubits,
            coupled,
            local_h,
        )?)
    }

    pub fn initial_state(&self) -> DVector<C64> {
        let n = self.system.n_qubits;
        let dim = 1usize << n;
        match self.system.initial_state.as_str() {
            "bell" | "ghz" => {
                let a = std::f64::consts::FRAC_1_SQRT_2;
                let mut v = DVector::zeros(dim);
                v[0] = C64::new(a, 0.0);
                v[dim - 1] = C64::new(a, 0.0);
                v
            }
            "plus" => {
                let a = 1.0 / (dim as f64).sqrt();
                DVector::from_element(dim, C64::new(a, 0.0))
            }
            _ => {
                let mut v = DVector::zeros(dim);
                v[0] = C64::new(1.0, 0.0);
                v
            }
        }
    }

    /// Serialize the resolved form (defaults filled in) as pretty JSON.
    pub fn resolved_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
