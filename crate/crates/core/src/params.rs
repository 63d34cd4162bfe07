//! Robot, offline and online parameter groups and configuration loading.
//!
//! The configuration file is JSON with three top-level objects, `robot`,
//! `offline` and `online`. Robot and offline fields are required. Every online
//! field is optional and falls back to the documented defaults below.
//!
//! Angles are radians, lengths meters, velocities meters (or radians) per
//! second.
//!
//! Default online weights. `configs/default.json` raises `alpha_crash` to 8
//! and `history_depth` to 20, which is what the forest benchmark needs.
//!
//! | field          | default |
//! |----------------|---------|
//! | `alpha_crash`  | 3.0     |
//! | `lambda_clear` | 0.4     |
//! | `lambda_clut`  | 1.5     |
//! | `lambda_close` | 1.0     |
//! | `lambda_smo`   | 0.15    |
//! | `tau_d_err`    | 0       |
//! | `history_depth`| 5       |

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

/// Platform geometry, kinematic limits and sensor description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotParams {
    pub width: f64,
    pub length: f64,
    pub height: f64,
    /// Maximum forward lateral velocity.
    pub v_lat: f64,
    pub omega_yaw: f64,
    pub omega_pitch: f64,
    pub omega_roll: f64,
    pub sensor_resolution: f64,
    /// Maximum sensor range along x, y and z.
    pub sensor_range: [f64; 3],
}

impl Default for RobotParams {
    fn default() -> Self {
        Self {
            width: 0.5,
            length: 0.5,
            height: 0.3,
            v_lat: 1.0,
            omega_yaw: PI / 2.0,
            omega_pitch: PI / 4.0,
            omega_roll: PI / 4.0,
            sensor_resolution: 0.15,
            sensor_range: [10.0, 10.0, 10.0],
        }
    }
}

/// Parameters fixed before navigation: grid layout, tentacle geometry and
/// voxel classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfflineParams {
    pub voxel_dim: f64,
    pub grid_counts: [usize; 3],
    pub n_yaw: usize,
    pub n_pitch: usize,
    pub samples_per_tentacle: usize,
    pub tentacle_length: f64,
    /// Total yaw angle covered by the bank.
    pub yaw_coverage: f64,
    /// Total pitch angle covered by the bank.
    pub pitch_coverage: f64,
    pub tau_priority: f64,
    pub tau_support: f64,
    pub beta_max: f64,
    pub alpha_beta: f64,
}

impl Default for OfflineParams {
    /// 31 x 21 = 651 tentacles over 60 x 45 degrees, 10 m long with 30
    /// samples, on a 0.2 m grid that encloses the whole bank.
    fn default() -> Self {
        Self {
            voxel_dim: 0.2,
            grid_counts: [112, 64, 50],
            n_yaw: 31,
            n_pitch: 21,
            samples_per_tentacle: 30,
            tentacle_length: 10.0,
            yaw_coverage: 60f64.to_radians(),
            pitch_coverage: 45f64.to_radians(),
            tau_priority: 0.4,
            tau_support: 1.0,
            beta_max: 1.0,
            alpha_beta: 10.0,
        }
    }
}

impl OfflineParams {
    pub fn tentacle_count(&self) -> usize {
        self.n_yaw * self.n_pitch
    }

    pub fn voxel_count(&self) -> usize {
        self.grid_counts.iter().product()
    }
}

/// Parameters that may be swapped between navigation cycles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OnlineParams {
    pub alpha_crash: f64,
    pub lambda_clear: f64,
    pub lambda_clut: f64,
    pub lambda_close: f64,
    pub lambda_smo: f64,
    /// A sample is flagged once its occupied-priority count exceeds this.
    pub tau_d_err: u32,
    /// Number of sensor scans kept in the history ring.
    pub history_depth: usize,
    /// Zero-based sample index used by goal closeness and smoothness.
    /// `None` selects the last sample.
    pub designated_sample: Option<usize>,
    pub goal_tolerance: f64,
    /// Navigation cycle period in seconds.
    pub cycle_period: f64,
}

impl Default for OnlineParams {
    fn default() -> Self {
        Self {
            alpha_crash: 3.0,
            lambda_clear: 0.4,
            lambda_clut: 1.5,
            lambda_close: 1.0,
            lambda_smo: 0.15,
            tau_d_err: 0,
            history_depth: 5,
            designated_sample: None,
            goal_tolerance: 0.5,
            cycle_period: 0.1,
        }
    }
}

impl OnlineParams {
    /// Minimum clear length for a tentacle to be drivable this cycle.
    pub fn crash_distance(&self, tentacle_length: f64) -> f64 {
        tentacle_length / self.alpha_crash
    }

    pub fn designated_index(&self, samples: usize) -> usize {
        self.designated_sample.unwrap_or(samples - 1)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub robot: RobotParams,
    pub offline: OfflineParams,
    #[serde(default)]
    pub online: OnlineParams,
}

impl Config {
    pub fn from_json(bytes: &[u8]) -> Result<Self, ConfigError> {
        let config: Config = serde_json::from_slice(bytes)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.robot.validate()?;
        self.offline.validate()?;
        self.online.validate()?;

        let min_range = self
            .robot
            .sensor_range
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if self.offline.tentacle_length > min_range {
            return Err(invalid(format!(
                "tentacle_length ({}) must not exceed the minimum sensor range ({min_range})",
                self.offline.tentacle_length
            )));
        }
        if let Some(idx) = self.online.designated_sample {
            if idx >= self.offline.samples_per_tentacle {
                return Err(invalid(format!(
                    "designated_sample {idx} out of range for {} samples",
                    self.offline.samples_per_tentacle
                )));
            }
        }
        Ok(())
    }
}

/// Reads and validates a JSON configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<Config, ConfigError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Config::from_json(&bytes)
}

fn positive(name: &str, value: f64) -> Result<(), ConfigError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be strictly positive, got {value}")))
    }
}

fn non_negative(name: &str, value: f64) -> Result<(), ConfigError> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be non-negative, got {value}")))
    }
}

impl RobotParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        positive("robot.width", self.width)?;
        positive("robot.length", self.length)?;
        positive("robot.height", self.height)?;
        positive("robot.v_lat", self.v_lat)?;
        positive("robot.omega_yaw", self.omega_yaw)?;
        positive("robot.omega_pitch", self.omega_pitch)?;
        positive("robot.omega_roll", self.omega_roll)?;
        positive("robot.sensor_resolution", self.sensor_resolution)?;
        for (axis, range) in ["x", "y", "z"].iter().zip(self.sensor_range) {
            positive(&format!("robot.sensor_range.{axis}"), range)?;
        }
        Ok(())
    }
}

impl OfflineParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.tau_support <= self.tau_priority {
            return Err(invalid("tau_S must exceed tau_P"));
        }
        positive("offline.tau_priority", self.tau_priority)?;
        positive("offline.voxel_dim", self.voxel_dim)?;
        if self.grid_counts.contains(&0) {
            return Err(invalid("offline.grid_counts must all be positive"));
        }
        if self.voxel_count() > u32::MAX as usize {
            return Err(invalid("grid has more voxels than a 32-bit index can address"));
        }
        if self.n_yaw == 0 || self.n_pitch == 0 {
            return Err(invalid("offline.n_yaw and offline.n_pitch must be positive"));
        }
        if self.samples_per_tentacle < 2 {
            return Err(invalid("offline.samples_per_tentacle must be at least 2"));
        }
        if self.samples_per_tentacle > u16::MAX as usize {
            return Err(invalid("offline.samples_per_tentacle exceeds 65535"));
        }
        positive("offline.tentacle_length", self.tentacle_length)?;
        non_negative("offline.yaw_coverage", self.yaw_coverage)?;
        non_negative("offline.pitch_coverage", self.pitch_coverage)?;
        if self.yaw_coverage > 2.0 * PI {
            return Err(invalid("offline.yaw_coverage must not exceed a full turn"));
        }
        if self.pitch_coverage > PI {
            return Err(invalid("offline.pitch_coverage must not exceed pi"));
        }
        positive("offline.beta_max", self.beta_max)?;
        positive("offline.alpha_beta", self.alpha_beta)?;
        // support weight at tau_P is beta_max / (alpha_beta * tau_P)
        if self.alpha_beta * self.tau_priority <= 1.0 {
            return Err(invalid(
                "alpha_beta * tau_P must exceed 1 so support weights stay below beta_max",
            ));
        }
        Ok(())
    }
}

impl OnlineParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.alpha_crash > 1.0 && self.alpha_crash.is_finite()) {
            return Err(invalid(format!(
                "online.alpha_crash must exceed 1, got {}",
                self.alpha_crash
            )));
        }
        let lambdas = [
            ("online.lambda_clear", self.lambda_clear),
            ("online.lambda_clut", self.lambda_clut),
            ("online.lambda_close", self.lambda_close),
            ("online.lambda_smo", self.lambda_smo),
        ];
        for (name, value) in lambdas {
            non_negative(name, value)?;
        }
        if lambdas.iter().all(|(_, v)| *v == 0.0) {
            return Err(invalid("at least one lambda weight must be positive"));
        }
        if self.history_depth == 0 {
            return Err(invalid("online.history_depth must be at least 1"));
        }
        positive("online.goal_tolerance", self.goal_tolerance)?;
        positive("online.cycle_period", self.cycle_period)?;
        Ok(())
    }
}
