use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GuidanceMode {
    None,
    Product,
    #[serde(rename = "symloss")]
    SymLoss,
    Rm,
}

impl GuidanceMode {
    pub const ALL: [GuidanceMode; 4] = [
        GuidanceMode::Product,
        GuidanceMode::SymLoss,
        GuidanceMode::None,
        GuidanceMode::Rm,
    ];

    pub fn id(self) -> &'static str {
        match self {
            GuidanceMode::None => "none",
            GuidanceMode::Product => "product",
            GuidanceMode::SymLoss => "symloss",
            GuidanceMode::Rm => "rm",
        }
    }

    /// Name used in curve tables and plot legends.
    pub fn method_name(self) -> &'static str {
        match self {
            GuidanceMode::None => "PPO",
            GuidanceMode::Product => "H-PPO-Product",
            GuidanceMode::SymLoss => "H-PPO-SymLoss",
            GuidanceMode::Rm => "PPO-RM",
        }
    }

    /// Fixed plot colour per method.
    pub fn color(self) -> &'static str {
        match self {
            GuidanceMode::Product => "#0173B2",
            GuidanceMode::SymLoss => "#CC78BC",
            GuidanceMode::None => "#ED9C0E",
            GuidanceMode::Rm => "#029E73",
        }
    }

    pub fn from_method_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.method_name() == name)
    }
}

impl fmt::Display for GuidanceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for GuidanceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" | "ppo" => Ok(GuidanceMode::None),
            "product" => Ok(GuidanceMode::Product),
            "symloss" => Ok(GuidanceMode::SymLoss),
            "rm" => Ok(GuidanceMode::Rm),
            _ => Err(Error::Config(format!(
                "unknown guidance mode `{s}` (expected none, product, symloss or rm)"
            ))),
        }
    }
}

fn default_time_scale() -> f64 {
    2.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProductConfig {
    /// Confidence in the symbolic policy.
    pub lambda: f64,
    pub epsilon_i: f64,
    pub epsilon_r: f64,
    pub epsilon_f: f64,
    /// Multiplies training progress before the decay rate applies.
    pub time_scale: f64,
}

impl Default for ProductConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            epsilon_i: 1.0,
            epsilon_r: 0.4,
            epsilon_f: 0.0,
            time_scale: default_time_scale(),
        }
    }
}

impl ProductConfig {
    /// Schedule pinned at zero: sampling follows `π_θ` exactly.
    pub fn disabled() -> Self {
        Self {
            epsilon_i: 0.0,
            epsilon_r: 0.0,
            epsilon_f: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::Config(format!("product.lambda {} not in (0, 1]", self.lambda)));
        }
        if !(self.epsilon_f >= 0.0 && self.epsilon_i >= self.epsilon_f) {
            return Err(Error::Config(format!(
                "product schedule needs epsilon_i ({}) >= epsilon_f ({}) >= 0",
                self.epsilon_i, self.epsilon_f
            )));
        }
        if !(self.epsilon_r >= 0.0 && self.time_scale >= 0.0) {
            return Err(Error::Config("product.epsilon_r and time_scale must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ThetaMode {
    Constant(f64),
    Schedule { theta_i: f64, theta_r: f64, theta_f: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SymLossConfig {
    /// Reference-policy weight of entailed actions, strictly inside (0, 1).
    pub eta: f64,
    pub theta: ThetaMode,
    pub time_scale: f64,
}

impl Default for SymLossConfig {
    fn default() -> Self {
        Self {
            eta: 0.9,
            theta: ThetaMode::Schedule {
                theta_i: 1.0,
                theta_r: 0.4,
                theta_f: 0.0,
            },
            time_scale: default_time_scale(),
        }
    }
}

impl SymLossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::Config(format!(
                "symloss.eta {} must lie strictly between 0 and 1",
                self.eta
            )));
        }
        match self.theta {
            ThetaMode::Constant(t) if !(t >= 0.0 && t.is_finite()) => {
                Err(Error::Config(format!("symloss constant theta {t} must be non-negative")))
            }
            ThetaMode::Schedule {
                theta_i,
                theta_r,
                theta_f,
            } if !(theta_f >= 0.0 && theta_i >= theta_f && theta_r >= 0.0) => Err(Error::Config(format!(
                "symloss schedule needs theta_i ({theta_i}) >= theta_f ({theta_f}) >= 0 and theta_r >= 0"
            ))),
            _ if self.time_scale < 0.0 => Err(Error::Config("symloss.time_scale must be non-negative".into())),
            _ => Ok(()),
        }
    }
}

fn default_failure_label() -> Option<String> {
    Some("hit_plant".into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RMShapingConfig {
    /// Added for entailed actions, subtracted otherwise.
    pub action_bonus: f64,
    /// Multiplies the reward-machine progress signal (−1, 0, +1).
    pub progress_bonus: f64,
    /// Event that moves the machine into an absorbing failure state, when
    /// the environment emits it.
    #[serde(default = "default_failure_label")]
    pub failure_label: Option<String>,
}

impl Default for RMShapingConfig {
    fn default() -> Self {
        Self {
            action_bonus: 0.01,
            progress_bonus: 0.1,
            failure_label: default_failure_label(),
        }
    }
}

impl RMShapingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.action_bonus >= 0.0 && self.progress_bonus >= 0.0) {
            return Err(Error::Config("rm shaping magnitudes must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuidanceConfig {
    pub mode: GuidanceMode,
    #[serde(default)]
    pub product: ProductConfig,
    #[serde(default)]
    pub symloss: SymLossConfig,
    #[serde(default)]
    pub rm: RMShapingConfig,
}

impl Default for GuidanceConfig {
    fn default() -> Self {
        Self::new(GuidanceMode::None)
    }
}

impl GuidanceConfig {
    pub fn new(mode: GuidanceMode) -> Self {
        Self {
            mode,
            product: ProductConfig::default(),
            symloss: SymLossConfig::default(),
            rm: RMShapingConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.product.validate()?;
        self.symloss.validate()?;
        self.rm.validate()
    }
}
