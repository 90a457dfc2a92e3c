//! Ways of feeding a symbolic policy into PPO.
//!
//! - Product: sampling-time reweighting of `π_θ` towards entailed actions
//!   with an annealed strength `ε_t`.
//! - SymLoss: an extra clipped surrogate against a mask-derived reference
//!   policy, weighted by `Θ_t`.
//! - RM: reward shaping from action entailment and reward-machine progress.

mod config;
mod product;
mod rm;
mod symloss;

pub use config::{GuidanceConfig, GuidanceMode, ProductConfig, RMShapingConfig, SymLossConfig, ThetaMode};
pub use product::{epsilon_at, reweighted_distribution};
pub use rm::rm_shaped_reward;
pub use symloss::{combined_loss, reference_distribution, symbolic_loss, theta_at};

use crate::env::Environment;
use crate::error::Result;
use crate::logic::{build_reward_machine, indicator_mask, IndicatorMask, RewardMachine, SymbolicPolicy};

/// Linear decay `max(initial − progress·time_scale·rate, floor)`.
pub fn linear_schedule(progress: f64, initial: f64, rate: f64, floor: f64, time_scale: f64) -> f64 {
    (initial - progress * time_scale * rate).max(floor)
}

/// Guidance state for one training run: the configuration, the parsed rule
/// set and, for RM shaping, the task's reward machine.
#[derive(Debug, Clone)]
pub struct Guidance {
    pub config: GuidanceConfig,
    policy: SymbolicPolicy,
    machine: Option<RewardMachine>,
}

impl Guidance {
    pub fn new(config: GuidanceConfig, policy: SymbolicPolicy, env: &dyn Environment) -> Result<Self> {
        config.validate()?;
        let machine = (config.mode == GuidanceMode::Rm).then(|| {
            let rm = build_reward_machine(env.task());
            match &config.rm.failure_label {
                Some(label) if env.label_alphabet().contains(&label.as_str()) => rm.with_failure_sink(label),
                _ => rm,
            }
        });
        Ok(Self {
            config,
            policy,
            machine,
        })
    }

    pub fn mode(&self) -> GuidanceMode {
        self.config.mode
    }

    pub fn policy(&self) -> &SymbolicPolicy {
        &self.policy
    }

    pub fn machine(&self) -> Option<&RewardMachine> {
        self.machine.as_ref()
    }

    /// Whether rollouts need the indicator mask at every step.
    pub fn needs_mask(&self) -> bool {
        self.config.mode != GuidanceMode::None
    }

    pub fn mask(&self, env: &dyn Environment) -> Result<IndicatorMask> {
        if !self.needs_mask() {
            return Ok(IndicatorMask::none(env.num_actions()));
        }
        indicator_mask(&self.policy, &env.ground_state(), env)
    }

    /// `ε_t` at training progress `progress ∈ [0, 1]`; zero outside Product mode.
    pub fn epsilon(&self, progress: f64) -> f64 {
        match self.config.mode {
            GuidanceMode::Product => epsilon_at(progress, &self.config.product),
            _ => 0.0,
        }
    }

    /// `Θ_t` at training progress; zero outside SymLoss mode.
    pub fn theta(&self, progress: f64) -> f64 {
        match self.config.mode {
            GuidanceMode::SymLoss => theta_at(progress, &self.config.symloss),
            _ => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_hits_floor_at_end_of_training() {
        assert_eq!(linear_schedule(0.0, 1.0, 0.4, 0.0, 2.5), 1.0);
        assert!(linear_schedule(1.0, 1.0, 0.4, 0.0, 2.5).abs() < 1e-15);
        assert_eq!(linear_schedule(0.7, 0.3, 0.4, 0.3, 2.5), 0.3);
    }
}
