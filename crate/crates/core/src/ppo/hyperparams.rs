use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// PPO settings. The defaults are the values shared by every task; only
/// `total_timesteps`, `num_envs`, `batch_size` and `minibatch_size` change
/// between tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hyperparams {
    pub total_timesteps: u64,
    pub num_envs: usize,
    pub batch_size: usize,
    pub minibatch_size: usize,
    pub learning_rate: f64,
    pub num_steps: usize,
    pub anneal_lr: bool,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub num_minibatches: usize,
    pub update_epochs: usize,
    pub norm_adv: bool,
    pub clip_coef: f64,
    pub clip_vloss: bool,
    pub ent_coef: f64,
    pub vf_coef: f64,
    pub max_grad_norm: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self::sized(5_000_000, 4)
    }
}

impl Hyperparams {
    /// Shared defaults with the given budget and environment count; the
    /// batch sizes follow from `num_steps = 128` and 4 minibatches.
    pub fn sized(total_timesteps: u64, num_envs: usize) -> Self {
        let num_steps = 128;
        let num_minibatches = 4;
        Self {
            total_timesteps,
            num_envs,
            batch_size: num_envs * num_steps,
            minibatch_size: num_envs * num_steps / num_minibatches,
            learning_rate: 3e-4,
            num_steps,
            anneal_lr: true,
            gamma: 0.99,
            gae_lambda: 0.95,
            num_minibatches,
            update_epochs: 4,
            norm_adv: true,
            clip_coef: 0.2,
            clip_vloss: true,
            ent_coef: 0.01,
            vf_coef: 0.5,
            max_grad_norm: 0.5,
        }
    }

    /// Re-derives the batch sizes after `num_envs` or `num_steps` changed.
    pub fn with_num_envs(mut self, num_envs: usize) -> Self {
        self.num_envs = num_envs;
        self.batch_size = num_envs * self.num_steps;
        self.minibatch_size = self.batch_size / self.num_minibatches.max(1);
        self
    }

    /// Number of collect-then-update iterations.
    pub fn num_iterations(&self) -> u64 {
        self.total_timesteps / self.batch_size as u64
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.num_envs == 0 || self.num_steps == 0 || self.num_minibatches == 0 || self.update_epochs == 0 {
            return fail("num_envs, num_steps, num_minibatches and update_epochs must be positive".into());
        }
        if self.batch_size != self.num_envs * self.num_steps {
            return fail(format!(
                "batch_size {} != num_envs {} * num_steps {}",
                self.batch_size, self.num_envs, self.num_steps
            ));
        }
        if self.batch_size % self.num_minibatches != 0 || self.minibatch_size * self.num_minibatches != self.batch_size {
            return fail(format!(
                "minibatch_size {} * num_minibatches {} must equal batch_size {}",
                self.minibatch_size, self.num_minibatches, self.batch_size
            ));
        }
        if self.total_timesteps < self.batch_size as u64 {
            return fail(format!(
                "total_timesteps {} is smaller than one batch ({})",
                self.total_timesteps, self.batch_size
            ));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return fail(format!("gamma {} not in [0, 1]", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return fail(format!("gae_lambda {} not in [0, 1]", self.gae_lambda));
        }
        if !(self.clip_coef > 0.0) {
            return fail(format!("clip_coef {} must be positive", self.clip_coef));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail(format!("learning_rate {} must be positive", self.learning_rate));
        }
        for (name, v) in [
            ("ent_coef", self.ent_coef),
            ("vf_coef", self.vf_coef),
            ("max_grad_norm", self.max_grad_norm),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return fail(format!("{name} {v} must be finite and non-negative"));
            }
        }
        Ok(())
    }
}

/// Linear decay to zero over the run: `lr₀ · (1 − step / total)`.
pub fn lr_schedule(global_step: u64, total_timesteps: u64, lr0: f64) -> f64 {
    let frac = (global_step as f64 / total_timesteps.max(1) as f64).clamp(0.0, 1.0);
    lr0 * (1.0 - frac)
}
