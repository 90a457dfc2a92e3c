use rand::Rng;

use crate::error::Result;
use crate::nn::{AdamConfig, AdamState, Mlp, ParameterSet};

pub const HIDDEN: [usize; 2] = [64, 64];

/// Separate policy and value MLPs sharing one parameter set and optimizer.
#[derive(Debug, Clone)]
pub struct Agent {
    pub params: ParameterSet,
    pub policy: Mlp,
    pub value: Mlp,
    pub optimizer: AdamState,
}

impl Agent {
    /// `obs_len → 64 → 64 → num_actions` policy and `obs_len → 64 → 64 → 1`
    /// value network, tanh hidden units, orthogonal init.
    pub fn new<R: Rng + ?Sized>(obs_len: usize, num_actions: usize, max_grad_norm: f64, rng: &mut R) -> Result<Self> {
        let mut params = ParameterSet::new();
        let gain = 2f64.sqrt();
        let policy = Mlp::new(&mut params, "policy", &[obs_len, HIDDEN[0], HIDDEN[1], num_actions], gain, 0.01, rng)?;
        let value = Mlp::new(&mut params, "value", &[obs_len, HIDDEN[0], HIDDEN[1], 1], gain, 1.0, rng)?;
        let optimizer = AdamState::new(
            &params,
            AdamConfig {
                max_grad_norm: Some(max_grad_norm),
                ..AdamConfig::default()
            },
        );
        Ok(Self {
            params,
            policy,
            value,
            optimizer,
        })
    }

    pub fn obs_len(&self) -> usize {
        self.policy.input_width()
    }

    pub fn num_actions(&self) -> usize {
        self.policy.output_width()
    }

    /// Row-major `batch × num_actions` logits.
    pub fn logits(&self, obs: &[f64], batch: usize) -> Result<Vec<f64>> {
        self.policy.infer(&self.params, obs, batch)
    }

    pub fn values(&self, obs: &[f64], batch: usize) -> Result<Vec<f64>> {
        self.value.infer(&self.params, obs, batch)
    }
}
