use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::params::ParameterSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Global L2 clipping threshold applied before each step.
    pub max_grad_norm: Option<f64>,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-5,
            max_grad_norm: None,
        }
    }
}

/// First and second moment buffers for every parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    config: AdamConfig,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
    t: u64,
}

/// What one optimizer step did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    /// Gradient norm before clipping.
    pub grad_norm: f64,
    pub clipped: bool,
}

impl AdamState {
    pub fn new(params: &ParameterSet, config: AdamConfig) -> Self {
        let zeros = |p: &crate::nn::params::Param| vec![0.0; p.len()];
        Self {
            config,
            first: params.iter().map(zeros).collect(),
            second: params.iter().map(zeros).collect(),
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn config(&self) -> &AdamConfig {
        &self.config
    }

    /// Clips the global gradient norm, applies one bias-corrected Adam step
    /// with learning rate `lr`, then zeroes the gradients.
    pub fn step(&mut self, params: &mut ParameterSet, lr: f64) -> Result<StepReport> {
        if params.len() != self.first.len() {
            return Err(Error::Usage(format!(
                "optimizer built for {} tensors, got {}",
                self.first.len(),
                params.len()
            )));
        }
        for p in params.iter() {
            if let Some(i) = p.grad.iter().position(|g| !g.is_finite()) {
                return Err(Error::Numeric(format!(
                    "gradient of `{}` is {} at index {i}",
                    p.name, p.grad[i]
                )));
            }
        }

        let grad_norm = params.grad_norm();
        let mut clipped = false;
        if let Some(max_norm) = self.config.max_grad_norm {
            let coef = max_norm / (grad_norm + 1e-6);
            if coef < 1.0 {
                clipped = true;
                for p in params.iter_mut() {
                    p.grad.iter_mut().for_each(|g| *g *= coef);
                }
            }
        }

        self.t += 1;
        let AdamConfig { beta1, beta2, eps, .. } = self.config;
        let bc1 = 1.0 - beta1.powi(self.t as i32);
        let bc2 = 1.0 - beta2.powi(self.t as i32);
        for ((p, m), v) in params.iter_mut().zip(&mut self.first).zip(&mut self.second) {
            for i in 0..p.value.len() {
                let g = p.grad[i];
                m[i] = beta1 * m[i] + (1.0 - beta1) * g;
                v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                p.value[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        params.zero_grad();
        params.check_finite()?;
        Ok(StepReport { grad_norm, clipped })
    }
}
