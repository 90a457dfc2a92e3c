use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::kernels;

/// A categorical distribution over action indices with cached
/// probabilities, log-probabilities and entropy (in nats).
#[derive(Debug, Clone, PartialEq)]
pub struct Categorical {
    logits: Vec<f64>,
    probs: Vec<f64>,
    log_probs: Vec<f64>,
    entropy: f64,
}

impl Categorical {
    /// Numerically stable softmax of `logits`.
    pub fn from_logits(logits: &[f64]) -> Result<Self> {
        if logits.is_empty() {
            return Err(Error::Config("categorical over zero actions".into()));
        }
        if let Some(i) = logits.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("logit {i} is {}", logits[i])));
        }
        let mut log_probs = logits.to_vec();
        kernels::log_softmax_in_place(&mut log_probs);
        let probs: Vec<f64> = log_probs.iter().map(|l| l.exp()).collect();
        let entropy = entropy(&probs, &log_probs);
        Ok(Self {
            logits: logits.to_vec(),
            probs,
            log_probs,
            entropy,
        })
    }

    /// Builds a distribution from non-negative weights, normalising them.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Config("categorical over zero actions".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Numeric(format!("invalid weights {weights:?}")));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::Numeric("weights sum to zero".into()));
        }
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let log_probs: Vec<f64> = probs.iter().map(|p| p.ln()).collect();
        let entropy = entropy(&probs, &log_probs);
        Ok(Self {
            logits: log_probs.clone(),
            probs,
            log_probs,
            entropy,
        })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    pub fn log_prob(&self, action: usize) -> f64 {
        self.log_probs[action]
    }

    pub fn entropy(&self) -> f64 {
        self.entropy
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.probs.iter().enumerate() {
            if *p > self.probs[best] {
                best = i;
            }
        }
        best
    }

    /// Inverse-CDF sampling from one uniform draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (i, p) in self.probs.iter().enumerate() {
            if *p > 0.0 {
                last_positive = i;
            }
            acc += p;
            if u < acc && *p > 0.0 {
                return i;
            }
        }
        // Rounding left the cumulative sum just below u.
        last_positive
    }
}

fn entropy(probs: &[f64], log_probs: &[f64]) -> f64 {
    let h: f64 = probs
        .iter()
        .zip(log_probs)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, l)| -p * l)
        .sum();
    h.clamp(0.0, (probs.len() as f64).ln())
}
