use crate::error::Result;
use crate::guidance::config::{SymLossConfig, ThetaMode};
use crate::guidance::linear_schedule;
use crate::logic::IndicatorMask;
use crate::nn::Categorical;
use crate::ppo::loss::clipped_policy_loss;

/// Weight of the symbolic term at training progress `progress ∈ [0, 1]`.
pub fn theta_at(progress: f64, cfg: &SymLossConfig) -> f64 {
    match cfg.theta {
        ThetaMode::Constant(t) => t,
        ThetaMode::Schedule {
            theta_i,
            theta_r,
            theta_f,
        } => linear_schedule(progress, theta_i, theta_r, theta_f, cfg.time_scale),
    }
}

/// Reference policy: weight `η` for entailed actions and `1 − η` for the
/// rest, normalised. Every action keeps positive mass for `η ∈ (0, 1)`.
pub fn reference_distribution(mask: &IndicatorMask, eta: f64) -> Result<Categorical> {
    let weights: Vec<f64> = mask.bits().iter().map(|&m| if m { eta } else { 1.0 - eta }).collect();
    Categorical::from_weights(&weights)
}

/// Clipped surrogate with ratio `π_θ / π_ref`, averaged over the batch.
pub fn symbolic_loss(logp_new: &[f64], logp_ref: &[f64], adv: &[f64], clip: f64) -> f64 {
    clipped_policy_loss(logp_new, logp_ref, adv, clip)
}

/// `L_PPO − Θ·L_sym`.
pub fn combined_loss(ppo_loss: f64, sym_loss: f64, theta: f64) -> f64 {
    ppo_loss - theta * sym_loss
}
