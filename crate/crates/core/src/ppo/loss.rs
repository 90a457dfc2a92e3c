//! Scalar reference forms of the PPO objective terms. The update loop
//! builds the same expressions on the autodiff tape; these plain versions
//! serve reporting and tests.

/// Mean over the batch of `min(ρ·Â, clip(ρ, 1−ε, 1+ε)·Â)` with
/// `ρ = exp(logp_new − logp_old)`. This is the objective to maximize.
pub fn clipped_policy_loss(logp_new: &[f64], logp_old: &[f64], adv: &[f64], clip: f64) -> f64 {
    let n = logp_new.len().max(1) as f64;
    logp_new
        .iter()
        .zip(logp_old)
        .zip(adv)
        .map(|((new, old), a)| clipped_term((new - old).exp(), *a, clip))
        .sum::<f64>()
        / n
}

pub fn clipped_term(ratio: f64, adv: f64, clip: f64) -> f64 {
    (ratio * adv).min(ratio.clamp(1.0 - clip, 1.0 + clip) * adv)
}

/// Half mean squared error, optionally taking the larger of the plain error
/// and the error with the prediction clipped to `old ± clip`.
pub fn value_loss(values_new: &[f64], values_old: &[f64], returns: &[f64], clip: f64, clip_vloss: bool) -> f64 {
    let n = values_new.len().max(1) as f64;
    let total: f64 = values_new
        .iter()
        .zip(values_old)
        .zip(returns)
        .map(|((v, old), r)| {
            let plain = (v - r).powi(2);
            if clip_vloss {
                let clipped = old + (v - old).clamp(-clip, clip);
                plain.max((clipped - r).powi(2))
            } else {
                plain
            }
        })
        .sum();
    0.5 * total / n
}

/// `−L_clip + c₁·L_vf − c₂·H`, the quantity minimized.
pub fn total_ppo_loss(policy_term: f64, value_term: f64, entropy: f64, vf_coef: f64, ent_coef: f64) -> f64 {
    -policy_term + vf_coef * value_term - ent_coef * entropy
}
