use crate::error::Result;
use crate::guidance::config::ProductConfig;
use crate::guidance::linear_schedule;
use crate::logic::IndicatorMask;
use crate::nn::Categorical;

/// Reweighting strength at training progress `progress ∈ [0, 1]`.
pub fn epsilon_at(progress: f64, cfg: &ProductConfig) -> f64 {
    linear_schedule(progress, cfg.epsilon_i, cfg.epsilon_r, cfg.epsilon_f, cfg.time_scale)
}

/// `π̃(a) ∝ π(a)·m(a)` with `m(a) = 1 + λ·ε` for entailed actions and `1`
/// otherwise.
///
/// When `λ·ε = 0` or the mask is uniform the multipliers cancel and the
/// input is returned unchanged, bit for bit.
pub fn reweighted_distribution(dist: &Categorical, mask: &IndicatorMask, lambda: f64, epsilon: f64) -> Result<Categorical> {
    let boost = lambda * epsilon;
    if boost == 0.0 || mask.is_uniform() {
        return Ok(dist.clone());
    }
    let log_boost = boost.ln_1p();
    let logits: Vec<f64> = dist
        .log_probs()
        .iter()
        .zip(mask.bits())
        .map(|(l, &m)| if m { l + log_boost } else { *l })
        .collect();
    Categorical::from_logits(&logits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(bits: &[bool]) -> IndicatorMask {
        IndicatorMask::new(bits.to_vec())
    }

    #[test]
    fn uniform_five_actions_one_entailed() {
        let d = Categorical::from_logits(&[0.0; 5]).unwrap();
        let r = reweighted_distribution(&d, &mask(&[true, false, false, false, false]), 1.0, 1.0).unwrap();
        assert!((r.probs()[0] - 1.0 / 3.0).abs() < 1e-15);
        for p in &r.probs()[1..] {
            assert!((p - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_epsilon_or_uniform_mask_is_identity() {
        let d = Categorical::from_logits(&[0.3, -1.0, 2.0]).unwrap();
        let m = mask(&[true, false, true]);
        assert_eq!(reweighted_distribution(&d, &m, 1.0, 0.0).unwrap(), d);
        assert_eq!(reweighted_distribution(&d, &mask(&[true; 3]), 1.0, 1.0).unwrap(), d);
        assert_eq!(reweighted_distribution(&d, &mask(&[false; 3]), 1.0, 1.0).unwrap(), d);
    }

    #[test]
    fn schedule_examples() {
        let cfg = ProductConfig::default();
        assert_eq!(epsilon_at(0.0, &cfg), 1.0);
        assert!(epsilon_at(1.0, &cfg).abs() < 1e-15);
        let flat = ProductConfig {
            epsilon_i: 0.2,
            epsilon_f: 0.2,
            ..cfg
        };
        for p in [0.0, 0.3, 1.0] {
            assert_eq!(epsilon_at(p, &flat), 0.2);
        }
    }
}
