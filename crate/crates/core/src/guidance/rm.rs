use crate::guidance::config::RMShapingConfig;

/// `(training reward, reported reward)`. Only the first carries shaping:
/// `base ± action_bonus + progress_bonus·delta`.
pub fn rm_shaped_reward(base: f64, entailed: bool, delta: i32, cfg: &RMShapingConfig) -> (f64, f64) {
    let action = if entailed { cfg.action_bonus } else { -cfg.action_bonus };
    (base + action + cfg.progress_bonus * f64::from(delta), base)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shaping_examples() {
        let cfg = RMShapingConfig::default();
        assert_eq!(rm_shaped_reward(0.0, true, 0, &cfg), (0.01, 0.0));
        let (train, report) = rm_shaped_reward(0.91, false, 1, &cfg);
        assert!((train - 1.0).abs() < 1e-12);
        assert_eq!(report, 0.91);
        let off = RMShapingConfig {
            action_bonus: 0.0,
            progress_bonus: 0.0,
            ..cfg
        };
        assert_eq!(rm_shaped_reward(0.4, false, -1, &off), (0.4, 0.4));
    }
}
