use crate::error::{Error, Result};

/// Advantages and value targets for one environment's segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Advantage {
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

/// Generalized advantage estimation over one environment's trajectory
/// segment, computed backwards.
///
/// `next_values[t]` is the value of the state reached by step `t`: the
/// next state's value mid-episode, `V(final observation)` for a time-limit
/// truncation and `0` for a true terminal. `ends[t]` marks steps that
/// finished an episode; the accumulation does not cross them.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    next_values: &[f64],
    ends: &[bool],
    gamma: f64,
    lambda: f64,
) -> Result<Advantage> {
    let n = rewards.len();
    if values.len() != n || next_values.len() != n || ends.len() != n {
        return Err(Error::Config(format!(
            "gae inputs disagree in length: rewards {n}, values {}, next_values {}, ends {}",
            values.len(),
            next_values.len(),
            ends.len()
        )));
    }
    let mut advantages = vec![0.0; n];
    let mut carry = 0.0;
    for t in (0..n).rev() {
        let delta = rewards[t] + gamma * next_values[t] - values[t];
        let keep = if ends[t] { 0.0 } else { 1.0 };
        carry = delta + gamma * lambda * keep * carry;
        advantages[t] = carry;
    }
    let returns = advantages.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok(Advantage { advantages, returns })
}
