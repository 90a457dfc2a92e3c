//! Fixtures shared by the benchmarks.

use hppo::env::Task;
use hppo::ppo::{Agent, VecEnv};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Vectorized environments plus a freshly initialized agent sized for them.
pub fn setup(task: Task, num_envs: usize) -> (VecEnv, Agent) {
    let venv = VecEnv::new(&task.env_config(), num_envs, 0).expect("env config");
    let agent = Agent::new(venv.obs_len(), venv.num_actions(), 0.5, &mut rng(0)).expect("agent");
    (venv, agent)
}

pub fn random_obs(len: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..len).map(|_| r.random_range(-1.0..1.0)).collect()
}
