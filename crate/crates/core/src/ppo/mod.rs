//! Proximal policy optimization: vectorized rollouts, GAE, the clipped
//! objective and the minibatch update loop.

pub mod agent;
pub mod gae;
pub mod hyperparams;
pub mod loss;
pub mod rollout;
pub mod update;

pub use agent::Agent;
pub use gae::{compute_gae, Advantage};
pub use hyperparams::{lr_schedule, Hyperparams};
pub use loss::{clipped_policy_loss, total_ppo_loss, value_loss};
pub use rollout::{collect_rollouts, EpisodeRecord, RolloutBuffer, RolloutStats, VecEnv};
pub use update::{build_loss, normalize, train_update, LossNodes, Minibatch, UpdateStats};
