//! Proximal policy optimization with symbolic action guidance.
//!
//! The crate is organised bottom-up:
//!
//! - [`nn`]: tape-based reverse-mode autodiff, MLPs, categorical
//!   distributions and Adam.
//! - [`env`]: DoorKey, OfficeWorld and WaterWorld with a shared
//!   [`env::Environment`] interface and state grounding.
//! - [`logic`]: Horn-clause rules with negation as failure, entailment,
//!   navigation directives, indicator masks and reward machines.
//! - [`ppo`]: rollout collection, GAE, clipped losses and the update loop.
//! - [`guidance`]: sampling-time reweighting, the symbolic auxiliary loss
//!   and reward-machine shaping.
//! - [`harness`]: experiment configs, multi-seed runs, metrics,
//!   aggregation, plotting and ablation grids.

pub mod env;
pub mod error;
pub mod guidance;
pub mod harness;
pub mod logic;
pub mod nn;
pub mod ppo;

pub use error::{Error, Result};
pub use guidance::GuidanceMode;
pub use harness::config::ExperimentConfig;
pub use ppo::Hyperparams;
