//! Benchmark environments behind one [`Environment`] interface.
//!
//! Every domain produces a fixed-length observation vector, a sparse
//! success reward scaled by the remaining step budget, a set of event labels
//! per step (the reward-machine alphabet), a grounded [`FactBase`] for the
//! rule engine, and the navigation view that directive rules resolve
//! against.

pub mod doorkey;
pub mod officeworld;
pub mod waterworld;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logic::{FactBase, GroundAtom, Navigation, Vocabulary};

pub use doorkey::{DoorKey, DoorKeyConfig};
pub use officeworld::{OfficeTask, OfficeWorld, OfficeWorldConfig};
pub use waterworld::{WaterTask, WaterWorld, WaterWorldConfig};

/// `1 − 0.9 · step_count / max_steps` on success, zero otherwise.
pub fn sparse_reward(step_count: usize, max_steps: usize, success: bool) -> f64 {
    if success {
        1.0 - 0.9 * (step_count as f64 / max_steps as f64)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    DoorKey,
    OfficeWorld,
    WaterWorld,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::DoorKey => "doorkey",
            Domain::OfficeWorld => "officeworld",
            Domain::WaterWorld => "waterworld",
        })
    }
}

/// One benchmark task: a domain plus its variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Task {
    DoorKey { size: usize, keys: usize },
    DeliverCoffee,
    DeliverCoffeeAndMail,
    PatrolAB,
    PatrolABC,
    RedGreen,
    RedGreenBlueCyan,
    RedGreenBlueCyanMagentaYellow,
}

impl Task {
    /// Every task with a bundled configuration.
    pub fn all() -> Vec<Task> {
        let mut out = Vec::new();
        for size in [8, 16] {
            for keys in [1, 2, 4] {
                out.push(Task::DoorKey { size, keys });
            }
        }
        out.extend([
            Task::DeliverCoffee,
            Task::DeliverCoffeeAndMail,
            Task::PatrolAB,
            Task::PatrolABC,
            Task::RedGreen,
            Task::RedGreenBlueCyan,
            Task::RedGreenBlueCyanMagentaYellow,
        ]);
        out
    }

    pub fn domain(self) -> Domain {
        match self {
            Task::DoorKey { .. } => Domain::DoorKey,
            Task::DeliverCoffee | Task::DeliverCoffeeAndMail | Task::PatrolAB | Task::PatrolABC => {
                Domain::OfficeWorld
            }
            _ => Domain::WaterWorld,
        }
    }

    pub fn id(self) -> String {
        match self {
            Task::DoorKey { size, keys } => format!("doorkey_{size}x{size}_k{keys}"),
            Task::DeliverCoffee => "deliver_coffee".into(),
            Task::DeliverCoffeeAndMail => "deliver_coffee_and_mail".into(),
            Task::PatrolAB => "patrol_ab".into(),
            Task::PatrolABC => "patrol_abc".into(),
            Task::RedGreen => "rg".into(),
            Task::RedGreenBlueCyan => "rg_bc".into(),
            Task::RedGreenBlueCyanMagentaYellow => "rg_bc_my".into(),
        }
    }

    /// Default environment configuration for the task.
    pub fn env_config(self) -> EnvConfig {
        match self {
            Task::DoorKey { size, keys } => EnvConfig::DoorKey(DoorKeyConfig::new(size, keys)),
            Task::DeliverCoffee => EnvConfig::OfficeWorld(OfficeWorldConfig::new(OfficeTask::DeliverCoffee)),
            Task::DeliverCoffeeAndMail => {
                EnvConfig::OfficeWorld(OfficeWorldConfig::new(OfficeTask::DeliverCoffeeAndMail))
            }
            Task::PatrolAB => EnvConfig::OfficeWorld(OfficeWorldConfig::new(OfficeTask::PatrolAB)),
            Task::PatrolABC => EnvConfig::OfficeWorld(OfficeWorldConfig::new(OfficeTask::PatrolABC)),
            Task::RedGreen => EnvConfig::WaterWorld(WaterWorldConfig::new(WaterTask::Rg)),
            Task::RedGreenBlueCyan => EnvConfig::WaterWorld(WaterWorldConfig::new(WaterTask::RgBc)),
            Task::RedGreenBlueCyanMagentaYellow => {
                EnvConfig::WaterWorld(WaterWorldConfig::new(WaterTask::RgBcMy))
            }
        }
    }

    pub fn vocabulary(self) -> Vocabulary {
        match self.domain() {
            Domain::DoorKey => doorkey::vocabulary(),
            Domain::OfficeWorld => officeworld::vocabulary(),
            Domain::WaterWorld => waterworld::vocabulary(),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Task::all()
            .into_iter()
            .find(|t| t.id() == s)
            .ok_or_else(|| Error::Config(format!("unknown task `{s}`")))
    }
}

/// Environment selection and sizing; serialised with a `domain` tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain")]
pub enum EnvConfig {
    #[serde(rename = "doorkey")]
    DoorKey(DoorKeyConfig),
    #[serde(rename = "officeworld")]
    OfficeWorld(OfficeWorldConfig),
    #[serde(rename = "waterworld")]
    WaterWorld(WaterWorldConfig),
}

impl EnvConfig {
    pub fn domain(&self) -> Domain {
        match self {
            EnvConfig::DoorKey(_) => Domain::DoorKey,
            EnvConfig::OfficeWorld(_) => Domain::OfficeWorld,
            EnvConfig::WaterWorld(_) => Domain::WaterWorld,
        }
    }

    pub fn task(&self) -> Task {
        match self {
            EnvConfig::DoorKey(c) => Task::DoorKey {
                size: c.size,
                keys: c.keys,
            },
            EnvConfig::OfficeWorld(c) => c.task.into(),
            EnvConfig::WaterWorld(c) => c.task.into(),
        }
    }

    /// Episode step budget, falling back to the per-domain default.
    pub fn max_steps(&self) -> usize {
        match self {
            EnvConfig::DoorKey(c) => c.max_steps(),
            EnvConfig::OfficeWorld(c) => c.max_steps(),
            EnvConfig::WaterWorld(c) => c.max_steps(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EnvConfig::DoorKey(c) => c.validate(),
            EnvConfig::OfficeWorld(c) => c.validate(),
            EnvConfig::WaterWorld(c) => c.validate(),
        }
    }

    pub fn build(&self) -> Result<Box<dyn Environment>> {
        self.validate()?;
        Ok(match self {
            EnvConfig::DoorKey(c) => Box::new(DoorKey::new(c.clone())?),
            EnvConfig::OfficeWorld(c) => Box::new(OfficeWorld::new(c.clone())?),
            EnvConfig::WaterWorld(c) => Box::new(WaterWorld::new(c.clone())?),
        })
    }
}

/// Outcome of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Vec<f64>,
    pub reward: f64,
    /// Episode over, by success, failure or time limit.
    pub done: bool,
    /// Ended only because the step budget ran out.
    pub truncated: bool,
    pub success: bool,
    /// Labels that became true this step.
    pub events: Vec<&'static str>,
}

/// How an action index maps to the symbolic action vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionGrounding {
    /// The action corresponds to this grounded action atom.
    Atom(GroundAtom),
    /// A movement action; it is entailed through navigation directives.
    Navigation,
    /// No symbolic counterpart in this state.
    None,
}

/// Uniform episode interface shared by the benchmark domains.
pub trait Environment: Send {
    fn task(&self) -> Task;

    fn num_actions(&self) -> usize;

    fn observation_len(&self) -> usize;

    fn max_steps(&self) -> usize;

    fn step_count(&self) -> usize;

    fn is_done(&self) -> bool;

    /// Starts a new episode whose layout is drawn from `seed`.
    fn reset(&mut self, seed: u64) -> Result<Vec<f64>>;

    fn step(&mut self, action: usize) -> Result<StepResult>;

    fn observe(&self) -> Vec<f64>;

    /// Grounded facts describing the current state.
    fn ground_state(&self) -> FactBase;

    fn action_grounding(&self, action: usize) -> ActionGrounding;

    fn navigation(&self) -> Navigation;

    /// Action predicates treated as navigation directives (`goto`, `touch`).
    fn directive_predicates(&self) -> &'static [&'static str];

    /// Every event label [`StepResult::events`] may contain.
    fn label_alphabet(&self) -> &'static [&'static str];

    fn vocabulary(&self) -> Vocabulary {
        self.task().vocabulary()
    }

    /// Optional ASCII rendering for debugging.
    fn render(&self) -> String {
        String::new()
    }
}

pub(crate) fn check_step(done: bool, action: usize, num_actions: usize) -> Result<()> {
    if done {
        return Err(Error::Usage("step called on a finished episode; reset first".into()));
    }
    if action >= num_actions {
        return Err(Error::Usage(format!(
            "action {action} out of range for {num_actions} actions"
        )));
    }
    Ok(())
}
