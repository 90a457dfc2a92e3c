use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::env::{EnvConfig, Task};
use crate::error::{Error, Result};
use crate::guidance::{GuidanceConfig, GuidanceMode};
use crate::logic::{bundled_policy, parse_rules, SymbolicPolicy};
use crate::ppo::Hyperparams;

/// Budget and environment count per task at full scale.
pub fn paper_scale(task: Task) -> (u64, usize) {
    match task {
        Task::DoorKey { size: 8, keys: 1 } => (5_000_000, 4),
        Task::DoorKey { size: 8, keys: 2 } => (25_000_000, 8),
        Task::DoorKey { size: 8, .. } => (50_000_000, 16),
        Task::DoorKey { keys: 1, .. } => (5_000_000, 16),
        Task::DoorKey { keys: 2, .. } => (25_000_000, 32),
        Task::DoorKey { .. } => (100_000_000, 64),
        Task::DeliverCoffee => (1_000_000, 8),
        Task::DeliverCoffeeAndMail => (25_000_000, 32),
        Task::PatrolAB => (5_000_000, 8),
        Task::PatrolABC => (10_000_000, 8),
        Task::RedGreen => (5_000_000, 8),
        Task::RedGreenBlueCyan => (10_000_000, 16),
        Task::RedGreenBlueCyanMagentaYellow => (20_000_000, 32),
    }
}

/// Desk budget: the three smallest tasks get the acceptance budgets, the
/// rest a twentieth of full scale.
pub fn desk_timesteps(task: Task) -> u64 {
    match task {
        Task::DeliverCoffee => 300_000,
        Task::DoorKey { size: 8, keys: 1 } | Task::RedGreen => 500_000,
        t => paper_scale(t).0 / 20,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Paper,
    Desk,
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Preset::Paper),
            "desk" => Ok(Preset::Desk),
            _ => Err(Error::Config(format!("unknown preset `{s}` (expected paper or desk)"))),
        }
    }
}

fn default_window() -> usize {
    100
}

fn default_output() -> PathBuf {
    PathBuf::from("runs")
}

/// Everything needed to launch a multi-seed experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub env: EnvConfig,
    pub hyperparams: Hyperparams,
    #[serde(default)]
    pub guidance: GuidanceConfig,
    /// Rule file; the task's bundled rules when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rules: Option<PathBuf>,
    pub seeds: Vec<u64>,
    /// Spacing of the step grid learning curves are sampled on.
    pub eval_interval: u64,
    /// Rolling window, in episodes, applied before aggregation.
    #[serde(default = "default_window")]
    pub smoothing_window: usize,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn preset(task: Task, mode: GuidanceMode, preset: Preset) -> Self {
        let (total, num_envs) = paper_scale(task);
        let (total, seeds) = match preset {
            Preset::Paper => (total, (1..=5).collect()),
            Preset::Desk => (desk_timesteps(task), (1..=3).collect()),
        };
        Self {
            name: format!("{}_{}", task.id(), mode.id()),
            env: task.env_config(),
            hyperparams: Hyperparams::sized(total, num_envs),
            guidance: GuidanceConfig::new(mode),
            rules: None,
            seeds,
            eval_interval: (total / 100).max(1),
            smoothing_window: default_window(),
            output_dir: default_output(),
        }
    }

    pub fn paper(task: Task, mode: GuidanceMode) -> Self {
        Self::preset(task, mode, Preset::Paper)
    }

    pub fn desk(task: Task, mode: GuidanceMode) -> Self {
        Self::preset(task, mode, Preset::Desk)
    }

    /// Rescales the budget and seed list to `preset`, keeping everything else.
    pub fn apply_preset(&mut self, preset: Preset) {
        let task = self.env.task();
        let base = Self::preset(task, self.guidance.mode, preset);
        self.hyperparams.total_timesteps = base.hyperparams.total_timesteps;
        self.seeds = base.seeds;
        self.eval_interval = base.eval_interval;
    }

    /// Switches guidance mode and renames the experiment to match.
    pub fn set_mode(&mut self, mode: GuidanceMode) {
        let old = self.guidance.mode;
        self.guidance.mode = mode;
        if let Some(stem) = self.name.strip_suffix(&format!("_{}", old.id())) {
            self.name = format!("{stem}_{}", mode.id());
        }
    }

    pub fn task(&self) -> Task {
        self.env.task()
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::Config(format!("experiment name `{}` is not a plain file name", self.name)));
        }
        self.env.validate()?;
        self.hyperparams.validate()?;
        self.guidance.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must list at least one seed".into()));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return Err(Error::Config("seeds must be distinct".into()));
        }
        if self.eval_interval == 0 {
            return Err(Error::Config("eval_interval must be positive".into()));
        }
        if self.smoothing_window == 0 {
            return Err(Error::Config("smoothing_window must be positive".into()));
        }
        Ok(())
    }

    /// Loads the configured rule file, or the bundled rules for the task.
    pub fn symbolic_policy(&self) -> Result<SymbolicPolicy> {
        let task = self.task();
        match &self.rules {
            None => bundled_policy(task),
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                parse_rules(&path.display().to_string(), &text, Some(&task.vocabulary()))
            }
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json(err) => Error::Config(format!("{}: {err}", path.display())),
            other => other,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}
