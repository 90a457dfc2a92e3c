use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::guidance::{Guidance, GuidanceMode};
use crate::harness::config::ExperimentConfig;
use crate::ppo::agent::Agent;
use crate::ppo::hyperparams::lr_schedule;
use crate::ppo::{collect_rollouts, train_update, VecEnv};

pub const MANIFEST: &str = "manifest.json";
pub const METRICS_JSONL: &str = "metrics.jsonl";
pub const METRICS_CSV: &str = "metrics.csv";

/// One finished episode, with the statistics of the update that consumed it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub global_step: u64,
    pub iteration: u64,
    pub env: usize,
    /// Environment reward only; shaping is excluded.
    #[serde(rename = "return")]
    pub episode_return: f64,
    pub train_return: f64,
    pub length: usize,
    pub success: bool,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub sym_loss: f64,
    /// `ε_t` under Product, `Θ_t` under SymLoss, zero otherwise.
    pub guidance_weight: f64,
    pub clip_frac: f64,
    pub approx_kl: f64,
    pub learning_rate: f64,
    /// Seconds since the run started. Kept out of the CSV so reruns match.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Running,
    Complete,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub global_steps: u64,
    pub episodes: usize,
    pub successes: usize,
    /// Mean return over the last `smoothing_window` episodes.
    pub final_return: f64,
    pub wall_seconds: f64,
}

/// Self-description of one seed's run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub build: String,
    pub status: RunStatus,
    pub started_at: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finished_at: Option<u64>,
    /// Swept values for ablation runs.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tags: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<RunSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunManifest {
    pub fn method(&self) -> &'static str {
        self.config.guidance.mode.method_name()
    }
}

pub fn build_id() -> String {
    match option_env!("HPPO_BUILD_ID") {
        Some(id) => format!("hppo {} ({id})", env!("CARGO_PKG_VERSION")),
        None => format!("hppo {}", env!("CARGO_PKG_VERSION")),
    }
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    write_atomic(&dir.join(MANIFEST), text.as_bytes())
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Reads every complete record of `metrics.jsonl`. A torn final line, as
/// left by a killed run, is dropped.
pub fn read_metrics(dir: &Path) -> Result<Vec<MetricsRecord>> {
    let path = dir.join(METRICS_JSONL);
    let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
    let mut lines: Vec<String> = Vec::new();
    for line in BufReader::new(file).lines() {
        lines.push(line.map_err(|e| Error::io(&path, e))?);
    }
    let mut out = Vec::with_capacity(lines.len());
    let last = lines.len().saturating_sub(1);
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(r) => out.push(r),
            Err(_) if i == last => break,
            Err(e) => return Err(Error::Config(format!("{}:{}: {e}", path.display(), i + 1))),
        }
    }
    Ok(out)
}

/// Renders records as CSV, wall-clock omitted.
pub fn metrics_csv(records: &[MetricsRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(MetricsRecord {
            wall_clock: None,
            ..r.clone()
        })?;
    }
    w.into_inner().map_err(|e| Error::Config(format!("csv buffer: {e}")))
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<MetricsRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Everything a finished in-memory training run produced.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub records: Vec<MetricsRecord>,
    pub agent: Agent,
    pub global_steps: u64,
}

/// Trains one seed. `sink` sees each iteration's records as soon as its
/// update finishes.
pub fn train(
    config: &ExperimentConfig,
    seed: u64,
    mut sink: impl FnMut(&[MetricsRecord]) -> Result<()>,
) -> Result<TrainOutcome> {
    config.validate()?;
    let hp = &config.hyperparams;
    let policy = config.symbolic_policy()?;
    let mut venv = VecEnv::new(&config.env, hp.num_envs, seed)?;
    let guidance = Guidance::new(config.guidance.clone(), policy, venv.env(0))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agent = Agent::new(venv.obs_len(), venv.num_actions(), hp.max_grad_norm, &mut rng)?;

    let started = Instant::now();
    let iterations = hp.num_iterations();
    let total = iterations * hp.batch_size as u64;
    let mut global_step = 0u64;
    let mut records = Vec::new();
    for iteration in 0..iterations {
        let progress = global_step as f64 / total as f64;
        let lr = if hp.anneal_lr {
            lr_schedule(global_step, total, hp.learning_rate)
        } else {
            hp.learning_rate
        };
        let (mut buf, episodes, rollout) =
            collect_rollouts(&mut venv, &agent, &guidance, hp.num_steps, progress, global_step, &mut rng)?;
        buf.compute_advantages(hp.gamma, hp.gae_lambda)?;
        let theta = guidance.theta(progress);
        let sym = (guidance.mode() == GuidanceMode::SymLoss).then_some(theta);
        let stats = train_update(&mut agent, &buf, hp, sym, lr, &mut rng).map_err(|e| match e {
            Error::Numeric(m) => Error::Numeric(format!("seed {seed}, iteration {iteration}: {m}")),
            other => other,
        })?;
        global_step += buf.len() as u64;

        let weight = match guidance.mode() {
            GuidanceMode::Product => rollout.epsilon,
            GuidanceMode::SymLoss => theta,
            _ => 0.0,
        };
        let clock = started.elapsed().as_secs_f64();
        let start = records.len();
        records.extend(episodes.into_iter().map(|ep| MetricsRecord {
            global_step: ep.global_step,
            iteration,
            env: ep.env,
            episode_return: ep.ret,
            train_return: ep.train_return,
            length: ep.length,
            success: ep.success,
            policy_loss: stats.policy_loss,
            value_loss: stats.value_loss,
            entropy: stats.entropy,
            sym_loss: stats.sym_loss,
            guidance_weight: weight,
            clip_frac: stats.clip_frac,
            approx_kl: stats.approx_kl,
            learning_rate: lr,
            wall_clock: Some(clock),
        }));
        sink(&records[start..])?;
    }
    Ok(TrainOutcome {
        records,
        agent,
        global_steps: global_step,
    })
}

pub fn final_return(records: &[MetricsRecord], window: usize) -> f64 {
    let tail = &records[records.len().saturating_sub(window)..];
    if tail.is_empty() {
        return 0.0;
    }
    tail.iter().map(|r| r.episode_return).sum::<f64>() / tail.len() as f64
}

/// Directory of one seed's run: `<output_dir>/<name>/seed_<seed>`.
pub fn run_dir(config: &ExperimentConfig, seed: u64) -> PathBuf {
    config.output_dir.join(&config.name).join(format!("seed_{seed}"))
}

/// Trains one seed into its run directory, streaming `metrics.jsonl` and
/// finishing with `metrics.csv` and a completed manifest.
pub fn run_seed(config: &ExperimentConfig, seed: u64, tags: &BTreeMap<String, String>) -> Result<PathBuf> {
    config.validate()?;
    let dir = run_dir(config, seed);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut manifest = RunManifest {
        config: config.clone(),
        seed,
        build: build_id(),
        status: RunStatus::Running,
        started_at: unix_now(),
        finished_at: None,
        tags: tags.clone(),
        summary: None,
        error: None,
    };
    write_manifest(&dir, &manifest)?;

    let jsonl = dir.join(METRICS_JSONL);
    let mut out = OpenOptions::new()
        .create(true)
        .write(true)
        .truncate(true)
        .open(&jsonl)
        .map_err(|e| Error::io(&jsonl, e))?;
    let started = Instant::now();
    let result = train(config, seed, |batch| {
        let mut text = String::new();
        for r in batch {
            text.push_str(&serde_json::to_string(r)?);
            text.push('\n');
        }
        out.write_all(text.as_bytes())
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(&jsonl, e))
    });

    manifest.finished_at = Some(unix_now());
    match result {
        Ok(outcome) => {
            write_atomic(&dir.join(METRICS_CSV), &metrics_csv(&outcome.records)?)?;
            manifest.status = RunStatus::Complete;
            manifest.summary = Some(RunSummary {
                global_steps: outcome.global_steps,
                episodes: outcome.records.len(),
                successes: outcome.records.iter().filter(|r| r.success).count(),
                final_return: final_return(&outcome.records, config.smoothing_window),
                wall_seconds: started.elapsed().as_secs_f64(),
            });
            write_manifest(&dir, &manifest)?;
            Ok(dir)
        }
        Err(e) => {
            manifest.status = RunStatus::Failed;
            manifest.error = Some(e.to_string());
            write_manifest(&dir, &manifest)?;
            Err(e)
        }
    }
}

/// Runs every seed of `config`, in parallel when threads are available.
pub fn run(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    run_tagged(config, &BTreeMap::new())
}

pub fn run_tagged(config: &ExperimentConfig, tags: &BTreeMap<String, String>) -> Result<Vec<PathBuf>> {
    config.validate()?;
    config.seeds.par_iter().map(|&seed| run_seed(config, seed, tags)).collect()
}
