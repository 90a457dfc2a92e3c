use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{EnvConfig, Environment};
use crate::error::{Error, Result};
use crate::guidance::{reference_distribution, reweighted_distribution, rm_shaped_reward, Guidance, GuidanceMode};
use crate::nn::Categorical;
use crate::ppo::agent::Agent;
use crate::ppo::gae::compute_gae;

/// Independent environment copies stepped in lockstep, with automatic
/// reset. Episode layouts are drawn from a generator of their own so the
/// action stream and the layout stream never interfere.
pub struct VecEnv {
    envs: Vec<Box<dyn Environment>>,
    obs: Vec<f64>,
    obs_len: usize,
    num_actions: usize,
    seeder: ChaCha8Rng,
    ep_return: Vec<f64>,
    ep_train_return: Vec<f64>,
    ep_len: Vec<usize>,
    rm_state: Vec<usize>,
}

impl VecEnv {
    pub fn new(config: &EnvConfig, num_envs: usize, seed: u64) -> Result<Self> {
        if num_envs == 0 {
            return Err(Error::Config("num_envs must be positive".into()));
        }
        let mut seeder = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_e7_15);
        let mut envs = Vec::with_capacity(num_envs);
        let mut obs = Vec::new();
        for _ in 0..num_envs {
            let mut env = config.build()?;
            obs.extend(env.reset(seeder.random())?);
            envs.push(env);
        }
        let obs_len = envs[0].observation_len();
        let num_actions = envs[0].num_actions();
        Ok(Self {
            envs,
            obs,
            obs_len,
            num_actions,
            seeder,
            ep_return: vec![0.0; num_envs],
            ep_train_return: vec![0.0; num_envs],
            ep_len: vec![0; num_envs],
            rm_state: vec![0; num_envs],
        })
    }

    pub fn len(&self) -> usize {
        self.envs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.envs.is_empty()
    }

    pub fn obs_len(&self) -> usize {
        self.obs_len
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn env(&self, i: usize) -> &dyn Environment {
        self.envs[i].as_ref()
    }

    /// Current observations, `len × obs_len`, row-major.
    pub fn observations(&self) -> &[f64] {
        &self.obs
    }
}

/// One finished episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    /// Environment steps taken by the whole run when the episode ended.
    pub global_step: u64,
    pub env: usize,
    /// Sum of environment rewards; shaping never enters it.
    #[serde(rename = "return")]
    pub ret: f64,
    /// Sum of the rewards the learner trained on.
    pub train_return: f64,
    pub length: usize,
    pub success: bool,
}

/// Transitions from `num_steps` lockstep steps over `num_envs` environments,
/// stored step-major: slot `t·num_envs + e`.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutBuffer {
    pub num_steps: usize,
    pub num_envs: usize,
    pub obs_len: usize,
    pub num_actions: usize,
    pub obs: Vec<f64>,
    pub actions: Vec<usize>,
    /// Log-probability under the distribution actually sampled from.
    pub logprobs: Vec<f64>,
    /// Log-probability under the symbolic reference policy (SymLoss only).
    pub ref_logprobs: Vec<f64>,
    /// Rewards the learner trains on.
    pub rewards: Vec<f64>,
    /// Environment rewards, as reported.
    pub report_rewards: Vec<f64>,
    /// The step finished an episode (terminal or time limit).
    pub ends: Vec<bool>,
    pub truncated: Vec<bool>,
    pub values: Vec<f64>,
    /// Value of the state each step led to; zero after true terminals.
    pub next_values: Vec<f64>,
    /// `num_actions` indicator bits per slot.
    pub masks: Vec<bool>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl RolloutBuffer {
    fn new(num_steps: usize, num_envs: usize, obs_len: usize, num_actions: usize) -> Self {
        let n = num_steps * num_envs;
        Self {
            num_steps,
            num_envs,
            obs_len,
            num_actions,
            obs: vec![0.0; n * obs_len],
            actions: vec![0; n],
            logprobs: vec![0.0; n],
            ref_logprobs: vec![0.0; n],
            rewards: vec![0.0; n],
            report_rewards: vec![0.0; n],
            ends: vec![false; n],
            truncated: vec![false; n],
            values: vec![0.0; n],
            next_values: vec![0.0; n],
            masks: vec![false; n * num_actions],
            advantages: vec![0.0; n],
            returns: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.num_steps * self.num_envs
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn slot(&self, t: usize, e: usize) -> usize {
        t * self.num_envs + e
    }

    pub fn mask(&self, slot: usize) -> &[bool] {
        &self.masks[slot * self.num_actions..(slot + 1) * self.num_actions]
    }

    /// Fills `advantages` and `returns` with per-environment GAE.
    pub fn compute_advantages(&mut self, gamma: f64, lambda: f64) -> Result<()> {
        let (tn, en) = (self.num_steps, self.num_envs);
        for e in 0..en {
            let pick = |v: &[f64]| (0..tn).map(|t| v[t * en + e]).collect::<Vec<_>>();
            let ends: Vec<bool> = (0..tn).map(|t| self.ends[t * en + e]).collect();
            let adv = compute_gae(
                &pick(&self.rewards),
                &pick(&self.values),
                &pick(&self.next_values),
                &ends,
                gamma,
                lambda,
            )?;
            for t in 0..tn {
                self.advantages[t * en + e] = adv.advantages[t];
                self.returns[t * en + e] = adv.returns[t];
            }
        }
        Ok(())
    }
}

/// Per-collection summary.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RolloutStats {
    /// Mean entropy of the sampling distribution.
    pub entropy: f64,
    /// Fraction of steps where the rules entailed at least one action.
    pub mask_coverage: f64,
    /// Fraction of steps whose sampled action was entailed.
    pub entailed_actions: f64,
    pub epsilon: f64,
}

/// Collects `num_steps` steps from every environment with one parameter
/// snapshot. `progress ∈ [0, 1]` drives the guidance schedules and
/// `global_step` counts environment steps taken before this call.
pub fn collect_rollouts<R: Rng + ?Sized>(
    venv: &mut VecEnv,
    agent: &Agent,
    guidance: &Guidance,
    num_steps: usize,
    progress: f64,
    global_step: u64,
    rng: &mut R,
) -> Result<(RolloutBuffer, Vec<EpisodeRecord>, RolloutStats)> {
    let (n, obs_len, na) = (venv.len(), venv.obs_len, venv.num_actions);
    if agent.obs_len() != obs_len || agent.num_actions() != na {
        return Err(Error::Config(format!(
            "agent expects {}x{} but environments give {obs_len} observations and {na} actions",
            agent.obs_len(),
            agent.num_actions()
        )));
    }
    let mode = guidance.mode();
    let epsilon = guidance.epsilon(progress);
    let lambda = guidance.config.product.lambda;
    let eta = guidance.config.symloss.eta;
    let machine = guidance.machine();

    let mut buf = RolloutBuffer::new(num_steps, n, obs_len, na);
    let mut episodes = Vec::new();
    let mut stats = RolloutStats {
        epsilon,
        ..RolloutStats::default()
    };
    let mut bootstrap: Vec<(usize, Vec<f64>)> = Vec::new();

    for t in 0..num_steps {
        let logits = agent.logits(&venv.obs, n)?;
        let values = agent.values(&venv.obs, n)?;
        for e in 0..n {
            let slot = t * n + e;
            buf.obs[slot * obs_len..(slot + 1) * obs_len].copy_from_slice(&venv.obs[e * obs_len..(e + 1) * obs_len]);
            buf.values[slot] = values[e];

            let env = venv.envs[e].as_mut();
            let mask = guidance.mask(env)?;
            buf.masks[slot * na..(slot + 1) * na].copy_from_slice(mask.bits());
            if mask.count() > 0 {
                stats.mask_coverage += 1.0;
            }

            let base = Categorical::from_logits(&logits[e * na..(e + 1) * na])?;
            let dist = if mode == GuidanceMode::Product {
                reweighted_distribution(&base, &mask, lambda, epsilon)?
            } else {
                base
            };
            let action = dist.sample(rng);
            buf.actions[slot] = action;
            buf.logprobs[slot] = dist.log_prob(action);
            stats.entropy += dist.entropy();
            let entailed = mask.get(action);
            if entailed {
                stats.entailed_actions += 1.0;
            }
            if mode == GuidanceMode::SymLoss {
                buf.ref_logprobs[slot] = reference_distribution(&mask, eta)?.log_prob(action);
            }

            let res = env.step(action)?;
            let (train, report) = match machine {
                Some(rm) => {
                    let (next, delta) = rm.transition(venv.rm_state[e], &res.events);
                    venv.rm_state[e] = next;
                    rm_shaped_reward(res.reward, entailed, delta, &guidance.config.rm)
                }
                None => (res.reward, res.reward),
            };
            buf.rewards[slot] = train;
            buf.report_rewards[slot] = report;
            buf.ends[slot] = res.done;
            buf.truncated[slot] = res.truncated;
            venv.ep_return[e] += report;
            venv.ep_train_return[e] += train;
            venv.ep_len[e] += 1;

            let next_obs = if res.done {
                episodes.push(EpisodeRecord {
                    global_step: global_step + slot as u64 + 1,
                    env: e,
                    ret: venv.ep_return[e],
                    train_return: venv.ep_train_return[e],
                    length: venv.ep_len[e],
                    success: res.success,
                });
                venv.ep_return[e] = 0.0;
                venv.ep_train_return[e] = 0.0;
                venv.ep_len[e] = 0;
                venv.rm_state[e] = machine.map_or(0, |rm| rm.initial());
                if res.truncated {
                    bootstrap.push((slot, res.observation));
                }
                let seed = venv.seeder.random();
                venv.envs[e].reset(seed)?
            } else {
                res.observation
            };
            venv.obs[e * obs_len..(e + 1) * obs_len].copy_from_slice(&next_obs);
        }
    }

    if !bootstrap.is_empty() {
        let finals: Vec<f64> = bootstrap.iter().flat_map(|(_, o)| o.iter().copied()).collect();
        let vals = agent.values(&finals, bootstrap.len())?;
        for ((slot, _), v) in bootstrap.iter().zip(vals) {
            buf.next_values[*slot] = v;
        }
    }
    let last = agent.values(&venv.obs, n)?;
    for t in 0..num_steps {
        for e in 0..n {
            let slot = t * n + e;
            if !buf.ends[slot] {
                buf.next_values[slot] = if t + 1 < num_steps { buf.values[slot + n] } else { last[e] };
            }
        }
    }

    let steps = buf.len() as f64;
    stats.entropy /= steps;
    stats.mask_coverage /= steps;
    stats.entailed_actions /= steps;
    Ok((buf, episodes, stats))
}
