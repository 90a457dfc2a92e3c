use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{Graph, NodeId};
use crate::ppo::agent::Agent;
use crate::ppo::hyperparams::Hyperparams;
use crate::ppo::rollout::RolloutBuffer;

/// Averages over every minibatch of one update.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    /// Clipped surrogate against the symbolic reference; zero outside SymLoss.
    pub sym_loss: f64,
    pub theta: f64,
    pub approx_kl: f64,
    pub clip_frac: f64,
    pub grad_norm: f64,
    pub learning_rate: f64,
    pub explained_variance: f64,
}

/// Centers `xs` and divides by the sample standard deviation (plus 1e-8).
/// A single element is only centered.
pub fn normalize(xs: &mut [f64]) {
    let n = xs.len();
    if n == 0 {
        return;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    xs.iter_mut().for_each(|x| *x -= mean);
    if n < 2 {
        return;
    }
    let var = xs.iter().map(|x| x * x).sum::<f64>() / (n - 1) as f64;
    let std = var.sqrt() + 1e-8;
    xs.iter_mut().for_each(|x| *x /= std);
}

/// `1 - Var[returns - values] / Var[returns]`; NaN when returns are constant.
pub fn explained_variance(values: &[f64], returns: &[f64]) -> f64 {
    let var = |v: &mut dyn Iterator<Item = f64>| {
        let xs: Vec<f64> = v.collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64
    };
    let vr = var(&mut returns.iter().copied());
    if vr == 0.0 {
        return f64::NAN;
    }
    1.0 - var(&mut returns.iter().zip(values).map(|(r, v)| r - v)) / vr
}

fn clipped_surrogate(g: &mut Graph, logp: NodeId, old: NodeId, adv: NodeId, clip: f64) -> Result<(NodeId, NodeId)> {
    let diff = g.sub(logp, old)?;
    let ratio = g.exp(diff);
    let plain = g.mul(ratio, adv)?;
    let clamped = g.clamp(ratio, 1.0 - clip, 1.0 + clip);
    let clipped = g.mul(clamped, adv)?;
    let low = g.min(plain, clipped)?;
    Ok((g.mean(low), ratio))
}

/// One minibatch, gathered out of a rollout buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Minibatch {
    pub obs: Vec<f64>,
    pub actions: Vec<usize>,
    pub logprobs: Vec<f64>,
    pub ref_logprobs: Vec<f64>,
    /// Already normalized if normalization is on.
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
    pub values: Vec<f64>,
}

impl Minibatch {
    pub fn gather(buf: &RolloutBuffer, idx: &[usize], norm_adv: bool) -> Self {
        let obs_len = buf.obs_len;
        let mut obs = Vec::with_capacity(idx.len() * obs_len);
        for &i in idx {
            obs.extend_from_slice(&buf.obs[i * obs_len..(i + 1) * obs_len]);
        }
        let pick = |v: &[f64]| idx.iter().map(|&i| v[i]).collect::<Vec<f64>>();
        let mut advantages = pick(&buf.advantages);
        if norm_adv {
            normalize(&mut advantages);
        }
        Self {
            obs,
            actions: idx.iter().map(|&i| buf.actions[i]).collect(),
            logprobs: pick(&buf.logprobs),
            ref_logprobs: pick(&buf.ref_logprobs),
            advantages,
            returns: pick(&buf.returns),
            values: pick(&buf.values),
        }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Tape nodes of the minibatch objective.
#[derive(Debug, Clone, Copy)]
pub struct LossNodes {
    /// The scalar minimized.
    pub loss: NodeId,
    /// `−L_clip`.
    pub policy: NodeId,
    pub value: NodeId,
    /// Mean of `Σ p log p`, the negative entropy.
    pub neg_entropy: NodeId,
    pub sym: Option<NodeId>,
    pub ratio: NodeId,
}

/// Records `−L_clip + c₁·L_vf − c₂·H − Θ·L_sym` on `g`. The symbolic term
/// is present exactly when `sym_theta` is `Some`.
pub fn build_loss(
    g: &mut Graph,
    agent: &Agent,
    mb: &Minibatch,
    hp: &Hyperparams,
    sym_theta: Option<f64>,
) -> Result<LossNodes> {
    let m = mb.len();
    let clip = hp.clip_coef;
    let x = g.constant(m, agent.obs_len(), mb.obs.clone())?;
    let logits = agent.policy.forward(g, &agent.params, x)?;
    let logp_all = g.log_softmax(logits);
    let logp = g.gather(logp_all, &mb.actions)?;
    let old = g.constant(m, 1, mb.logprobs.clone())?;
    let adv = g.constant(m, 1, mb.advantages.clone())?;
    let (l_clip, ratio) = clipped_surrogate(g, logp, old, adv, clip)?;

    let probs = g.exp(logp_all);
    let plogp = g.mul(probs, logp_all)?;
    let rows = g.sum_rows(plogp);
    let neg_entropy = g.mean(rows);

    let v = agent.value.forward(g, &agent.params, x)?;
    let ret = g.constant(m, 1, mb.returns.clone())?;
    let d = g.sub(v, ret)?;
    let sq = g.square(d);
    let per = if hp.clip_vloss {
        let vold = g.constant(m, 1, mb.values.clone())?;
        let dv = g.sub(v, vold)?;
        let dv = g.clamp(dv, -clip, clip);
        let vc = g.add(vold, dv)?;
        let d2 = g.sub(vc, ret)?;
        let sq2 = g.square(d2);
        g.max(sq, sq2)?
    } else {
        sq
    };
    let vmean = g.mean(per);
    let value = g.scale(vmean, 0.5);

    let policy = g.scale(l_clip, -1.0);
    let vf = g.scale(value, hp.vf_coef);
    let ent = g.scale(neg_entropy, hp.ent_coef);
    let partial = g.add(policy, vf)?;
    let mut loss = g.add(partial, ent)?;
    let mut sym = None;
    if let Some(theta) = sym_theta {
        let reference = g.constant(m, 1, mb.ref_logprobs.clone())?;
        let (l_sym, _) = clipped_surrogate(g, logp, reference, adv, clip)?;
        let term = g.scale(l_sym, -theta);
        loss = g.add(loss, term)?;
        sym = Some(l_sym);
    }
    Ok(LossNodes {
        loss,
        policy,
        value,
        neg_entropy,
        sym,
        ratio,
    })
}

/// Runs `update_epochs` passes of shuffled minibatch Adam steps over one
/// rollout. `sym_theta` is `Some(Θ)` under SymLoss guidance, and the
/// symbolic term is then built even when Θ is zero.
pub fn train_update<R: Rng + ?Sized>(
    agent: &mut Agent,
    buf: &RolloutBuffer,
    hp: &Hyperparams,
    sym_theta: Option<f64>,
    lr: f64,
    rng: &mut R,
) -> Result<UpdateStats> {
    let b = buf.len();
    let mb_size = hp.minibatch_size;
    if mb_size == 0 || b % mb_size != 0 {
        return Err(Error::Config(format!("buffer of {b} does not split into minibatches of {mb_size}")));
    }
    let clip = hp.clip_coef;
    let mut stats = UpdateStats {
        theta: sym_theta.unwrap_or(0.0),
        learning_rate: lr,
        explained_variance: explained_variance(&buf.values, &buf.returns),
        ..UpdateStats::default()
    };
    let mut count = 0.0;
    let mut order: Vec<usize> = (0..b).collect();

    for epoch in 0..hp.update_epochs {
        order.shuffle(rng);
        for (k, idx) in order.chunks(mb_size).enumerate() {
            let mb = Minibatch::gather(buf, idx, hp.norm_adv);
            let mut g = Graph::new();
            let nodes = build_loss(&mut g, agent, &mb, hp, sym_theta)?;
            let total = g.scalar(nodes.loss);
            if !total.is_finite() {
                return Err(Error::Numeric(format!(
                    "loss is {total} in epoch {epoch}, minibatch {k}"
                )));
            }
            g.backward(nodes.loss, &mut agent.params)?;
            let report = agent.optimizer.step(&mut agent.params, lr)?;

            let m = mb.len() as f64;
            let ratios = g.value(nodes.ratio);
            stats.approx_kl += ratios.iter().map(|r| (r - 1.0) - r.ln()).sum::<f64>() / m;
            stats.clip_frac += ratios.iter().filter(|r| (*r - 1.0).abs() > clip).count() as f64 / m;
            stats.policy_loss += g.scalar(nodes.policy);
            stats.value_loss += g.scalar(nodes.value);
            stats.entropy -= g.scalar(nodes.neg_entropy);
            stats.sym_loss += nodes.sym.map_or(0.0, |n| g.scalar(n));
            stats.grad_norm += report.grad_norm;
            count += 1.0;
        }
    }
    if count > 0.0 {
        for s in [
            &mut stats.policy_loss,
            &mut stats.value_loss,
            &mut stats.entropy,
            &mut stats.sym_loss,
            &mut stats.approx_kl,
            &mut stats.clip_frac,
            &mut stats.grad_norm,
        ] {
            *s /= count;
        }
    }
    Ok(stats)
}
