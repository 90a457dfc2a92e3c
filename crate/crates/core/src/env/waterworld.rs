//! Continuous box with coloured balls drifting at constant speed. The agent
//! steers by velocity impulses and must touch colours in a given order.
//! `y` grows upwards.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{check_step, sparse_reward, ActionGrounding, Environment, StepResult, Task};
use crate::error::{Error, Result};
use crate::logic::nav::{ContinuousNav, Navigation};
use crate::logic::{FactBase, Vocabulary};

pub const UP: usize = 0;
pub const DOWN: usize = 1;
pub const LEFT: usize = 2;
pub const RIGHT: usize = 3;
pub const NONE: usize = 4;
pub const NUM_ACTIONS: usize = 5;

pub const COLORS: [&str; 6] = ["red", "green", "blue", "cyan", "magenta", "yellow"];
pub const BALLS_PER_COLOR: usize = 2;
pub const NUM_BALLS: usize = COLORS.len() * BALLS_PER_COLOR;
pub const OBS_LEN: usize = 4 + NUM_BALLS * 4 + 6;

pub const RADIUS: f64 = 15.0;
pub const BALL_SPEED: f64 = 3.0;
pub const IMPULSE: f64 = 2.0;
pub const MAX_AGENT_SPEED: f64 = 10.0;

const IMPULSES: [[f64; 2]; NUM_ACTIONS] = [[0.0, 1.0], [0.0, -1.0], [-1.0, 0.0], [1.0, 0.0], [0.0, 0.0]];

const LABELS: &[&str] = &[
    "touched_red",
    "touched_green",
    "touched_blue",
    "touched_cyan",
    "touched_magenta",
    "touched_yellow",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaterTask {
    Rg,
    RgBc,
    RgBcMy,
}

impl WaterTask {
    /// Colour pairs that must each be touched first-then-second.
    pub fn sequences(self) -> &'static [[usize; 2]] {
        match self {
            WaterTask::Rg => &[[0, 1]],
            WaterTask::RgBc => &[[0, 1], [2, 3]],
            WaterTask::RgBcMy => &[[0, 1], [2, 3], [4, 5]],
        }
    }
}

impl From<WaterTask> for Task {
    fn from(t: WaterTask) -> Task {
        match t {
            WaterTask::Rg => Task::RedGreen,
            WaterTask::RgBc => Task::RedGreenBlueCyan,
            WaterTask::RgBcMy => Task::RedGreenBlueCyanMagentaYellow,
        }
    }
}

fn default_size() -> f64 {
    400.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaterWorldConfig {
    pub task: WaterTask,
    /// Side length of the square box.
    #[serde(default = "default_size")]
    pub size: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
}

impl WaterWorldConfig {
    pub fn new(task: WaterTask) -> Self {
        Self {
            task,
            size: default_size(),
            max_steps: None,
        }
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps.unwrap_or((self.size / 2.0) as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.size.is_finite() && self.size >= 8.0 * RADIUS) {
            return Err(Error::Config(format!(
                "waterworld size {} must be at least {}",
                self.size,
                8.0 * RADIUS
            )));
        }
        if self.max_steps() == 0 {
            return Err(Error::Config("max_steps must be positive".into()));
        }
        Ok(())
    }
}

pub fn vocabulary() -> Vocabulary {
    let features: Vec<(String, usize)> = COLORS.iter().map(|c| (format!("touched_{c}"), 0)).collect();
    let features: Vec<(&str, usize)> = features.iter().map(|(n, a)| (n.as_str(), *a)).collect();
    Vocabulary::new(&[("touch", 1)], &features)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub color: usize,
    pub pos: [f64; 2],
    pub vel: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct WaterWorld {
    config: WaterWorldConfig,
    max_steps: usize,
    rng: ChaCha8Rng,
    agent: [f64; 2],
    agent_vel: [f64; 2],
    balls: Vec<Ball>,
    /// Per sequence: 0 nothing, 1 first colour touched, 2 complete.
    progress: Vec<usize>,
    step_count: usize,
    done: bool,
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Reflects a coordinate back inside `[lo, hi]`, flipping the velocity
/// component. Speed magnitude is untouched.
fn bounce(p: &mut f64, v: &mut f64, lo: f64, hi: f64) {
    if *p < lo {
        *p = 2.0 * lo - *p;
        *v = -*v;
    } else if *p > hi {
        *p = 2.0 * hi - *p;
        *v = -*v;
    }
}

impl WaterWorld {
    pub fn new(config: WaterWorldConfig) -> Result<Self> {
        config.validate()?;
        let mut env = Self {
            max_steps: config.max_steps(),
            config,
            rng: ChaCha8Rng::seed_from_u64(0),
            agent: [0.0; 2],
            agent_vel: [0.0; 2],
            balls: Vec::new(),
            progress: Vec::new(),
            step_count: 0,
            done: true,
        };
        env.reset(0)?;
        Ok(env)
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    pub fn agent(&self) -> ([f64; 2], [f64; 2]) {
        (self.agent, self.agent_vel)
    }

    pub fn progress(&self) -> &[usize] {
        &self.progress
    }

    /// Moves the agent, for tests and scripted scenarios.
    pub fn place_agent(&mut self, pos: [f64; 2], vel: [f64; 2]) {
        self.agent = pos;
        self.agent_vel = vel;
    }

    fn random_point(&mut self) -> [f64; 2] {
        let hi = self.config.size - RADIUS;
        [self.rng.random_range(RADIUS..hi), self.rng.random_range(RADIUS..hi)]
    }

    /// A ball position clear of the agent, with a random heading.
    fn spawn(&mut self, color: usize) -> Ball {
        let clearance = (4.0 * RADIUS).powi(2);
        let mut pos = self.random_point();
        while dist2(pos, self.agent) < clearance {
            pos = self.random_point();
        }
        let angle = self.rng.random_range(0.0..std::f64::consts::TAU);
        Ball {
            color,
            pos,
            vel: [BALL_SPEED * angle.cos(), BALL_SPEED * angle.sin()],
        }
    }

    fn touch(&mut self, color: usize) {
        for (p, seq) in self.progress.iter_mut().zip(self.config.task.sequences()) {
            if *p < 2 && seq[*p] == color {
                *p += 1;
            }
        }
    }
}

impl Environment for WaterWorld {
    fn task(&self) -> Task {
        self.config.task.into()
    }

    fn num_actions(&self) -> usize {
        NUM_ACTIONS
    }

    fn observation_len(&self) -> usize {
        OBS_LEN
    }

    fn max_steps(&self) -> usize {
        self.max_steps
    }

    fn step_count(&self) -> usize {
        self.step_count
    }

    fn is_done(&self) -> bool {
        self.done
    }

    fn reset(&mut self, seed: u64) -> Result<Vec<f64>> {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.agent = self.random_point();
        self.agent_vel = [0.0; 2];
        self.balls.clear();
        for color in 0..COLORS.len() {
            for _ in 0..BALLS_PER_COLOR {
                let b = self.spawn(color);
                self.balls.push(b);
            }
        }
        self.progress = vec![0; self.config.task.sequences().len()];
        self.step_count = 0;
        self.done = false;
        Ok(self.observe())
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        check_step(self.done, action, NUM_ACTIONS)?;
        self.step_count += 1;
        let (lo, hi) = (RADIUS, self.config.size - RADIUS);

        for k in 0..2 {
            self.agent_vel[k] =
                (self.agent_vel[k] + IMPULSE * IMPULSES[action][k]).clamp(-MAX_AGENT_SPEED, MAX_AGENT_SPEED);
            self.agent[k] += self.agent_vel[k];
            bounce(&mut self.agent[k], &mut self.agent_vel[k], lo, hi);
        }
        for b in &mut self.balls {
            for k in 0..2 {
                b.pos[k] += b.vel[k];
                bounce(&mut b.pos[k], &mut b.vel[k], lo, hi);
            }
        }

        let mut events = Vec::new();
        let touch_range = (2.0 * RADIUS).powi(2);
        for i in 0..self.balls.len() {
            if dist2(self.balls[i].pos, self.agent) <= touch_range {
                let color = self.balls[i].color;
                let label = LABELS[color];
                if !events.contains(&label) {
                    events.push(label);
                }
                self.touch(color);
                self.balls[i] = self.spawn(color);
            }
        }

        let success = self.progress.iter().all(|p| *p == 2);
        let reward = sparse_reward(self.step_count, self.max_steps, success);
        let truncated = !success && self.step_count >= self.max_steps;
        self.done = success || truncated;
        Ok(StepResult {
            observation: self.observe(),
            reward,
            done: self.done,
            truncated,
            success,
            events,
        })
    }

    fn observe(&self) -> Vec<f64> {
        let size = self.config.size;
        let mut obs = Vec::with_capacity(OBS_LEN);
        obs.extend([
            self.agent[0] / size,
            self.agent[1] / size,
            self.agent_vel[0] / MAX_AGENT_SPEED,
            self.agent_vel[1] / MAX_AGENT_SPEED,
        ]);
        for b in &self.balls {
            obs.extend([
                (b.pos[0] - self.agent[0]) / size,
                (b.pos[1] - self.agent[1]) / size,
                b.vel[0] / BALL_SPEED,
                b.vel[1] / BALL_SPEED,
            ]);
        }
        for s in 0..3 {
            let p = self.progress.get(s).copied().unwrap_or(0);
            obs.push(if p >= 1 { 1.0 } else { 0.0 });
            obs.push(if p >= 2 { 1.0 } else { 0.0 });
        }
        obs
    }

    fn ground_state(&self) -> FactBase {
        let mut f = FactBase::new();
        for (p, seq) in self.progress.iter().zip(self.config.task.sequences()) {
            for (i, color) in seq.iter().enumerate() {
                if *p > i {
                    f.add(LABELS[*color], &[]);
                }
            }
        }
        f
    }

    fn action_grounding(&self, action: usize) -> ActionGrounding {
        if action == NONE {
            ActionGrounding::None
        } else {
            ActionGrounding::Navigation
        }
    }

    fn navigation(&self) -> Navigation {
        Navigation::Continuous(ContinuousNav {
            agent: self.agent,
            targets: self
                .balls
                .iter()
                .map(|b| (COLORS[b.color].to_string(), b.pos))
                .collect(),
            impulses: IMPULSES.iter().copied().enumerate().collect(),
        })
    }

    fn directive_predicates(&self) -> &'static [&'static str] {
        &["touch"]
    }

    fn label_alphabet(&self) -> &'static [&'static str] {
        LABELS
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{bundled_policy, indicator_mask, GroundAtom};

    fn env(task: WaterTask, seed: u64) -> WaterWorld {
        let mut e = WaterWorld::new(WaterWorldConfig::new(task)).unwrap();
        e.reset(seed).unwrap();
        e
    }

    #[test]
    fn rg_bc_has_all_four_colours() {
        let e = env(WaterTask::RgBc, 3);
        for c in ["red", "green", "blue", "cyan"] {
            assert!(e.balls().iter().any(|b| COLORS[b.color] == c));
        }
    }

    #[test]
    fn ball_speed_is_conserved() {
        let mut e = WaterWorld::new(WaterWorldConfig {
            max_steps: Some(20_000),
            ..WaterWorldConfig::new(WaterTask::Rg)
        })
        .unwrap();
        e.reset(11).unwrap();
        for t in 0..10_000 {
            if e.is_done() {
                e.reset(t).unwrap();
            }
            e.step((t % 5) as usize).unwrap();
            for b in e.balls() {
                let speed = (b.vel[0].powi(2) + b.vel[1].powi(2)).sqrt();
                assert!((speed - BALL_SPEED).abs() < 1e-9);
                for k in 0..2 {
                    assert!(b.pos[k] >= RADIUS && b.pos[k] <= 400.0 - RADIUS);
                }
            }
        }
    }

    #[test]
    fn overlapping_red_emits_touched_red() {
        let mut e = env(WaterTask::Rg, 5);
        let red = e.balls().iter().find(|b| b.color == 0).unwrap();
        let target = [red.pos[0] + red.vel[0], red.pos[1] + red.vel[1]];
        // Park the agent where the ball will be after one step.
        e.place_agent([target[0].clamp(RADIUS, 385.0), target[1].clamp(RADIUS, 385.0)], [0.0, 0.0]);
        let r = e.step(NONE).unwrap();
        assert!(r.events.contains(&"touched_red"));
        let facts = e.ground_state();
        assert_eq!(facts.iter().collect::<Vec<_>>(), vec![GroundAtom::prop("touched_red")]);
    }

    #[test]
    fn green_before_red_does_not_count() {
        let mut e = env(WaterTask::Rg, 5);
        e.touch(1);
        assert_eq!(e.progress(), &[0]);
        e.touch(0);
        e.touch(0);
        assert_eq!(e.progress(), &[1]);
        e.touch(1);
        assert_eq!(e.progress(), &[2]);
    }

    #[test]
    fn mask_points_toward_nearest_green_after_red() {
        let policy = bundled_policy(Task::RedGreen).unwrap();
        let mut e = env(WaterTask::Rg, 9);
        e.touch(0);
        e.place_agent([200.0, 200.0], [0.0, 0.0]);
        for b in &mut e.balls {
            b.pos = [380.0, 380.0];
        }
        e.balls[2].pos = [200.0, 100.0];
        e.balls[3].pos = [320.0, 200.0];
        let mask = indicator_mask(&policy, &e.ground_state(), &e).unwrap();
        assert_eq!(mask.bits(), &[false, true, false, false, false]);
    }

    #[test]
    fn same_seed_same_trajectory() {
        let mut a = env(WaterTask::RgBcMy, 4);
        let mut b = env(WaterTask::RgBcMy, 4);
        for t in 0..200 {
            let ra = a.step(t % 5).unwrap();
            let rb = b.step(t % 5).unwrap();
            assert_eq!(ra, rb);
        }
    }

    #[test]
    fn episode_truncates_at_half_the_box() {
        let mut e = env(WaterTask::RgBcMy, 1);
        let mut steps = 0;
        while !e.is_done() {
            e.step(NONE).unwrap();
            steps += 1;
        }
        assert!(steps <= 200);
    }
}
