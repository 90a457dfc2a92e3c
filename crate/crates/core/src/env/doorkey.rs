//! Partially observable key-and-door gridworld.
//!
//! The grid is walled in and split by a vertical wall with one locked door.
//! The agent starts on the left with the key(s); the goal sits in the
//! bottom-right corner. Coordinates put `x` to the right and `y` down;
//! headings follow [`HEADINGS`] (right, down, left, up).

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{check_step, sparse_reward, ActionGrounding, Environment, StepResult, Task};
use crate::error::{Error, Result};
use crate::logic::nav::{Cell as Pos, GridNav, Motion, Navigation, HEADINGS};
use crate::logic::{FactBase, GroundAtom, Vocabulary};

pub const TURN_LEFT: usize = 0;
pub const TURN_RIGHT: usize = 1;
pub const FORWARD: usize = 2;
pub const PICKUP: usize = 3;
pub const TOGGLE: usize = 4;
pub const NUM_ACTIONS: usize = 5;

pub const VIEW: usize = 7;
pub const OBS_LEN: usize = VIEW * VIEW * 3 + 4;

const LABELS: &[&str] = &["picked_key", "got_key", "opened_door", "reached_goal"];
const LAYOUT_ATTEMPTS: usize = 100;

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoorKeyConfig {
    /// Side length including the outer wall (8 or 16 in the benchmarks).
    pub size: usize,
    /// Keys on the agent's side; exactly one matches the door.
    pub keys: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    /// Let distractor keys share the door colour.
    #[serde(default, skip_serializing_if = "is_false")]
    pub distractors_may_match_door: bool,
}

impl DoorKeyConfig {
    pub fn new(size: usize, keys: usize) -> Self {
        Self {
            size,
            keys,
            max_steps: None,
            distractors_may_match_door: false,
        }
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps.unwrap_or(self.size * self.size * 10)
    }

    pub fn validate(&self) -> Result<()> {
        if self.size < 5 {
            return Err(Error::Config(format!("doorkey size {} is below 5", self.size)));
        }
        if !(1..=Color::ALL.len()).contains(&self.keys) {
            return Err(Error::Config(format!("doorkey key count {} not in 1..=6", self.keys)));
        }
        if self.max_steps == Some(0) {
            return Err(Error::Config("max_steps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Color {
    Red,
    Green,
    Blue,
    Purple,
    Yellow,
    Grey,
}

impl Color {
    pub const ALL: [Color; 6] = [
        Color::Red,
        Color::Green,
        Color::Blue,
        Color::Purple,
        Color::Yellow,
        Color::Grey,
    ];

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DoorState {
    Open,
    Closed,
    Locked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tile {
    Empty,
    Wall,
    Goal,
    Key { id: u8, color: Color },
    Door { color: Color, state: DoorState },
}

impl Tile {
    /// (type, colour, state) indices in the usual MiniGrid numbering.
    fn encode(self) -> (usize, usize, usize) {
        match self {
            Tile::Empty => (1, 0, 0),
            Tile::Wall => (2, Color::Grey.index(), 0),
            Tile::Goal => (8, Color::Green.index(), 0),
            Tile::Key { color, .. } => (5, color.index(), 0),
            Tile::Door { color, state } => {
                let s = match state {
                    DoorState::Open => 0,
                    DoorState::Closed => 1,
                    DoorState::Locked => 2,
                };
                (4, color.index(), s)
            }
        }
    }
}

pub fn vocabulary() -> Vocabulary {
    Vocabulary::new(
        &[("pickup", 1), ("toggle", 1), ("goto", 1)],
        &[
            ("key", 1),
            ("door", 1),
            ("goal", 1),
            ("sameColor", 2),
            ("locked", 1),
            ("unlocked", 0),
            ("carryingKey", 1),
            ("notCarrying", 0),
        ],
    )
}

const DOOR_ID: &str = "d1";
const GOAL_ID: &str = "g1";

fn key_name(id: u8) -> String {
    format!("k{id}")
}

#[derive(Debug, Clone)]
pub struct DoorKey {
    config: DoorKeyConfig,
    size: usize,
    max_steps: usize,
    grid: Vec<Tile>,
    agent: Pos,
    heading: usize,
    carrying: Option<(u8, Color)>,
    door: Pos,
    step_count: usize,
    done: bool,
}

impl DoorKey {
    pub fn new(config: DoorKeyConfig) -> Result<Self> {
        config.validate()?;
        let size = config.size;
        let mut env = Self {
            max_steps: config.max_steps(),
            config,
            size,
            grid: vec![Tile::Empty; size * size],
            agent: (1, 1),
            heading: 0,
            carrying: None,
            door: (0, 0),
            step_count: 0,
            done: true,
        };
        env.reset(0)?;
        Ok(env)
    }

    pub fn tile(&self, p: Pos) -> Tile {
        self.grid[p.1 * self.size + p.0]
    }

    fn set(&mut self, p: Pos, t: Tile) {
        let s = self.size;
        self.grid[p.1 * s + p.0] = t;
    }

    pub fn agent(&self) -> (Pos, usize) {
        (self.agent, self.heading)
    }

    pub fn carrying(&self) -> Option<(u8, Color)> {
        self.carrying
    }

    pub fn door_color(&self) -> Color {
        match self.tile(self.door) {
            Tile::Door { color, .. } => color,
            _ => unreachable!("door cell always holds the door"),
        }
    }

    pub fn door_state(&self) -> DoorState {
        match self.tile(self.door) {
            Tile::Door { state, .. } => state,
            _ => unreachable!("door cell always holds the door"),
        }
    }

    fn offset(&self, p: Pos, d: (i64, i64), n: i64) -> Option<Pos> {
        let x = p.0 as i64 + d.0 * n;
        let y = p.1 as i64 + d.1 * n;
        (x >= 0 && y >= 0 && (x as usize) < self.size && (y as usize) < self.size)
            .then_some((x as usize, y as usize))
    }

    fn front(&self) -> Option<Pos> {
        self.offset(self.agent, HEADINGS[self.heading], 1)
    }

    /// World cell shown at view position `(vx, vy)`; the agent sits at
    /// `(3, 6)` looking towards `vy = 0`.
    fn view_cell(&self, vx: usize, vy: usize) -> Option<Pos> {
        let fwd = HEADINGS[self.heading];
        let right = HEADINGS[(self.heading + 1) % 4];
        let f = (VIEW - 1 - vy) as i64;
        let r = vx as i64 - (VIEW / 2) as i64;
        let x = self.agent.0 as i64 + fwd.0 * f + right.0 * r;
        let y = self.agent.1 as i64 + fwd.1 * f + right.1 * r;
        (x >= 0 && y >= 0 && (x as usize) < self.size && (y as usize) < self.size)
            .then_some((x as usize, y as usize))
    }

    fn visible_cells(&self) -> Vec<Pos> {
        let mut out = Vec::with_capacity(VIEW * VIEW);
        for vy in 0..VIEW {
            for vx in 0..VIEW {
                if let Some(p) = self.view_cell(vx, vy) {
                    out.push(p);
                }
            }
        }
        out
    }

    fn sample_layout(&mut self, rng: &mut ChaCha8Rng) -> bool {
        let s = self.size;
        self.grid = vec![Tile::Empty; s * s];
        for i in 0..s {
            self.set((i, 0), Tile::Wall);
            self.set((i, s - 1), Tile::Wall);
            self.set((0, i), Tile::Wall);
            self.set((s - 1, i), Tile::Wall);
        }
        self.set((s - 2, s - 2), Tile::Goal);

        let split = rng.random_range(2..=s - 3);
        for y in 0..s {
            self.set((split, y), Tile::Wall);
        }
        let door_y = rng.random_range(1..=s - 2);
        let door_color = Color::ALL[rng.random_range(0..Color::ALL.len())];
        self.door = (split, door_y);
        self.set(
            self.door,
            Tile::Door {
                color: door_color,
                state: DoorState::Locked,
            },
        );

        let mut left: Vec<Pos> = (1..split)
            .flat_map(|x| (1..s - 1).map(move |y| (x, y)))
            .collect();
        left.shuffle(rng);
        let agent = left[0];
        let key_cells: Vec<Pos> = left[1..]
            .iter()
            .copied()
            .filter(|&p| p != (split - 1, door_y))
            .take(self.config.keys)
            .collect();
        if key_cells.len() < self.config.keys {
            return false;
        }

        let mut colors = vec![door_color];
        if self.config.distractors_may_match_door {
            for _ in 1..self.config.keys {
                colors.push(Color::ALL[rng.random_range(0..Color::ALL.len())]);
            }
        } else {
            let mut others: Vec<Color> = Color::ALL.iter().copied().filter(|c| *c != door_color).collect();
            others.shuffle(rng);
            colors.extend(others.into_iter().take(self.config.keys - 1));
        }
        let mut ids: Vec<u8> = (1..=self.config.keys as u8).collect();
        ids.shuffle(rng);
        for ((cell, color), id) in key_cells.iter().zip(&colors).zip(&ids) {
            self.set(*cell, Tile::Key { id: *id, color: *color });
        }

        self.agent = agent;
        self.heading = rng.random_range(0..4);
        self.carrying = None;
        self.solvable(key_cells[0])
    }

    /// The matching key is reachable, and from it the door.
    fn solvable(&self, key: Pos) -> bool {
        let reach = |blocked_key: Option<Pos>| {
            let mut seen = HashSet::from([self.agent]);
            let mut stack = vec![self.agent];
            while let Some(p) = stack.pop() {
                for h in HEADINGS {
                    if let Some(n) = self.offset(p, h, 1) {
                        let free = match self.tile(n) {
                            Tile::Empty | Tile::Goal => true,
                            Tile::Key { .. } => Some(n) == blocked_key,
                            _ => false,
                        };
                        if free && seen.insert(n) {
                            stack.push(n);
                        }
                    }
                }
            }
            seen
        };
        let adjacent = |seen: &HashSet<Pos>, target: Pos| {
            HEADINGS
                .iter()
                .any(|h| self.offset(target, *h, 1).is_some_and(|n| seen.contains(&n)))
        };
        adjacent(&reach(None), key) && adjacent(&reach(Some(key)), self.door)
    }
}

impl Environment for DoorKey {
    fn task(&self) -> Task {
        Task::DoorKey {
            size: self.config.size,
            keys: self.config.keys,
        }
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
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut placed = false;
        for _ in 0..LAYOUT_ATTEMPTS {
            if self.sample_layout(&mut rng) {
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::Generation(format!(
                "could not place {} key(s) on a {}x{} grid after {LAYOUT_ATTEMPTS} attempts",
                self.config.keys, self.size, self.size
            )));
        }
        self.step_count = 0;
        self.done = false;
        Ok(self.observe())
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        check_step(self.done, action, NUM_ACTIONS)?;
        self.step_count += 1;
        let mut events = Vec::new();
        let mut success = false;
        match action {
            TURN_LEFT => self.heading = (self.heading + 3) % 4,
            TURN_RIGHT => self.heading = (self.heading + 1) % 4,
            FORWARD => {
                if let Some(next) = self.front() {
                    match self.tile(next) {
                        Tile::Empty
                        | Tile::Door {
                            state: DoorState::Open,
                            ..
                        } => self.agent = next,
                        Tile::Goal => {
                            self.agent = next;
                            success = true;
                            events.push("reached_goal");
                        }
                        _ => {}
                    }
                }
            }
            PICKUP => {
                if let Some(next) = self.front() {
                    if let (Tile::Key { id, color }, None) = (self.tile(next), self.carrying) {
                        self.carrying = Some((id, color));
                        self.set(next, Tile::Empty);
                        events.push("picked_key");
                        if color == self.door_color() {
                            events.push("got_key");
                        }
                    }
                }
            }
            TOGGLE => {
                if let Some(next) = self.front() {
                    if let Tile::Door { color, state } = self.tile(next) {
                        let new_state = match state {
                            DoorState::Locked if self.carrying.is_some_and(|(_, c)| c == color) => {
                                events.push("opened_door");
                                DoorState::Open
                            }
                            DoorState::Locked => DoorState::Locked,
                            DoorState::Closed => DoorState::Open,
                            DoorState::Open => DoorState::Closed,
                        };
                        self.set(next, Tile::Door { color, state: new_state });
                    }
                }
            }
            _ => unreachable!("action range checked"),
        }

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
        let mut obs = Vec::with_capacity(OBS_LEN);
        for vy in 0..VIEW {
            for vx in 0..VIEW {
                let tile = if (vx, vy) == (VIEW / 2, VIEW - 1) {
                    match self.carrying {
                        Some((id, color)) => Tile::Key { id, color },
                        None => Tile::Empty,
                    }
                } else {
                    self.view_cell(vx, vy).map_or(Tile::Wall, |p| self.tile(p))
                };
                let (t, c, s) = tile.encode();
                obs.push(t as f64 / 10.0);
                obs.push(c as f64 / 5.0);
                obs.push(s as f64 / 2.0);
            }
        }
        for d in 0..4 {
            obs.push(if d == self.heading { 1.0 } else { 0.0 });
        }
        obs
    }

    fn ground_state(&self) -> FactBase {
        let mut facts = FactBase::new();
        let mut keys: Vec<(String, Color)> = Vec::new();
        let mut doors: Vec<Color> = Vec::new();
        for p in self.visible_cells() {
            match self.tile(p) {
                Tile::Key { id, color } => {
                    let name = key_name(id);
                    facts.add("key", &[&name]);
                    keys.push((name, color));
                }
                Tile::Door { color, state } => {
                    facts.add("door", &[DOOR_ID]);
                    if state == DoorState::Locked {
                        facts.add("locked", &[DOOR_ID]);
                    }
                    doors.push(color);
                }
                Tile::Goal => facts.add("goal", &[GOAL_ID]),
                Tile::Empty | Tile::Wall => {}
            }
        }
        match self.carrying {
            Some((id, color)) => {
                let name = key_name(id);
                facts.add("carryingKey", &[&name]);
                keys.push((name, color));
            }
            None => facts.add("notCarrying", &[]),
        }
        for (key, kc) in &keys {
            for dc in &doors {
                if kc == dc {
                    facts.add("sameColor", &[key, DOOR_ID]);
                    facts.add("sameColor", &[DOOR_ID, key]);
                }
            }
        }
        if self.door_state() != DoorState::Locked {
            facts.add("unlocked", &[]);
        }
        facts
    }

    fn action_grounding(&self, action: usize) -> ActionGrounding {
        match action {
            TURN_LEFT | TURN_RIGHT | FORWARD => ActionGrounding::Navigation,
            PICKUP => match self.front().map(|p| self.tile(p)) {
                Some(Tile::Key { id, .. }) => ActionGrounding::Atom(GroundAtom::new("pickup", [key_name(id)])),
                _ => ActionGrounding::None,
            },
            TOGGLE => match self.front().map(|p| self.tile(p)) {
                Some(Tile::Door { .. }) => ActionGrounding::Atom(GroundAtom::new("toggle", [DOOR_ID])),
                _ => ActionGrounding::None,
            },
            _ => ActionGrounding::None,
        }
    }

    fn navigation(&self) -> Navigation {
        let mut walkable = Vec::with_capacity(self.grid.len());
        let mut targets = Vec::new();
        for y in 0..self.size {
            for x in 0..self.size {
                let tile = self.tile((x, y));
                walkable.push(match tile {
                    Tile::Empty | Tile::Goal => true,
                    Tile::Door { state: DoorState::Locked, color } => {
                        self.carrying.is_some_and(|(_, c)| c == color)
                    }
                    Tile::Door { .. } => true,
                    Tile::Key { .. } | Tile::Wall => false,
                });
                match tile {
                    Tile::Key { id, .. } => targets.push((key_name(id), (x, y))),
                    Tile::Door { .. } => targets.push((DOOR_ID.to_string(), (x, y))),
                    Tile::Goal => targets.push((GOAL_ID.to_string(), (x, y))),
                    _ => {}
                }
            }
        }
        Navigation::Grid(GridNav {
            width: self.size,
            height: self.size,
            walkable,
            blocked: HashSet::new(),
            agent: self.agent,
            motion: Motion::Egocentric {
                heading: self.heading,
                left: TURN_LEFT,
                right: TURN_RIGHT,
                forward: FORWARD,
            },
            targets,
        })
    }

    fn directive_predicates(&self) -> &'static [&'static str] {
        &["goto"]
    }

    fn label_alphabet(&self) -> &'static [&'static str] {
        LABELS
    }

    fn render(&self) -> String {
        let mut s = String::new();
        for y in 0..self.size {
            for x in 0..self.size {
                let c = if (x, y) == self.agent {
                    ['>', 'v', '<', '^'][self.heading]
                } else {
                    match self.tile((x, y)) {
                        Tile::Empty => '.',
                        Tile::Wall => '#',
                        Tile::Goal => 'G',
                        Tile::Key { .. } => 'k',
                        Tile::Door { state: DoorState::Open, .. } => '/',
                        Tile::Door { .. } => 'D',
                    }
                };
                s.push(c);
            }
            s.push('\n');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{bundled_policy, indicator_mask};

    fn env(size: usize, keys: usize, seed: u64) -> DoorKey {
        let mut e = DoorKey::new(DoorKeyConfig::new(size, keys)).unwrap();
        e.reset(seed).unwrap();
        e
    }

    fn count(e: &DoorKey, pred: impl Fn(Tile) -> bool) -> usize {
        e.grid.iter().filter(|t| pred(**t)).count()
    }

    #[test]
    fn one_key_layout_has_single_key_door_and_goal() {
        for seed in 0..50 {
            let e = env(8, 1, seed);
            assert_eq!(count(&e, |t| matches!(t, Tile::Key { .. })), 1);
            assert_eq!(count(&e, |t| matches!(t, Tile::Door { .. })), 1);
            assert_eq!(count(&e, |t| t == Tile::Goal), 1);
            assert_eq!(e.door_state(), DoorState::Locked);
        }
    }

    #[test]
    fn multi_key_layouts_have_exactly_one_matching_key() {
        for keys in [2, 4] {
            for seed in 0..50 {
                let e = env(8, keys, seed);
                let door = e.door_color();
                let colors: Vec<Color> = e
                    .grid
                    .iter()
                    .filter_map(|t| match t {
                        Tile::Key { color, .. } => Some(*color),
                        _ => None,
                    })
                    .collect();
                assert_eq!(colors.len(), keys);
                assert_eq!(colors.iter().filter(|c| **c == door).count(), 1);
                let distinct: HashSet<_> = colors.iter().collect();
                assert_eq!(distinct.len(), keys);
            }
        }
    }

    #[test]
    fn unsatisfiable_layout_is_a_generation_error() {
        // A 5x5 grid leaves at most 3 free cells on the agent's side.
        let mut e = DoorKey::new(DoorKeyConfig::new(5, 1)).unwrap();
        e.config.keys = 4;
        assert!(matches!(e.reset(1), Err(Error::Generation(_))));
    }

    #[test]
    fn same_seed_same_observation() {
        assert_eq!(env(8, 2, 17).observe(), env(8, 2, 17).observe());
        assert_eq!(env(8, 2, 17).observe().len(), OBS_LEN);
    }

    /// Builds a fixed 8x8 layout: wall at x=4, door at (4,3), key at (2,3),
    /// agent at (1,3) facing right.
    fn fixed(color: Color) -> DoorKey {
        let mut e = env(8, 1, 0);
        let s = e.size;
        e.grid = vec![Tile::Empty; s * s];
        for i in 0..s {
            e.set((i, 0), Tile::Wall);
            e.set((i, s - 1), Tile::Wall);
            e.set((0, i), Tile::Wall);
            e.set((s - 1, i), Tile::Wall);
            e.set((4, i), Tile::Wall);
        }
        e.set((6, 6), Tile::Goal);
        e.door = (4, 3);
        e.set((4, 3), Tile::Door { color, state: DoorState::Locked });
        e.set((2, 3), Tile::Key { id: 1, color });
        e.agent = (1, 3);
        e.heading = 0;
        e.carrying = None;
        e
    }

    #[test]
    fn toggle_with_matching_key_unlocks_the_door() {
        let mut e = fixed(Color::Yellow);
        let r = e.step(PICKUP).unwrap();
        assert!(r.events.contains(&"got_key"));
        assert_eq!(e.carrying, Some((1, Color::Yellow)));
        e.step(FORWARD).unwrap();
        e.step(FORWARD).unwrap();
        assert_eq!(e.agent, (3, 3));
        let r = e.step(TOGGLE).unwrap();
        assert!(r.events.contains(&"opened_door"));
        assert_eq!(e.door_state(), DoorState::Open);
    }

    #[test]
    fn toggle_with_wrong_key_keeps_door_locked() {
        let mut e = fixed(Color::Yellow);
        e.set((2, 3), Tile::Key { id: 1, color: Color::Red });
        e.step(PICKUP).unwrap();
        e.step(FORWARD).unwrap();
        e.step(FORWARD).unwrap();
        e.step(TOGGLE).unwrap();
        assert_eq!(e.door_state(), DoorState::Locked);
    }

    #[test]
    fn facts_for_visible_matching_key_and_door() {
        let e = fixed(Color::Yellow);
        let f = e.ground_state();
        assert!(f.contains_atom(&GroundAtom::new("sameColor", ["k1", "d1"])));
        assert!(f.contains_atom(&GroundAtom::new("sameColor", ["d1", "k1"])));
        assert!(f.contains_atom(&GroundAtom::new("key", ["k1"])));
        assert!(f.contains_atom(&GroundAtom::new("locked", ["d1"])));
        assert!(f.contains_atom(&GroundAtom::prop("notCarrying")));
        assert!(f.validate(&vocabulary()).is_ok());
    }

    #[test]
    fn carrying_and_not_carrying_are_exclusive() {
        let mut e = fixed(Color::Blue);
        e.step(PICKUP).unwrap();
        let f = e.ground_state();
        assert!(f.contains_atom(&GroundAtom::new("carryingKey", ["k1"])));
        assert!(!f.contains_atom(&GroundAtom::prop("notCarrying")));
    }

    #[test]
    fn pickup_and_toggle_groundings() {
        let mut e = fixed(Color::Yellow);
        assert_eq!(
            e.action_grounding(PICKUP),
            ActionGrounding::Atom(GroundAtom::new("pickup", ["k1"]))
        );
        assert_eq!(e.action_grounding(TOGGLE), ActionGrounding::None);
        e.step(PICKUP).unwrap();
        assert_eq!(e.action_grounding(TOGGLE), ActionGrounding::None);
        assert_eq!(e.action_grounding(PICKUP), ActionGrounding::None);
    }

    #[test]
    fn mask_follows_the_rules_through_an_episode() {
        let policy = bundled_policy(Task::DoorKey { size: 8, keys: 1 }).unwrap();
        let mut e = fixed(Color::Yellow);
        let mask = |e: &DoorKey| indicator_mask(&policy, &e.ground_state(), e).unwrap();
        assert_eq!(mask(&e).bits(), &[false, false, false, true, false]);
        e.step(PICKUP).unwrap();
        e.step(FORWARD).unwrap();
        e.step(FORWARD).unwrap();
        assert_eq!(mask(&e).bits(), &[false, false, false, false, true]);
        e.step(TOGGLE).unwrap();
        // Door open: goal directive, forward through the doorway decreases distance.
        assert_eq!(mask(&e).bits(), &[false, false, true, false, false]);
    }

    #[test]
    fn observation_ignores_cells_outside_the_view() {
        let mut a = fixed(Color::Yellow);
        a.agent = (1, 1);
        a.heading = 2; // facing the west wall
        let mut b = a.clone();
        b.set((6, 6), Tile::Empty);
        b.set((6, 5), Tile::Goal);
        assert_eq!(a.observe(), b.observe());
    }

    #[test]
    fn reaching_goal_pays_sparse_reward() {
        let mut e = fixed(Color::Yellow);
        e.set(e.door, Tile::Door { color: Color::Yellow, state: DoorState::Open });
        e.agent = (6, 5);
        e.heading = 1;
        e.step_count = 63;
        let r = e.step(FORWARD).unwrap();
        assert!(r.success && r.done && !r.truncated);
        assert!((r.reward - 0.91).abs() < 1e-12);
        assert!(matches!(e.step(FORWARD), Err(Error::Usage(_))));
    }

    #[test]
    fn time_limit_truncates() {
        let mut e = env(8, 1, 3);
        let mut last = None;
        for _ in 0..640 {
            last = Some(e.step(TURN_LEFT).unwrap());
        }
        let last = last.unwrap();
        assert!(last.done && last.truncated && !last.success);
        assert_eq!(last.reward, 0.0);
    }
}
