//! The 12×9 office gridworld with coffee, mail, an office, four rooms and
//! plants to avoid. `y` grows upwards; walls are thin and sit between cells.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::env::{check_step, sparse_reward, ActionGrounding, Environment, StepResult, Task};
use crate::error::{Error, Result};
use crate::logic::nav::{Cell, GridNav, Motion, Navigation};
use crate::logic::{FactBase, Vocabulary};

pub const UP: usize = 0;
pub const DOWN: usize = 1;
pub const LEFT: usize = 2;
pub const RIGHT: usize = 3;
pub const NUM_ACTIONS: usize = 4;

pub const WIDTH: usize = 12;
pub const HEIGHT: usize = 9;
/// Normalized coordinates plus the five task flags.
pub const OBS_LEN: usize = 7;
/// `OBS_LEN` followed by a one-hot of the agent's cell.
pub const OBS_LEN_ONE_HOT: usize = OBS_LEN + WIDTH * HEIGHT;
pub const START: Cell = (2, 1);

const MOVES: [(i64, i64); 4] = [(0, 1), (0, -1), (-1, 0), (1, 0)];

const LABELS: &[&str] = &[
    "got_coffee",
    "got_mail",
    "at_office",
    "at_room_a",
    "at_room_b",
    "at_room_c",
    "at_room_d",
    "hit_plant",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OfficeTask {
    DeliverCoffee,
    DeliverCoffeeAndMail,
    #[serde(rename = "patrol_ab")]
    PatrolAB,
    #[serde(rename = "patrol_abc")]
    PatrolABC,
}

impl From<OfficeTask> for Task {
    fn from(t: OfficeTask) -> Task {
        match t {
            OfficeTask::DeliverCoffee => Task::DeliverCoffee,
            OfficeTask::DeliverCoffeeAndMail => Task::DeliverCoffeeAndMail,
            OfficeTask::PatrolAB => Task::PatrolAB,
            OfficeTask::PatrolABC => Task::PatrolABC,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfficeWorldConfig {
    pub task: OfficeTask,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    /// Append a one-hot of the agent's cell to the observation. A small
    /// MLP cannot carve the walls and plants out of two coordinates alone.
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub one_hot_position: bool,
}

fn yes() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

impl OfficeWorldConfig {
    pub fn new(task: OfficeTask) -> Self {
        Self {
            task,
            max_steps: None,
            one_hot_position: true,
        }
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps.unwrap_or(WIDTH * HEIGHT * 10)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_steps == Some(0) {
            return Err(Error::Config("max_steps must be positive".into()));
        }
        Ok(())
    }
}

pub fn vocabulary() -> Vocabulary {
    Vocabulary::new(
        &[("goto", 1)],
        &[
            ("coffee", 1),
            ("mail", 1),
            ("office", 1),
            ("room_a", 1),
            ("room_b", 1),
            ("room_c", 1),
            ("room_d", 1),
            ("HasCoffee", 0),
            ("HasMail", 0),
            ("visited_a", 0),
            ("visited_b", 0),
            ("visited_c", 0),
            ("notHittingPlants", 0),
        ],
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Object {
    Room(char),
    Mail,
    Coffee,
    Office,
    Plant,
}

/// Fixed map objects. Both coffee machines share the constant `coffee`, so
/// a `goto(coffee)` directive heads for whichever is nearer.
pub const OBJECTS: [(Cell, Object, &str); 14] = [
    ((1, 1), Object::Room('a'), "rooma"),
    ((1, 7), Object::Room('b'), "roomb"),
    ((10, 7), Object::Room('c'), "roomc"),
    ((10, 1), Object::Room('d'), "roomd"),
    ((7, 4), Object::Mail, "mail"),
    ((8, 2), Object::Coffee, "coffee"),
    ((3, 6), Object::Coffee, "coffee"),
    ((4, 4), Object::Office, "office"),
    ((4, 1), Object::Plant, "plant"),
    ((7, 1), Object::Plant, "plant"),
    ((4, 7), Object::Plant, "plant"),
    ((7, 7), Object::Plant, "plant"),
    ((1, 4), Object::Plant, "plant"),
    ((10, 4), Object::Plant, "plant"),
];

pub fn object_at(c: Cell) -> Option<Object> {
    OBJECTS.iter().find(|(p, _, _)| *p == c).map(|(_, o, _)| *o)
}

/// Directed moves blocked by walls, as `(cell, action)` pairs.
fn forbidden() -> HashSet<(Cell, usize)> {
    let mut f = HashSet::new();
    for x in 0..WIDTH {
        for y in [0, 3, 6] {
            f.insert(((x, y), DOWN));
            f.insert(((x, y + 2), UP));
        }
    }
    for y in 0..HEIGHT {
        for x in [0, 3, 6, 9] {
            f.insert(((x, y), LEFT));
            f.insert(((x + 2, y), RIGHT));
        }
    }
    for y in [1, 7] {
        for x in [2, 5, 8] {
            f.remove(&((x, y), RIGHT));
            f.remove(&((x + 1, y), LEFT));
        }
    }
    for x in [1, 4, 7, 10] {
        f.remove(&((x, 5), UP));
        f.remove(&((x, 6), DOWN));
    }
    for x in [1, 10] {
        f.remove(&((x, 2), UP));
        f.remove(&((x, 3), DOWN));
    }
    f
}

#[derive(Debug, Clone)]
pub struct OfficeWorld {
    config: OfficeWorldConfig,
    max_steps: usize,
    forbidden: HashSet<(Cell, usize)>,
    agent: Cell,
    has_coffee: bool,
    has_mail: bool,
    visited: [bool; 3],
    step_count: usize,
    done: bool,
}

impl OfficeWorld {
    pub fn new(config: OfficeWorldConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            max_steps: config.max_steps(),
            config,
            forbidden: forbidden(),
            agent: START,
            has_coffee: false,
            has_mail: false,
            visited: [false; 3],
            step_count: 0,
            done: false,
        })
    }

    pub fn agent(&self) -> Cell {
        self.agent
    }

    pub fn set_agent(&mut self, c: Cell) {
        self.agent = c;
    }

    pub fn has_coffee(&self) -> bool {
        self.has_coffee
    }

    pub fn has_mail(&self) -> bool {
        self.has_mail
    }

    pub fn visited(&self) -> [bool; 3] {
        self.visited
    }

    fn target(&self, from: Cell, action: usize) -> Option<Cell> {
        if self.forbidden.contains(&(from, action)) {
            return None;
        }
        let (dx, dy) = MOVES[action];
        let x = from.0 as i64 + dx;
        let y = from.1 as i64 + dy;
        (x >= 0 && y >= 0 && (x as usize) < WIDTH && (y as usize) < HEIGHT).then_some((x as usize, y as usize))
    }

    fn succeeded(&self) -> bool {
        match self.config.task {
            OfficeTask::DeliverCoffee => self.has_coffee && object_at(self.agent) == Some(Object::Office),
            OfficeTask::DeliverCoffeeAndMail => {
                self.has_coffee && self.has_mail && object_at(self.agent) == Some(Object::Office)
            }
            OfficeTask::PatrolAB => self.visited[1],
            OfficeTask::PatrolABC => self.visited[2],
        }
    }
}

impl Environment for OfficeWorld {
    fn task(&self) -> Task {
        self.config.task.into()
    }

    fn num_actions(&self) -> usize {
        NUM_ACTIONS
    }

    fn observation_len(&self) -> usize {
        if self.config.one_hot_position {
            OBS_LEN_ONE_HOT
        } else {
            OBS_LEN
        }
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

    /// The map and start cell are fixed; the seed is accepted for interface
    /// uniformity.
    fn reset(&mut self, _seed: u64) -> Result<Vec<f64>> {
        self.agent = START;
        self.has_coffee = false;
        self.has_mail = false;
        self.visited = [false; 3];
        self.step_count = 0;
        self.done = false;
        Ok(self.observe())
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        check_step(self.done, action, NUM_ACTIONS)?;
        self.step_count += 1;
        let mut events = Vec::new();
        let mut failed = false;
        if let Some(next) = self.target(self.agent, action) {
            self.agent = next;
            match object_at(next) {
                Some(Object::Coffee) => {
                    self.has_coffee = true;
                    events.push("got_coffee");
                }
                Some(Object::Mail) => {
                    self.has_mail = true;
                    events.push("got_mail");
                }
                Some(Object::Office) => events.push("at_office"),
                Some(Object::Room(r)) => {
                    events.push(match r {
                        'a' => "at_room_a",
                        'b' => "at_room_b",
                        'c' => "at_room_c",
                        _ => "at_room_d",
                    });
                    match r {
                        'a' => self.visited[0] = true,
                        'b' if self.visited[0] => self.visited[1] = true,
                        'c' if self.visited[1] => self.visited[2] = true,
                        _ => {}
                    }
                }
                Some(Object::Plant) => {
                    events.push("hit_plant");
                    failed = true;
                }
                None => {}
            }
        }
        let success = !failed && self.succeeded();
        let reward = sparse_reward(self.step_count, self.max_steps, success);
        let truncated = !success && !failed && self.step_count >= self.max_steps;
        self.done = success || failed || truncated;
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
        let bit = |b: bool| if b { 1.0 } else { 0.0 };
        let mut obs = vec![
            self.agent.0 as f64 / (WIDTH - 1) as f64,
            self.agent.1 as f64 / (HEIGHT - 1) as f64,
            bit(self.has_coffee),
            bit(self.has_mail),
            bit(self.visited[0]),
            bit(self.visited[1]),
            bit(self.visited[2]),
        ];
        if self.config.one_hot_position {
            let cell = self.agent.1 as usize * WIDTH + self.agent.0 as usize;
            obs.extend((0..WIDTH * HEIGHT).map(|i| bit(i == cell)));
        }
        obs
    }

    fn ground_state(&self) -> FactBase {
        let mut f = FactBase::new();
        for (_, obj, name) in OBJECTS {
            match obj {
                Object::Coffee => f.add("coffee", &[name]),
                Object::Mail => f.add("mail", &[name]),
                Object::Office => f.add("office", &[name]),
                Object::Room('a') => f.add("room_a", &[name]),
                Object::Room('b') => f.add("room_b", &[name]),
                Object::Room('c') => f.add("room_c", &[name]),
                Object::Room(_) => f.add("room_d", &[name]),
                Object::Plant => {}
            }
        }
        if self.has_coffee {
            f.add("HasCoffee", &[]);
        }
        if self.has_mail {
            f.add("HasMail", &[]);
        }
        for (flag, name) in self.visited.iter().zip(["visited_a", "visited_b", "visited_c"]) {
            if *flag {
                f.add(name, &[]);
            }
        }
        if object_at(self.agent) != Some(Object::Plant) {
            f.add("notHittingPlants", &[]);
        }
        f
    }

    fn action_grounding(&self, _action: usize) -> ActionGrounding {
        ActionGrounding::Navigation
    }

    /// Plants are not walkable, so directives route around them.
    fn navigation(&self) -> Navigation {
        let mut walkable = vec![true; WIDTH * HEIGHT];
        let mut targets = Vec::new();
        for (c, obj, name) in OBJECTS {
            if obj == Object::Plant {
                walkable[c.1 * WIDTH + c.0] = false;
            } else {
                targets.push((name.to_string(), c));
            }
        }
        let blocked = self
            .forbidden
            .iter()
            .filter_map(|&(c, a)| {
                let (dx, dy) = MOVES[a];
                let x = c.0 as i64 + dx;
                let y = c.1 as i64 + dy;
                (x >= 0 && y >= 0 && (x as usize) < WIDTH && (y as usize) < HEIGHT)
                    .then_some((c, (x as usize, y as usize)))
            })
            .collect();
        Navigation::Grid(GridNav {
            width: WIDTH,
            height: HEIGHT,
            walkable,
            blocked,
            agent: self.agent,
            motion: Motion::Absolute {
                moves: MOVES.iter().copied().enumerate().collect(),
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
        for y in (0..HEIGHT).rev() {
            for x in 0..WIDTH {
                let c = if (x, y) == self.agent {
                    'A'
                } else {
                    match object_at((x, y)) {
                        Some(Object::Room(r)) => r,
                        Some(Object::Mail) => 'e',
                        Some(Object::Coffee) => 'f',
                        Some(Object::Office) => 'g',
                        Some(Object::Plant) => '*',
                        None => '.',
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

    fn env(task: OfficeTask) -> OfficeWorld {
        let mut e = OfficeWorld::new(OfficeWorldConfig::new(task)).unwrap();
        e.reset(0).unwrap();
        e
    }

    #[test]
    fn walls_block_moves() {
        let mut e = env(OfficeTask::DeliverCoffee);
        // (2,1) -> (3,1) crosses the door at y=1; (2,2) -> (2,3) is walled.
        e.set_agent((2, 2));
        let r = e.step(UP).unwrap();
        assert_eq!(e.agent(), (2, 2));
        assert_eq!(r.reward, 0.0);
        assert!(!r.done);
        e.set_agent((2, 1));
        e.step(RIGHT).unwrap();
        assert_eq!(e.agent(), (3, 1));
    }

    #[test]
    fn grid_edges_block_moves() {
        let mut e = env(OfficeTask::DeliverCoffee);
        e.set_agent((0, 0));
        e.step(DOWN).unwrap();
        e.step(LEFT).unwrap();
        assert_eq!(e.agent(), (0, 0));
    }

    #[test]
    fn coffee_flag_flips_and_nothing_else_changes() {
        let mut e = env(OfficeTask::DeliverCoffee);
        e.set_agent((7, 2));
        let before = e.observe();
        e.step(RIGHT).unwrap();
        e.step(LEFT).unwrap();
        let after = e.observe();
        assert_eq!(before[2], 0.0);
        assert_eq!(after[2], 1.0);
        for i in (0..before.len()).filter(|&i| i != 2) {
            assert_eq!(before[i], after[i]);
        }
    }

    #[test]
    fn one_hot_block_marks_the_agent_cell() {
        let mut e = env(OfficeTask::DeliverCoffee);
        e.set_agent((5, 3));
        let obs = e.observe();
        assert_eq!(obs.len(), OBS_LEN_ONE_HOT);
        let hot: Vec<usize> = (OBS_LEN..obs.len()).filter(|&i| obs[i] == 1.0).collect();
        assert_eq!(hot, vec![OBS_LEN + 3 * WIDTH + 5]);

        let mut config = OfficeWorldConfig::new(OfficeTask::DeliverCoffee);
        config.one_hot_position = false;
        let mut plain = OfficeWorld::new(config).unwrap();
        assert_eq!(plain.reset(0).unwrap().len(), OBS_LEN);
        assert_eq!(plain.observation_len(), OBS_LEN);
    }

    #[test]
    fn plant_ends_episode_without_reward() {
        let mut e = env(OfficeTask::DeliverCoffee);
        e.set_agent((4, 2));
        let r = e.step(DOWN).unwrap();
        assert!(r.done && !r.success && !r.truncated);
        assert_eq!(r.reward, 0.0);
        assert_eq!(r.events, vec!["hit_plant"]);
    }

    #[test]
    fn coffee_delivery_succeeds() {
        let mut e = env(OfficeTask::DeliverCoffee);
        e.set_agent((4, 6));
        e.step(LEFT).unwrap();
        assert!(e.has_coffee());
        e.set_agent((4, 5));
        let r = e.step(DOWN).unwrap();
        assert!(r.success && r.done);
        assert!((r.reward - (1.0 - 0.9 * 2.0 / 1080.0)).abs() < 1e-12);
    }

    #[test]
    fn rooms_are_visited_in_order() {
        let mut e = env(OfficeTask::PatrolABC);
        e.set_agent((1, 6));
        e.step(UP).unwrap();
        assert_eq!(e.visited(), [false; 3]);
        e.set_agent((2, 1));
        e.step(LEFT).unwrap();
        assert_eq!(e.visited(), [true, false, false]);
    }

    #[test]
    fn movement_actions_are_navigation_candidates() {
        let e = env(OfficeTask::DeliverCoffee);
        for a in 0..NUM_ACTIONS {
            assert_eq!(e.action_grounding(a), ActionGrounding::Navigation);
        }
    }

    #[test]
    fn coffee_rules_lead_to_coffee_then_office() {
        let policy = bundled_policy(Task::DeliverCoffee).unwrap();
        let mut e = env(OfficeTask::DeliverCoffee);
        let mut steps = 0;
        while !e.is_done() {
            let facts = e.ground_state();
            facts.validate(&vocabulary()).unwrap();
            let mask = indicator_mask(&policy, &facts, &e).unwrap();
            let a = mask.bits().iter().position(|b| *b).expect("mask never empty before delivery");
            e.step(a).unwrap();
            steps += 1;
        }
        assert!(e.succeeded());
        assert!(steps <= 40, "took {steps} steps");
    }

    #[test]
    fn patrol_rules_visit_rooms() {
        let policy = bundled_policy(Task::PatrolABC).unwrap();
        let mut e = env(OfficeTask::PatrolABC);
        while !e.is_done() {
            let mask = indicator_mask(&policy, &e.ground_state(), &e).unwrap();
            let a = mask.bits().iter().position(|b| *b).unwrap();
            let r = e.step(a).unwrap();
            assert!(!r.events.contains(&"hit_plant"));
        }
        assert_eq!(e.visited(), [true; 3]);
    }
}
