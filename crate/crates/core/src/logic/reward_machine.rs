//! Reward machines: finite automata over per-step event labels, used by the
//! shaping baseline to reward progress along a task's subgoals.

use std::collections::BTreeSet;

use crate::env::Task;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RmState {
    pub name: String,
    /// Position in the progress order; larger means closer to acceptance.
    pub level: i32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RmEdge {
    pub from: usize,
    pub to: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewardMachine {
    states: Vec<RmState>,
    initial: usize,
    accepting: BTreeSet<usize>,
    /// Checked in order; the first edge out of the current state whose label
    /// occurs in the event set fires.
    edges: Vec<RmEdge>,
    sink: Option<usize>,
}

impl RewardMachine {
    pub fn states(&self) -> &[RmState] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, u: usize) -> bool {
        self.accepting.contains(&u)
    }

    pub fn edges(&self) -> &[RmEdge] {
        &self.edges
    }

    pub fn sink(&self) -> Option<usize> {
        self.sink
    }

    /// Every label mentioned on an edge.
    pub fn alphabet(&self) -> BTreeSet<&str> {
        self.edges.iter().map(|e| e.label.as_str()).collect()
    }

    /// Adds an absorbing, non-accepting failure state entered from every
    /// other non-accepting state on `label`. Entering it counts as a regress.
    pub fn with_failure_sink(mut self, label: &str) -> Self {
        let sink = self.states.len();
        self.states.push(RmState {
            name: "fail".into(),
            level: i32::MIN,
        });
        let mut edges: Vec<RmEdge> = (0..sink)
            .filter(|u| !self.accepting.contains(u))
            .map(|u| RmEdge {
                from: u,
                to: sink,
                label: label.to_string(),
            })
            .collect();
        edges.append(&mut self.edges);
        self.edges = edges;
        self.sink = Some(sink);
        self
    }

    /// Next state and progress signal: `+1` forward, `-1` backward or into
    /// the failure sink, `0` when staying put.
    pub fn transition<S: AsRef<str>>(&self, u: usize, events: &[S]) -> (usize, i32) {
        if self.accepting.contains(&u) || Some(u) == self.sink {
            return (u, 0);
        }
        let fired = self
            .edges
            .iter()
            .filter(|e| e.from == u)
            .find(|e| events.iter().any(|ev| ev.as_ref() == e.label));
        let Some(edge) = fired else { return (u, 0) };
        let next = edge.to;
        let delta = if Some(next) == self.sink {
            -1
        } else {
            (self.states[next].level - self.states[u].level).signum()
        };
        (next, delta)
    }
}

struct Builder {
    states: Vec<RmState>,
    edges: Vec<RmEdge>,
    accepting: BTreeSet<usize>,
}

impl Builder {
    fn new() -> Self {
        Self {
            states: Vec::new(),
            edges: Vec::new(),
            accepting: BTreeSet::new(),
        }
    }

    fn state(&mut self, name: &str, level: i32) -> usize {
        self.states.push(RmState {
            name: name.into(),
            level,
        });
        self.states.len() - 1
    }

    fn edge(&mut self, from: usize, label: &str, to: usize) {
        self.edges.push(RmEdge {
            from,
            to,
            label: label.into(),
        });
    }

    fn chain(mut self, labels: &[&str]) -> RewardMachine {
        let mut prev = self.state("u0", 0);
        for (i, label) in labels.iter().enumerate() {
            let next = self.state(&format!("u{}", i + 1), i as i32 + 1);
            self.edge(prev, label, next);
            prev = next;
        }
        self.accepting.insert(prev);
        self.finish()
    }

    fn finish(self) -> RewardMachine {
        RewardMachine {
            states: self.states,
            initial: 0,
            accepting: self.accepting,
            edges: self.edges,
            sink: None,
        }
    }
}

/// Product automaton over independent colour sequences: each state records
/// how far every sequence has progressed.
fn sequences(seqs: &[&[&str]]) -> RewardMachine {
    let mut b = Builder::new();
    let dims: Vec<usize> = seqs.iter().map(|s| s.len() + 1).collect();
    let total: usize = dims.iter().product();
    let decode = |mut i: usize| {
        let mut p = Vec::with_capacity(dims.len());
        for d in &dims {
            p.push(i % d);
            i /= d;
        }
        p
    };
    let encode = |p: &[usize]| p.iter().zip(&dims).rev().fold(0, |acc, (x, d)| acc * d + x);
    for i in 0..total {
        let p = decode(i);
        let name = format!("u{}", p.iter().map(|x| x.to_string()).collect::<String>());
        b.state(&name, p.iter().sum::<usize>() as i32);
    }
    for i in 0..total {
        let p = decode(i);
        for (s, seq) in seqs.iter().enumerate() {
            if p[s] < seq.len() {
                let mut q = p.clone();
                q[s] += 1;
                b.edge(i, &format!("touched_{}", seq[p[s]]), encode(&q));
            }
        }
    }
    let done: Vec<usize> = seqs.iter().map(|s| s.len()).collect();
    b.accepting.insert(encode(&done));
    b.finish()
}

/// The subgoal automaton for a task.
pub fn build_reward_machine(task: Task) -> RewardMachine {
    match task {
        Task::DoorKey { .. } => Builder::new().chain(&["got_key", "opened_door", "reached_goal"]),
        Task::DeliverCoffee => Builder::new().chain(&["got_coffee", "at_office"]),
        Task::DeliverCoffeeAndMail => {
            let mut b = Builder::new();
            let start = b.state("u0", 0);
            let coffee = b.state("coffee", 1);
            let mail = b.state("mail", 1);
            let both = b.state("coffee_mail", 2);
            let done = b.state("delivered", 3);
            b.edge(start, "got_coffee", coffee);
            b.edge(start, "got_mail", mail);
            b.edge(coffee, "got_mail", both);
            b.edge(mail, "got_coffee", both);
            b.edge(both, "at_office", done);
            b.accepting.insert(done);
            b.finish()
        }
        Task::PatrolAB => Builder::new().chain(&["at_room_a", "at_room_b"]),
        Task::PatrolABC => Builder::new().chain(&["at_room_a", "at_room_b", "at_room_c"]),
        Task::RedGreen => sequences(&[&["red", "green"]]),
        Task::RedGreenBlueCyan => sequences(&[&["red", "green"], &["blue", "cyan"]]),
        Task::RedGreenBlueCyanMagentaYellow => {
            sequences(&[&["red", "green"], &["blue", "cyan"], &["magenta", "yellow"]])
        }
    }
}

/// [`build_reward_machine`] keyed by task id, e.g. `"deliver_coffee"`.
pub fn build_reward_machine_by_id(task: &str) -> Result<RewardMachine> {
    Ok(build_reward_machine(task.parse()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    const NONE: [&str; 0] = [];

    #[test]
    fn deliver_coffee_has_three_chained_states() {
        let rm = build_reward_machine(Task::DeliverCoffee);
        assert_eq!(rm.num_states(), 3);
        assert_eq!(rm.transition(0, &["got_coffee"]), (1, 1));
        assert_eq!(rm.transition(1, &NONE), (1, 0));
        assert_eq!(rm.transition(1, &["at_office"]), (2, 1));
        assert!(rm.is_accepting(2));
        assert_eq!(rm.transition(2, &["got_coffee", "at_office"]), (2, 0));
    }

    #[test]
    fn office_before_coffee_is_a_self_loop() {
        let rm = build_reward_machine(Task::DeliverCoffee);
        assert_eq!(rm.transition(0, &["at_office"]), (0, 0));
    }

    #[test]
    fn patrol_abc_chains_rooms_in_order() {
        let rm = build_reward_machine(Task::PatrolABC);
        assert_eq!(rm.num_states(), 4);
        assert_eq!(rm.transition(0, &["at_room_b"]), (0, 0));
        assert_eq!(rm.transition(0, &["at_room_a"]), (1, 1));
        assert_eq!(rm.transition(1, &["at_room_b"]), (2, 1));
        assert_eq!(rm.transition(2, &["at_room_c"]), (3, 1));
    }

    #[test]
    fn coffee_and_mail_commute() {
        let rm = build_reward_machine(Task::DeliverCoffeeAndMail);
        let (u, _) = rm.transition(0, &["got_mail"]);
        let (u, d) = rm.transition(u, &["got_coffee"]);
        assert_eq!(d, 1);
        let (u, _) = rm.transition(u, &["at_office"]);
        assert!(rm.is_accepting(u));
    }

    #[test]
    fn failure_sink_is_absorbing_and_regressive() {
        let rm = build_reward_machine(Task::DeliverCoffee).with_failure_sink("hit_plant");
        assert_eq!(rm.num_states(), 4);
        let (u, d) = rm.transition(1, &["hit_plant"]);
        assert_eq!((Some(u), d), (rm.sink(), -1));
        assert_eq!(rm.transition(u, &["got_coffee"]), (u, 0));
    }

    #[test]
    fn water_sequences_multiply_out() {
        assert_eq!(build_reward_machine(Task::RedGreen).num_states(), 3);
        let rm = build_reward_machine(Task::RedGreenBlueCyan);
        assert_eq!(rm.num_states(), 9);
        let (u, d) = rm.transition(0, &["touched_blue"]);
        assert_eq!(d, 1);
        let (u, _) = rm.transition(u, &["touched_red"]);
        let (u, _) = rm.transition(u, &["touched_cyan"]);
        let (u, _) = rm.transition(u, &["touched_green"]);
        assert!(rm.is_accepting(u));
    }

    #[test]
    fn unknown_task_id_is_a_config_error() {
        assert!(matches!(
            build_reward_machine_by_id("deliver_tea"),
            Err(crate::Error::Config(_))
        ));
    }

    #[test]
    fn exactly_one_successor_for_every_event_subset() {
        for task in Task::all() {
            let rm = build_reward_machine(task).with_failure_sink("hit_plant");
            let alphabet: Vec<&str> = rm.alphabet().into_iter().collect();
            assert!(alphabet.len() <= 12);
            for u in 0..rm.num_states() {
                for bits in 0u32..(1 << alphabet.len()) {
                    let events: Vec<&str> = alphabet
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| bits & (1 << i) != 0)
                        .map(|(_, l)| *l)
                        .collect();
                    let (a, da) = rm.transition(u, &events);
                    let (b, db) = rm.transition(u, &events);
                    assert_eq!((a, da), (b, db));
                    assert!(a < rm.num_states());
                    if events.is_empty() {
                        assert_eq!((a, da), (u, 0));
                    }
                }
            }
        }
    }
}
