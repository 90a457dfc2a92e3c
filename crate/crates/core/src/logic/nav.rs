//! Resolution of navigation directives (`goto(X)`, `touch(C)`) into sets of
//! low-level actions.

use std::collections::{BTreeSet, HashSet, VecDeque};

use crate::error::{Error, Result};

/// Cell coordinates `(x, y)`.
pub type Cell = (usize, usize);

/// Unit steps in grid coordinates for the four headings, in the order
/// right, down, left, up (clockwise when `y` grows downwards).
pub const HEADINGS: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

#[derive(Debug, Clone, PartialEq)]
pub enum Motion {
    /// Turn-left / turn-right / forward control; `heading` indexes [`HEADINGS`].
    Egocentric {
        heading: usize,
        left: usize,
        right: usize,
        forward: usize,
    },
    /// One action per absolute displacement.
    Absolute { moves: Vec<(usize, (i64, i64))> },
}

/// What the resolver needs to know about a grid world.
#[derive(Debug, Clone, PartialEq)]
pub struct GridNav {
    pub width: usize,
    pub height: usize,
    /// Cells the agent may stand on while planning.
    pub walkable: Vec<bool>,
    /// Directed moves `(from, to)` blocked by thin walls between cells.
    pub blocked: HashSet<(Cell, Cell)>,
    pub agent: Cell,
    pub motion: Motion,
    /// Named objects that directives can point at (several cells may share a name).
    pub targets: Vec<(String, Cell)>,
}

impl GridNav {
    fn index(&self, c: Cell) -> usize {
        c.1 * self.width + c.0
    }

    fn offset(&self, c: Cell, d: (i64, i64)) -> Option<Cell> {
        let x = c.0 as i64 + d.0;
        let y = c.1 as i64 + d.1;
        (x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height)
            .then_some((x as usize, y as usize))
    }

    fn can_move(&self, from: Cell, to: Cell) -> bool {
        !self.blocked.contains(&(from, to))
    }

    /// Shortest-path distance from every cell to any of `goals`, moving
    /// through walkable cells (the goal cells themselves need not be walkable).
    pub fn distances_to(&self, goals: &[Cell]) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.width * self.height];
        let mut queue = VecDeque::new();
        for &g in goals {
            let i = self.index(g);
            if dist[i].is_none() {
                dist[i] = Some(0);
                queue.push_back(g);
            }
        }
        while let Some(cell) = queue.pop_front() {
            let d = dist[self.index(cell)].unwrap();
            for h in HEADINGS {
                let Some(prev) = self.offset(cell, h) else { continue };
                let pi = self.index(prev);
                let walkable = self.walkable[pi] || prev == self.agent;
                if dist[pi].is_none() && walkable && self.can_move(prev, cell) {
                    dist[pi] = Some(d + 1);
                    queue.push_back(prev);
                }
            }
        }
        dist
    }

    fn resolve(&self, target: &str) -> Result<BTreeSet<usize>> {
        let goals: Vec<Cell> = self
            .targets
            .iter()
            .filter(|(name, _)| name == target)
            .map(|(_, c)| *c)
            .collect();
        if goals.is_empty() {
            return Err(Error::UnknownTarget(target.to_string()));
        }
        let dist = self.distances_to(&goals);
        let Some(here) = dist[self.index(self.agent)] else {
            return Ok(BTreeSet::new());
        };
        if here == 0 {
            return Ok(BTreeSet::new());
        }
        let decreases = |d: (i64, i64)| {
            self.offset(self.agent, d).is_some_and(|next| {
                self.can_move(self.agent, next) && dist[self.index(next)] == Some(here - 1)
            })
        };
        let mut out = BTreeSet::new();
        match &self.motion {
            Motion::Absolute { moves } => {
                for (action, d) in moves {
                    if decreases(*d) {
                        out.insert(*action);
                    }
                }
            }
            Motion::Egocentric {
                heading,
                left,
                right,
                forward,
            } => {
                let toward = |k: usize| decreases(HEADINGS[(heading + k) % 4]);
                if toward(0) {
                    out.insert(*forward);
                } else {
                    let (l, r) = (toward(3), toward(1));
                    if l {
                        out.insert(*left);
                    }
                    if r {
                        out.insert(*right);
                    }
                    if !l && !r && toward(2) {
                        out.insert(*left);
                        out.insert(*right);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Agent and object positions in a continuous world, plus the velocity
/// impulse each action applies.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousNav {
    pub agent: [f64; 2],
    pub targets: Vec<(String, [f64; 2])>,
    pub impulses: Vec<(usize, [f64; 2])>,
}

impl ContinuousNav {
    fn resolve(&self, target: &str) -> Result<BTreeSet<usize>> {
        let dist2 = |p: &[f64; 2]| (p[0] - self.agent[0]).powi(2) + (p[1] - self.agent[1]).powi(2);
        let nearest = self
            .targets
            .iter()
            .filter(|(name, _)| name == target)
            .min_by(|a, b| dist2(&a.1).total_cmp(&dist2(&b.1)))
            .ok_or_else(|| Error::UnknownTarget(target.to_string()))?;
        let to = [nearest.1[0] - self.agent[0], nearest.1[1] - self.agent[1]];
        let scores: Vec<(usize, f64)> = self
            .impulses
            .iter()
            .map(|(a, d)| (*a, d[0] * to[0] + d[1] * to[1]))
            .collect();
        let best = scores.iter().map(|s| s.1).fold(0.0, f64::max);
        if best <= 0.0 {
            return Ok(BTreeSet::new());
        }
        Ok(scores
            .into_iter()
            .filter(|(_, s)| *s == best)
            .map(|(a, _)| a)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Navigation {
    Grid(GridNav),
    Continuous(ContinuousNav),
}

/// Actions that make progress toward `target`: on grids, the moves that
/// strictly decrease the shortest-path distance (turns that face such a
/// move for egocentric control); in continuous worlds, the impulse best
/// aligned with the direction to the nearest matching object.
pub fn resolve_goto(nav: &Navigation, target: &str) -> Result<BTreeSet<usize>> {
    match nav {
        Navigation::Grid(g) => g.resolve(target),
        Navigation::Continuous(c) => c.resolve(target),
    }
}
