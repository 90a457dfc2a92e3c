//! Horn-clause symbolic policies with negation as failure.
//!
//! Rules are parsed from a small Prolog-like language, evaluated against a
//! [`FactBase`] produced by an environment's state grounding, and turned
//! into per-action [`IndicatorMask`]s. Navigation heads (`goto(X)`,
//! `touch(C)`) are resolved into the movement actions that make progress.

pub mod ast;
pub mod entail;
pub mod facts;
pub mod mask;
pub mod nav;
pub mod parser;
pub mod reward_machine;

pub use ast::{Atom, HornRule, Literal, SymbolicPolicy, Term};
pub use entail::entailed_heads;
pub use facts::{FactBase, GroundAtom, Vocabulary};
pub use mask::{indicator_mask, mask_from_heads, IndicatorMask};
pub use nav::{resolve_goto, ContinuousNav, GridNav, Motion, Navigation};
pub use parser::parse_rules;
pub use reward_machine::{build_reward_machine, build_reward_machine_by_id, RewardMachine};

use crate::env::Task;
use crate::error::Result;

pub const DOORKEY_RULES: &str = include_str!("../../rules/doorkey.rules");
pub const OFFICEWORLD_COFFEE_RULES: &str = include_str!("../../rules/officeworld_coffee.rules");
pub const OFFICEWORLD_PATROL_RULES: &str = include_str!("../../rules/officeworld_patrol.rules");
pub const OFFICEWORLD_PATROL_AB_RULES: &str = include_str!("../../rules/officeworld_patrol_ab.rules");
pub const WATERWORLD_RG_RULES: &str = include_str!("../../rules/waterworld_rg.rules");

/// File name and contents of the rule set shipped for a task.
pub fn bundled_rules(task: Task) -> (&'static str, &'static str) {
    match task {
        Task::DoorKey { .. } => ("doorkey.rules", DOORKEY_RULES),
        Task::DeliverCoffee | Task::DeliverCoffeeAndMail => {
            ("officeworld_coffee.rules", OFFICEWORLD_COFFEE_RULES)
        }
        Task::PatrolAB => ("officeworld_patrol_ab.rules", OFFICEWORLD_PATROL_AB_RULES),
        Task::PatrolABC => ("officeworld_patrol.rules", OFFICEWORLD_PATROL_RULES),
        Task::RedGreen | Task::RedGreenBlueCyan | Task::RedGreenBlueCyanMagentaYellow => {
            ("waterworld_rg.rules", WATERWORLD_RG_RULES)
        }
    }
}

/// Parses the bundled rule set for `task`, validated against the task's vocabulary.
pub fn bundled_policy(task: Task) -> Result<SymbolicPolicy> {
    let (name, text) = bundled_rules(task);
    parse_rules(name, text, Some(&task.vocabulary()))
}
