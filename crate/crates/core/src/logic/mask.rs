use std::collections::BTreeSet;

use crate::env::{ActionGrounding, Environment};
use crate::error::Result;
use crate::logic::ast::SymbolicPolicy;
use crate::logic::entail::entailed_heads;
use crate::logic::facts::{FactBase, GroundAtom};
use crate::logic::nav::resolve_goto;

/// Per-action indicator: `true` where the symbolic policy entails the
/// action in the current state.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IndicatorMask(Vec<bool>);

impl IndicatorMask {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn none(len: usize) -> Self {
        Self(vec![false; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, action: usize) -> bool {
        self.0[action]
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }

    /// All-true or all-false.
    pub fn is_uniform(&self) -> bool {
        self.0.windows(2).all(|w| w[0] == w[1])
    }
}

/// Builds the indicator for the environment's current state: an action is
/// marked when its grounded atom is an entailed head, or when it makes
/// progress on an entailed navigation directive.
pub fn indicator_mask(
    policy: &SymbolicPolicy,
    facts: &FactBase,
    env: &dyn Environment,
) -> Result<IndicatorMask> {
    let heads = entailed_heads(policy, facts);
    mask_from_heads(&heads, env)
}

pub fn mask_from_heads(heads: &BTreeSet<GroundAtom>, env: &dyn Environment) -> Result<IndicatorMask> {
    let n = env.num_actions();
    let mut bits = vec![false; n];
    if heads.is_empty() {
        return Ok(IndicatorMask(bits));
    }
    for (a, bit) in bits.iter_mut().enumerate() {
        if let ActionGrounding::Atom(atom) = env.action_grounding(a) {
            *bit = heads.contains(&atom);
        }
    }
    let directives = env.directive_predicates();
    let mut nav = None;
    for head in heads {
        if head.args.len() == 1 && directives.contains(&head.predicate.as_str()) {
            let nav = nav.get_or_insert_with(|| env.navigation());
            for a in resolve_goto(nav, &head.args[0])? {
                if matches!(env.action_grounding(a), ActionGrounding::Navigation) {
                    bits[a] = true;
                }
            }
        }
    }
    Ok(IndicatorMask(bits))
}
