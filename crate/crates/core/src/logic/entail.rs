use std::collections::{BTreeSet, HashMap};

use crate::logic::ast::{Atom, HornRule, SymbolicPolicy, Term};
use crate::logic::facts::{FactBase, GroundAtom};

type Bindings<'a> = HashMap<&'a str, &'a str>;

/// All grounded rule heads the policy derives from `facts`.
///
/// A rule fires for every substitution of its body variables by constants
/// (those of the fact base and the policy) under which each positive
/// literal is a fact and no negated literal is. Positive literals are
/// joined left to right; variables that only occur under negation are
/// enumerated over the constant domain.
pub fn entailed_heads(policy: &SymbolicPolicy, facts: &FactBase) -> BTreeSet<GroundAtom> {
    let mut domain: Option<Vec<String>> = None;
    let mut out = BTreeSet::new();
    for rule in &policy.rules {
        let positives: Vec<&Atom> = rule.positive().collect();
        let mut bindings = Bindings::new();
        join(rule, &positives, facts, &mut bindings, &mut |b| {
            if negation_holds(rule, b, facts, policy, &mut domain) {
                out.insert(ground(&rule.head, b));
            }
        });
    }
    out
}

fn join<'a>(
    rule: &'a HornRule,
    positives: &[&'a Atom],
    facts: &'a FactBase,
    bindings: &mut Bindings<'a>,
    emit: &mut dyn FnMut(&Bindings<'a>),
) {
    let Some((first, rest)) = positives.split_first() else {
        emit(bindings);
        return;
    };
    for tuple in facts.tuples(&first.predicate) {
        if tuple.len() != first.args.len() {
            continue;
        }
        let mut added: Vec<&str> = Vec::new();
        let mut ok = true;
        for (term, value) in first.args.iter().zip(tuple) {
            match term {
                Term::Const(c) => {
                    if c != value {
                        ok = false;
                        break;
                    }
                }
                Term::Var(v) => match bindings.get(v.as_str()) {
                    Some(bound) if *bound != value.as_str() => {
                        ok = false;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        bindings.insert(v.as_str(), value.as_str());
                        added.push(v.as_str());
                    }
                },
            }
        }
        if ok {
            join(rule, rest, facts, bindings, emit);
        }
        for v in added {
            bindings.remove(v);
        }
    }
}

fn negation_holds<'a>(
    rule: &'a HornRule,
    bindings: &Bindings<'a>,
    facts: &FactBase,
    policy: &SymbolicPolicy,
    domain: &mut Option<Vec<String>>,
) -> bool {
    let negatives: Vec<&Atom> = rule.negative().collect();
    if negatives.is_empty() {
        return true;
    }
    let mut free: Vec<&str> = Vec::new();
    for atom in &negatives {
        for v in atom.variables() {
            if !bindings.contains_key(v) && !free.contains(&v) {
                free.push(v);
            }
        }
    }
    let all_absent = |b: &dyn Fn(&str) -> Option<String>| {
        negatives.iter().all(|atom| {
            let args: Vec<String> = atom
                .args
                .iter()
                .map(|t| match t {
                    Term::Const(c) => c.clone(),
                    Term::Var(v) => b(v).expect("bound variable"),
                })
                .collect();
            !facts.contains(&atom.predicate, &args)
        })
    };
    if free.is_empty() {
        return all_absent(&|v| bindings.get(v).map(|s| s.to_string()));
    }
    let domain = domain.get_or_insert_with(|| {
        let mut d = facts.constants();
        d.extend(policy.constants());
        d.into_iter().collect()
    });
    if domain.is_empty() {
        return false;
    }
    // Odometer over assignments of the free variables.
    let mut idx = vec![0usize; free.len()];
    loop {
        let lookup = |v: &str| {
            bindings.get(v).map(|s| s.to_string()).or_else(|| {
                free.iter()
                    .position(|f| *f == v)
                    .map(|i| domain[idx[i]].clone())
            })
        };
        if all_absent(&lookup) {
            return true;
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return false;
            }
            idx[k] += 1;
            if idx[k] < domain.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn ground(atom: &Atom, bindings: &Bindings<'_>) -> GroundAtom {
    GroundAtom {
        predicate: atom.predicate.clone(),
        args: atom
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => c.clone(),
                Term::Var(v) => bindings[v.as_str()].to_string(),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parser::parse_rules;

    const DOORKEY: &str = "
        pickup(X) :- key(X), sameColor(X, Y), door(Y), notCarrying.
        toggle(X) :- door(X), locked(X), carryingKey(Z), sameColor(X,Z).
        goto(X) :- goal(X), unlocked.
    ";

    #[test]
    fn toggle_is_entailed_when_carrying_the_matching_key() {
        let policy = parse_rules("dk", DOORKEY, None).unwrap();
        let mut facts = FactBase::new();
        facts.add("door", &["d1"]);
        facts.add("locked", &["d1"]);
        facts.add("carryingKey", &["k1"]);
        facts.add("sameColor", &["d1", "k1"]);
        let heads = entailed_heads(&policy, &facts);
        assert_eq!(heads, BTreeSet::from([GroundAtom::new("toggle", ["d1"])]));
    }

    #[test]
    fn empty_fact_base_entails_nothing() {
        let policy = parse_rules("dk", DOORKEY, None).unwrap();
        assert!(entailed_heads(&policy, &FactBase::new()).is_empty());
    }

    #[test]
    fn ground_heads_with_only_negated_body() {
        let policy = parse_rules(
            "rg",
            "touch(red) :- not touched_red, not touched_green.\ntouch(green) :- touched_red, not touched_green.",
            None,
        )
        .unwrap();
        let heads = entailed_heads(&policy, &FactBase::new());
        assert_eq!(heads, BTreeSet::from([GroundAtom::new("touch", ["red"])]));
        let mut facts = FactBase::new();
        facts.add("touched_red", &[]);
        let heads = entailed_heads(&policy, &facts);
        assert_eq!(heads, BTreeSet::from([GroundAtom::new("touch", ["green"])]));
        facts.add("touched_green", &[]);
        assert!(entailed_heads(&policy, &facts).is_empty());
    }

    #[test]
    fn adding_a_negated_fact_removes_exactly_its_conclusions() {
        let policy = parse_rules(
            "p",
            "goto(X) :- coffee(X), not HasCoffee.\ngoto(X) :- office(X), HasCoffee.\ngoto(X) :- mail(X).",
            None,
        )
        .unwrap();
        let mut facts = FactBase::new();
        facts.add("coffee", &["c1"]);
        facts.add("office", &["o1"]);
        facts.add("mail", &["m1"]);
        let before = entailed_heads(&policy, &facts);
        assert!(before.contains(&GroundAtom::new("goto", ["c1"])));
        facts.add("HasCoffee", &[]);
        let after = entailed_heads(&policy, &facts);
        assert!(!after.contains(&GroundAtom::new("goto", ["c1"])));
        assert!(after.contains(&GroundAtom::new("goto", ["m1"])));
        assert!(after.contains(&GroundAtom::new("goto", ["o1"])));
    }

    #[test]
    fn free_variable_under_negation_is_existential() {
        // q(X) holds for some domain constant exactly when not all are blocked.
        let policy = parse_rules("p", "a :- not blocked(X).", None).unwrap();
        let mut facts = FactBase::new();
        facts.add("blocked", &["c1"]);
        assert!(entailed_heads(&policy, &facts).is_empty());
        facts.add("other", &["c2"]);
        assert_eq!(entailed_heads(&policy, &facts).len(), 1);
    }
}
