use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

/// A variable-free atom such as `sameColor(k1, d1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl GroundAtom {
    pub fn new<S: Into<String>>(predicate: impl Into<String>, args: impl IntoIterator<Item = S>) -> Self {
        Self {
            predicate: predicate.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }

    pub fn prop(predicate: impl Into<String>) -> Self {
        Self {
            predicate: predicate.into(),
            args: Vec::new(),
        }
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            write!(f, "({})", self.args.join(", "))?;
        }
        Ok(())
    }
}

/// Grounded state description: a set of atoms, indexed by predicate.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FactBase {
    by_predicate: BTreeMap<String, BTreeSet<Vec<String>>>,
}

impl FactBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, atom: GroundAtom) -> bool {
        self.by_predicate
            .entry(atom.predicate)
            .or_default()
            .insert(atom.args)
    }

    /// Convenience for `insert(GroundAtom::new(..))`.
    pub fn add(&mut self, predicate: &str, args: &[&str]) {
        self.insert(GroundAtom::new(predicate, args.iter().copied()));
    }

    pub fn remove(&mut self, atom: &GroundAtom) -> bool {
        let Some(set) = self.by_predicate.get_mut(&atom.predicate) else {
            return false;
        };
        let removed = set.remove(&atom.args);
        if set.is_empty() {
            self.by_predicate.remove(&atom.predicate);
        }
        removed
    }

    pub fn contains(&self, predicate: &str, args: &[String]) -> bool {
        self.by_predicate
            .get(predicate)
            .is_some_and(|set| set.contains(args))
    }

    pub fn contains_atom(&self, atom: &GroundAtom) -> bool {
        self.contains(&atom.predicate, &atom.args)
    }

    /// Argument tuples stored under `predicate`.
    pub fn tuples(&self, predicate: &str) -> impl Iterator<Item = &Vec<String>> {
        self.by_predicate.get(predicate).into_iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.by_predicate.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_predicate.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = GroundAtom> + '_ {
        self.by_predicate.iter().flat_map(|(p, set)| {
            set.iter().map(move |args| GroundAtom {
                predicate: p.clone(),
                args: args.clone(),
            })
        })
    }

    pub fn constants(&self) -> BTreeSet<String> {
        self.by_predicate
            .values()
            .flatten()
            .flatten()
            .cloned()
            .collect()
    }

    /// Checks every atom against a vocabulary's feature predicates.
    pub fn validate(&self, vocab: &Vocabulary) -> Result<()> {
        for (p, set) in &self.by_predicate {
            for args in set {
                match vocab.features.get(p) {
                    Some(&arity) if arity == args.len() => {}
                    _ => {
                        return Err(Error::Config(format!(
                            "fact `{}` is not in the declared vocabulary",
                            GroundAtom::new(p.clone(), args.iter().cloned())
                        )))
                    }
                }
            }
        }
        Ok(())
    }
}

impl FromIterator<GroundAtom> for FactBase {
    fn from_iter<T: IntoIterator<Item = GroundAtom>>(iter: T) -> Self {
        let mut fb = FactBase::new();
        for a in iter {
            fb.insert(a);
        }
        fb
    }
}

impl fmt::Display for FactBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let atoms: Vec<String> = self.iter().map(|a| a.to_string()).collect();
        write!(f, "{{{}}}", atoms.join(", "))
    }
}

/// Declared predicates (name → arity) for one domain.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    pub actions: BTreeMap<String, usize>,
    pub features: BTreeMap<String, usize>,
}

impl Vocabulary {
    pub fn new(actions: &[(&str, usize)], features: &[(&str, usize)]) -> Self {
        let to_map = |xs: &[(&str, usize)]| xs.iter().map(|(n, a)| (n.to_string(), *a)).collect();
        Self {
            actions: to_map(actions),
            features: to_map(features),
        }
    }
}
