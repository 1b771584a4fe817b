use std::collections::{BTreeSet, HashMap};
use std::fmt::Debug;
use std::hash::Hash;

use super::CoalgebraError;

/// A finite labelled transition system `(S, Lambda, ->)`, possibly
/// nondeterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct Lts<L> {
    names: Vec<String>,
    labels: Vec<L>,
    // (source, label index, target)
    transitions: Vec<(usize, usize, usize)>,
}

impl<L: Clone + Eq + Hash + Debug> Lts<L> {
    pub fn new(names: Vec<String>, transitions: Vec<(usize, L, usize)>) -> Result<Self, CoalgebraError> {
        let mut labels: Vec<L> = Vec::new();
        let mut edges = Vec::with_capacity(transitions.len());
        for (p, label, q) in transitions {
            for s in [p, q] {
                if s >= names.len() {
                    return Err(CoalgebraError::UnknownState(s.to_string()));
                }
            }
            let l = match labels.iter().position(|x| *x == label) {
                Some(i) => i,
                None => {
                    labels.push(label);
                    labels.len() - 1
                }
            };
            edges.push((p, l, q));
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Self { names, labels, transitions: edges })
    }

    /// Build from named `(source, label, target)` triples, creating states in
    /// order of first mention.
    pub fn from_triples<S: AsRef<str>>(triples: &[(S, L, S)]) -> Result<Self, CoalgebraError> {
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut names = Vec::new();
        let mut id = |s: &str, names: &mut Vec<String>| {
            *index.entry(s.to_string()).or_insert_with(|| {
                names.push(s.to_string());
                names.len() - 1
            })
        };
        let mut edges = Vec::with_capacity(triples.len());
        for (p, l, q) in triples {
            let p = id(p.as_ref(), &mut names);
            let q = id(q.as_ref(), &mut names);
            edges.push((p, l.clone(), q));
        }
        Self::new(names, edges)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn labels(&self) -> &[L] {
        &self.labels
    }

    pub fn state(&self, name: &str) -> Result<usize, CoalgebraError> {
        self.names.iter().position(|n| n == name).ok_or_else(|| CoalgebraError::UnknownState(name.to_string()))
    }

    /// `(source, label, target)` triples, sorted by source.
    pub fn transitions(&self) -> impl Iterator<Item = (usize, &L, usize)> + '_ {
        self.transitions.iter().map(|&(p, l, q)| (p, &self.labels[l], q))
    }

    pub fn successors(&self, state: usize) -> impl Iterator<Item = (&L, usize)> + '_ {
        self.transitions().filter(move |(p, _, _)| *p == state).map(|(_, l, q)| (l, q))
    }

    pub fn is_deterministic(&self) -> bool {
        (0..self.len()).all(|s| self.successors(s).count() == 1)
    }

    /// Coarsest strong bisimulation, as a block index per state.
    pub fn bisimulation_classes(&self) -> Vec<usize> {
        let n = self.len();
        let mut block = vec![0usize; n];
        let mut count = 1;
        loop {
            let mut outgoing: Vec<BTreeSet<(usize, usize)>> = vec![BTreeSet::new(); n];
            for &(p, l, q) in &self.transitions {
                outgoing[p].insert((l, block[q]));
            }
            let mut ids: HashMap<(usize, &BTreeSet<(usize, usize)>), usize> = HashMap::new();
            let next: Vec<usize> = (0..n)
                .map(|s| {
                    let fresh = ids.len();
                    *ids.entry((block[s], &outgoing[s])).or_insert(fresh)
                })
                .collect();
            let new_count = ids.len();
            block = next;
            if new_count == count {
                return block;
            }
            count = new_count;
        }
    }

    pub fn bisimilar(&self, p: usize, q: usize) -> bool {
        let blocks = self.bisimulation_classes();
        blocks[p] == blocks[q]
    }
}
