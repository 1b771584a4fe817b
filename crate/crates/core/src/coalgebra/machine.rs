use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;

use super::{CoalgebraError, FiniteFunction, Lts};

/// A deterministic black-box machine: every state emits one color and moves
/// to one next state.
#[derive(Debug, Clone, PartialEq)]
pub struct ColoredMachine<C> {
    names: Vec<String>,
    mu: Vec<(C, usize)>,
}

impl<C: Clone + Eq + Hash + Debug> ColoredMachine<C> {
    /// States are `0..mu.len()`, named by their index.
    pub fn new(mu: Vec<(C, usize)>) -> Result<Self, CoalgebraError> {
        let names = (0..mu.len()).map(|i| i.to_string()).collect();
        Self::with_names(names, mu)
    }

    pub fn with_names(names: Vec<String>, mu: Vec<(C, usize)>) -> Result<Self, CoalgebraError> {
        if names.len() != mu.len() {
            return Err(CoalgebraError::NotTotal { got: mu.len(), expected: names.len() });
        }
        let mut seen = HashMap::new();
        for (i, name) in names.iter().enumerate() {
            if seen.insert(name.clone(), i).is_some() {
                return Err(CoalgebraError::DuplicateState(name.clone()));
            }
        }
        for (_, next) in &mu {
            if *next >= mu.len() {
                return Err(CoalgebraError::UnknownState(next.to_string()));
            }
        }
        Ok(Self { names, mu })
    }

    /// Build from `(state, color, next)` triples; every state mentioned must
    /// have exactly one triple of its own.
    pub fn from_triples<S: AsRef<str>>(triples: &[(S, C, S)]) -> Result<Self, CoalgebraError> {
        let mut index: HashMap<&str, usize> = HashMap::new();
        let mut names = Vec::new();
        for (state, _, _) in triples {
            let s = state.as_ref();
            if index.contains_key(s) {
                return Err(CoalgebraError::Nondeterministic(s.to_string()));
            }
            index.insert(s, names.len());
            names.push(s.to_string());
        }
        let mut mu = Vec::with_capacity(triples.len());
        for (_, color, next) in triples {
            let n = next.as_ref();
            let target = *index.get(n).ok_or_else(|| CoalgebraError::NonTotal(n.to_string()))?;
            mu.push((color.clone(), target));
        }
        Self::with_names(names, mu)
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn name(&self, state: usize) -> &str {
        &self.names[state]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn state(&self, name: &str) -> Result<usize, CoalgebraError> {
        self.names.iter().position(|n| n == name).ok_or_else(|| CoalgebraError::UnknownState(name.to_string()))
    }

    /// `mu(x) = (color, next)`.
    pub fn mu(&self, state: usize) -> (&C, usize) {
        let (c, n) = &self.mu[state];
        (c, *n)
    }

    pub fn color(&self, state: usize) -> &C {
        &self.mu[state].0
    }

    pub fn next(&self, state: usize) -> usize {
        self.mu[state].1
    }

    /// Distinct colors in order of first appearance.
    pub fn colors(&self) -> Vec<C> {
        let mut out: Vec<C> = Vec::new();
        for (c, _) in &self.mu {
            if !out.contains(c) {
                out.push(c.clone());
            }
        }
        out
    }

    /// Same machine with every color mapped through `f`.
    pub fn map_colors<D: Clone + Eq + Hash + Debug>(&self, f: impl Fn(&C) -> D) -> ColoredMachine<D> {
        ColoredMachine { names: self.names.clone(), mu: self.mu.iter().map(|(c, n)| (f(c), *n)).collect() }
    }

    /// The machine as a transition system with one labelled edge per state.
    pub fn to_lts(&self) -> Lts<C> {
        let transitions = self.mu.iter().enumerate().map(|(s, (c, n))| (s, c.clone(), *n)).collect();
        Lts::new(self.names.clone(), transitions).expect("machine edges are in range")
    }

    fn check_state(&self, state: usize) -> Result<(), CoalgebraError> {
        if state >= self.len() {
            return Err(CoalgebraError::UnknownState(state.to_string()));
        }
        Ok(())
    }
}

/// A finite prefix `(c_0, ..., c_{n-1})` of a behaviour stream.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StreamPrefix<C> {
    pub colors: Vec<C>,
}

impl<C: Clone> StreamPrefix<C> {
    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn cons(head: C, tail: &StreamPrefix<C>) -> Self {
        let mut colors = Vec::with_capacity(tail.len() + 1);
        colors.push(head);
        colors.extend(tail.colors.iter().cloned());
        StreamPrefix { colors }
    }
}

/// The first `n` colors emitted from `x0`.
pub fn behaviour<C: Clone + Eq + Hash + Debug>(
    m: &ColoredMachine<C>,
    x0: usize,
    n: usize,
) -> Result<StreamPrefix<C>, CoalgebraError> {
    m.check_state(x0)?;
    let mut colors = Vec::with_capacity(n);
    let mut x = x0;
    for _ in 0..n {
        let (c, next) = m.mu(x);
        colors.push(c.clone());
        x = next;
    }
    Ok(StreamPrefix { colors })
}

/// `u -> (head u, tail u)`.
pub fn stream_destructor<C: Clone>(u: &StreamPrefix<C>) -> Result<(C, StreamPrefix<C>), CoalgebraError> {
    let (head, rest) = u.colors.split_first().ok_or(CoalgebraError::EmptyPrefix)?;
    Ok((head.clone(), StreamPrefix { colors: rest.to_vec() }))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomomorphismReport {
    /// `mu'(f x) = (color x, f(next x))` for every state.
    pub square_commutes: bool,
    /// First state where the square fails.
    pub square_witness: Option<usize>,
    /// `beh(x)` and `beh'(f x)` agree on the first `n` colors for every state.
    pub prefixes_agree: bool,
    pub prefix_witness: Option<usize>,
}

impl HomomorphismReport {
    pub fn holds(&self) -> bool {
        self.square_commutes && self.prefixes_agree
    }
}

pub fn check_homomorphism<C: Clone + Eq + Hash + Debug>(
    m: &ColoredMachine<C>,
    target: &ColoredMachine<C>,
    f: &FiniteFunction,
    n: usize,
) -> Result<HomomorphismReport, CoalgebraError> {
    if f.domain() != m.len() {
        return Err(CoalgebraError::NotTotal { got: f.domain(), expected: m.len() });
    }
    if f.codomain() != target.len() {
        return Err(CoalgebraError::NotComposable { left: f.codomain(), right: target.len() });
    }
    let square_witness = (0..m.len()).find(|&x| {
        let (c, next) = m.mu(x);
        let (c2, next2) = target.mu(f.apply(x));
        c != c2 || f.apply(next) != next2
    });
    let mut prefix_witness = None;
    for x in 0..m.len() {
        if behaviour(m, x, n)? != behaviour(target, f.apply(x), n)? {
            prefix_witness = Some(x);
            break;
        }
    }
    Ok(HomomorphismReport {
        square_commutes: square_witness.is_none(),
        square_witness,
        prefixes_agree: prefix_witness.is_none(),
        prefix_witness,
    })
}

/// Maps `h_k: M -> C^k` for `k = 0..=n`, indexed `[k][state]`.
pub type PrefixFamily<C> = Vec<Vec<Vec<C>>>;

/// Every length-indexed family of maps into the prefix system that commutes
/// with the destructors: `head(h_k x) = color x` and
/// `tail(h_k x) = h_{k-1}(next x)`. Candidates range over all words in
/// `alphabet`; the search stops once `limit` families are found.
pub fn prefix_homomorphisms<C: Clone + Eq + Hash + Debug>(
    m: &ColoredMachine<C>,
    alphabet: &[C],
    n: usize,
    limit: usize,
) -> Vec<PrefixFamily<C>> {
    let mut found = Vec::new();
    let mut family: PrefixFamily<C> = vec![vec![Vec::new(); m.len()]];
    extend_family(m, alphabet, n, limit, &mut family, &mut found);
    found
}

fn extend_family<C: Clone + Eq + Hash + Debug>(
    m: &ColoredMachine<C>,
    alphabet: &[C],
    n: usize,
    limit: usize,
    family: &mut PrefixFamily<C>,
    found: &mut Vec<PrefixFamily<C>>,
) {
    if found.len() >= limit {
        return;
    }
    let k = family.len();
    if k > n {
        found.push(family.clone());
        return;
    }
    // candidate values for each cell of level k
    let mut options: Vec<Vec<Vec<C>>> = Vec::with_capacity(m.len());
    for x in 0..m.len() {
        let (c, next) = m.mu(x);
        let consistent: Vec<Vec<C>> =
            all_words(alphabet, k).into_iter().filter(|w| w[0] == *c && w[1..] == family[k - 1][next][..]).collect();
        if consistent.is_empty() {
            return;
        }
        options.push(consistent);
    }
    let mut choice = vec![0usize; m.len()];
    loop {
        family.push(options.iter().zip(&choice).map(|(o, &i)| o[i].clone()).collect());
        extend_family(m, alphabet, n, limit, family, found);
        family.pop();
        if found.len() >= limit {
            return;
        }
        // odometer over the per-cell choices
        let mut pos = 0;
        loop {
            if pos == choice.len() {
                return;
            }
            choice[pos] += 1;
            if choice[pos] < options[pos].len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

fn all_words<C: Clone>(alphabet: &[C], k: usize) -> Vec<Vec<C>> {
    let mut words = vec![Vec::new()];
    for _ in 0..k {
        words = words
            .into_iter()
            .flat_map(|w| {
                alphabet.iter().map(move |c| {
                    let mut next = w.clone();
                    next.push(c.clone());
                    next
                })
            })
            .collect();
    }
    words
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equivalence {
    pub equivalent: bool,
    /// First index where the two streams differ.
    pub first_difference: Option<usize>,
    pub prefix_length: usize,
}

/// Decide `beh(x) = beh'(y)` by comparing prefixes of length `|M| + |M'|`
/// and, independently, by partition refinement on the disjoint union.
pub fn observational_equivalence<C: Clone + Eq + Hash + Debug>(
    m: &ColoredMachine<C>,
    x: usize,
    m2: &ColoredMachine<C>,
    y: usize,
) -> Result<Equivalence, CoalgebraError> {
    let prefix_length = m.len() + m2.len();
    let a = behaviour(m, x, prefix_length)?;
    let b = behaviour(m2, y, prefix_length)?;
    let first_difference = a.colors.iter().zip(&b.colors).position(|(p, q)| p != q);

    let blocks = refine_union(m, m2);
    let by_partition = blocks[x] == blocks[m.len() + y];
    if by_partition != first_difference.is_none() {
        return Err(CoalgebraError::DecisionMismatch);
    }
    Ok(Equivalence { equivalent: by_partition, first_difference, prefix_length })
}

// Moore refinement: start from color classes, split by the class of the
// successor until stable.
fn refine_union<C: Clone + Eq + Hash + Debug>(m: &ColoredMachine<C>, m2: &ColoredMachine<C>) -> Vec<usize> {
    let offset = m.len();
    let total = m.len() + m2.len();
    let step = |s: usize| -> (&C, usize) {
        if s < offset {
            m.mu(s)
        } else {
            let (c, n) = m2.mu(s - offset);
            (c, n + offset)
        }
    };
    let mut ids: HashMap<&C, usize> = HashMap::new();
    let mut block: Vec<usize> = (0..total)
        .map(|s| {
            let fresh = ids.len();
            *ids.entry(step(s).0).or_insert(fresh)
        })
        .collect();
    let mut count = ids.len();
    loop {
        let mut sig: HashMap<(usize, usize), usize> = HashMap::new();
        let next: Vec<usize> = (0..total)
            .map(|s| {
                let fresh = sig.len();
                *sig.entry((block[s], block[step(s).1])).or_insert(fresh)
            })
            .collect();
        block = next;
        if sig.len() == count {
            return block;
        }
        count = sig.len();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alternating() -> ColoredMachine<&'static str> {
        ColoredMachine::from_triples(&[("x", "red", "y"), ("y", "blue", "x")]).unwrap()
    }

    #[test]
    fn behaviour_examples() {
        let m = alternating();
        assert!(behaviour(&m, 0, 0).unwrap().is_empty());
        assert_eq!(behaviour(&m, 0, 4).unwrap().colors, ["red", "blue", "red", "blue"]);
        let fixed = ColoredMachine::new(vec![("c", 0)]).unwrap();
        assert_eq!(behaviour(&fixed, 0, 3).unwrap().colors, ["c", "c", "c"]);
        assert!(matches!(behaviour(&m, 2, 1), Err(CoalgebraError::UnknownState(_))));
    }

    #[test]
    fn destructor_round_trip() {
        let u = StreamPrefix { colors: vec!['a', 'b', 'c'] };
        let (h, t) = stream_destructor(&u).unwrap();
        assert_eq!((h, t.colors.clone()), ('a', vec!['b', 'c']));
        assert_eq!(StreamPrefix::cons(h, &t), u);
        let (h, t) = stream_destructor(&StreamPrefix { colors: vec!['a'] }).unwrap();
        assert_eq!(h, 'a');
        assert!(t.is_empty());
        assert_eq!(stream_destructor(&StreamPrefix::<char> { colors: vec![] }), Err(CoalgebraError::EmptyPrefix));
    }

    #[test]
    fn construction_errors() {
        assert_eq!(ColoredMachine::from_triples(&[("x", 1, "y")]), Err(CoalgebraError::NonTotal("y".into())));
        assert_eq!(
            ColoredMachine::from_triples(&[("x", 1, "x"), ("x", 2, "x")]),
            Err(CoalgebraError::Nondeterministic("x".into()))
        );
    }

    #[test]
    fn identity_and_broken_homomorphisms() {
        let m = alternating();
        let id = FiniteFunction::identity(2);
        assert!(check_homomorphism(&m, &m, &id, 4).unwrap().holds());

        let mut broken = m.clone();
        broken.mu[1].0 = "green";
        let report = check_homomorphism(&m, &broken, &id, 4).unwrap();
        assert!(!report.holds());
        assert_eq!(report.square_witness, Some(1));
        assert_eq!(report.prefix_witness, Some(0));
    }

    #[test]
    fn quotient_onto_a_smaller_machine() {
        // a 4-cycle red blue red blue folds onto the 2-cycle
        let big = ColoredMachine::new(vec![("red", 1), ("blue", 2), ("red", 3), ("blue", 0)]).unwrap();
        let small = ColoredMachine::new(vec![("red", 1), ("blue", 0)]).unwrap();
        let f = FiniteFunction::new(vec![0, 1, 0, 1], 2).unwrap();
        assert!(check_homomorphism(&big, &small, &f, 8).unwrap().holds());
        let g = FiniteFunction::new(vec![0, 1, 1, 0], 2).unwrap();
        assert!(!check_homomorphism(&big, &small, &g, 8).unwrap().holds());
    }

    #[test]
    fn behaviour_is_the_only_prefix_homomorphism() {
        let m = ColoredMachine::new(vec![(0u8, 1), (1, 2), (0, 0)]).unwrap();
        let n = 2 * m.len();
        let found = prefix_homomorphisms(&m, &[0, 1, 2], n, 2);
        assert_eq!(found.len(), 1);
        for k in 0..=n {
            for x in 0..m.len() {
                assert_eq!(found[0][k][x], behaviour(&m, x, k).unwrap().colors);
            }
        }
    }

    #[test]
    fn equivalence_examples() {
        let m = alternating();
        assert!(observational_equivalence(&m, 0, &m, 0).unwrap().equivalent);
        let red1 = ColoredMachine::new(vec![("red", 0)]).unwrap();
        let red3 = ColoredMachine::new(vec![("red", 1), ("red", 2), ("red", 0)]).unwrap();
        assert!(observational_equivalence(&red1, 0, &red3, 2).unwrap().equivalent);

        let rrb = ColoredMachine::new(vec![("red", 1), ("red", 2), ("blue", 0)]).unwrap();
        let e = observational_equivalence(&m, 0, &rrb, 0).unwrap();
        assert!(!e.equivalent);
        assert_eq!(e.first_difference, Some(1));
    }

    #[test]
    fn late_divergence_is_found() {
        // streams agree for five steps and then split
        let a = ColoredMachine::new(vec![(0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (1, 5)]).unwrap();
        let b = ColoredMachine::new(vec![(0, 0)]).unwrap();
        let e = observational_equivalence(&a, 0, &b, 0).unwrap();
        assert_eq!(e.first_difference, Some(5));
    }

    #[test]
    fn lts_view_bisimilarity_matches() {
        let m = ColoredMachine::new(vec![("a", 1), ("b", 0), ("a", 3), ("b", 2), ("a", 0)]).unwrap();
        let lts = m.to_lts();
        for x in 0..m.len() {
            for y in 0..m.len() {
                let eq = observational_equivalence(&m, x, &m, y).unwrap().equivalent;
                assert_eq!(eq, lts.bisimilar(x, y), "{x} {y}");
            }
        }
    }
}
