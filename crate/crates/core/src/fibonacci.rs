//! The single-step sigma tree: `|0>` only goes up, `|1>` either falls back to
//! `|0>` or persists. The number of states at each depth runs through the
//! Fibonacci numbers.
//!
//! Column vectors follow `|0> = (0, 1)^T`, `|1> = (1, 0)^T`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::qubit::{mat_mul, mat_vec, sigma_minus, sigma_plus, Mat2, Vec2, C64};

/// Deepest tree that [`generate`] will walk node by node.
pub const TREE_DEPTH_CAP: usize = 40;
/// Deepest tree that [`StateTree::build`] will hold in memory.
pub const MATERIALIZE_CAP: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FibonacciError {
    #[error("depth {depth} exceeds the tree-mode cap of {cap}; use counts mode")]
    DepthCap { depth: usize, cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisState {
    Zero,
    One,
}

impl BasisState {
    pub fn column(self) -> Vec2 {
        let (zero, one) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        match self {
            BasisState::Zero => [zero, one],
            BasisState::One => [one, zero],
        }
    }

    /// The basis state a nonzero vector is proportional to, if any.
    pub fn from_column(v: &Vec2) -> Option<Self> {
        let tol = 1e-12;
        match (v[0].norm() > tol, v[1].norm() > tol) {
            (false, true) => Some(BasisState::Zero),
            (true, false) => Some(BasisState::One),
            _ => None,
        }
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisState::Zero => f.write_str("|0>"),
            BasisState::One => f.write_str("|1>"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleApplied {
    Root,
    SigmaPlus,
    SigmaMinus,
    SigmaPlusSigmaMinus,
}

impl RuleApplied {
    pub fn matrix(self) -> Option<Mat2> {
        match self {
            RuleApplied::Root => None,
            RuleApplied::SigmaPlus => Some(sigma_plus()),
            RuleApplied::SigmaMinus => Some(sigma_minus()),
            RuleApplied::SigmaPlusSigmaMinus => Some(mat_mul(&sigma_plus(), &sigma_minus())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Node {
    pub state: BasisState,
    pub depth: usize,
    pub rule: RuleApplied,
}

impl Node {
    pub fn root() -> Self {
        Node { state: BasisState::Zero, depth: 0, rule: RuleApplied::Root }
    }
}

/// Children of a node, `|0>` first.
pub fn step(node: &Node) -> Vec<Node> {
    let depth = node.depth + 1;
    match node.state {
        BasisState::Zero => {
            vec![Node { state: BasisState::One, depth, rule: RuleApplied::SigmaPlus }]
        }
        BasisState::One => vec![
            Node { state: BasisState::Zero, depth, rule: RuleApplied::SigmaMinus },
            Node { state: BasisState::One, depth, rule: RuleApplied::SigmaPlusSigmaMinus },
        ],
    }
}

/// Re-derive the child by applying its rule matrix to the parent column and
/// normalizing away the overall scalar.
pub fn verify_matrix_semantics(parent: &Node, child: &Node) -> bool {
    let Some(m) = child.rule.matrix() else {
        return false;
    };
    child.depth == parent.depth + 1
        && BasisState::from_column(&mat_vec(&m, &parent.state.column())) == Some(child.state)
}

/// The scalar `c` with `(sigma+ sigma-)^n |1> = c |1>`.
pub fn persistence_scalar(n: u32) -> C64 {
    let m = RuleApplied::SigmaPlusSigmaMinus.matrix().expect("not root");
    let mut v = BasisState::One.column();
    for _ in 0..n {
        v = mat_vec(&m, &v);
    }
    v[0]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationCensus {
    pub depth: usize,
    pub zeros: BigUint,
    pub ones: BigUint,
}

impl GenerationCensus {
    pub fn root() -> Self {
        GenerationCensus { depth: 0, zeros: BigUint::one(), ones: BigUint::zero() }
    }

    pub fn total(&self) -> BigUint {
        &self.zeros + &self.ones
    }
}

/// `(p, q) -> (q, p + q)`.
pub fn census_recurrence(c: &GenerationCensus) -> GenerationCensus {
    GenerationCensus { depth: c.depth + 1, zeros: c.ones.clone(), ones: c.total() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenerationMode {
    /// Walk every node depth first.
    Tree,
    /// Iterate the census recurrence with exact integers.
    Counts,
}

/// Censuses for depths `0 ..= max_depth`.
pub fn generate(max_depth: usize, mode: GenerationMode) -> Result<Vec<GenerationCensus>, FibonacciError> {
    match mode {
        GenerationMode::Counts => {
            let mut out = vec![GenerationCensus::root()];
            for _ in 0..max_depth {
                let next = census_recurrence(out.last().expect("non-empty"));
                out.push(next);
            }
            Ok(out)
        }
        GenerationMode::Tree => {
            if max_depth > TREE_DEPTH_CAP {
                return Err(FibonacciError::DepthCap { depth: max_depth, cap: TREE_DEPTH_CAP });
            }
            let mut counts = vec![(0u64, 0u64); max_depth + 1];
            walk_tree(max_depth, |_, node| match node.state {
                BasisState::Zero => counts[node.depth].0 += 1,
                BasisState::One => counts[node.depth].1 += 1,
            })?;
            Ok(counts
                .into_iter()
                .enumerate()
                .map(|(depth, (z, o))| GenerationCensus { depth, zeros: z.into(), ones: o.into() })
                .collect())
        }
    }
}

/// Visit every node down to `max_depth` depth first, with its parent.
/// Memory stays proportional to the depth.
pub fn walk_tree(max_depth: usize, mut visit: impl FnMut(Option<&Node>, &Node)) -> Result<(), FibonacciError> {
    if max_depth > TREE_DEPTH_CAP {
        return Err(FibonacciError::DepthCap { depth: max_depth, cap: TREE_DEPTH_CAP });
    }
    let root = Node::root();
    visit(None, &root);
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        if node.depth == max_depth {
            continue;
        }
        for child in step(&node) {
            visit(Some(&node), &child);
            stack.push(child);
        }
    }
    Ok(())
}

/// A fully materialized tree with parent links.
#[derive(Debug, Clone)]
pub struct StateTree {
    nodes: Vec<Node>,
    parents: Vec<Option<usize>>,
}

impl StateTree {
    pub fn build(max_depth: usize) -> Result<Self, FibonacciError> {
        if max_depth > MATERIALIZE_CAP {
            return Err(FibonacciError::DepthCap { depth: max_depth, cap: MATERIALIZE_CAP });
        }
        let mut nodes = vec![Node::root()];
        let mut parents = vec![None];
        let mut frontier = 0..1;
        for _ in 0..max_depth {
            let start = nodes.len();
            for i in frontier.clone() {
                for child in step(&nodes[i]) {
                    nodes.push(child);
                    parents.push(Some(i));
                }
            }
            frontier = start..nodes.len();
        }
        Ok(StateTree { nodes, parents })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    pub fn parent(&self, i: usize) -> Option<&Node> {
        self.parents[i].map(|p| &self.nodes[p])
    }

    pub fn at_depth(&self, depth: usize) -> impl Iterator<Item = &Node> + '_ {
        self.nodes.iter().filter(move |n| n.depth == depth)
    }

    /// Every (parent, child) pair.
    pub fn edges(&self) -> impl Iterator<Item = (&Node, &Node)> + '_ {
        self.nodes.iter().zip(&self.parents).filter_map(|(child, p)| p.map(|p| (&self.nodes[p], child)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // F(1) = F(2) = 1
    fn fib(n: usize) -> u64 {
        let (mut a, mut b) = (0u64, 1u64);
        for _ in 0..n {
            (a, b) = (b, a + b);
        }
        a
    }

    #[test]
    fn step_rules() {
        let root = Node::root();
        let kids = step(&root);
        assert_eq!(kids.len(), 1);
        assert_eq!(kids[0].state, BasisState::One);
        assert_eq!(kids[0].rule, RuleApplied::SigmaPlus);
        let grand = step(&kids[0]);
        assert_eq!(grand.iter().map(|n| n.state).collect::<Vec<_>>(), [BasisState::Zero, BasisState::One]);
        assert!(grand.iter().all(|n| n.depth == 2));
    }

    #[test]
    fn matrix_semantics() {
        let one = BasisState::One.column();
        assert_eq!(mat_vec(&sigma_minus(), &one), BasisState::Zero.column());
        assert_eq!(BasisState::from_column(&mat_vec(&sigma_plus(), &one)), None);
        for n in 0..=5 {
            assert_eq!(persistence_scalar(n), C64::new(1.0, 0.0));
        }
        let fake = Node { state: BasisState::One, depth: 1, rule: RuleApplied::SigmaMinus };
        assert!(!verify_matrix_semantics(&Node::root(), &fake));
        let skip = Node { state: BasisState::One, depth: 2, rule: RuleApplied::SigmaPlus };
        assert!(!verify_matrix_semantics(&Node::root(), &skip));
    }

    #[test]
    fn early_totals() {
        let c = generate(4, GenerationMode::Tree).unwrap();
        let totals: Vec<u64> = c.iter().map(|x| x.total().try_into().unwrap()).collect();
        assert_eq!(totals, [1, 1, 2, 3, 5]);
    }

    #[test]
    fn recurrence_examples() {
        let c = GenerationCensus { depth: 1, zeros: 0u32.into(), ones: 1u32.into() };
        let n = census_recurrence(&c);
        assert_eq!((n.zeros.clone(), n.ones.clone()), (1u32.into(), 1u32.into()));
        let n = census_recurrence(&n);
        assert_eq!((n.zeros.clone(), n.ones.clone()), (1u32.into(), 2u32.into()));
        assert_eq!(n.total(), 3u32.into());
    }

    #[test]
    fn depth_25_against_iterative_fibonacci() {
        let counts = generate(25, GenerationMode::Counts).unwrap();
        assert_eq!(counts[25].total(), BigUint::from(121_393u32));
        assert_eq!(fib(26), 121_393);
        for (d, c) in counts.iter().enumerate() {
            assert_eq!(c.total(), BigUint::from(fib(d + 1)));
        }
    }

    #[test]
    fn tree_and_counts_agree() {
        assert_eq!(generate(22, GenerationMode::Tree).unwrap(), generate(22, GenerationMode::Counts).unwrap());
    }

    #[test]
    fn tree_mode_is_capped() {
        assert_eq!(
            generate(41, GenerationMode::Tree),
            Err(FibonacciError::DepthCap { depth: 41, cap: TREE_DEPTH_CAP })
        );
        assert!(generate(200, GenerationMode::Counts).is_ok());
        assert!(StateTree::build(MATERIALIZE_CAP + 1).is_err());
    }

    #[test]
    fn materialized_tree_edges_verify() {
        let tree = StateTree::build(16).unwrap();
        assert_eq!(tree.edges().count(), tree.len() - 1);
        for (parent, child) in tree.edges() {
            assert!(verify_matrix_semantics(parent, child));
            if child.state == BasisState::Zero {
                assert_eq!(child.rule, RuleApplied::SigmaMinus);
                assert_eq!(parent.state, BasisState::One);
            }
        }
        assert_eq!(tree.at_depth(16).count() as u64, fib(17));
        assert!(tree.parent(0).is_none());
    }

    #[test]
    fn golden_ratio_limit() {
        let counts = generate(21, GenerationMode::Counts).unwrap();
        let ratio = f64::from(counts[21].total().to_u32_digits()[0]) / f64::from(counts[20].total().to_u32_digits()[0]);
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((ratio - golden).abs() < 1e-6);
    }

    #[test]
    fn counts_beyond_u64() {
        let counts = generate(120, GenerationMode::Counts).unwrap();
        let mut a = BigUint::zero();
        let mut b = BigUint::one();
        for _ in 0..121 {
            let next = &a + &b;
            a = b;
            b = next;
        }
        assert_eq!(counts[120].total(), a);
        assert!(counts[120].total() > BigUint::from(u64::MAX));
    }
}
