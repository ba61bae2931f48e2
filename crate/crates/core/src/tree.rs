//! Tests, decision trees, search and cost.

use std::fmt;

use thiserror::Error;

use crate::instance::{ClassId, Instance};
use crate::queryset::QuerySet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TestKind {
    Less,
    Equal,
}

/// `q < key` or `q = key`, with `key` given as a query rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Test {
    pub kind: TestKind,
    pub key: usize,
}

impl Test {
    pub fn less(key: usize) -> Self {
        Self {
            kind: TestKind::Less,
            key,
        }
    }

    pub fn equal(key: usize) -> Self {
        Self {
            kind: TestKind::Equal,
            key,
        }
    }

    /// Whether query rank `q` takes the yes-branch.
    #[inline]
    pub fn satisfied_by(&self, q: usize) -> bool {
        match self.kind {
            TestKind::Less => q < self.key,
            TestKind::Equal => q == self.key,
        }
    }

    pub fn answer(&self, q: usize) -> Answer {
        if self.satisfied_by(q) {
            Answer::Yes
        } else {
            Answer::No
        }
    }

    /// Legality: the key must be a key, and a less-than key must also
    /// exceed the smallest query.
    pub fn is_legal(&self, instance: &Instance) -> bool {
        self.key < instance.len() && instance.is_key(self.key) && (self.kind == TestKind::Equal || self.key > 0)
    }

    pub fn check(&self, instance: &Instance) -> Result<(), TreeError> {
        if self.is_legal(instance) {
            Ok(())
        } else {
            Err(TreeError::IllegalTest {
                test: self.display(instance).to_string(),
            })
        }
    }

    pub fn display<'a>(&'a self, instance: &'a Instance) -> impl fmt::Display + 'a {
        DisplayTest { test: self, instance }
    }
}

struct DisplayTest<'a> {
    test: &'a Test,
    instance: &'a Instance,
}

impl fmt::Display for DisplayTest<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.test.kind {
            TestKind::Less => '<',
            TestKind::Equal => '=',
        };
        match self.instance.values().get(self.test.key) {
            Some(v) => write!(f, "{op} {v}"),
            None => write!(f, "{op} #{}", self.test.key),
        }
    }
}

/// All legal tests: less-than tests first, then equality tests, each in
/// increasing key order.
pub fn legal_tests(instance: &Instance) -> Vec<Test> {
    let keys = instance.keys();
    keys.iter()
        .filter(|&&k| k > 0)
        .map(|&k| Test::less(k))
        .chain(keys.iter().map(|&k| Test::equal(k)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Answer {
    Yes,
    No,
}

impl Answer {
    pub fn flip(self) -> Self {
        match self {
            Answer::Yes => Answer::No,
            Answer::No => Answer::Yes,
        }
    }
}

/// One branch of one test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Outcome {
    pub test: Test,
    pub answer: Answer,
}

impl Outcome {
    pub fn new(test: Test, answer: Answer) -> Self {
        Self { test, answer }
    }

    #[inline]
    pub fn admits(&self, q: usize) -> bool {
        self.test.satisfied_by(q) == (self.answer == Answer::Yes)
    }
}

/// Minimum cost, with `Infinite` for "no admissible tree".
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cost {
    Finite(u64),
    Infinite,
}

impl Cost {
    pub fn finite(self) -> Option<u64> {
        match self {
            Cost::Finite(c) => Some(c),
            Cost::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Cost::Finite(_))
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(c) => write!(f, "{c}"),
            Cost::Infinite => f.write_str("infeasible"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("illegal test `{test}`")]
    IllegalTest { test: String },
    #[error("leaf names class index {0}, which does not exist")]
    UnknownClass(usize),
    #[error("tree cost overflows 64 bits")]
    CostOverflow,
    #[error("no node at path {0:?}")]
    NoSuchNode(NodePath),
}

/// A binary tree of tests whose leaves name classes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DecisionTree {
    Leaf(ClassId),
    Node {
        test: Test,
        yes: Box<DecisionTree>,
        no: Box<DecisionTree>,
    },
}

/// Address of a node: the answers taken on the way down from the root.
pub type NodePath = Vec<Answer>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    pub class: ClassId,
    pub depth: usize,
    pub path: Vec<Outcome>,
}

impl DecisionTree {
    pub fn leaf(c: ClassId) -> Self {
        DecisionTree::Leaf(c)
    }

    pub fn node(test: Test, yes: DecisionTree, no: DecisionTree) -> Self {
        DecisionTree::Node {
            test,
            yes: Box::new(yes),
            no: Box::new(no),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, DecisionTree::Leaf(_))
    }

    pub fn child(&self, answer: Answer) -> Option<&DecisionTree> {
        match self {
            DecisionTree::Leaf(_) => None,
            DecisionTree::Node { yes, no, .. } => Some(match answer {
                Answer::Yes => yes,
                Answer::No => no,
            }),
        }
    }

    pub fn at(&self, path: &[Answer]) -> Option<&DecisionTree> {
        path.iter().try_fold(self, |node, &a| node.child(a))
    }

    pub fn at_mut(&mut self, path: &[Answer]) -> Option<&mut DecisionTree> {
        let mut node = self;
        for &a in path {
            node = match node {
                DecisionTree::Leaf(_) => return None,
                DecisionTree::Node { yes, no, .. } => match a {
                    Answer::Yes => yes,
                    Answer::No => no,
                },
            };
        }
        Some(node)
    }

    pub fn node_count(&self) -> usize {
        match self {
            DecisionTree::Leaf(_) => 1,
            DecisionTree::Node { yes, no, .. } => 1 + yes.node_count() + no.node_count(),
        }
    }

    /// Paths of every node in preorder (node, yes-subtree, no-subtree).
    pub fn node_paths(&self) -> Vec<NodePath> {
        let mut out = Vec::new();
        let mut stack = vec![(self, Vec::new())];
        while let Some((node, path)) = stack.pop() {
            if let DecisionTree::Node { yes, no, .. } = node {
                let mut p_no = path.clone();
                p_no.push(Answer::No);
                let mut p_yes = path.clone();
                p_yes.push(Answer::Yes);
                stack.push((no, p_no));
                stack.push((yes, p_yes));
            }
            out.push(path);
        }
        out
    }

    /// Follows `q` from the root to its leaf.
    pub fn search(&self, q: usize) -> SearchResult {
        let mut node = self;
        let mut path = Vec::new();
        loop {
            match node {
                DecisionTree::Leaf(c) => {
                    return SearchResult {
                        class: *c,
                        depth: path.len(),
                        path,
                    }
                }
                DecisionTree::Node { test, yes, no } => {
                    let answer = test.answer(q);
                    path.push(Outcome::new(*test, answer));
                    node = if answer == Answer::Yes { yes } else { no };
                }
            }
        }
    }

    /// Checks that every test is legal and every leaf names a real class.
    pub fn validate(&self, instance: &Instance) -> Result<(), TreeError> {
        match self {
            DecisionTree::Leaf(c) if c.0 >= instance.classes().len() => Err(TreeError::UnknownClass(c.0)),
            DecisionTree::Leaf(_) => Ok(()),
            DecisionTree::Node { test, yes, no } => {
                test.check(instance)?;
                yes.validate(instance)?;
                no.validate(instance)
            }
        }
    }

    /// Query set of every node, keyed by the node's position in preorder.
    pub fn query_sets(&self, instance: &Instance) -> Vec<(NodePath, QuerySet)> {
        self.query_sets_from(QuerySet::full(instance.len()))
    }

    /// Like [`DecisionTree::query_sets`], starting from an arbitrary set.
    pub fn query_sets_from(&self, reaching: QuerySet) -> Vec<(NodePath, QuerySet)> {
        let mut out = Vec::new();
        let mut stack = vec![(self, Vec::new(), reaching)];
        while let Some((node, path, set)) = stack.pop() {
            if let DecisionTree::Node { test, yes, no } = node {
                let mut yes_set = QuerySet::empty(set.universe());
                let mut no_set = QuerySet::empty(set.universe());
                for q in &set {
                    if test.satisfied_by(q) {
                        yes_set.insert(q);
                    } else {
                        no_set.insert(q);
                    }
                }
                let mut p_no = path.clone();
                p_no.push(Answer::No);
                let mut p_yes = path.clone();
                p_yes.push(Answer::Yes);
                stack.push((no, p_no, no_set));
                stack.push((yes, p_yes, yes_set));
            }
            out.push((path, set));
        }
        out
    }
}

/// `Σ w(q)·depth(q)`, with overflow reported rather than wrapped.
pub fn tree_cost(tree: &DecisionTree, instance: &Instance) -> Result<u64, TreeError> {
    let mut total = 0u64;
    for q in 0..instance.len() {
        let depth = tree.search(q).depth as u64;
        total = instance
            .weight(q)
            .checked_mul(depth)
            .and_then(|d| total.checked_add(d))
            .ok_or(TreeError::CostOverflow)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::inst;

    fn three() -> Instance {
        inst(
            &[(1, 1, true), (2, 1, true), (3, 1, true)],
            &[("A", &[1, 3]), ("B", &[2]), ("C", &[3])],
        )
    }

    #[test]
    fn search_examples() {
        let i = three();
        let leaf = DecisionTree::leaf(ClassId(0));
        let r = leaf.search(1);
        assert_eq!((r.class, r.depth, r.path.len()), (ClassId(0), 0, 0));

        let eq = DecisionTree::node(
            Test::equal(1),
            DecisionTree::leaf(ClassId(1)),
            DecisionTree::leaf(ClassId(0)),
        );
        let r = eq.search(i.rank_of_value(2).unwrap());
        assert_eq!((r.class, r.depth), (ClassId(1), 1));

        let chain = DecisionTree::node(
            Test::less(1),
            DecisionTree::leaf(ClassId(0)),
            DecisionTree::node(
                Test::equal(1),
                DecisionTree::leaf(ClassId(1)),
                DecisionTree::leaf(ClassId(2)),
            ),
        );
        let r = chain.search(2);
        assert_eq!((r.class, r.depth), (ClassId(2), 2));
        assert_eq!(r.path[0], Outcome::new(Test::less(1), Answer::No));
    }

    #[test]
    fn cost_examples() {
        let i = three();
        assert_eq!(tree_cost(&DecisionTree::leaf(ClassId(0)), &i), Ok(0));
        let eq = DecisionTree::node(
            Test::equal(1),
            DecisionTree::leaf(ClassId(1)),
            DecisionTree::leaf(ClassId(0)),
        );
        assert_eq!(tree_cost(&eq, &i), Ok(3));
        let chain = DecisionTree::node(
            Test::less(1),
            DecisionTree::leaf(ClassId(0)),
            DecisionTree::node(
                Test::equal(1),
                DecisionTree::leaf(ClassId(1)),
                DecisionTree::leaf(ClassId(2)),
            ),
        );
        assert_eq!(tree_cost(&chain, &i), Ok(5));
    }

    #[test]
    fn legality() {
        let i = inst(&[(1, 1, true), (2, 1, false), (3, 1, true)], &[("A", &[1, 2, 3])]);
        assert!(!Test::less(0).is_legal(&i));
        assert!(Test::equal(0).is_legal(&i));
        assert!(!Test::equal(1).is_legal(&i));
        assert!(Test::less(2).is_legal(&i));
        assert_eq!(legal_tests(&i), vec![Test::less(2), Test::equal(0), Test::equal(2)]);
        let bad = DecisionTree::node(
            Test::equal(1),
            DecisionTree::leaf(ClassId(0)),
            DecisionTree::leaf(ClassId(0)),
        );
        assert!(matches!(bad.validate(&i), Err(TreeError::IllegalTest { .. })));
        assert_eq!(
            DecisionTree::leaf(ClassId(4)).validate(&i),
            Err(TreeError::UnknownClass(4))
        );
    }

    #[test]
    fn node_paths_are_preorder() {
        let t = DecisionTree::node(
            Test::less(1),
            DecisionTree::leaf(ClassId(0)),
            DecisionTree::node(
                Test::equal(1),
                DecisionTree::leaf(ClassId(1)),
                DecisionTree::leaf(ClassId(2)),
            ),
        );
        let paths = t.node_paths();
        assert_eq!(
            paths,
            vec![
                vec![],
                vec![Answer::Yes],
                vec![Answer::No],
                vec![Answer::No, Answer::Yes],
                vec![Answer::No, Answer::No]
            ]
        );
        let sets = t.query_sets(&three());
        assert_eq!(sets[3].1.iter().collect::<Vec<_>>(), vec![1]);
    }
}
