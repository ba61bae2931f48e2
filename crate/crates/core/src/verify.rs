//! Structural audit of a decision tree against an instance.

use std::fmt;

use crate::instance::{ClassId, Instance};
use crate::queryset::QuerySet;
use crate::signature::is_admissible;
use crate::transform::tests_equivalent;
use crate::tree::{tree_cost, DecisionTree, NodePath, Test, TreeError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    /// The leaf's class misses some query reaching it.
    WrongClass { class: ClassId, missing: Vec<usize> },
    /// No query reaches the node.
    Unreachable,
    /// An internal node whose queries all fit in one class.
    Reducible { class: ClassId },
    /// The node's query set is not admissible.
    Inadmissible,
    /// An equality test on a key other than the heaviest one reaching it.
    NotHeaviest { test: Test },
    /// Two nodes carry equivalent tests.
    EquivalentTests { other: NodePath },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: NodePath,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub correct: bool,
    pub cost: u64,
    pub irreducible: bool,
    pub admissible: bool,
    pub heaviest_first: bool,
    /// No two nodes carry equivalent tests.
    pub distinct_tests: bool,
    /// Query set of every node, in preorder.
    pub node_sets: Vec<(NodePath, QuerySet)>,
    pub violations: Vec<Violation>,
}

/// Computes every node's query set top-down and checks correctness,
/// irreducibility, admissibility and the heaviest-first property.
pub fn verify_tree(tree: &DecisionTree, instance: &Instance) -> Result<VerifyReport, TreeError> {
    tree.validate(instance)?;
    let cost = tree_cost(tree, instance)?;
    let node_sets = tree.query_sets(instance);

    let mut report = VerifyReport {
        correct: true,
        cost,
        irreducible: true,
        admissible: true,
        heaviest_first: true,
        distinct_tests: true,
        node_sets: Vec::new(),
        violations: Vec::new(),
    };
    let flag = |path: &NodePath, kind: ViolationKind, report: &mut VerifyReport| {
        match kind {
            ViolationKind::WrongClass { .. } => report.correct = false,
            ViolationKind::Unreachable | ViolationKind::Reducible { .. } => report.irreducible = false,
            ViolationKind::Inadmissible => report.admissible = false,
            ViolationKind::NotHeaviest { .. } => report.heaviest_first = false,
            ViolationKind::EquivalentTests { .. } => report.distinct_tests = false,
        }
        report.violations.push(Violation {
            path: path.clone(),
            kind,
        });
    };

    let mut tests_seen: Vec<(NodePath, Test)> = Vec::new();
    for (path, set) in &node_sets {
        let node = tree.at(path).expect("path from the same tree");
        if set.is_empty() {
            flag(path, ViolationKind::Unreachable, &mut report);
        }
        if !is_admissible(set, instance).admissible {
            flag(path, ViolationKind::Inadmissible, &mut report);
        }
        match node {
            DecisionTree::Leaf(c) => {
                let members = &instance.class(*c).members;
                if !set.is_subset(members) {
                    let missing = set.difference(members).iter().collect();
                    flag(path, ViolationKind::WrongClass { class: *c, missing }, &mut report);
                }
            }
            DecisionTree::Node { test, .. } => {
                if let Some(c) = instance.covering_class(set) {
                    flag(path, ViolationKind::Reducible { class: c }, &mut report);
                }
                if test.kind == crate::tree::TestKind::Equal && heaviest_key(set, instance) != Some(test.key) {
                    flag(path, ViolationKind::NotHeaviest { test: *test }, &mut report);
                }
                if let Some((other, _)) = tests_seen.iter().find(|(_, t)| tests_equivalent(*t, *test, instance)) {
                    let other = other.clone();
                    flag(path, ViolationKind::EquivalentTests { other }, &mut report);
                }
                tests_seen.push((path.clone(), *test));
            }
        }
    }
    report.node_sets = node_sets;
    Ok(report)
}

/// Heaviest key in `set` under the tie-broken weight order.
pub fn heaviest_key(set: &QuerySet, instance: &Instance) -> Option<usize> {
    set.iter()
        .filter(|&q| instance.is_key(q))
        .max_by_key(|&q| instance.weight_rank(q))
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "correct {}", self.correct)?;
        writeln!(f, "cost {}", self.cost)?;
        writeln!(f, "irreducible {}", self.irreducible)?;
        writeln!(f, "admissible {}", self.admissible)?;
        write!(f, "heaviest_first {}", self.heaviest_first)
    }
}
