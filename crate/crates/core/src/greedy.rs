//! Weight-balancing top-down heuristic, used as a benchmark baseline.

use crate::instance::Instance;
use crate::queryset::QuerySet;
use crate::solver::{SolveResult, SolveStats, Status};
use crate::tree::{Cost, DecisionTree, Test};

/// Builds a tree by repeatedly picking the test whose two sides have the
/// closest weights. Ties go to less-than tests, then smaller keys.
pub fn greedy_baseline(instance: &Instance) -> SolveResult {
    let tree = build(QuerySet::full(instance.len()), instance);
    let (status, cost) = match &tree {
        Some(t) => (
            Status::Optimal,
            Cost::Finite(crate::tree::tree_cost(t, instance).expect("greedy trees are well formed")),
        ),
        None => (Status::Infeasible, Cost::Infinite),
    };
    SolveResult {
        status,
        cost,
        tree,
        stats: SolveStats::default(),
    }
}

fn best_test(members: &[usize], instance: &Instance) -> Option<Test> {
    let total = members.iter().map(|&q| instance.weight(q)).sum::<u64>();
    let mut best: Option<(u64, Test)> = None;
    let mut consider = |yes: u64, test: Test| {
        let gap = yes.abs_diff(total - yes);
        if best.is_none_or(|(g, _)| gap < g) {
            best = Some((gap, test));
        }
    };
    let (first, last) = (members[0], members[members.len() - 1]);
    let keys = instance.keys();
    // weight of the members below key k; k need not be a member itself
    let mut below = 0u64;
    let mut i = 0;
    for &k in &keys[keys.partition_point(|&k| k <= first)..keys.partition_point(|&k| k <= last)] {
        while members[i] < k {
            below += instance.weight(members[i]);
            i += 1;
        }
        consider(below, Test::less(k));
    }
    if members.len() > 1 {
        for &q in members.iter().filter(|&&q| instance.is_key(q)) {
            consider(instance.weight(q), Test::equal(q));
        }
    }
    best.map(|(_, t)| t)
}

fn build(set: QuerySet, instance: &Instance) -> Option<DecisionTree> {
    if let Some(c) = instance.covering_class(&set) {
        return Some(DecisionTree::leaf(c));
    }
    let members: Vec<usize> = set.iter().collect();
    let test = best_test(&members, instance)?;
    let mut yes = QuerySet::empty(instance.len());
    let mut no = QuerySet::empty(instance.len());
    for q in members {
        if test.satisfied_by(q) {
            yes.insert(q);
        } else {
            no.insert(q);
        }
    }
    Some(DecisionTree::node(test, build(yes, instance)?, build(no, instance)?))
}
