//! Exponential reference solver: the recurrence over every query subset
//! reachable by test splits, memoized on bitmasks.

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::instance::Instance;
use crate::queryset::QuerySet;
use crate::signature::signature_of;
use crate::tree::{legal_tests, Cost, DecisionTree, Test};

pub const ORACLE_MAX_N: usize = 20;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance has {n} queries, the oracle handles at most {ORACLE_MAX_N}")]
    TooLarge { n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OracleMode {
    #[default]
    Unrestricted,
    /// Sets with a light hole cost infinity.
    HeaviestFirst,
}

#[derive(Debug, Clone, Copy)]
enum Entry {
    Leaf,
    Split { cost: u64, test: Test },
    Infinite,
}

pub struct SubsetOracle<'a> {
    instance: &'a Instance,
    mode: OracleMode,
    tests: Vec<Test>,
    memo: FxHashMap<u64, Entry>,
}

impl<'a> SubsetOracle<'a> {
    pub fn new(instance: &'a Instance, mode: OracleMode) -> Result<Self, OracleError> {
        if instance.len() > ORACLE_MAX_N {
            return Err(OracleError::TooLarge { n: instance.len() });
        }
        Ok(Self {
            instance,
            mode,
            tests: legal_tests(instance),
            memo: FxHashMap::default(),
        })
    }

    /// Number of subsets evaluated so far.
    pub fn table_len(&self) -> usize {
        self.memo.len()
    }

    pub fn cost(&mut self, set: &QuerySet) -> Cost {
        match self.entry(set.to_mask()) {
            Entry::Leaf => Cost::Finite(0),
            Entry::Split { cost, .. } => Cost::Finite(cost),
            Entry::Infinite => Cost::Infinite,
        }
    }

    pub fn tree(&mut self, set: &QuerySet) -> Option<DecisionTree> {
        let n = self.instance.len();
        match self.entry(set.to_mask()) {
            Entry::Infinite => None,
            Entry::Leaf => self.instance.covering_class(set).map(DecisionTree::leaf),
            Entry::Split { test, .. } => {
                let (yes, no) = split(set.to_mask(), test, n);
                let yes = self.tree(&QuerySet::from_mask(n, yes))?;
                let no = self.tree(&QuerySet::from_mask(n, no))?;
                Some(DecisionTree::node(test, yes, no))
            }
        }
    }

    fn entry(&mut self, mask: u64) -> Entry {
        if let Some(&e) = self.memo.get(&mask) {
            return e;
        }
        let e = self.evaluate(mask);
        self.memo.insert(mask, e);
        e
    }

    fn evaluate(&mut self, mask: u64) -> Entry {
        let n = self.instance.len();
        if mask == 0 {
            return Entry::Infinite;
        }
        let set = QuerySet::from_mask(n, mask);
        if self.mode == OracleMode::HeaviestFirst
            && !signature_of(&set, self.instance).expect("nonempty").holes.is_empty()
        {
            return Entry::Infinite;
        }
        if self.instance.covering_class(&set).is_some() {
            return Entry::Leaf;
        }
        let weight = self.instance.weight_of(&set);
        let mut best: Option<(u64, Test)> = None;
        for i in 0..self.tests.len() {
            let test = self.tests[i];
            let (yes, no) = split(mask, test, n);
            if yes == 0 || no == 0 {
                continue;
            }
            let (Some(a), Some(b)) = (self.finite(yes), self.finite(no)) else {
                continue;
            };
            let total = a + b;
            if best.is_none_or(|(c, _)| total < c) {
                best = Some((total, test));
            }
        }
        match best {
            Some((c, test)) => Entry::Split { cost: weight + c, test },
            None => Entry::Infinite,
        }
    }

    fn finite(&mut self, mask: u64) -> Option<u64> {
        match self.entry(mask) {
            Entry::Leaf => Some(0),
            Entry::Split { cost, .. } => Some(cost),
            Entry::Infinite => None,
        }
    }
}

fn split(mask: u64, test: Test, n: usize) -> (u64, u64) {
    let yes_side = (0..n).filter(|&q| test.satisfied_by(q)).fold(0u64, |m, q| m | 1 << q);
    (mask & yes_side, mask & !yes_side)
}

/// Minimum cost of a tree for the queries in `set`.
pub fn subset_dp_cost(instance: &Instance, set: &QuerySet) -> Result<Cost, OracleError> {
    Ok(SubsetOracle::new(instance, OracleMode::Unrestricted)?.cost(set))
}

/// A minimum-cost tree for the whole instance, or `None` if infeasible.
pub fn subset_dp_tree(instance: &Instance) -> Result<Option<DecisionTree>, OracleError> {
    subset_dp_tree_with(instance, OracleMode::Unrestricted)
}

pub fn subset_dp_tree_with(instance: &Instance, mode: OracleMode) -> Result<Option<DecisionTree>, OracleError> {
    let mut oracle = SubsetOracle::new(instance, mode)?;
    Ok(oracle.tree(&QuerySet::full(instance.len())))
}

/// Cost of the whole instance under the given restriction.
pub fn oracle_cost(instance: &Instance, mode: OracleMode) -> Result<Cost, OracleError> {
    Ok(SubsetOracle::new(instance, mode)?.cost(&QuerySet::full(instance.len())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{check_feasibility, Query};
    use crate::testutil::{all_keys, inst};
    use crate::tree::tree_cost;

    fn fixture() -> Instance {
        all_keys(&[1, 1, 1], &[("A", &[1, 3]), ("B", &[2])])
    }

    #[test]
    fn base_cases() {
        let i = fixture();
        assert_eq!(subset_dp_cost(&i, &QuerySet::empty(3)), Ok(Cost::Infinite));
        assert_eq!(
            subset_dp_cost(&i, &QuerySet::from_ranks(3, [0, 2])),
            Ok(Cost::Finite(0))
        );
        assert_eq!(subset_dp_cost(&i, &QuerySet::full(3)), Ok(Cost::Finite(3)));
    }

    #[test]
    fn tree_matches_cost() {
        let i = all_keys(&[3, 1, 4, 1, 5], &[("a", &[1, 4]), ("b", &[2, 5]), ("c", &[3])]);
        let t = subset_dp_tree(&i).unwrap().unwrap();
        assert_eq!(
            Cost::Finite(tree_cost(&t, &i).unwrap()),
            subset_dp_cost(&i, &QuerySet::full(5)).unwrap()
        );
        for q in 0..5 {
            assert!(i.class(t.search(q).class).members.contains(q));
        }
    }

    #[test]
    fn infeasible_agrees_with_check() {
        let i = inst(
            &[(1, 1, false), (2, 1, false), (3, 1, false)],
            &[("A", &[1, 2]), ("B", &[3])],
        );
        assert_eq!(subset_dp_tree(&i), Ok(None));
        assert!(!check_feasibility(&i).is_feasible());
    }

    #[test]
    fn size_cap() {
        let queries = (0..21).map(|v| Query::new(v, 1, true)).collect();
        let i = Instance::new(queries, vec![("A".into(), (0..21).collect())]).unwrap();
        assert_eq!(
            subset_dp_cost(&i, &QuerySet::full(21)),
            Err(OracleError::TooLarge { n: 21 })
        );
    }

    #[test]
    fn heaviest_first_never_cheaper() {
        let i = all_keys(&[2, 7, 1, 8, 2, 8], &[("a", &[1, 3, 5]), ("b", &[2, 6]), ("c", &[4])]);
        let full = oracle_cost(&i, OracleMode::Unrestricted).unwrap();
        let hf = oracle_cost(&i, OracleMode::HeaviestFirst).unwrap();
        assert!(hf >= full);
    }
}
