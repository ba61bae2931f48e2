//! Outcome consistency, laminarity, consistent paths and splitting.
//!
//! Splitting a subtree `T_u` around a test `x` puts `x` on top of two
//! copies of `T_u` and, in each copy, removes the tests along the
//! `x`-consistent path whose departing branch cannot be reached under
//! that side of `x`. Every query of `T_u` still ends at a copy of its
//! original leaf.

use thiserror::Error;

use crate::instance::Instance;
use crate::tree::{legal_tests, Answer, DecisionTree, NodePath, Outcome, Test, TestKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("no node at path {0:?}")]
    NoSuchNode(NodePath),
    #[error("tree is not irreducible")]
    NotIrreducible,
    #[error("illegal test")]
    IllegalTest(Test),
}

/// Existence of a query satisfying both outcomes, by direct scan.
pub fn outcomes_consistent_naive(a: Outcome, b: Outcome, instance: &Instance) -> bool {
    (0..instance.len()).any(|q| a.admits(q) && b.admits(q))
}

/// Queries admitted by an outcome: an interval of ranks minus at most one point.
fn admitted(o: Outcome, n: usize) -> (usize, usize, Option<usize>) {
    let k = o.test.key;
    match (o.test.kind, o.answer) {
        (TestKind::Less, Answer::Yes) => (0, k, None),
        (TestKind::Less, Answer::No) => (k, n, None),
        (TestKind::Equal, Answer::Yes) => (k, k + 1, None),
        (TestKind::Equal, Answer::No) => (0, n, Some(k)),
    }
}

/// Existence of a query satisfying both outcomes, by interval arithmetic.
pub fn outcomes_consistent(a: Outcome, b: Outcome, instance: &Instance) -> bool {
    let n = instance.len();
    let (lo1, hi1, x1) = admitted(a, n);
    let (lo2, hi2, x2) = admitted(b, n);
    let (lo, hi) = (lo1.max(lo2), hi1.min(hi2).min(n));
    if lo >= hi {
        return false;
    }
    let mut holes = [x1, x2]
        .into_iter()
        .flatten()
        .filter(|&x| lo <= x && x < hi)
        .collect::<Vec<_>>();
    holes.dedup();
    hi - lo > holes.len()
}

/// Same outcome on every query, or opposite outcome on every query.
pub fn tests_equivalent(a: Test, b: Test, instance: &Instance) -> bool {
    let mut same = true;
    let mut opposite = true;
    for q in 0..instance.len() {
        if a.satisfied_by(q) == b.satisfied_by(q) {
            opposite = false;
        } else {
            same = false;
        }
    }
    same || opposite
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaminarityViolation {
    pub first: Test,
    pub second: Test,
    pub equivalent: bool,
    pub inconsistent_pairs: usize,
}

const ANSWERS: [Answer; 2] = [Answer::Yes, Answer::No];

/// Checks every pair of legal tests: non-equivalent pairs must have exactly
/// one inconsistent pair of outcomes; equivalent pairs must match each
/// outcome of one test with exactly one outcome of the other.
pub fn check_laminarity(instance: &Instance) -> Result<(), LaminarityViolation> {
    // With a single query some outcome is empty; the property concerns
    // instances with more than one test outcome to choose from.
    if instance.len() < 2 {
        return Ok(());
    }
    let tests = legal_tests(instance);
    for (i, &a) in tests.iter().enumerate() {
        for &b in &tests[i..] {
            let consistent =
                |x: Answer, y: Answer| outcomes_consistent_naive(Outcome::new(a, x), Outcome::new(b, y), instance);
            let equivalent = tests_equivalent(a, b, instance);
            let inconsistent_pairs = ANSWERS
                .iter()
                .flat_map(|&x| ANSWERS.iter().map(move |&y| (x, y)))
                .filter(|&(x, y)| !consistent(x, y))
                .count();
            let ok = if equivalent {
                ANSWERS
                    .iter()
                    .all(|&x| ANSWERS.iter().filter(|&&y| consistent(x, y)).count() == 1)
            } else {
                inconsistent_pairs == 1
            };
            if !ok {
                return Err(LaminarityViolation {
                    first: a,
                    second: b,
                    equivalent,
                    inconsistent_pairs,
                });
            }
        }
    }
    Ok(())
}

/// Irreducibility, ignoring leaf labels beyond the instance's classes.
pub fn is_irreducible(tree: &DecisionTree, instance: &Instance) -> bool {
    tree.query_sets(instance).iter().all(|(path, set)| {
        !set.is_empty() && (tree.at(path).is_some_and(DecisionTree::is_leaf) || instance.covering_class(set).is_none())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathEnd {
    Leaf,
    /// A test node equivalent to the reference test.
    Equivalent,
}

/// The `x`-consistent path from a node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathDescriptor {
    /// Each node before the terminal, with the branch the path follows.
    pub steps: Vec<(NodePath, Answer)>,
    pub terminal: NodePath,
    pub end: PathEnd,
}

/// The branch of `test` consistent with both outcomes of `x`, if any.
fn through_branch(test: Test, x: Test, instance: &Instance) -> Option<Answer> {
    ANSWERS.into_iter().find(|&a| {
        let o = Outcome::new(test, a);
        outcomes_consistent(o, Outcome::new(x, Answer::Yes), instance)
            && outcomes_consistent(o, Outcome::new(x, Answer::No), instance)
    })
}

fn check_inputs(tree: &DecisionTree, u: &[Answer], x: Test, instance: &Instance) -> Result<(), TransformError> {
    if !x.is_legal(instance) {
        return Err(TransformError::IllegalTest(x));
    }
    if tree.at(u).is_none() {
        return Err(TransformError::NoSuchNode(u.to_vec()));
    }
    for (path, _) in tree.query_sets(instance) {
        if let Some(DecisionTree::Node { test, .. }) = tree.at(&path) {
            if !test.is_legal(instance) {
                return Err(TransformError::IllegalTest(*test));
            }
        }
    }
    if !is_irreducible(tree, instance) {
        return Err(TransformError::NotIrreducible);
    }
    Ok(())
}

/// Maximal downward path from `u` whose outcomes are all consistent with
/// both outcomes of `x`. It ends at a leaf or at a test equivalent to `x`.
pub fn x_consistent_path(
    tree: &DecisionTree,
    u: &[Answer],
    x: Test,
    instance: &Instance,
) -> Result<PathDescriptor, TransformError> {
    check_inputs(tree, u, x, instance)?;
    let mut path = u.to_vec();
    let mut node = tree.at(u).expect("checked");
    let mut steps = Vec::new();
    loop {
        match node {
            DecisionTree::Leaf(_) => {
                return Ok(PathDescriptor {
                    steps,
                    terminal: path,
                    end: PathEnd::Leaf,
                })
            }
            DecisionTree::Node { test, .. } => match through_branch(*test, x, instance) {
                Some(a) => {
                    steps.push((path.clone(), a));
                    path.push(a);
                    node = node.child(a).expect("internal node");
                }
                None => {
                    return Ok(PathDescriptor {
                        steps,
                        terminal: path,
                        end: PathEnd::Equivalent,
                    })
                }
            },
        }
    }
}

/// The copy of `node` kept under the `side` branch of `x`.
fn pruned_copy(node: &DecisionTree, x: Test, side: Answer, instance: &Instance) -> DecisionTree {
    let DecisionTree::Node { test, yes, no } = node else {
        return node.clone();
    };
    let side_outcome = Outcome::new(x, side);
    match through_branch(*test, x, instance) {
        Some(on_path) => {
            let off_path = on_path.flip();
            let next = node.child(on_path).expect("internal node");
            if !outcomes_consistent(Outcome::new(*test, off_path), side_outcome, instance) {
                return pruned_copy(next, x, side, instance);
            }
            let kept = pruned_copy(next, x, side, instance);
            match on_path {
                Answer::Yes => DecisionTree::node(*test, kept, (**no).clone()),
                Answer::No => DecisionTree::node(*test, (**yes).clone(), kept),
            }
        }
        None => {
            // Equivalent to x: exactly one branch survives under this side.
            let keep = if outcomes_consistent(Outcome::new(*test, Answer::Yes), side_outcome, instance) {
                yes
            } else {
                no
            };
            (**keep).clone()
        }
    }
}

/// `T'_x` for a subtree, without any precondition checks.
pub fn split_around(subtree: &DecisionTree, x: Test, instance: &Instance) -> DecisionTree {
    DecisionTree::node(
        x,
        pruned_copy(subtree, x, Answer::Yes, instance),
        pruned_copy(subtree, x, Answer::No, instance),
    )
}

/// Replaces the subtree at `u` by the result of splitting it around `x`.
/// The result may contain nodes no query reaches.
pub fn split_subtree(
    tree: &DecisionTree,
    u: &[Answer],
    x: Test,
    instance: &Instance,
) -> Result<DecisionTree, TransformError> {
    check_inputs(tree, u, x, instance)?;
    let mut out = tree.clone();
    let slot = out.at_mut(u).expect("checked");
    *slot = split_around(slot, x, instance);
    Ok(out)
}

/// Removes every test one of whose branches no query reaches.
pub fn prune_unreachable(tree: &DecisionTree, instance: &Instance) -> DecisionTree {
    fn go(node: &DecisionTree, reaching: &[usize]) -> DecisionTree {
        match node {
            DecisionTree::Leaf(_) => node.clone(),
            DecisionTree::Node { test, yes, no } => {
                let (y, n): (Vec<usize>, Vec<usize>) = reaching.iter().partition(|&&q| test.satisfied_by(q));
                if y.is_empty() && !n.is_empty() {
                    go(no, &n)
                } else if n.is_empty() && !y.is_empty() {
                    go(yes, &y)
                } else {
                    DecisionTree::node(*test, go(yes, &y), go(no, &n))
                }
            }
        }
    }
    let all: Vec<usize> = (0..instance.len()).collect();
    go(tree, &all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::ClassId;
    use crate::testutil::all_keys;

    fn q4() -> Instance {
        all_keys(&[1, 1, 1, 1], &[("a", &[1]), ("b", &[2]), ("c", &[3]), ("d", &[4])])
    }

    // Values 1..4 sit at ranks 0..3.
    fn yes(t: Test) -> Outcome {
        Outcome::new(t, Answer::Yes)
    }
    fn no(t: Test) -> Outcome {
        Outcome::new(t, Answer::No)
    }

    #[test]
    fn consistency_examples() {
        let i = q4();
        let lt3 = Test::less(2);
        assert!(!outcomes_consistent(yes(lt3), yes(Test::equal(3)), &i));
        assert!(!outcomes_consistent(yes(lt3), no(Test::less(3)), &i));
        assert!(outcomes_consistent(yes(lt3), yes(Test::equal(1)), &i));
        assert!(outcomes_consistent(yes(lt3), no(Test::equal(1)), &i));
        assert!(outcomes_consistent(yes(lt3), yes(Test::less(1)), &i));
        assert!(outcomes_consistent(yes(lt3), no(Test::less(1)), &i));
    }

    #[test]
    fn closed_form_matches_scan() {
        let i = q4();
        let tests = legal_tests(&i);
        for &a in &tests {
            for &b in &tests {
                for x in ANSWERS {
                    for y in ANSWERS {
                        let (o1, o2) = (Outcome::new(a, x), Outcome::new(b, y));
                        assert_eq!(outcomes_consistent(o1, o2, &i), outcomes_consistent_naive(o1, o2, &i));
                    }
                }
            }
        }
    }

    #[test]
    fn equivalence_examples() {
        let i = q4();
        assert!(tests_equivalent(Test::less(3), Test::equal(3), &i));
        assert!(tests_equivalent(Test::less(1), Test::less(1), &i));
        assert!(!tests_equivalent(Test::less(1), Test::less(2), &i));
    }

    #[test]
    fn laminarity_on_q4() {
        assert_eq!(check_laminarity(&q4()), Ok(()));
        // (<3, =4): exactly the (yes, yes) pair is inconsistent
        let i = q4();
        let bad: Vec<_> = ANSWERS
            .iter()
            .flat_map(|&x| ANSWERS.iter().map(move |&y| (x, y)))
            .filter(|&(x, y)| {
                !outcomes_consistent_naive(Outcome::new(Test::less(2), x), Outcome::new(Test::equal(3), y), &i)
            })
            .collect();
        assert_eq!(bad, vec![(Answer::Yes, Answer::Yes)]);
    }

    fn chain() -> DecisionTree {
        // <2 ? a : (=2 ? b : (=3 ? c : d)) over Q = {1,2,3,4}
        DecisionTree::node(
            Test::less(1),
            DecisionTree::leaf(ClassId(0)),
            DecisionTree::node(
                Test::equal(1),
                DecisionTree::leaf(ClassId(1)),
                DecisionTree::node(
                    Test::equal(2),
                    DecisionTree::leaf(ClassId(2)),
                    DecisionTree::leaf(ClassId(3)),
                ),
            ),
        )
    }

    #[test]
    fn path_for_equality_follows_search() {
        let i = q4();
        let t = chain();
        for h in 0..4 {
            let p = x_consistent_path(&t, &[], Test::equal(h), &i).unwrap();
            let search: Vec<Answer> = t.search(h).path.iter().map(|o| o.answer).collect();
            let mut walked: Vec<Answer> = p.steps.iter().map(|(_, a)| *a).collect();
            if p.end == PathEnd::Equivalent {
                // the equivalent node is the one testing h itself
                assert!(
                    matches!(t.at(&p.terminal), Some(DecisionTree::Node { test, .. }) if tests_equivalent(*test, Test::equal(h), &i))
                );
                walked.push(Answer::Yes);
            }
            assert_eq!(&search[..walked.len()], &walked[..]);
        }
    }

    #[test]
    fn path_ends_at_equivalent_descendant() {
        let i = q4();
        let p = x_consistent_path(&chain(), &[], Test::equal(2), &i).unwrap();
        assert_eq!(p.end, PathEnd::Equivalent);
        assert_eq!(p.terminal, vec![Answer::No, Answer::No]);
    }

    #[test]
    fn split_around_root_equivalent() {
        let i = q4();
        let t = chain();
        let s = split_subtree(&t, &[], Test::less(1), &i).unwrap();
        assert_eq!(s, t);
    }

    #[test]
    fn split_preserves_classes() {
        let i = q4();
        let t = chain();
        for x in legal_tests(&i) {
            let s = split_subtree(&t, &[], x, &i).unwrap();
            for q in 0..4 {
                assert_eq!(s.search(q).class, t.search(q).class, "x = {x:?}, q = {q}");
            }
        }
    }

    #[test]
    fn rejects_reducible_tree() {
        let i = q4();
        let t = DecisionTree::node(
            Test::less(2),
            DecisionTree::leaf(ClassId(0)),
            DecisionTree::leaf(ClassId(0)),
        );
        let t = DecisionTree::node(Test::equal(3), DecisionTree::leaf(ClassId(3)), t);
        let one = all_keys(&[1, 1, 1, 1], &[("all", &[1, 2, 3, 4])]);
        assert_eq!(
            split_subtree(&t, &[], Test::less(1), &one),
            Err(TransformError::NotIrreducible)
        );
        assert_eq!(
            split_subtree(&t, &[Answer::Yes, Answer::Yes], Test::less(1), &i),
            Err(TransformError::NoSuchNode(vec![Answer::Yes, Answer::Yes]))
        );
    }

    #[test]
    fn prune_removes_dead_branches() {
        let i = q4();
        let t = DecisionTree::node(
            Test::less(2),
            DecisionTree::node(
                Test::equal(3),
                DecisionTree::leaf(ClassId(3)),
                DecisionTree::leaf(ClassId(0)),
            ),
            DecisionTree::leaf(ClassId(2)),
        );
        let p = prune_unreachable(&t, &i);
        assert_eq!(
            p,
            DecisionTree::node(
                Test::less(2),
                DecisionTree::leaf(ClassId(0)),
                DecisionTree::leaf(ClassId(2))
            )
        );
    }
}
