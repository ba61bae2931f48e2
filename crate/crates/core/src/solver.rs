//! Memoized evaluation of the admissible-set recurrence.
//!
//! `cost(R)` is infinite for sets outside the dictionary, zero for sets
//! covered by one class, and otherwise `w(R)` plus the cheapest pair of
//! child costs over all tests whose two sides are both in the dictionary.
//! Each subproblem enumerates its splits in linear time from its
//! signature: less-than splits by a prefix/suffix scan, equality splits by
//! adding one light hole.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::dictionary::{build_dictionary, AdmissibleDictionary, BuildOptions, CapacityExceeded, Choice, Memo};
use crate::exec::Execution;
use crate::instance::Instance;
use crate::signature::{canonicalize, signature_of_sorted, HoleSet, Signature};
use crate::tree::{Cost, DecisionTree, Test};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMode {
    #[default]
    Full,
    /// Only sets without light holes. An equality test on a key other than
    /// the heaviest one is then possible only at an end of the interval.
    HeaviestFirstOnly,
}

/// Deliberate corruption used to check that comparison harnesses notice
/// a wrong solver.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Leaf records report cost 1 instead of 0.
    LeafCostOne,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub mode: SolveMode,
    pub exec: Execution,
    pub max_records: usize,
    #[doc(hidden)]
    pub fault: Option<Fault>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            mode: SolveMode::Full,
            exec: Execution::default(),
            max_records: crate::dictionary::DEFAULT_MAX_RECORDS,
            fault: None,
        }
    }
}

impl SolveOptions {
    pub fn with_mode(mode: SolveMode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum SolveError {
    #[error(transparent)]
    Capacity(#[from] CapacityExceeded),
    #[error("cost overflows 64 bits")]
    Overflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub records: usize,
    pub leaves: usize,
    pub subproblems_solved: usize,
    pub stage1_candidates: usize,
    pub stage2_candidates: usize,
    /// Largest number of candidate tests examined for one subproblem.
    pub max_candidates: usize,
    /// Split signatures whose light-hole list needed canonicalizing.
    pub canonicalized: usize,
    pub build_time: Duration,
    pub solve_time: Duration,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: Status,
    pub cost: Cost,
    pub tree: Option<DecisionTree>,
    pub stats: SolveStats,
}

/// One candidate root test and the signatures of its two sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Split {
    pub test: Test,
    pub yes: Signature,
    pub no: Signature,
}

/// Members of the set with signature `t`, assumed to exist, in rank order.
pub fn members_of(t: &Signature, instance: &Instance) -> Vec<usize> {
    let mut out = Vec::new();
    members_into(t, instance, &mut out);
    out
}

fn members_into(t: &Signature, instance: &Instance, out: &mut Vec<usize>) {
    let k = t.kstar();
    out.clear();
    out.extend(
        (t.min as usize..=t.max as usize)
            .filter(|&q| !(instance.is_key(q) && k.is_none_or(|k| instance.heavier(q, k))) && !t.holes.contains(q)),
    );
}

fn canonical_counted(t: Signature, instance: &Instance, counter: &mut usize) -> Signature {
    let c = canonicalize(t, instance);
    if c.holes != t.holes {
        *counter += 1;
    }
    c
}

fn heavier_key(a: Option<usize>, q: usize, instance: &Instance) -> Option<usize> {
    if instance.is_key(q) && a.is_none_or(|k| instance.heavier(q, k)) {
        Some(q)
    } else {
        a
    }
}

fn stage1_into(members: &[usize], t: &Signature, instance: &Instance, out: &mut Vec<Split>, canon: &mut usize) {
    let j = members.len();
    if j < 2 {
        return;
    }
    let mut prefix_k = Vec::with_capacity(j);
    let mut acc = None;
    for &q in members {
        acc = heavier_key(acc, q, instance);
        prefix_k.push(acc);
    }
    let mut suffix_k = vec![None; j];
    let mut acc = None;
    for i in (0..j).rev() {
        acc = heavier_key(acc, members[i], instance);
        suffix_k[i] = acc;
    }
    let holes = t.holes.as_slice();
    let (first, last) = (members[0], members[j - 1]);
    let keys = instance.keys();
    let mut i = 0;
    let mut last_i = 0;
    for &h in &keys[keys.partition_point(|&k| k <= first)..] {
        if h > last {
            break;
        }
        // h > first >= min Q, so the test is legal.
        while members[i] < h {
            i += 1;
        }
        if i == last_i {
            continue;
        }
        last_i = i;
        let yes_max = members[i - 1];
        let yes = Signature::new(
            first,
            yes_max,
            prefix_k[i - 1],
            HoleSet::from_ranks(holes.iter().map(|&x| x as usize).filter(|&x| x < yes_max)),
        );
        let no_min = members[i];
        let no = Signature::new(
            no_min,
            last,
            suffix_k[i],
            HoleSet::from_ranks(holes.iter().map(|&x| x as usize).filter(|&x| x > no_min)),
        );
        out.push(Split {
            test: Test::less(h),
            yes: canonical_counted(yes, instance, canon),
            no: canonical_counted(no, instance, canon),
        });
    }
}

fn stage2_into(members: &[usize], t: &Signature, instance: &Instance, out: &mut Vec<Split>) {
    if members.len() < 2 {
        return;
    }
    let (first, last) = (members[0], members[members.len() - 1]);
    for &h in members.iter().filter(|&&h| instance.is_key(h)) {
        let no = if h == first || h == last || Some(h) == t.kstar() {
            signature_of_sorted(members.iter().copied().filter(|&q| q != h), instance).expect("at least two members")
        } else {
            let mut holes = t.holes;
            holes.insert(h);
            Signature { holes, ..*t }
        };
        out.push(Split {
            test: Test::equal(h),
            yes: Signature::singleton_key(h),
            no,
        });
    }
}

/// Less-than splits of the set `members` (with signature `t`), one per
/// distinct nonempty bipartition, keyed by the smallest separating key.
pub fn stage1_less_splits(members: &[usize], t: &Signature, instance: &Instance) -> Vec<Split> {
    let mut out = Vec::new();
    stage1_into(members, t, instance, &mut out, &mut 0);
    out
}

/// Equality splits of `members`, one per key in the set.
pub fn stage2_eq_splits(members: &[usize], t: &Signature, instance: &Instance) -> Vec<Split> {
    let mut out = Vec::new();
    stage2_into(members, t, instance, &mut out);
    out
}

struct Frame {
    idx: u32,
    pending: Option<Pending>,
}

/// An expanded subproblem waiting for its children. Its candidates sit in
/// `Solver::arena[start..]`; frames finish in stack order, so the arena is
/// a stack too.
struct Pending {
    weight: u64,
    start: usize,
}

/// The memoized recurrence over a built dictionary.
pub struct Solver<'a> {
    instance: &'a Instance,
    dict: AdmissibleDictionary,
    mode: SolveMode,
    stats: SolveStats,
    scratch: Vec<Split>,
    members: Vec<usize>,
    arena: Vec<(Test, u32, u32)>,
    /// Dense copy of the record memos, read in the inner loop.
    memo: Vec<u64>,
}

const UNSOLVED: u64 = u64::MAX;
const INFEASIBLE: u64 = u64::MAX - 1;

fn pack(m: Memo) -> u64 {
    match m {
        Memo::Unsolved => UNSOLVED,
        Memo::Infeasible => INFEASIBLE,
        Memo::Solved(c) => c,
    }
}

impl<'a> Solver<'a> {
    pub fn new(instance: &'a Instance, opts: &SolveOptions) -> Result<Self, SolveError> {
        let start = Instant::now();
        let build = BuildOptions {
            exec: opts.exec,
            max_records: opts.max_records,
            light_holes: opts.mode == SolveMode::Full,
        };
        let mut dict = build_dictionary(instance, &build)?;
        if opts.fault == Some(Fault::LeafCostOne) {
            for i in 0..dict.len() as u32 {
                if dict.record(i).is_leaf {
                    dict.record_mut(i).memo = Memo::Solved(1);
                }
            }
        }
        let ds = dict.stats();
        let memo = dict.records().iter().map(|r| pack(r.memo)).collect();
        Ok(Self {
            instance,
            dict,
            mode: opts.mode,
            stats: SolveStats {
                records: ds.records,
                leaves: ds.leaves,
                build_time: start.elapsed(),
                ..SolveStats::default()
            },
            scratch: Vec::new(),
            members: Vec::new(),
            arena: Vec::new(),
            memo,
        })
    }

    pub fn dictionary(&self) -> &AdmissibleDictionary {
        &self.dict
    }

    pub fn stats(&self) -> &SolveStats {
        &self.stats
    }

    fn resolve(&self, t: &Signature) -> Option<u32> {
        if self.mode == SolveMode::HeaviestFirstOnly && !t.holes.is_empty() {
            return None;
        }
        self.dict.lookup(t)
    }

    /// Record index of the set with signature `t`, if it is a subproblem.
    pub fn index_of(&self, t: Signature) -> Option<u32> {
        self.resolve(&canonicalize(t, self.instance))
    }

    /// Memoized `cost` of the set with signature `t`.
    pub fn cost_of(&mut self, t: Signature) -> Result<Cost, SolveError> {
        match self.index_of(t) {
            None => Ok(Cost::Infinite),
            Some(idx) => self.evaluate(idx),
        }
    }

    fn memo_cost(&self, idx: u32) -> Cost {
        match self.memo[idx as usize] {
            UNSOLVED => unreachable!("child evaluated before parent"),
            INFEASIBLE => Cost::Infinite,
            c => Cost::Finite(c),
        }
    }

    fn is_unsolved(&self, idx: u32) -> bool {
        self.memo[idx as usize] == UNSOLVED
    }

    fn expand(&mut self, idx: u32) -> Pending {
        let t = self.dict.record(idx).signature;
        let mut members = std::mem::take(&mut self.members);
        members_into(&t, self.instance, &mut members);
        let weight = members.iter().map(|&q| self.instance.weight(q)).sum();

        let mut splits = std::mem::take(&mut self.scratch);
        splits.clear();
        stage1_into(&members, &t, self.instance, &mut splits, &mut self.stats.canonicalized);
        let less = splits.len();
        stage2_into(&members, &t, self.instance, &mut splits);
        self.stats.stage1_candidates += less;
        self.stats.stage2_candidates += splits.len() - less;
        self.stats.max_candidates = self.stats.max_candidates.max(splits.len());

        let start = self.arena.len();
        for s in &splits {
            if let Some(yes) = self.resolve(&s.yes) {
                if let Some(no) = self.resolve(&s.no) {
                    self.arena.push((s.test, yes, no));
                }
            }
        }
        self.scratch = splits;
        self.members = members;
        Pending { weight, start }
    }

    fn finish(&mut self, idx: u32, pending: Pending) -> Result<(), SolveError> {
        let mut best: Option<(u64, Choice)> = None;
        for &(test, yes, no) in &self.arena[pending.start..] {
            let (Cost::Finite(a), Cost::Finite(b)) = (self.memo_cost(yes), self.memo_cost(no)) else {
                continue;
            };
            let sum = a.checked_add(b).ok_or(SolveError::Overflow)?;
            if best.is_none_or(|(c, _)| sum < c) {
                best = Some((sum, Choice { test, yes, no }));
            }
        }
        self.arena.truncate(pending.start);
        let record = self.dict.record_mut(idx);
        match best {
            Some((sum, choice)) => {
                record.memo = Memo::Solved(sum.checked_add(pending.weight).ok_or(SolveError::Overflow)?);
                record.best = Some(choice);
            }
            None => record.memo = Memo::Infeasible,
        }
        self.memo[idx as usize] = pack(record.memo);
        self.stats.subproblems_solved += 1;
        Ok(())
    }

    fn evaluate(&mut self, root: u32) -> Result<Cost, SolveError> {
        let mut stack = vec![Frame {
            idx: root,
            pending: None,
        }];
        while let Some(top) = stack.last_mut() {
            let idx = top.idx;
            match top.pending.take() {
                Some(pending) => {
                    stack.pop();
                    self.finish(idx, pending)?;
                }
                None if !self.is_unsolved(idx) => {
                    stack.pop();
                }
                None => {
                    let pending = self.expand(idx);
                    let start = pending.start;
                    stack.last_mut().expect("frame still present").pending = Some(pending);
                    for i in start..self.arena.len() {
                        let (_, yes, no) = self.arena[i];
                        for c in [yes, no] {
                            if self.is_unsolved(c) {
                                stack.push(Frame { idx: c, pending: None });
                            }
                        }
                    }
                }
            }
        }
        Ok(self.memo_cost(root))
    }

    /// Rebuilds the optimal tree for a solved record.
    pub fn tree_at(&self, idx: u32) -> Option<DecisionTree> {
        let record = self.dict.record(idx);
        if record.is_leaf {
            return record.witness.map(DecisionTree::leaf);
        }
        let choice = record.best?;
        Some(DecisionTree::node(
            choice.test,
            self.tree_at(choice.yes)?,
            self.tree_at(choice.no)?,
        ))
    }

    /// Signature of the whole query set.
    pub fn root_signature(&self) -> Signature {
        signature_of_sorted(0..self.instance.len(), self.instance).expect("instances are nonempty")
    }
}

/// Computes a minimum-cost tree (restricted to heaviest-first trees in
/// [`SolveMode::HeaviestFirstOnly`]).
pub fn solve(instance: &Instance, opts: &SolveOptions) -> Result<SolveResult, SolveError> {
    let mut solver = Solver::new(instance, opts)?;
    let start = Instant::now();
    let root = solver.root_signature();
    let cost = solver.cost_of(root)?;
    let tree = match cost {
        Cost::Finite(_) => solver.index_of(root).and_then(|idx| solver.tree_at(idx)),
        Cost::Infinite => None,
    };
    solver.stats.solve_time = start.elapsed();
    Ok(SolveResult {
        status: if cost.is_finite() {
            Status::Optimal
        } else {
            Status::Infeasible
        },
        cost,
        tree,
        stats: solver.stats,
    })
}
