//! The admissible-set dictionary: enumeration and leaf identification.

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::exec::Execution;
use crate::instance::{ClassId, Instance};
use crate::signature::{inverse_exists, HoleSet, Signature, NARROW_MAX_QUERIES};
use crate::tree::Test;

/// Memoized value of one subproblem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Memo {
    Unsolved,
    Infeasible,
    Solved(u64),
}

/// The test chosen at a subproblem and the records of its two sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Choice {
    pub test: Test,
    pub yes: u32,
    pub no: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubproblemRecord {
    pub signature: Signature,
    pub is_leaf: bool,
    /// A class covering the set; set iff `is_leaf`.
    pub witness: Option<ClassId>,
    pub memo: Memo,
    pub best: Option<Choice>,
}

impl SubproblemRecord {
    fn new(signature: Signature) -> Self {
        Self {
            signature,
            is_leaf: false,
            witness: None,
            memo: Memo::Unsolved,
            best: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DictionaryStats {
    pub records: usize,
    pub without_light_holes: usize,
    pub with_light_holes: usize,
    pub leaves: usize,
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("admissible-set dictionary exceeds the cap of {cap} records")]
pub struct CapacityExceeded {
    pub cap: usize,
}

/// Default cap on the number of dictionary records.
pub const DEFAULT_MAX_RECORDS: usize = 50_000_000;

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    pub exec: Execution,
    pub max_records: usize,
    /// When false only sets without light holes are enumerated.
    pub light_holes: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            exec: Execution::default(),
            max_records: DEFAULT_MAX_RECORDS,
            light_holes: true,
        }
    }
}

/// Signature index; small instances use half-width keys.
#[derive(Debug, Clone)]
enum Index {
    Narrow(FxHashMap<u64, u32>),
    Wide(FxHashMap<u128, u32>),
}

impl Default for Index {
    fn default() -> Self {
        Index::Wide(FxHashMap::default())
    }
}

/// Records of admissible sets, addressed by canonical signature.
#[derive(Debug, Clone, Default)]
pub struct AdmissibleDictionary {
    index: Index,
    records: Vec<SubproblemRecord>,
}

impl AdmissibleDictionary {
    /// An empty dictionary for signatures over `n` queries.
    pub fn new(n: usize) -> Self {
        let index = if n <= NARROW_MAX_QUERIES {
            Index::Narrow(FxHashMap::default())
        } else {
            Index::Wide(FxHashMap::default())
        };
        Self {
            index,
            records: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Record index for a canonical signature; oversized signatures never
    /// have one and are rejected without a lookup.
    #[inline]
    pub fn lookup(&self, t: &Signature) -> Option<u32> {
        if t.is_oversized() {
            return None;
        }
        match &self.index {
            Index::Narrow(m) => m.get(&t.narrow_key()).copied(),
            Index::Wide(m) => m.get(&t.key()).copied(),
        }
    }

    pub fn record(&self, idx: u32) -> &SubproblemRecord {
        &self.records[idx as usize]
    }

    pub fn record_mut(&mut self, idx: u32) -> &mut SubproblemRecord {
        &mut self.records[idx as usize]
    }

    pub fn records(&self) -> &[SubproblemRecord] {
        &self.records
    }

    pub fn signatures(&self) -> impl Iterator<Item = &Signature> {
        self.records.iter().map(|r| &r.signature)
    }

    /// Inserts a signature unless already present; returns its index.
    pub fn insert(&mut self, t: Signature) -> u32 {
        let next = self.records.len() as u32;
        let idx = match &mut self.index {
            Index::Narrow(m) => *m.entry(t.narrow_key()).or_insert(next),
            Index::Wide(m) => *m.entry(t.key()).or_insert(next),
        };
        if idx == next {
            self.records.push(SubproblemRecord::new(t));
        }
        idx
    }

    pub fn stats(&self) -> DictionaryStats {
        let with = self.records.iter().filter(|r| !r.signature.holes.is_empty()).count();
        DictionaryStats {
            records: self.records.len(),
            without_light_holes: self.records.len() - with,
            with_light_holes: with,
            leaves: self.records.iter().filter(|r| r.is_leaf).count(),
        }
    }

    /// Drops memoized costs and choices, keeping leaf annotations.
    pub fn reset_memo(&mut self) {
        for r in &mut self.records {
            r.memo = if r.is_leaf { Memo::Solved(0) } else { Memo::Unsolved };
            r.best = None;
        }
    }
}

/// Enumerates every admissible set with default options.
pub fn enumerate_admissible(instance: &Instance) -> AdmissibleDictionary {
    enumerate_admissible_with(
        instance,
        &BuildOptions {
            max_records: usize::MAX,
            ..BuildOptions::default()
        },
    )
    .expect("no cap")
}

/// Enumerates admissible sets as signatures.
///
/// First every `(min, max, k)` with no light holes, then every
/// `(min, max, k, b, c)` with `k ∈ c`, taking as light holes the `b`
/// heaviest keys of the interval that are lighter than `k` and outside `c`.
/// Candidates whose inverse does not exist are skipped.
pub fn enumerate_admissible_with(
    instance: &Instance,
    opts: &BuildOptions,
) -> Result<AdmissibleDictionary, CapacityExceeded> {
    let n = instance.len();
    let mut dict = AdmissibleDictionary::new(instance.len());
    // Bounded batches keep the cap meaningful under parallel execution.
    let batch = if opts.exec.is_parallel() { 32 } else { 1 };
    let mut lo = 0;
    while lo < n {
        let hi = (lo + batch).min(n);
        let found = opts
            .exec
            .map_range(lo..hi, |left| candidates_from(left, instance, opts.light_holes));
        for t in found.into_iter().flatten() {
            dict.insert(t);
            if dict.len() > opts.max_records {
                return Err(CapacityExceeded { cap: opts.max_records });
            }
        }
        lo = hi;
    }
    Ok(dict)
}

fn candidates_from(left: usize, instance: &Instance, light_holes: bool) -> Vec<Signature> {
    let n = instance.len();
    let keys = instance.keys();
    let first_key = keys.partition_point(|&k| k < left);
    let mut out = Vec::new();

    for right in left..n {
        let t = Signature::new(left, right, None, HoleSet::EMPTY);
        if inverse_exists(t, instance) {
            out.push(t);
        }
        for &k in keys[first_key..].iter().take_while(|&&k| k <= right) {
            let t = Signature::new(left, right, Some(k), HoleSet::EMPTY);
            if inverse_exists(t, instance) {
                out.push(t);
            }
        }
    }

    if !light_holes {
        return out;
    }
    for &k in &keys[first_key..] {
        if instance.is_key(left) && instance.heavier(left, k) {
            continue;
        }
        for &c in instance.memberships(k) {
            let members = &instance.class(c).members;
            // Up to three heaviest qualifying keys seen so far, heaviest first.
            let mut top: Vec<usize> = Vec::with_capacity(4);
            for right in left..n {
                if instance.is_key(right) && instance.heavier(k, right) && !members.contains(right) {
                    let pos = top
                        .iter()
                        .position(|&h| instance.heavier(right, h))
                        .unwrap_or(top.len());
                    top.insert(pos, right);
                    top.truncate(3);
                }
                if right < k {
                    continue;
                }
                for b in 1..=top.len() {
                    let t = Signature::new(left, right, Some(k), HoleSet::from_ranks(top[..b].iter().copied()));
                    if inverse_exists(t, instance) {
                        out.push(t);
                    }
                }
            }
        }
    }
    out
}

/// Marks every record whose set fits inside one class.
///
/// Records sharing `(min, max, k*)` differ only in their light holes `H`.
/// With `R∅` the set for that triple and no light holes, a record is a leaf
/// iff `R∅ \ c ⊆ H` for some class `c` containing `min`; only classes with
/// `|R∅ \ c| ≤ 3` can qualify, so each record checks its at most eight
/// hole subsets against those differences.
pub fn identify_leaves(dict: &mut AdmissibleDictionary, instance: &Instance, exec: Execution) {
    let mut order: Vec<(u32, u32, u32, u32)> = dict
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let t = r.signature;
            (t.min, t.max, t.kstar.map_or(u32::MAX, |k| k), i as u32)
        })
        .collect();
    order.sort_unstable();
    let mut groups: Vec<&[(u32, u32, u32, u32)]> = Vec::new();
    let mut rest = &order[..];
    while let Some(&(a, b, c, _)) = rest.first() {
        let len = rest.iter().take_while(|&&(x, y, z, _)| (x, y, z) == (a, b, c)).count();
        groups.push(&rest[..len]);
        rest = &rest[len..];
    }

    let records = &dict.records;
    let found: Vec<Vec<(u32, ClassId)>> = exec.map(&groups, |group| {
        let t0 = records[group[0].3 as usize].signature;
        let (left, right, kstar) = (t0.min as usize, t0.max as usize, t0.kstar());
        let in_base = |q: usize| !(instance.is_key(q) && kstar.is_none_or(|k| instance.heavier(q, k)));

        let mut diffs: FxHashMap<HoleSet, ClassId> = FxHashMap::default();
        for &c in instance.memberships(left) {
            let members = &instance.class(c).members;
            let mut d = HoleSet::EMPTY;
            for q in left..=right {
                if in_base(q) && !members.contains(q) {
                    d.insert(q);
                    if d.is_oversized() {
                        break;
                    }
                }
            }
            if !d.is_oversized() {
                diffs.entry(d).or_insert(c);
            }
        }

        let mut leaves = Vec::new();
        if diffs.is_empty() {
            return leaves;
        }
        for &(_, _, _, idx) in group.iter() {
            let holes = records[idx as usize].signature.holes;
            let h = holes.as_slice();
            let best = (0u32..1 << h.len())
                .filter_map(|mask| {
                    let subset = HoleSet::from_ranks(
                        h.iter()
                            .enumerate()
                            .filter(|(i, _)| mask >> i & 1 == 1)
                            .map(|(_, &r)| r as usize),
                    );
                    diffs.get(&subset).copied()
                })
                .min();
            if let Some(c) = best {
                leaves.push((idx, c));
            }
        }
        leaves
    });

    for (idx, c) in found.into_iter().flatten() {
        let r = &mut dict.records[idx as usize];
        r.is_leaf = true;
        r.witness = Some(c);
        r.memo = Memo::Solved(0);
    }
}

/// Enumeration followed by leaf identification.
pub fn build_dictionary(instance: &Instance, opts: &BuildOptions) -> Result<AdmissibleDictionary, CapacityExceeded> {
    let mut dict = enumerate_admissible_with(instance, opts)?;
    identify_leaves(&mut dict, instance, opts.exec);
    Ok(dict)
}
