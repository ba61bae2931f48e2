//! Signatures of query sets and the admissibility predicate.
//!
//! A signature `(min, max, k*, H)` names a query set by its interval, its
//! heaviest key and its light holes. Every set that can reach a node of a
//! tree has only keys as holes, and for such sets the signature determines
//! the set: take the interval, drop every key heavier than `k*`, then drop
//! `H`.

use std::fmt;

use thiserror::Error;

use crate::instance::{ClassId, Instance};
use crate::queryset::QuerySet;

/// At most three light holes, sorted by rank, or an "oversized" marker
/// standing for four or more.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct HoleSet {
    len: u8,
    items: [u32; 3],
}

const OVERSIZED: u8 = 4;

impl HoleSet {
    pub const EMPTY: HoleSet = HoleSet { len: 0, items: [0; 3] };

    pub fn oversized() -> Self {
        HoleSet {
            len: OVERSIZED,
            items: [0; 3],
        }
    }

    /// Collects ranks in any order; more than three gives the oversized marker.
    pub fn from_ranks(ranks: impl IntoIterator<Item = usize>) -> Self {
        let mut h = HoleSet::EMPTY;
        for r in ranks {
            h.insert(r);
        }
        h
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_oversized(&self) -> bool {
        self.len == OVERSIZED
    }

    pub fn contains(&self, r: usize) -> bool {
        self.as_slice().contains(&(r as u32))
    }

    pub fn as_slice(&self) -> &[u32] {
        if self.is_oversized() {
            &[]
        } else {
            &self.items[..self.len as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.as_slice().iter().map(|&r| r as usize)
    }

    /// Inserts keeping rank order; a no-op on duplicates and on the
    /// oversized marker.
    pub fn insert(&mut self, r: usize) {
        if self.is_oversized() || self.contains(r) {
            return;
        }
        if self.len == 3 {
            *self = HoleSet::oversized();
            return;
        }
        let r = r as u32;
        let mut i = self.len as usize;
        while i > 0 && self.items[i - 1] > r {
            self.items[i] = self.items[i - 1];
            i -= 1;
        }
        self.items[i] = r;
        self.len += 1;
    }

    pub fn retain(&mut self, mut keep: impl FnMut(usize) -> bool) {
        if self.is_oversized() {
            return;
        }
        let mut out = HoleSet::EMPTY;
        for r in self.iter() {
            if keep(r) {
                out.insert(r);
            }
        }
        *self = out;
    }
}

impl fmt::Debug for HoleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_oversized() {
            f.write_str("{>=4}")
        } else {
            f.debug_set().entries(self.iter()).finish()
        }
    }
}

/// `(min, max, k*, light holes)` over query ranks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    pub min: u32,
    pub max: u32,
    pub kstar: Option<u32>,
    pub holes: HoleSet,
}

const FIELD: u32 = 21;
const FIELD_MASK: u128 = (1 << FIELD) - 1;

impl Signature {
    pub fn new(min: usize, max: usize, kstar: Option<usize>, holes: HoleSet) -> Self {
        Self {
            min: min as u32,
            max: max as u32,
            kstar: kstar.map(|k| k as u32),
            holes,
        }
    }

    /// The singleton `{k}` for a key `k`.
    pub fn singleton_key(k: usize) -> Self {
        Self::new(k, k, Some(k), HoleSet::EMPTY)
    }

    pub fn kstar(&self) -> Option<usize> {
        self.kstar.map(|k| k as usize)
    }

    pub fn is_oversized(&self) -> bool {
        self.holes.is_oversized()
    }

    /// Packs the signature into one integer: six 21-bit fields, absent
    /// entries encoded as zero and present ones shifted up by one.
    pub fn key(&self) -> u128 {
        debug_assert!(!self.is_oversized());
        let mut fields = [0u128; 6];
        fields[0] = self.min as u128;
        fields[1] = self.max as u128;
        fields[2] = self.kstar.map_or(0, |k| k as u128 + 1);
        for (slot, h) in fields[3..].iter_mut().zip(self.holes.as_slice()) {
            *slot = *h as u128 + 1;
        }
        fields
            .iter()
            .enumerate()
            .fold(0u128, |acc, (i, &f)| acc | (f & FIELD_MASK) << (i as u32 * FIELD))
    }

    /// [`Signature::key`] with 10-bit fields; injective on instances with
    /// at most [`NARROW_MAX_QUERIES`] queries.
    pub fn narrow_key(&self) -> u64 {
        debug_assert!(!self.is_oversized());
        let mut key = self.min as u64 | (self.max as u64) << 10 | self.kstar.map_or(0, |k| k as u64 + 1) << 20;
        for (i, &h) in self.holes.as_slice().iter().enumerate() {
            key |= (h as u64 + 1) << (30 + 10 * i);
        }
        key
    }
}

pub const NARROW_MAX_QUERIES: usize = 1022;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum SignatureError {
    #[error("the empty set has no signature")]
    Empty,
}

/// Signature of the set whose members are `sorted` (strictly increasing ranks).
pub fn signature_of_sorted(
    sorted: impl IntoIterator<Item = usize>,
    instance: &Instance,
) -> Result<Signature, SignatureError> {
    let mut iter = sorted.into_iter();
    let min = iter.next().ok_or(SignatureError::Empty)?;
    let mut max = min;
    let mut kstar = instance.is_key(min).then_some(min);
    // Remember the gaps so light key holes can be picked once k* is known.
    let mut gaps: Vec<(usize, usize)> = Vec::new();
    for q in iter {
        debug_assert!(q > max, "ranks must be strictly increasing");
        if q > max + 1 {
            gaps.push((max + 1, q));
        }
        if instance.is_key(q) && kstar.is_none_or(|k| instance.heavier(q, k)) {
            kstar = Some(q);
        }
        max = q;
    }
    let mut holes = HoleSet::EMPTY;
    'scan: for (lo, hi) in gaps {
        for h in lo..hi {
            if instance.is_key(h) && instance.lighter_than(h, kstar) {
                holes.insert(h);
                if holes.is_oversized() {
                    break 'scan;
                }
            }
        }
    }
    Ok(Signature::new(min, max, kstar, holes))
}

pub fn signature_of(set: &QuerySet, instance: &Instance) -> Result<Signature, SignatureError> {
    signature_of_sorted(set.iter(), instance)
}

/// Drops light-hole entries that are not strictly lighter than `k*`.
///
/// Such entries are keys heavier than `k*` (already excluded by the
/// inverse construction) or `k*` itself, so the inverse set is unchanged.
pub fn canonicalize(t: Signature, instance: &Instance) -> Signature {
    let mut out = t;
    let k = t.kstar();
    out.holes.retain(|h| instance.lighter_than(h, k));
    out
}

fn excluded_by(t: &Signature, q: usize, instance: &Instance) -> bool {
    (instance.is_key(q) && t.kstar().is_none_or(|k| instance.heavier(q, k))) || t.holes.contains(q)
}

/// `τ⁻¹(t)`: the unique set with signature `t`, if there is one.
pub fn set_of_signature(t: Signature, instance: &Instance) -> Option<QuerySet> {
    if t.is_oversized() || t.min > t.max || t.max as usize >= instance.len() {
        return None;
    }
    let n = instance.len();
    let mut set = QuerySet::empty(n);
    for q in t.min as usize..=t.max as usize {
        if !excluded_by(&t, q, instance) {
            set.insert(q);
        }
    }
    if set.is_empty() {
        return None;
    }
    (signature_of(&set, instance).ok()? == canonicalize(t, instance)).then_some(set)
}

/// Constant-time test for whether `set_of_signature(t)` exists.
///
/// The candidate set keeps `min`, `max` and `k*` exactly when none of them
/// is excluded; its light holes are then precisely the canonical `H`,
/// which must lie strictly inside the interval.
pub fn inverse_exists(t: Signature, instance: &Instance) -> bool {
    if t.is_oversized() || t.min > t.max || t.max as usize >= instance.len() {
        return false;
    }
    let (lo, hi) = (t.min as usize, t.max as usize);
    if excluded_by(&t, lo, instance) || excluded_by(&t, hi, instance) {
        return false;
    }
    if let Some(k) = t.kstar() {
        if k < lo || k > hi || !instance.is_key(k) || t.holes.contains(k) {
            return false;
        }
    }
    let k = t.kstar();
    t.holes
        .iter()
        .filter(|&h| instance.lighter_than(h, k))
        .all(|h| lo < h && h < hi)
}

/// The `b` heaviest of `items` (all of them if `b` is at least their count).
pub fn heaviest(b: usize, items: impl IntoIterator<Item = usize>, instance: &Instance) -> Vec<usize> {
    let mut v: Vec<usize> = items.into_iter().collect();
    v.sort_by_key(|&q| std::cmp::Reverse(instance.weight_rank(q)));
    v.truncate(b);
    v.sort_unstable();
    v
}

/// Result of [`is_admissible`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Admissibility {
    pub admissible: bool,
    /// `(b, c)` certifying the light holes, when there are any.
    pub witness: Option<(usize, ClassId)>,
}

impl Admissibility {
    const NO: Admissibility = Admissibility {
        admissible: false,
        witness: None,
    };
}

/// Admissibility of an arbitrary query set.
///
/// Requires a nonempty set whose heavy holes are exactly the interval keys
/// heavier than `k*`, whose light holes are keys, and whose light-hole set
/// is empty or equal to the `b` heaviest interval keys lighter than `k*`
/// outside some class containing `k*`, for `b` in `1..=3`.
pub fn is_admissible(set: &QuerySet, instance: &Instance) -> Admissibility {
    let Ok(t) = signature_of(set, instance) else {
        return Admissibility::NO;
    };
    if t.is_oversized() || set_of_signature(t, instance).as_ref() != Some(set) {
        return Admissibility::NO;
    }
    if t.holes.is_empty() {
        return Admissibility {
            admissible: true,
            witness: None,
        };
    }
    let k = t.kstar().expect("light holes imply a heaviest key");
    let holes: Vec<usize> = t.holes.iter().collect();
    let b = holes.len();
    for &c in instance.memberships(k) {
        let members = &instance.class(c).members;
        let outside = (t.min as usize..=t.max as usize)
            .filter(|&q| instance.is_key(q) && instance.lighter_than(q, Some(k)) && !members.contains(q));
        if heaviest(b, outside, instance) == holes {
            return Admissibility {
                admissible: true,
                witness: Some((b, c)),
            };
        }
    }
    Admissibility::NO
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{all_keys, inst};

    fn five() -> Instance {
        all_keys(
            &[1, 2, 3, 4, 5],
            &[("c1", &[5, 2]), ("a", &[1]), ("b", &[3]), ("d", &[4])],
        )
    }

    fn set(n: usize, ranks: &[usize]) -> QuerySet {
        QuerySet::from_ranks(n, ranks.iter().copied())
    }

    #[test]
    fn signature_examples() {
        let i = five();
        // values 1,3,5 are ranks 0,2,4
        let t = signature_of(&set(5, &[0, 2, 4]), &i).unwrap();
        assert_eq!(t, Signature::new(0, 4, Some(4), HoleSet::from_ranks([1, 3])));
        assert_eq!(set_of_signature(t, &i), Some(set(5, &[0, 2, 4])));

        let t = signature_of(&set(5, &[1, 2, 3]), &i).unwrap();
        assert_eq!(t, Signature::new(1, 3, Some(3), HoleSet::EMPTY));

        assert_eq!(signature_of(&QuerySet::empty(5), &i), Err(SignatureError::Empty));
    }

    #[test]
    fn non_key_holes_fail_round_trip() {
        let i = inst(
            &[(1, 1, false), (2, 1, false), (3, 1, false), (4, 1, false), (5, 1, true)],
            &[("a", &[1, 2, 3, 4, 5])],
        );
        let r = set(5, &[0, 4]);
        let t = signature_of(&r, &i).unwrap();
        assert_eq!(t, Signature::new(0, 4, Some(4), HoleSet::EMPTY));
        assert_eq!(set_of_signature(t, &i), Some(set(5, &[0, 1, 2, 3, 4])));
        assert!(!is_admissible(&r, &i).admissible);

        let heavy = inst(&[(1, 1, false), (2, 9, false), (3, 1, true)], &[("a", &[1, 2, 3])]);
        let r = set(3, &[0, 2]);
        let t = signature_of(&r, &heavy).unwrap();
        assert!(t.holes.is_empty());
        assert_eq!(set_of_signature(t, &heavy), Some(set(3, &[0, 1, 2])));
        assert!(!is_admissible(&r, &heavy).admissible);
    }

    #[test]
    fn inverse_examples() {
        let i = five();
        // (l, r, none, {}) with a key inside: mismatch.
        assert_eq!(set_of_signature(Signature::new(0, 2, None, HoleSet::EMPTY), &i), None);
        assert_eq!(set_of_signature(Signature::singleton_key(2), &i), Some(set(5, &[2])));
        assert_eq!(
            set_of_signature(Signature::new(0, 4, Some(4), HoleSet::oversized()), &i),
            None
        );
    }

    #[test]
    fn canonicalize_examples() {
        let i = five();
        let t = Signature::new(0, 4, Some(4), HoleSet::from_ranks([1, 3]));
        assert_eq!(canonicalize(t, &i), t);
        let none = Signature::new(0, 0, None, HoleSet::EMPTY);
        assert_eq!(canonicalize(none, &i), none);
        // Prefix {1,3} of {1,3,5}: k* is 3 (rank 2), the hole at value 4 is
        // heavier and must go.
        let prefix = Signature::new(0, 2, Some(2), HoleSet::from_ranks([1, 3]));
        let c = canonicalize(prefix, &i);
        assert_eq!(c.holes, HoleSet::from_ranks([1]));
        assert_eq!(set_of_signature(prefix, &i), set_of_signature(c, &i));
    }

    #[test]
    fn admissibility_examples() {
        let i = five();
        assert_eq!(
            is_admissible(&set(5, &[1, 2, 3]), &i),
            Admissibility {
                admissible: true,
                witness: None
            }
        );
        // Light holes {2,4}; the only class holding k* = 5 is {2,5}, whose
        // outside keys lighter than 5 are {1,3,4}; heaviest two are {3,4}.
        assert!(!is_admissible(&set(5, &[0, 2, 4]), &i).admissible);

        // Make the outside keys exactly {2,4} minus the class: class {5,1,3}
        let j = all_keys(&[1, 2, 3, 4, 5], &[("c", &[5, 1, 3]), ("x", &[2]), ("y", &[4])]);
        let a = is_admissible(&set(5, &[0, 2, 4]), &j);
        assert!(a.admissible);
        assert_eq!(a.witness, Some((2, ClassId(0))));

        let k = all_keys(
            &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
            &[("all", &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10])],
        );
        // four light holes
        let r = set(10, &[0, 2, 4, 6, 8, 9]);
        assert!(signature_of(&r, &k).unwrap().is_oversized());
        assert!(!is_admissible(&r, &k).admissible);
        assert!(!is_admissible(&QuerySet::empty(10), &k).admissible);
    }

    #[test]
    fn hole_set_ordering_and_overflow() {
        let mut h = HoleSet::from_ranks([7, 2, 5]);
        assert_eq!(h.as_slice(), &[2, 5, 7]);
        h.insert(5);
        assert_eq!(h.len(), 3);
        h.insert(1);
        assert!(h.is_oversized());
        assert_eq!(h.iter().count(), 0);
    }

    #[test]
    fn narrow_keys_are_injective_up_to_the_limit() {
        let top = NARROW_MAX_QUERIES - 1;
        let ranks = [0, 1, 2, top - 2, top - 1, top];
        let mut seen = std::collections::HashMap::new();
        for &min in &ranks {
            for &max in ranks.iter().filter(|&&m| m >= min) {
                for k in [None, Some(min), Some(max)] {
                    for holes in [
                        HoleSet::EMPTY,
                        HoleSet::from_ranks([1]),
                        HoleSet::from_ranks([top - 1]),
                        HoleSet::from_ranks([1, 2, top - 1]),
                    ] {
                        let t = Signature::new(min, max, k, holes);
                        if let Some(prev) = seen.insert(t.narrow_key(), t) {
                            assert_eq!(prev, t);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn keys_are_injective_on_small_signatures() {
        let mut seen = std::collections::HashSet::new();
        for min in 0..4 {
            for max in min..4 {
                for k in [None, Some(0), Some(3)] {
                    for holes in [HoleSet::EMPTY, HoleSet::from_ranks([1]), HoleSet::from_ranks([1, 2])] {
                        let t = Signature::new(min, max, k, holes);
                        assert!(seen.insert(t.key()), "collision at {t:?}");
                    }
                }
            }
        }
    }
}
