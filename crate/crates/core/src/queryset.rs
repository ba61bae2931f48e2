//! Fixed-universe bit sets over query ranks.

use std::fmt;

/// A subset of the query ranks `0..n`, stored as a bit vector.
///
/// Iteration always yields ranks in increasing order, which is also
/// increasing query-value order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuerySet {
    universe: usize,
    words: Vec<u64>,
}

impl QuerySet {
    pub fn empty(universe: usize) -> Self {
        Self {
            universe,
            words: vec![0; universe.div_ceil(64)],
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = Self::empty(universe);
        s.insert_range(0, universe);
        s
    }

    /// The contiguous ranks `lo..hi`.
    pub fn range(universe: usize, lo: usize, hi: usize) -> Self {
        let mut s = Self::empty(universe);
        s.insert_range(lo, hi);
        s
    }

    pub fn from_ranks(universe: usize, ranks: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(universe);
        for r in ranks {
            s.insert(r);
        }
        s
    }

    /// Interprets the low `universe` bits of `mask` as a set.
    pub fn from_mask(universe: usize, mask: u64) -> Self {
        assert!(universe <= 64, "mask form only covers 64 ranks");
        let mut s = Self::empty(universe);
        if universe > 0 {
            s.words[0] = mask & low_bits(universe);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    #[inline]
    pub fn contains(&self, r: usize) -> bool {
        r < self.universe && self.words[r / 64] >> (r % 64) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, r: usize) {
        assert!(r < self.universe, "rank {r} outside universe {}", self.universe);
        self.words[r / 64] |= 1 << (r % 64);
    }

    #[inline]
    pub fn remove(&mut self, r: usize) {
        if r < self.universe {
            self.words[r / 64] &= !(1 << (r % 64));
        }
    }

    fn insert_range(&mut self, lo: usize, hi: usize) {
        for r in lo..hi.min(self.universe) {
            self.insert(r);
        }
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn min(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    pub fn max(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + 63 - w.leading_zeros() as usize)
    }

    pub fn is_subset(&self, other: &QuerySet) -> bool {
        debug_assert_eq!(self.universe, other.universe);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn intersection(&self, other: &QuerySet) -> QuerySet {
        debug_assert_eq!(self.universe, other.universe);
        QuerySet {
            universe: self.universe,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn difference(&self, other: &QuerySet) -> QuerySet {
        debug_assert_eq!(self.universe, other.universe);
        QuerySet {
            universe: self.universe,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect(),
        }
    }

    /// Low 64 bits as a mask; only meaningful when `universe <= 64`.
    pub fn to_mask(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter {
            words: &self.words,
            index: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }
}

#[inline]
fn low_bits(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

pub struct Iter<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl Iterator for Iter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.index * 64 + bit);
            }
            self.index += 1;
            if self.index >= self.words.len() {
                return None;
            }
            self.current = self.words[self.index];
        }
    }
}

impl<'a> IntoIterator for &'a QuerySet {
    type Item = usize;
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

impl fmt::Debug for QuerySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_membership_and_order() {
        let mut s = QuerySet::empty(130);
        for r in [129, 3, 64, 0] {
            s.insert(r);
        }
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 3, 64, 129]);
        assert_eq!(s.len(), 4);
        assert_eq!(s.min(), Some(0));
        assert_eq!(s.max(), Some(129));
        s.remove(0);
        assert_eq!(s.min(), Some(3));
        assert!(!s.contains(200));
    }

    #[test]
    fn empty_set_has_no_extremes() {
        let s = QuerySet::empty(5);
        assert!(s.is_empty());
        assert_eq!(s.min(), None);
        assert_eq!(s.max(), None);
        assert_eq!(QuerySet::empty(0).iter().count(), 0);
    }

    #[test]
    fn subset_and_difference() {
        let a = QuerySet::from_ranks(10, [1, 2, 3]);
        let b = QuerySet::range(10, 0, 5);
        assert!(a.is_subset(&b));
        assert!(!b.is_subset(&a));
        assert_eq!(b.difference(&a).iter().collect::<Vec<_>>(), vec![0, 4]);
        assert_eq!(QuerySet::from_mask(4, 0b1111_0110).to_mask(), 0b0110);
    }
}
