//! Problem instances: weighted ordered queries, keys and classes.

use std::collections::HashMap;

use thiserror::Error;

use crate::queryset::QuerySet;

/// Ranks are packed into 21-bit fields inside dictionary keys.
pub const MAX_QUERIES: usize = (1 << 21) - 2;

/// Index of a class inside [`Instance::classes`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassId(pub usize);

/// One query as supplied by the caller, before rank assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Query {
    pub value: i64,
    pub weight: u64,
    pub is_key: bool,
}

impl Query {
    pub fn new(value: i64, weight: u64, is_key: bool) -> Self {
        Self { value, weight, is_key }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Class {
    pub name: String,
    pub members: QuerySet,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("instance has no queries")]
    Empty,
    #[error("instance has {0} queries, more than the supported {MAX_QUERIES}")]
    TooLarge(usize),
    #[error("query values must be strictly increasing ({prev} then {next})")]
    NotIncreasing { prev: i64, next: i64 },
    #[error("class `{class}` lists value {value}, which is not a query")]
    UnknownMember { class: String, value: i64 },
    #[error("class `{class}` lists value {value} twice")]
    DuplicateMember { class: String, value: i64 },
    #[error("class id `{0}` is used twice")]
    DuplicateClass(String),
    #[error("query {0} belongs to no class")]
    Unclassified(i64),
    #[error("total weight times query count exceeds the 63-bit cost range")]
    WeightOverflow,
}

/// A validated instance `(Q, w, C, K)`.
///
/// Queries are addressed by rank `0..n` in increasing value order. The
/// derived weight rank orders queries by `(weight, value)` ascending, so
/// ties between equal weights are always broken toward the smaller value.
#[derive(Debug, Clone)]
pub struct Instance {
    values: Vec<i64>,
    weights: Vec<u64>,
    is_key: Vec<bool>,
    keys: Vec<usize>,
    classes: Vec<Class>,
    memberships: Vec<Vec<ClassId>>,
    weight_rank: Vec<usize>,
    total_weight: u64,
}

impl Instance {
    /// Builds an instance from queries (strictly increasing by value) and
    /// classes given as `(id, member values)`.
    pub fn new(queries: Vec<Query>, classes: Vec<(String, Vec<i64>)>) -> Result<Self, InstanceError> {
        if queries.is_empty() {
            return Err(InstanceError::Empty);
        }
        if queries.len() > MAX_QUERIES {
            return Err(InstanceError::TooLarge(queries.len()));
        }
        for pair in queries.windows(2) {
            if pair[0].value >= pair[1].value {
                return Err(InstanceError::NotIncreasing {
                    prev: pair[0].value,
                    next: pair[1].value,
                });
            }
        }
        let n = queries.len();
        let rank_of: HashMap<i64, usize> = queries.iter().enumerate().map(|(i, q)| (q.value, i)).collect();

        let mut seen_names = HashMap::new();
        let mut built = Vec::with_capacity(classes.len());
        for (name, members) in classes {
            if seen_names.insert(name.clone(), ()).is_some() {
                return Err(InstanceError::DuplicateClass(name));
            }
            let mut set = QuerySet::empty(n);
            for v in members {
                let &r = rank_of.get(&v).ok_or_else(|| InstanceError::UnknownMember {
                    class: name.clone(),
                    value: v,
                })?;
                if set.contains(r) {
                    return Err(InstanceError::DuplicateMember { class: name, value: v });
                }
                set.insert(r);
            }
            built.push(Class { name, members: set });
        }

        let values: Vec<i64> = queries.iter().map(|q| q.value).collect();
        let weights: Vec<u64> = queries.iter().map(|q| q.weight).collect();
        let is_key: Vec<bool> = queries.iter().map(|q| q.is_key).collect();

        let total_weight = weights
            .iter()
            .try_fold(0u64, |acc, &w| acc.checked_add(w))
            .ok_or(InstanceError::WeightOverflow)?;
        match total_weight.checked_mul(n as u64) {
            Some(v) if v <= i64::MAX as u64 => {}
            _ => return Err(InstanceError::WeightOverflow),
        }

        let mut memberships = vec![Vec::new(); n];
        for (c, class) in built.iter().enumerate() {
            for r in &class.members {
                memberships[r].push(ClassId(c));
            }
        }
        if let Some(r) = memberships.iter().position(Vec::is_empty) {
            return Err(InstanceError::Unclassified(values[r]));
        }

        let weight_rank = derive_weight_rank(&values, &weights);
        let keys = (0..n).filter(|&r| is_key[r]).collect();
        Ok(Self {
            values,
            weights,
            is_key,
            keys,
            classes: built,
            memberships,
            weight_rank,
            total_weight,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, r: usize) -> i64 {
        self.values[r]
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn weight(&self, r: usize) -> u64 {
        self.weights[r]
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn is_key(&self, r: usize) -> bool {
        self.is_key[r]
    }

    /// Key ranks in increasing order.
    pub fn keys(&self) -> &[usize] {
        &self.keys
    }

    pub fn classes(&self) -> &[Class] {
        &self.classes
    }

    pub fn class(&self, c: ClassId) -> &Class {
        &self.classes[c.0]
    }

    pub fn class_by_name(&self, name: &str) -> Option<ClassId> {
        self.classes.iter().position(|c| c.name == name).map(ClassId)
    }

    /// Classes containing query `r`.
    pub fn memberships(&self, r: usize) -> &[ClassId] {
        &self.memberships[r]
    }

    /// `m`: the summed size of all classes.
    pub fn membership_count(&self) -> usize {
        self.memberships.iter().map(Vec::len).sum()
    }

    pub fn rank_of_value(&self, v: i64) -> Option<usize> {
        self.values.binary_search(&v).ok()
    }

    /// Position of `r` in the `(weight, value)` ascending order.
    #[inline]
    pub fn weight_rank(&self, r: usize) -> usize {
        self.weight_rank[r]
    }

    pub fn weight_ranks(&self) -> &[usize] {
        &self.weight_rank
    }

    /// Strict "heavier than" under the tie-broken order.
    #[inline]
    pub fn heavier(&self, a: usize, b: usize) -> bool {
        self.weight_rank[a] > self.weight_rank[b]
    }

    /// Whether `a` is lighter than an optional reference key, where an
    /// absent key has weight minus infinity (nothing is lighter).
    #[inline]
    pub fn lighter_than(&self, a: usize, reference: Option<usize>) -> bool {
        reference.is_some_and(|k| self.weight_rank[a] < self.weight_rank[k])
    }

    pub fn total_weight(&self) -> u64 {
        self.total_weight
    }

    pub fn weight_of(&self, set: &QuerySet) -> u64 {
        set.iter().map(|r| self.weights[r]).sum()
    }

    /// Some class containing all of `set`, if any.
    pub fn covering_class(&self, set: &QuerySet) -> Option<ClassId> {
        let first = set.min()?;
        self.memberships[first]
            .iter()
            .copied()
            .find(|&c| set.is_subset(&self.classes[c.0].members))
    }

    /// The same instance with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Result<Self, InstanceError> {
        let queries = (0..self.len())
            .map(|r| {
                self.weights[r]
                    .checked_mul(factor)
                    .map(|w| Query::new(self.values[r], w, self.is_key[r]))
                    .ok_or(InstanceError::WeightOverflow)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(queries, self.class_specs())
    }

    /// Classes as `(id, member values)` pairs, the form [`Instance::new`] takes.
    pub fn class_specs(&self) -> Vec<(String, Vec<i64>)> {
        self.classes
            .iter()
            .map(|c| (c.name.clone(), c.members.iter().map(|r| self.values[r]).collect()))
            .collect()
    }

    pub fn queries(&self) -> Vec<Query> {
        (0..self.len())
            .map(|r| Query::new(self.values[r], self.weights[r], self.is_key[r]))
            .collect()
    }
}

/// Rank of each query in the order of increasing `(weight, value)`.
pub fn derive_weight_rank(values: &[i64], weights: &[u64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by_key(|&r| (weights[r], values[r]));
    let mut rank = vec![0; values.len()];
    for (pos, r) in order.into_iter().enumerate() {
        rank[r] = pos;
    }
    rank
}

/// Outcome of [`check_feasibility`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    Feasible,
    /// No class covers this group of queries that no test can separate.
    Infeasible {
        witness: Vec<usize>,
    },
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible)
    }
}

/// Decides whether any correct tree exists.
///
/// The tests partition `Q` into atoms: every key on its own, and every
/// maximal run of consecutive non-keys. A tree exists iff each atom fits
/// inside a single class.
pub fn check_feasibility(instance: &Instance) -> Feasibility {
    let n = instance.len();
    let mut r = 0;
    while r < n {
        let atom = if instance.is_key(r) {
            QuerySet::from_ranks(n, [r])
        } else {
            let start = r;
            while r + 1 < n && !instance.is_key(r + 1) {
                r += 1;
            }
            QuerySet::range(n, start, r + 1)
        };
        if instance.covering_class(&atom).is_none() {
            return Feasibility::Infeasible {
                witness: atom.iter().collect(),
            };
        }
        r += 1;
    }
    Feasibility::Feasible
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::inst;

    #[test]
    fn weight_rank_examples() {
        assert_eq!(derive_weight_rank(&[1, 2, 3], &[5, 3, 7]), vec![1, 0, 2]);
        assert_eq!(derive_weight_rank(&[1, 2, 3], &[4, 4, 4]), vec![0, 1, 2]);
        assert_eq!(derive_weight_rank(&[1, 2, 3, 4], &[2, 9, 2, 9]), vec![0, 2, 1, 3]);
    }

    #[test]
    fn validation_errors() {
        let q = |v| Query::new(v, 1, true);
        assert_eq!(Instance::new(vec![], vec![]).unwrap_err(), InstanceError::Empty);
        assert!(matches!(
            Instance::new(vec![q(2), q(1)], vec![("a".into(), vec![1, 2])]),
            Err(InstanceError::NotIncreasing { .. })
        ));
        assert!(matches!(
            Instance::new(vec![q(1)], vec![("a".into(), vec![5])]),
            Err(InstanceError::UnknownMember { .. })
        ));
        assert!(matches!(
            Instance::new(vec![q(1), q(2)], vec![("a".into(), vec![1])]),
            Err(InstanceError::Unclassified(2))
        ));
        assert!(matches!(
            Instance::new(vec![q(1)], vec![("a".into(), vec![1]), ("a".into(), vec![1])]),
            Err(InstanceError::DuplicateClass(_))
        ));
        assert!(matches!(
            Instance::new(vec![q(1)], vec![("a".into(), vec![1, 1])]),
            Err(InstanceError::DuplicateMember { .. })
        ));
        let heavy = vec![Query::new(1, u64::MAX / 2, true), Query::new(2, 1, true)];
        assert_eq!(
            Instance::new(heavy, vec![("a".into(), vec![1, 2])]).unwrap_err(),
            InstanceError::WeightOverflow
        );
    }

    #[test]
    fn feasibility_examples() {
        let keyless = inst(
            &[(1, 1, false), (2, 1, false), (3, 1, false)],
            &[("A", &[1, 2]), ("B", &[3])],
        );
        assert_eq!(
            check_feasibility(&keyless),
            Feasibility::Infeasible { witness: vec![0, 1, 2] }
        );

        let eq = inst(
            &[(1, 1, false), (2, 1, true), (3, 1, false)],
            &[("A", &[1, 3]), ("B", &[2])],
        );
        assert!(check_feasibility(&eq).is_feasible());

        let single = inst(&[(1, 1, false)], &[("A", &[1])]);
        assert!(check_feasibility(&single).is_feasible());
    }

    #[test]
    fn covering_class_respects_overlap() {
        let i = inst(
            &[(1, 1, true), (2, 1, true), (3, 1, true)],
            &[("A", &[1, 2]), ("B", &[2, 3])],
        );
        assert_eq!(i.covering_class(&QuerySet::from_ranks(3, [1, 2])), Some(ClassId(1)));
        assert_eq!(i.covering_class(&QuerySet::from_ranks(3, [0, 2])), None);
        assert_eq!(i.membership_count(), 4);
    }
}
