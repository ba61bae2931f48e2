use crate::instance::{Instance, Query};

/// Builds an instance from `(value, weight, is_key)` triples and
/// `(class id, member values)` pairs; panics on invalid input.
pub(crate) fn inst(queries: &[(i64, u64, bool)], classes: &[(&str, &[i64])]) -> Instance {
    Instance::new(
        queries.iter().map(|&(v, w, k)| Query::new(v, w, k)).collect(),
        classes.iter().map(|(n, m)| (n.to_string(), m.to_vec())).collect(),
    )
    .unwrap()
}

/// Values `1..=n`, all keys, with the given weights.
pub(crate) fn all_keys(weights: &[u64], classes: &[(&str, &[i64])]) -> Instance {
    let qs: Vec<_> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| (i as i64 + 1, w, true))
        .collect();
    inst(&qs, classes)
}
