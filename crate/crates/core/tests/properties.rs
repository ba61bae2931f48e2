use proptest::prelude::*;

use dtopt::format::{parse_instance, parse_tree, print_instance, print_tree};
use dtopt::generate::{generate, ClassSpec, GenConfig, Variant};
use dtopt::greedy::greedy_baseline;
use dtopt::instance::derive_weight_rank;
use dtopt::oracle::{oracle_cost, OracleMode};
use dtopt::{check_feasibility, solve, tree_cost, verify_tree, Cost, Instance, SolveOptions};

fn config() -> impl Strategy<Value = GenConfig> {
    (
        1usize..=9,
        any::<u64>(),
        0usize..3,
        1usize..=4,
        prop::bool::ANY,
        prop::sample::select(vec![0u64, 1, 5, 100]),
    )
        .prop_map(|(n, seed, v, k, overlap, weight_max)| {
            let variant = [Variant::Successful, Variant::Standard, Variant::General][v];
            let n = if variant == Variant::Standard { n.div_ceil(2) } else { n };
            let queries = if variant == Variant::Standard { 2 * n + 1 } else { n };
            GenConfig {
                n,
                seed,
                variant,
                classes: ClassSpec::Groups(k.min(queries)),
                weight_max,
                overlap: if overlap { 0.3 } else { 0.0 },
            }
        })
}

fn instance() -> impl Strategy<Value = Instance> {
    config().prop_map(|c| generate(&c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn solver_matches_oracle_and_verifies(inst in instance()) {
        let r = solve(&inst, &SolveOptions::default()).unwrap();
        prop_assert_eq!(r.cost, oracle_cost(&inst, OracleMode::Unrestricted).unwrap());
        prop_assert_eq!(r.cost.is_finite(), check_feasibility(&inst).is_feasible());
        if let Some(t) = &r.tree {
            let report = verify_tree(t, &inst).unwrap();
            prop_assert!(report.correct && report.irreducible && report.admissible);
            prop_assert_eq!(Cost::Finite(report.cost), r.cost);
        }
        prop_assert!(r.stats.max_candidates <= 2 * inst.len());
    }

    #[test]
    fn search_depths_sum_to_cost(inst in instance()) {
        if let Some(t) = greedy_baseline(&inst).tree {
            let by_search: u64 = (0..inst.len()).map(|q| inst.weight(q) * t.search(q).depth as u64).sum();
            prop_assert_eq!(tree_cost(&t, &inst).unwrap(), by_search);
            for q in 0..inst.len() {
                prop_assert!(inst.class(t.search(q).class).members.contains(q));
            }
        }
    }

    #[test]
    fn greedy_never_beats_optimal(inst in instance()) {
        let g = greedy_baseline(&inst);
        let s = solve(&inst, &SolveOptions::default()).unwrap();
        prop_assert_eq!(g.cost.is_finite(), s.cost.is_finite());
        prop_assert!(g.cost >= s.cost);
    }

    #[test]
    fn cost_scales_with_weights(inst in instance(), alpha in 1u64..6) {
        let scaled = inst.scaled(alpha).unwrap();
        let a = solve(&inst, &SolveOptions::default()).unwrap();
        let b = solve(&scaled, &SolveOptions::default()).unwrap();
        match (a.cost, b.cost) {
            (Cost::Finite(x), Cost::Finite(y)) => {
                prop_assert_eq!(y, alpha * x);
                prop_assert_eq!(tree_cost(b.tree.as_ref().unwrap(), &scaled).unwrap(), y);
            }
            (x, y) => prop_assert_eq!(x, y),
        }
    }

    #[test]
    fn merging_classes_never_costs_more(inst in instance(), i in 0usize..4, j in 0usize..4) {
        let specs = inst.class_specs();
        let (i, j) = (i % specs.len(), j % specs.len());
        prop_assume!(i != j);
        let mut merged: Vec<(String, Vec<i64>)> = Vec::new();
        let mut union: Vec<i64> = specs[i].1.iter().chain(&specs[j].1).copied().collect();
        union.sort_unstable();
        union.dedup();
        for (k, spec) in specs.iter().enumerate() {
            if k == i {
                merged.push(("merged".into(), union.clone()));
            } else if k != j {
                merged.push(spec.clone());
            }
        }
        let coarse = Instance::new(inst.queries(), merged).unwrap();
        let fine = solve(&inst, &SolveOptions::default()).unwrap().cost;
        prop_assert!(solve(&coarse, &SolveOptions::default()).unwrap().cost <= fine);
    }

    #[test]
    fn oracle_monotone_in_weights(inst in instance(), q in 0usize..20, extra in 1u64..50) {
        let q = q % inst.len();
        let mut queries = inst.queries();
        queries[q].weight += extra;
        let heavier = Instance::new(queries, inst.class_specs()).unwrap();
        prop_assert!(
            oracle_cost(&heavier, OracleMode::Unrestricted).unwrap()
                >= oracle_cost(&inst, OracleMode::Unrestricted).unwrap()
        );
    }

    #[test]
    fn weight_rank_orders_by_weight_then_value(weights in prop::collection::vec(0u64..5, 1..30)) {
        let values: Vec<i64> = (0..weights.len() as i64).map(|v| 3 * v - 10).collect();
        let rank = derive_weight_rank(&values, &weights);
        let mut sorted = rank.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..weights.len()).collect::<Vec<_>>());
        for a in 0..weights.len() {
            for b in 0..weights.len() {
                prop_assert_eq!(rank[a] < rank[b], (weights[a], values[a]) < (weights[b], values[b]));
            }
        }
    }

    #[test]
    fn instance_text_round_trips(inst in instance()) {
        let text = print_instance(&inst);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(print_instance(&back), text);
    }

    #[test]
    fn tree_text_round_trips(inst in instance()) {
        if let Some(t) = greedy_baseline(&inst).tree {
            let text = print_tree(&t, &inst);
            let back = parse_tree(&text, &inst).unwrap();
            prop_assert_eq!(&back, &t);
            let spaced = text.replace(' ', "\n  ").replace(")(", ") (");
            prop_assert_eq!(parse_tree(&spaced, &inst).unwrap(), t);
        }
    }
}
