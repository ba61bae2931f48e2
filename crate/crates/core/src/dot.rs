//! Graphviz rendering of a tree. Nodes are numbered in preorder.

use std::fmt::Write as _;

use crate::instance::Instance;
use crate::queryset::QuerySet;
use crate::tree::{Answer, DecisionTree};

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// A node still to print, the queries reaching it, and its parent edge.
type Visit<'a> = (&'a DecisionTree, QuerySet, Option<(usize, Answer)>);

pub fn to_dot(tree: &DecisionTree, instance: &Instance) -> String {
    let mut out = String::from("digraph tree {\n  node [fontname=\"monospace\"];\n");
    let mut next_id = 0usize;
    let mut stack: Vec<Visit> = vec![(tree, QuerySet::full(instance.len()), None)];
    while let Some((node, set, parent)) = stack.pop() {
        let id = next_id;
        next_id += 1;
        match node {
            DecisionTree::Leaf(c) => {
                let values: Vec<String> = set.iter().map(|q| instance.value(q).to_string()).collect();
                let label = format!("{}\\n{{{}}}", escape(&instance.class(*c).name), values.join(", "));
                writeln!(out, "  n{id} [shape=box, label=\"{label}\"];").unwrap();
            }
            DecisionTree::Node { test, yes, no } => {
                writeln!(out, "  n{id} [label=\"{}\"];", test.display(instance)).unwrap();
                let (mut ys, mut ns) = (QuerySet::empty(instance.len()), QuerySet::empty(instance.len()));
                for q in &set {
                    if test.satisfied_by(q) {
                        ys.insert(q);
                    } else {
                        ns.insert(q);
                    }
                }
                stack.push((no, ns, Some((id, Answer::No))));
                stack.push((yes, ys, Some((id, Answer::Yes))));
            }
        }
        if let Some((p, a)) = parent {
            let label = if a == Answer::Yes { "yes" } else { "no" };
            writeln!(out, "  n{p} -> n{id} [label=\"{label}\"];").unwrap();
        }
    }
    out.push_str("}\n");
    out
}
