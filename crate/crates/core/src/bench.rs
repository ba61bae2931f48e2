//! Timing and size measurements over generated instances.

use std::fmt::Write as _;
use std::time::Instant;

use crate::generate::{generate, ClassSpec, GenConfig, GenError, Variant};
use crate::greedy::greedy_baseline;
use crate::solver::{solve, SolveError, SolveOptions};
use crate::tree::Cost;

pub const CSV_HEADER: &str = "n,m,records,solve_ms,greedy_ratio";

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub variant: Variant,
    pub classes: ClassSpec,
    pub weight_max: u64,
    pub solve: SolveOptions,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![25, 50, 100],
            reps: 3,
            seed: 1,
            variant: Variant::Successful,
            classes: ClassSpec::Identity,
            weight_max: 100,
            solve: SolveOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    /// Total class memberships.
    pub m: usize,
    pub records: usize,
    /// Mean wall time of one solve, dictionary construction included.
    pub solve_ms: f64,
    /// Greedy cost over optimal cost; 1 when both are zero, infinite when
    /// only the optimum is zero.
    pub greedy_ratio: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Generate(#[from] GenError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// One row per size; repetitions of a size solve the same instance in
/// sequence.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    let mut rows = Vec::with_capacity(cfg.sizes.len());
    for &n in &cfg.sizes {
        let instance = generate(&GenConfig {
            n,
            seed: cfg.seed,
            variant: cfg.variant,
            classes: cfg.classes,
            weight_max: cfg.weight_max,
            overlap: 0.0,
        })?;
        let reps = cfg.reps.max(1);
        let mut total_ms = 0.0;
        let mut last = None;
        for _ in 0..reps {
            let start = Instant::now();
            let r = solve(&instance, &cfg.solve)?;
            total_ms += start.elapsed().as_secs_f64() * 1e3;
            last = Some(r);
        }
        let r = last.expect("at least one repetition");
        let greedy = greedy_baseline(&instance);
        let greedy_ratio = match (greedy.cost, r.cost) {
            (Cost::Finite(g), Cost::Finite(0)) => {
                if g == 0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            }
            (Cost::Finite(g), Cost::Finite(o)) => g as f64 / o as f64,
            _ => f64::NAN,
        };
        rows.push(BenchRow {
            n: instance.len(),
            m: instance.membership_count(),
            records: r.stats.records,
            solve_ms: total_ms / reps as f64,
            greedy_ratio,
        });
    }
    Ok(rows)
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{:.3},{:.4}",
            r.n, r.m, r.records, r.solve_ms, r.greedy_ratio
        )
        .unwrap();
    }
    out
}
