use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use dtopt::bench::{run_bench, to_csv, BenchConfig};
use dtopt::dictionary::{build_dictionary, BuildOptions, DEFAULT_MAX_RECORDS};
use dtopt::dot::to_dot;
use dtopt::format::{parse_instance, parse_tree, print_instance, print_tree};
use dtopt::generate::{generate, ClassSpec, GenConfig, Variant};
use dtopt::oracle::{oracle_cost, OracleMode};
use dtopt::solver::Fault;
use dtopt::verify::ViolationKind;
use dtopt::{
    check_feasibility, solve, verify_tree, Answer, ClassId, Execution, Feasibility, Instance, SolveMode, SolveOptions,
    SolveResult,
};

/// Exit status for a well-formed run with a negative answer.
const NEGATIVE: u8 = 2;

#[derive(Parser)]
#[command(name = "dtopt", version, about = "Minimum-cost two-way-comparison decision trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Full,
    Hf,
}

impl From<Mode> for SolveMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Full => SolveMode::Full,
            Mode::Hf => SolveMode::HeaviestFirstOnly,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute an optimal tree; exit 2 if the instance is infeasible.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "full")]
        mode: Mode,
        #[arg(long)]
        tree_out: Option<PathBuf>,
        #[arg(long)]
        dot_out: Option<PathBuf>,
        /// Print dictionary and search counters.
        #[arg(long)]
        stats: bool,
        /// Build the dictionary on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Audit a tree; exit 2 if it classifies some query wrongly.
    Verify { instance: PathBuf, tree: PathBuf },
    /// Compare the solver against the exhaustive oracle; exit 2 on mismatch.
    Check {
        instance: PathBuf,
        #[arg(long, default_value_t = 12)]
        max_n: usize,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Write a random instance.
    Gen {
        /// Query count (key count for the standard variant).
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "successful")]
        variant: Variant,
        /// Number of classes, or `identity` for one class per query.
        #[arg(long, default_value = "3")]
        classes: ClassSpec,
        #[arg(long, default_value_t = 100)]
        weight_max: u64,
        /// Probability that a query joins a second class.
        #[arg(long, default_value_t = 0.0)]
        overlap: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Time the solver on generated instances; CSV on standard output.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "25,50,100")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "successful")]
        variant: Variant,
        #[arg(long, default_value = "identity")]
        classes: ClassSpec,
    },
    /// Render a tree (given, or solved on the spot) as Graphviz DOT.
    Dot {
        instance: PathBuf,
        tree: Option<PathBuf>,
        #[arg(long, conflicts_with = "tree")]
        solve: bool,
        #[arg(long, value_enum, default_value = "full")]
        mode: Mode,
    },
    /// Instance and dictionary sizes.
    Stats { instance: PathBuf },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_instance(path: &Path) -> Result<Instance> {
    parse_instance(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn max_records() -> Result<usize> {
    match std::env::var("DTOPT_MAX_RECORDS") {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("DTOPT_MAX_RECORDS=`{v}` is not a count")),
        Err(_) => Ok(DEFAULT_MAX_RECORDS),
    }
}

fn options(mode: Mode) -> Result<SolveOptions> {
    Ok(SolveOptions {
        mode: mode.into(),
        max_records: max_records()?,
        ..SolveOptions::default()
    })
}

fn solved_tree(instance: &Instance, mode: Mode) -> Result<SolveResult> {
    Ok(solve(instance, &options(mode)?)?)
}

/// `root`, or the answers from the root as a string of `y` and `n`.
fn path_name(path: &[Answer]) -> String {
    if path.is_empty() {
        return "root".into();
    }
    path.iter().map(|a| if *a == Answer::Yes { 'y' } else { 'n' }).collect()
}

fn describe(kind: &ViolationKind, inst: &Instance) -> String {
    let name = |c: ClassId| inst.class(c).name.clone();
    match kind {
        ViolationKind::WrongClass { class, missing } => {
            let values: Vec<String> = missing.iter().map(|&q| inst.value(q).to_string()).collect();
            format!("wrong-class {} misses {}", name(*class), values.join(","))
        }
        ViolationKind::Unreachable => "unreachable".into(),
        ViolationKind::Reducible { class } => format!("reducible {}", name(*class)),
        ViolationKind::Inadmissible => "inadmissible".into(),
        ViolationKind::NotHeaviest { test } => format!("not-heaviest {}", test.display(inst)),
        ViolationKind::EquivalentTests { other } => format!("equivalent-to {}", path_name(other)),
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Solve {
            instance,
            mode,
            tree_out,
            dot_out,
            stats,
            sequential,
        } => {
            let inst = load_instance(&instance)?;
            let mut opts = options(mode)?;
            if sequential {
                opts.exec = Execution::Sequential;
            }
            let r = solve(&inst, &opts)?;
            match &r.tree {
                Some(t) => {
                    println!("cost {}", r.cost);
                    if let Some(p) = &tree_out {
                        write(p, &format!("{}\n", print_tree(t, &inst)))?;
                    }
                    if let Some(p) = &dot_out {
                        write(p, &to_dot(t, &inst))?;
                    }
                }
                None => println!("infeasible"),
            }
            if stats {
                let s = &r.stats;
                println!("records {}", s.records);
                println!("leaves {}", s.leaves);
                println!("subproblems_solved {}", s.subproblems_solved);
                println!("stage1_candidates {}", s.stage1_candidates);
                println!("stage2_candidates {}", s.stage2_candidates);
                println!("max_candidates {}", s.max_candidates);
                println!("canonicalized {}", s.canonicalized);
                println!("build_ms {:.3}", s.build_time.as_secs_f64() * 1e3);
                println!("solve_ms {:.3}", s.solve_time.as_secs_f64() * 1e3);
            }
            Ok(if r.tree.is_some() { 0 } else { NEGATIVE })
        }
        Command::Verify { instance, tree } => {
            let inst = load_instance(&instance)?;
            let t = parse_tree(&read(&tree)?, &inst).with_context(|| format!("{}", tree.display()))?;
            let report = verify_tree(&t, &inst).with_context(|| format!("{}", tree.display()))?;
            println!("{report}");
            for v in &report.violations {
                println!("violation {} {}", path_name(&v.path), describe(&v.kind, &inst));
            }
            Ok(if report.correct { 0 } else { NEGATIVE })
        }
        Command::Check {
            instance,
            max_n,
            inject_fault,
        } => {
            let inst = load_instance(&instance)?;
            if inst.len() > max_n {
                bail!("instance has {} queries, more than --max-n {max_n}", inst.len());
            }
            let mut opts = options(Mode::Full)?;
            if inject_fault {
                opts.fault = Some(Fault::LeafCostOne);
            }
            let solved = solve(&inst, &opts)?.cost;
            let oracle = oracle_cost(&inst, OracleMode::Unrestricted)?;
            println!("solve {solved}");
            println!("oracle {oracle}");
            if solved == oracle {
                println!("equal");
                Ok(0)
            } else {
                println!("mismatch");
                Ok(NEGATIVE)
            }
        }
        Command::Gen {
            n,
            seed,
            variant,
            classes,
            weight_max,
            overlap,
            output,
        } => {
            let inst = generate(&GenConfig {
                n,
                seed,
                variant,
                classes,
                weight_max,
                overlap,
            })?;
            let text = print_instance(&inst);
            match output {
                Some(p) => write(&p, &text)?,
                None => print!("{text}"),
            }
            Ok(0)
        }
        Command::Bench {
            sizes,
            reps,
            seed,
            variant,
            classes,
        } => {
            let rows = run_bench(&BenchConfig {
                sizes,
                reps,
                seed,
                variant,
                classes,
                solve: options(Mode::Full)?,
                ..BenchConfig::default()
            })?;
            print!("{}", to_csv(&rows));
            Ok(0)
        }
        Command::Dot {
            instance,
            tree,
            solve,
            mode,
        } => {
            let inst = load_instance(&instance)?;
            let t = match (tree, solve) {
                (Some(p), false) => parse_tree(&read(&p)?, &inst).with_context(|| format!("{}", p.display()))?,
                (None, true) => match solved_tree(&inst, mode)?.tree {
                    Some(t) => t,
                    None => {
                        eprintln!("infeasible");
                        return Ok(NEGATIVE);
                    }
                },
                _ => bail!("give either a tree file or --solve"),
            };
            t.validate(&inst)?;
            print!("{}", to_dot(&t, &inst));
            Ok(0)
        }
        Command::Stats { instance } => {
            let inst = load_instance(&instance)?;
            let dict = build_dictionary(
                &inst,
                &BuildOptions {
                    max_records: max_records()?,
                    ..BuildOptions::default()
                },
            )?;
            let s = dict.stats();
            println!("queries {}", inst.len());
            println!("keys {}", inst.keys().len());
            println!("classes {}", inst.classes().len());
            println!("memberships {}", inst.membership_count());
            println!("total_weight {}", inst.total_weight());
            match check_feasibility(&inst) {
                Feasibility::Feasible => println!("feasible true"),
                Feasibility::Infeasible { .. } => println!("feasible false"),
            }
            println!("records {}", s.records);
            println!("without_light_holes {}", s.without_light_holes);
            println!("with_light_holes {}", s.with_light_holes);
            println!("leaves {}", s.leaves);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
