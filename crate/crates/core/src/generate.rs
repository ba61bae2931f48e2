//! Seeded random instances.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{Instance, InstanceError, Query};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Every query is a key.
    Successful,
    /// A non-key before, between and after consecutive keys.
    Standard,
    /// Independent fair coin per key flag.
    General,
}

impl FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "successful" => Ok(Self::Successful),
            "standard" => Ok(Self::Standard),
            "general" => Ok(Self::General),
            _ => Err(format!("unknown variant `{s}` (successful, standard or general)")),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Successful => "successful",
            Self::Standard => "standard",
            Self::General => "general",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassSpec {
    /// One singleton class `q<value>` per query.
    Identity,
    /// A random partition into this many nonempty classes `c0`, `c1`, ...
    Groups(usize),
}

impl FromStr for ClassSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "identity" {
            return Ok(Self::Identity);
        }
        s.parse()
            .map(Self::Groups)
            .map_err(|_| format!("bad class count `{s}` (a number or `identity`)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenConfig {
    /// Query count, or key count for [`Variant::Standard`].
    pub n: usize,
    pub seed: u64,
    pub variant: Variant,
    pub classes: ClassSpec,
    /// Weights are drawn uniformly from `0..=weight_max`.
    pub weight_max: u64,
    /// Probability that a query also joins a second, different class.
    pub overlap: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            n: 8,
            seed: 0,
            variant: Variant::Successful,
            classes: ClassSpec::Groups(3),
            weight_max: 100,
            overlap: 0.0,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("n must be at least 1")]
    ZeroSize,
    #[error("cannot split {queries} queries into {classes} nonempty classes")]
    ClassCount { queries: usize, classes: usize },
    #[error("overlap must lie in [0, 1]")]
    Overlap,
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

pub fn generate(cfg: &GenConfig) -> Result<Instance, GenError> {
    if cfg.n == 0 {
        return Err(GenError::ZeroSize);
    }
    if !(0.0..=1.0).contains(&cfg.overlap) {
        return Err(GenError::Overlap);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let key_flags: Vec<bool> = match cfg.variant {
        Variant::Successful => vec![true; cfg.n],
        Variant::Standard => (0..2 * cfg.n + 1).map(|i| i % 2 == 1).collect(),
        Variant::General => (0..cfg.n).map(|_| rng.gen_bool(0.5)).collect(),
    };
    let n = key_flags.len();
    let queries: Vec<Query> = key_flags
        .iter()
        .enumerate()
        .map(|(i, &k)| Query::new(i as i64 + 1, rng.gen_range(0..=cfg.weight_max), k))
        .collect();

    let (names, mut groups): (Vec<String>, Vec<Vec<usize>>) = match cfg.classes {
        ClassSpec::Identity => (
            (1..=n).map(|v| format!("q{v}")).collect(),
            (0..n).map(|r| vec![r]).collect(),
        ),
        ClassSpec::Groups(k) => {
            if k == 0 || k > n {
                return Err(GenError::ClassCount { queries: n, classes: k });
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let mut groups = vec![Vec::new(); k];
            for (i, &r) in order.iter().enumerate() {
                let g = if i < k { i } else { rng.gen_range(0..k) };
                groups[g].push(r);
            }
            ((0..k).map(|c| format!("c{c}")).collect(), groups)
        }
    };
    let home: Vec<usize> = {
        let mut home = vec![0; n];
        for (g, members) in groups.iter().enumerate() {
            for &r in members {
                home[r] = g;
            }
        }
        home
    };
    if groups.len() > 1 {
        for (r, &h) in home.iter().enumerate() {
            if rng.gen_bool(cfg.overlap) {
                let mut other = rng.gen_range(0..groups.len() - 1);
                if other >= h {
                    other += 1;
                }
                groups[other].push(r);
            }
        }
    }
    let classes = names
        .into_iter()
        .zip(groups)
        .map(|(name, mut members)| {
            members.sort_unstable();
            (name, members.into_iter().map(|r| queries[r].value).collect())
        })
        .collect();
    Ok(Instance::new(queries, classes)?)
}
