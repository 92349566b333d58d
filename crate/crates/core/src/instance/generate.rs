//! Deterministic instance generators.
//!
//! Randomness is SplitMix64 seeded with the raw 64-bit seed (state = seed,
//! each draw adds 0x9e3779b97f4a7c15 and applies the standard finalizer).
//! For `gnp` the pairs `(u, v)`, `u < v`, are visited in lexicographic order and
//! one 64-bit draw `x` is consumed per pair; the edge is present iff
//! `x < p · 2^64`, evaluated exactly for rational `p`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use super::{Instance, InstanceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Each pair `u < v` is an edge independently with probability `param`.
    Gnp,
    /// `1 ≺ 2 ≺ … ≺ n`; `param` ignored.
    Chain,
    /// `param` layers; job `j` sits in layer `⌊(j−1)·L/n⌋` and precedes every
    /// job of the next layer.
    Layered,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Gnp => "gnp",
            Model::Chain => "chain",
            Model::Layered => "layered",
        })
    }
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gnp" => Ok(Model::Gnp),
            "chain" => Ok(Model::Chain),
            "layered" => Ok(Model::Layered),
            other => Err(format!("unknown model `{other}` (expected gnp, chain or layered)")),
        }
    }
}

pub fn generate(model: Model, n: usize, m: usize, param: &BigRational, seed: u64) -> Result<Instance, InstanceError> {
    if n == 0 || m == 0 {
        return Err(InstanceError::Invalid(format!("n and m must be positive (n={n}, m={m})")));
    }
    let mut prec = Vec::new();
    match model {
        Model::Gnp => {
            if *param < BigRational::zero() || *param > BigRational::one() {
                return Err(InstanceError::InvalidParam { model: "gnp", reason: format!("p={param} not in [0,1]") });
            }
            let threshold = param * BigRational::from_integer(BigInt::one() << 64);
            let mut rng = SplitMix64::seed_from_u64(seed);
            for u in 1..=n {
                for v in u + 1..=n {
                    let x = BigRational::from_integer(BigInt::from(rng.next_u64()));
                    if x < threshold {
                        prec.push((u, v));
                    }
                }
            }
        }
        Model::Chain => prec.extend((1..n).map(|j| (j, j + 1))),
        Model::Layered => {
            let layers = if param.is_integer() { param.to_integer().to_usize() } else { None };
            let layers = match layers {
                Some(l) if (1..=n).contains(&l) => l,
                _ => {
                    return Err(InstanceError::InvalidParam {
                        model: "layered",
                        reason: format!("layer count {param} must be an integer in [1, {n}]"),
                    })
                }
            };
            let layer_of = |j: usize| (j - 1) * layers / n;
            for u in 1..=n {
                for v in u + 1..=n {
                    if layer_of(v) == layer_of(u) + 1 {
                        prec.push((u, v));
                    }
                }
            }
        }
    }
    Ok(Instance::from_parts_unchecked(n, m, prec))
}
