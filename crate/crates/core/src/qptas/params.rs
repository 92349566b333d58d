use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::QptasError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Paper,
    Desk,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Params {
    pub m: usize,
    #[serde(serialize_with = "crate::scalar::serialize_rational")]
    pub epsilon: BigRational,
    pub mode: Mode,
    /// Levels per batch.
    pub k: usize,
    /// Batches inspected by step 1.
    pub c: usize,
    /// Batches kept (and charged) by a type-2 recursion.
    pub retain: usize,
    #[serde(serialize_with = "crate::scalar::serialize_rational")]
    pub delta: BigRational,
    /// Conditionings allowed along any root-to-leaf path of the recursion.
    pub budget: usize,
    /// Nodes of at most this many slots are solved by direct conditioning.
    pub base_threshold: usize,
    /// `⌈log₂ n⌉`, at least 1; enters δ and the per-node discard bound.
    pub log_n: usize,
}

pub const DEFAULT_BASE_THRESHOLD: usize = 8;

fn ceil_log2(x: usize) -> usize {
    x.max(2).next_power_of_two().trailing_zeros() as usize
}

impl Params {
    /// Explicit constants. `retain` defaults to `⌊(C−1)/2⌋`.
    pub fn desk(
        m: usize,
        epsilon: BigRational,
        k: usize,
        c: usize,
        delta: BigRational,
        retain: Option<usize>,
        n: usize,
    ) -> Result<Self, QptasError> {
        let retain = retain.unwrap_or((c.saturating_sub(1) / 2).max(1));
        let p = Params {
            m,
            epsilon,
            mode: Mode::Desk,
            k,
            c,
            retain,
            delta,
            budget: 100_000,
            base_threshold: DEFAULT_BASE_THRESHOLD,
            log_n: ceil_log2(n),
        };
        p.check()?;
        Ok(p)
    }

    /// `R = ⌈(4m/ε)²⌉`, `C = 2R + 1`, `k = ⌈log₂((32m/ε)·⌈log₂ n⌉)⌉`,
    /// `δ = ε / (8·m·C·k·2^{Ck}·⌈log₂ n⌉)`.
    pub fn paper(m: usize, epsilon: BigRational, n: usize) -> Result<Self, QptasError> {
        if !(epsilon > BigRational::zero() && epsilon <= BigRational::one()) {
            return Err(QptasError::BadParams(format!("epsilon {epsilon} outside (0, 1]")));
        }
        let log_n = ceil_log2(n);
        let ratio = BigRational::from_integer((4 * m).into()) / &epsilon;
        let retain = ceil_to_usize(&(&ratio * &ratio));
        let c = 2 * retain + 1;
        let arg = BigRational::from_integer((32 * m * log_n).into()) / &epsilon;
        let k = ceil_log2(ceil_to_usize(&arg));
        let two_ck = BigInt::one() << (c * k);
        let denom = BigInt::from(8 * m * c * k * log_n) * two_ck;
        let delta = &epsilon / BigRational::from_integer(denom);
        let p = Params {
            m,
            epsilon,
            mode: Mode::Paper,
            k,
            c,
            retain,
            delta,
            budget: usize::MAX,
            base_threshold: 0,
            log_n,
        };
        p.check()?;
        Ok(p)
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_base_threshold(mut self, t: usize) -> Self {
        self.base_threshold = t;
        self
    }

    fn check(&self) -> Result<(), QptasError> {
        let bad = |s: String| Err(QptasError::BadParams(s));
        if self.m == 0 || self.k == 0 {
            return bad("m and k must be positive".into());
        }
        if !(self.epsilon > BigRational::zero() && self.epsilon <= BigRational::one()) {
            return bad(format!("epsilon {} outside (0, 1]", self.epsilon));
        }
        if !(self.delta > BigRational::zero()) {
            return bad(format!("delta {} must be positive", self.delta));
        }
        if self.retain == 0 || self.c <= 2 * self.retain {
            return bad(format!("need C > 2R with R ≥ 1, got C = {}, R = {}", self.c, self.retain));
        }
        Ok(())
    }

    /// `ε / 4m`.
    pub fn epsilon_prime(&self) -> BigRational {
        crate::laminar::epsilon_prime(&self.epsilon, self.m)
    }

    /// Levels whose intervals step 1 may condition on: `C·k`.
    pub fn step1_levels(&self) -> usize {
        self.c * self.k
    }

    /// Is a node with `levels_below` levels under it (length `2^levels_below`)
    /// solved directly?
    pub fn is_base_case(&self, levels_below: usize) -> bool {
        let ck = self.step1_levels();
        match self.mode {
            Mode::Paper => levels_below <= ck,
            Mode::Desk => levels_below < ck || (1usize << levels_below.min(63)) <= self.base_threshold,
        }
    }

    /// `m / δ`.
    pub fn per_interval_cap(&self) -> BigRational {
        BigRational::from_integer(self.m.into()) / &self.delta
    }

    /// `2^{Ck}·m / δ`.
    pub fn per_node_cap(&self) -> BigRational {
        BigRational::from_integer(BigInt::one() << self.step1_levels()) * self.per_interval_cap()
    }
}

fn ceil_to_usize(x: &BigRational) -> usize {
    let c = x.ceil().to_integer();
    usize::try_from(c).expect("parameter fits in usize")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn paper_constants() {
        let p = Params::paper(2, q(1, 2), 16).unwrap();
        assert_eq!(p.retain, 256);
        assert_eq!(p.c, 513);
        // (32·2/(1/2))·4 = 512 = 2^9.
        assert_eq!(p.k, 9);
        assert_eq!(p.log_n, 4);
        assert!(p.is_base_case(20));
        let p = Params::paper(1, q(1, 1), 2).unwrap();
        // 32·1 = 2^5 exactly.
        assert_eq!((p.retain, p.c, p.k), (16, 33, 5));
    }

    #[test]
    fn desk_checks() {
        assert!(Params::desk(2, q(1, 2), 1, 3, q(1, 4), None, 10).is_ok());
        assert!(Params::desk(2, q(1, 2), 1, 2, q(1, 4), None, 10).is_err());
        assert!(Params::desk(2, q(1, 2), 1, 5, q(1, 4), Some(2), 10).is_ok());
        assert!(Params::desk(2, q(1, 2), 1, 4, q(1, 4), Some(2), 10).is_err());
        assert!(Params::desk(2, q(0, 1), 1, 3, q(1, 4), None, 10).is_err());
        let p = Params::desk(2, q(1, 2), 1, 3, q(1, 4), None, 10).unwrap().with_base_threshold(2);
        assert!(p.is_base_case(1) && p.is_base_case(2) && !p.is_base_case(3));
        assert_eq!(p.per_interval_cap(), q(8, 1));
        assert_eq!(p.per_node_cap(), q(64, 1));
    }
}
