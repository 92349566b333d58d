//! Scheduling instances: `n` unit jobs, `m` identical machines and a
//! precedence DAG over 1-based job ids.

mod generate;
mod io;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub use generate::{generate, Model};
pub use io::{parse_instance, parse_instance_json, serialize_instance};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("line {line}: malformed header, expected `p sched <n> <m>` with n, m >= 1")]
    MalformedHeader { line: usize },
    #[error("line {line}: malformed line `{text}`")]
    MalformedLine { line: usize, text: String },
    #[error("line {line}: job id {job} outside [1, {n}]")]
    JobOutOfRange { line: usize, job: usize, n: usize },
    #[error("line {line}: edge {u} -> {v} closes a precedence cycle")]
    CycleDetected { line: usize, u: usize, v: usize },
    #[error("invalid parameter for model {model}: {reason}")]
    InvalidParam { model: &'static str, reason: String },
    #[error("invalid instance: {0}")]
    Invalid(String),
}

/// A scheduling instance. Immutable after construction; the transitive
/// closure is computed lazily once and shared.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct Instance {
    n: usize,
    m: usize,
    prec: Vec<(usize, usize)>,
    #[serde(skip)]
    closure: OnceLock<PrecRelation>,
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    n: usize,
    m: usize,
    prec: Vec<[usize; 2]>,
}

impl TryFrom<RawInstance> for Instance {
    type Error = InstanceError;

    fn try_from(raw: RawInstance) -> Result<Self, Self::Error> {
        Instance::new(raw.n, raw.m, raw.prec.into_iter().map(|[u, v]| (u, v)))
    }
}

impl From<Instance> for RawInstance {
    fn from(inst: Instance) -> Self {
        RawInstance { n: inst.n, m: inst.m, prec: inst.prec.iter().map(|&(u, v)| [u, v]).collect() }
    }
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.m == other.m && self.prec == other.prec
    }
}

impl Eq for Instance {}

impl Instance {
    /// Builds an instance, rejecting out-of-range ids, self-pairs and cycles.
    /// Duplicate pairs are kept once, in first-seen order.
    pub fn new(
        n: usize,
        m: usize,
        prec: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, InstanceError> {
        let mut builder = Builder::new(n, m)?;
        for (idx, (u, v)) in prec.into_iter().enumerate() {
            builder.add_edge(u, v, idx + 1)?;
        }
        Ok(builder.finish())
    }

    pub(crate) fn from_parts_unchecked(n: usize, m: usize, prec: Vec<(usize, usize)>) -> Self {
        Instance { n, m, prec, closure: OnceLock::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// The precedence pairs exactly as given (deduplicated).
    pub fn prec(&self) -> &[(usize, usize)] {
        &self.prec
    }

    pub fn jobs(&self) -> impl Iterator<Item = usize> {
        1..=self.n
    }

    /// Transitive closure of the precedence relation, cached.
    pub fn closure(&self) -> &PrecRelation {
        self.closure.get_or_init(|| PrecRelation::from_edges(self.n, &self.prec))
    }

    /// Same jobs and precedences on a different number of machines.
    pub fn with_machines(&self, m: usize) -> Instance {
        Instance::from_parts_unchecked(self.n, m, self.prec.clone())
    }
}

pub(crate) struct Builder {
    n: usize,
    m: usize,
    prec: Vec<(usize, usize)>,
    succ: Vec<Vec<usize>>,
}

impl Builder {
    pub(crate) fn new(n: usize, m: usize) -> Result<Self, InstanceError> {
        if n == 0 || m == 0 {
            return Err(InstanceError::Invalid(format!("n and m must be positive (n={n}, m={m})")));
        }
        Ok(Builder { n, m, prec: Vec::new(), succ: vec![Vec::new(); n + 1] })
    }

    /// `line` is only used for error reporting.
    pub(crate) fn add_edge(&mut self, u: usize, v: usize, line: usize) -> Result<(), InstanceError> {
        for job in [u, v] {
            if job == 0 || job > self.n {
                return Err(InstanceError::JobOutOfRange { line, job, n: self.n });
            }
        }
        if u == v || self.reaches(v, u) {
            return Err(InstanceError::CycleDetected { line, u, v });
        }
        if !self.succ[u].contains(&v) {
            self.succ[u].push(v);
            self.prec.push((u, v));
        }
        Ok(())
    }

    fn reaches(&self, from: usize, to: usize) -> bool {
        let mut seen = vec![false; self.n + 1];
        let mut stack = vec![from];
        while let Some(x) = stack.pop() {
            if x == to {
                return true;
            }
            if std::mem::replace(&mut seen[x], true) {
                continue;
            }
            stack.extend(self.succ[x].iter().copied().filter(|&y| !seen[y]));
        }
        false
    }

    pub(crate) fn finish(self) -> Instance {
        Instance::from_parts_unchecked(self.n, self.m, self.prec)
    }
}

/// Transitive closure of `≺` as a dense boolean matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecRelation {
    n: usize,
    bits: Vec<bool>,
}

impl PrecRelation {
    fn from_edges(n: usize, prec: &[(usize, usize)]) -> Self {
        let mut succ = vec![Vec::new(); n + 1];
        for &(u, v) in prec {
            succ[u].push(v);
        }
        let mut bits = vec![false; n * n];
        for start in 1..=n {
            let mut stack: Vec<usize> = succ[start].clone();
            while let Some(x) = stack.pop() {
                let cell = &mut bits[(start - 1) * n + (x - 1)];
                if !*cell {
                    *cell = true;
                    stack.extend(succ[x].iter().copied());
                }
            }
        }
        PrecRelation { n, bits }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `u ≺ v` in the closure.
    pub fn precedes(&self, u: usize, v: usize) -> bool {
        self.bits[(u - 1) * self.n + (v - 1)]
    }

    pub fn comparable(&self, u: usize, v: usize) -> bool {
        self.precedes(u, v) || self.precedes(v, u)
    }

    pub fn preds(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        (1..=self.n).filter(move |&u| self.precedes(u, j))
    }

    pub fn succs(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        (1..=self.n).filter(move |&v| self.precedes(j, v))
    }

    /// All ordered pairs of the closure, lexicographically.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..=self.n).flat_map(move |u| self.succs(u).map(move |v| (u, v)))
    }

    pub fn pair_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Jobs sorted so that every job comes after all its predecessors
    /// (by closure predecessor count, then id).
    pub fn topological_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (1..=self.n).collect();
        order.sort_by_key(|&j| (self.preds(j).count(), j));
        order
    }

    /// A maximum-length chain among `subset`, lexicographically smallest among
    /// all maximum chains.
    pub fn longest_chain(&self, subset: &[usize]) -> Vec<usize> {
        let mut members: Vec<usize> = subset.to_vec();
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Vec::new();
        }
        // Predecessors have strictly fewer predecessors, so this is a topological order.
        let mut order = members.clone();
        order.sort_by_key(|&j| (self.preds(j).count(), j));
        // best[j] = length of the longest chain starting at j, next[j] = its
        // lexicographically smallest continuation.
        let mut best = vec![0usize; self.n + 1];
        let mut next = vec![None; self.n + 1];
        for &j in order.iter().rev() {
            let mut len = 1;
            let mut choice = None;
            for &i in &members {
                if self.precedes(j, i) && (best[i] + 1 > len || (best[i] + 1 == len && choice.map_or(false, |c| i < c))) {
                    len = best[i] + 1;
                    choice = Some(i);
                }
            }
            best[j] = len;
            next[j] = choice;
        }
        // `members` is sorted, so the first maximum is the smallest id.
        let head = members.iter().copied().fold(members[0], |acc, j| if best[j] > best[acc] { j } else { acc });
        let mut chain = vec![head];
        while let Some(i) = next[*chain.last().unwrap()] {
            chain.push(i);
        }
        chain
    }
}

/// A maximum chain of `inst` restricted to `subset`.
pub fn longest_chain(rel: &PrecRelation, subset: &[usize]) -> Vec<usize> {
    rel.longest_chain(subset)
}

/// The closure of `inst`.
pub fn transitive_closure(inst: &Instance) -> &PrecRelation {
    inst.closure()
}
