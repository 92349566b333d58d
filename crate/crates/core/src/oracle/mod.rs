//! Exact optimum makespan by breadth-first search over downsets.
//!
//! A state is the set of completed jobs, which is always predecessor-closed.
//! One BFS layer is one time slot. With unit jobs there is always an optimal
//! schedule that never leaves a machine idle while a job is available (moving
//! such a job earlier keeps feasibility and the makespan), so by default only
//! maximal transitions are expanded: every subset of size `min(m, #available)`.
//! [`TransitionRule::AllSubsets`] keeps the unpruned search for cross-checks.

mod schedule;

use std::collections::HashMap;

use rand::RngCore;

pub use schedule::{validate, validate_partial, Schedule, ValidationReport, Violation};

use crate::instance::Instance;

/// Largest instance the oracle accepts.
pub const ORACLE_MAX_JOBS: usize = 24;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance has {n} jobs, the exact oracle is capped at {cap}")]
    TooLarge { n: usize, cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionRule {
    /// Subsets of size exactly `min(m, #available)`.
    Maximal,
    /// Every nonempty subset of size at most `m`.
    AllSubsets,
}

struct Downsets {
    n: usize,
    m: usize,
    pred_mask: Vec<u32>,
}

impl Downsets {
    fn new(inst: &Instance) -> Result<Self, OracleError> {
        if inst.n() > ORACLE_MAX_JOBS {
            return Err(OracleError::TooLarge { n: inst.n(), cap: ORACLE_MAX_JOBS });
        }
        let mut pred_mask = vec![0u32; inst.n()];
        for &(u, v) in inst.prec() {
            pred_mask[v - 1] |= 1 << (u - 1);
        }
        Ok(Downsets { n: inst.n(), m: inst.m(), pred_mask })
    }

    fn full(&self) -> u32 {
        if self.n == 32 {
            u32::MAX
        } else {
            (1u32 << self.n) - 1
        }
    }

    fn available(&self, done: u32) -> Vec<u32> {
        (0..self.n)
            .filter(|&j| done & (1 << j) == 0 && self.pred_mask[j] & !done == 0)
            .map(|j| 1u32 << j)
            .collect()
    }

    /// Successor states of `done`, in a fixed order.
    fn transitions(&self, done: u32, rule: TransitionRule) -> Vec<u32> {
        let avail = self.available(done);
        let (lo, hi) = match rule {
            TransitionRule::Maximal => {
                let k = avail.len().min(self.m);
                (k, k)
            }
            TransitionRule::AllSubsets => (1, avail.len().min(self.m)),
        };
        let mut out = Vec::new();
        let mut chosen = Vec::new();
        subsets(&avail, 0, lo, hi, &mut chosen, &mut |mask| out.push(done | mask));
        out
    }
}

fn subsets(items: &[u32], from: usize, lo: usize, hi: usize, chosen: &mut Vec<u32>, emit: &mut impl FnMut(u32)) {
    if chosen.len() >= lo && !chosen.is_empty() {
        emit(chosen.iter().fold(0, |a, b| a | b));
    }
    if chosen.len() == hi {
        return;
    }
    for i in from..items.len() {
        chosen.push(items[i]);
        subsets(items, i + 1, lo, hi, chosen, emit);
        chosen.pop();
    }
}

fn schedule_from_states(states: &[u32]) -> Schedule {
    let mut sched = Schedule::new();
    for (t, pair) in states.windows(2).enumerate() {
        let added = pair[1] & !pair[0];
        for j in 0..32 {
            if added & (1 << j) != 0 {
                sched.assign(j + 1, t + 1);
            }
        }
    }
    sched
}

/// Optimal makespan and a witness schedule.
pub fn exact_makespan(inst: &Instance) -> Result<(usize, Schedule), OracleError> {
    exact_makespan_with(inst, TransitionRule::Maximal)
}

pub fn exact_makespan_with(inst: &Instance, rule: TransitionRule) -> Result<(usize, Schedule), OracleError> {
    let ds = Downsets::new(inst)?;
    let full = ds.full();
    let mut parent: HashMap<u32, u32> = HashMap::new();
    parent.insert(0, 0);
    let mut frontier = vec![0u32];
    let mut depth = 0;
    while !parent.contains_key(&full) {
        let mut next = Vec::new();
        for &state in &frontier {
            for succ in ds.transitions(state, rule) {
                if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(succ) {
                    e.insert(state);
                    next.push(succ);
                }
            }
        }
        frontier = next;
        depth += 1;
    }
    let mut states = vec![full];
    while *states.last().unwrap() != 0 {
        states.push(parent[states.last().unwrap()]);
    }
    states.reverse();
    let witness = schedule_from_states(&states);
    debug_assert_eq!(witness.makespan(), depth);
    Ok((depth, witness))
}

/// Independent brute force: for increasing `T`, depth-first assignment of jobs
/// in topological order to slots in `[1, T]`. Exponential; meant for `n ≤ 8`.
pub fn naive_makespan(inst: &Instance) -> usize {
    let rel = inst.closure();
    let order = rel.topological_order();
    let preds: Vec<Vec<usize>> = (1..=inst.n()).map(|j| rel.preds(j).collect()).collect();
    fn place(
        idx: usize,
        order: &[usize],
        preds: &[Vec<usize>],
        slot: &mut [usize],
        load: &mut [usize],
        m: usize,
        horizon: usize,
    ) -> bool {
        let Some(&j) = order.get(idx) else { return true };
        let earliest = preds[j - 1].iter().map(|&p| slot[p - 1]).max().unwrap_or(0) + 1;
        for t in earliest..=horizon {
            if load[t] < m {
                load[t] += 1;
                slot[j - 1] = t;
                if place(idx + 1, order, preds, slot, load, m, horizon) {
                    return true;
                }
                load[t] -= 1;
            }
        }
        false
    }
    (1..=inst.n())
        .find(|&horizon| {
            let mut slot = vec![0; inst.n()];
            let mut load = vec![0; horizon + 1];
            place(0, &order, &preds, &mut slot, &mut load, inst.m(), horizon)
        })
        .expect("n slots always suffice")
}

/// Uniformly picks a successor along some optimal path at every step, giving
/// a random optimal schedule (not uniform over all optimal schedules).
pub fn sample_optimal_schedule(inst: &Instance, rng: &mut impl RngCore) -> Result<Schedule, OracleError> {
    let ds = Downsets::new(inst)?;
    let full = ds.full();
    let mut memo: HashMap<u32, usize> = HashMap::new();
    fn remaining(ds: &Downsets, state: u32, full: u32, memo: &mut HashMap<u32, usize>) -> usize {
        if state == full {
            return 0;
        }
        if let Some(&h) = memo.get(&state) {
            return h;
        }
        let h = 1 + ds
            .transitions(state, TransitionRule::Maximal)
            .into_iter()
            .map(|s| remaining(ds, s, full, memo))
            .min()
            .expect("a nonempty downset complement always has an available job");
        memo.insert(state, h);
        h
    }
    let mut states = vec![0u32];
    let mut state = 0u32;
    while state != full {
        let h = remaining(&ds, state, full, &mut memo);
        let options: Vec<u32> = ds
            .transitions(state, TransitionRule::Maximal)
            .into_iter()
            .filter(|&s| remaining(&ds, s, full, &mut memo) + 1 == h)
            .collect();
        state = options[(rng.next_u64() % options.len() as u64) as usize];
        states.push(state);
    }
    Ok(schedule_from_states(&states))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate, Model};
    use num_rational::BigRational;
    use rand::SeedableRng;
    use rand_xoshiro::SplitMix64;

    fn diamond() -> Instance {
        Instance::new(4, 2, [(1, 2), (1, 3), (2, 4), (3, 4)]).unwrap()
    }

    #[test]
    fn examples() {
        let chain = Instance::new(3, 2, [(1, 2), (2, 3)]).unwrap();
        assert_eq!(exact_makespan(&chain).unwrap().0, 3);
        assert_eq!(exact_makespan(&Instance::new(4, 2, []).unwrap()).unwrap().0, 2);
        let (opt, witness) = exact_makespan(&diamond()).unwrap();
        assert_eq!(opt, 3);
        assert!(validate(&diamond(), &witness).is_ok());
    }

    #[test]
    fn cap_is_enforced() {
        let big = Instance::new(25, 2, []).unwrap();
        assert_eq!(exact_makespan(&big).unwrap_err(), OracleError::TooLarge { n: 25, cap: 24 });
    }

    #[test]
    fn pruning_matches_all_subsets_on_small_instances() {
        for seed in 0..150u64 {
            let n = 2 + (seed % 7) as usize;
            let m = 1 + (seed % 3) as usize;
            let p = BigRational::new(((seed % 5) as i64).into(), 5.into());
            let inst = generate(Model::Gnp, n, m, &p, seed).unwrap();
            let fast = exact_makespan_with(&inst, TransitionRule::Maximal).unwrap();
            let slow = exact_makespan_with(&inst, TransitionRule::AllSubsets).unwrap();
            assert_eq!(fast.0, slow.0, "seed {seed}");
            assert_eq!(fast.0, naive_makespan(&inst), "seed {seed}");
            assert!(validate(&inst, &fast.1).is_ok());
            assert!(validate(&inst, &slow.1).is_ok());
        }
    }

    #[test]
    fn optimum_respects_lower_and_upper_bounds() {
        for seed in 0..60u64 {
            let inst = generate(Model::Gnp, 9, 2 + (seed % 2) as usize, &BigRational::new(1.into(), 4.into()), seed).unwrap();
            let (opt, _) = exact_makespan(&inst).unwrap();
            let load = inst.n().div_ceil(inst.m());
            let chain = inst.closure().longest_chain(&inst.jobs().collect::<Vec<_>>()).len();
            assert!(opt >= load.max(chain) && opt <= inst.n());
        }
    }

    #[test]
    fn sampled_schedules_are_optimal() {
        let mut rng = SplitMix64::seed_from_u64(5);
        for seed in 0..20u64 {
            let inst = generate(Model::Gnp, 8, 3, &BigRational::new(1.into(), 3.into()), seed).unwrap();
            let (opt, _) = exact_makespan(&inst).unwrap();
            let s = sample_optimal_schedule(&inst, &mut rng).unwrap();
            assert!(validate(&inst, &s).is_ok());
            assert_eq!(s.makespan(), opt);
        }
    }
}
