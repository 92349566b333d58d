//! Graham list scheduling and the classical lower bounds.

use serde::Serialize;

use crate::instance::Instance;
use crate::oracle::Schedule;

/// Greedy list scheduling: at each slot, fill free machines with available jobs
/// (all predecessors finished strictly earlier), lowest id first.
pub fn list_schedule(inst: &Instance) -> Schedule {
    let n = inst.n();
    let mut preds_left = vec![0usize; n + 1];
    let mut succs = vec![Vec::new(); n + 1];
    for &(u, v) in inst.prec() {
        preds_left[v] += 1;
        succs[u].push(v);
    }
    let mut sched = Schedule::new();
    let mut ready: Vec<usize> = (1..=n).filter(|&j| preds_left[j] == 0).collect();
    let mut t = 0;
    while sched.slots.len() < n {
        t += 1;
        ready.sort_unstable();
        let batch: Vec<usize> = ready.drain(..ready.len().min(inst.m())).collect();
        for &j in &batch {
            sched.assign(j, t);
        }
        // Released jobs become available from the next slot on.
        for &j in &batch {
            for &v in &succs[j] {
                preds_left[v] -= 1;
                if preds_left[v] == 0 {
                    ready.push(v);
                }
            }
        }
    }
    sched
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LowerBounds {
    /// `⌈n/m⌉`.
    pub load: usize,
    /// Longest chain length.
    pub chain: usize,
}

impl LowerBounds {
    pub fn best(&self) -> usize {
        self.load.max(self.chain)
    }
}

pub fn lower_bounds(inst: &Instance) -> LowerBounds {
    let all: Vec<usize> = inst.jobs().collect();
    LowerBounds { load: inst.n().div_ceil(inst.m()), chain: inst.closure().longest_chain(&all).len() }
}

/// Busy slots (all `m` machines used) and non-busy slots of a schedule.
pub fn busy_profile(inst: &Instance, sched: &Schedule) -> (usize, usize) {
    let load = sched.load();
    let busy = load.iter().skip(1).filter(|&&c| c == inst.m()).count();
    (busy, sched.makespan() - busy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{exact_makespan, validate};

    #[test]
    fn diamond_list_schedule() {
        let inst = Instance::new(4, 2, [(1, 2), (1, 3), (2, 4), (3, 4)]).unwrap();
        let s = list_schedule(&inst);
        assert_eq!(s, Schedule::from_slots([(1, 1), (2, 2), (3, 2), (4, 3)]));
        assert_eq!(s.makespan(), 3);
    }

    #[test]
    fn lowest_id_tie_break_is_suboptimal() {
        let inst = Instance::new(6, 2, [(4, 5), (5, 6)]).unwrap();
        let s = list_schedule(&inst);
        assert_eq!(s, Schedule::from_slots([(1, 1), (2, 1), (3, 2), (4, 2), (5, 3), (6, 4)]));
        assert_eq!(s.makespan(), 4);
        assert_eq!(exact_makespan(&inst).unwrap().0, 3);
    }

    #[test]
    fn independent_jobs() {
        assert_eq!(list_schedule(&Instance::new(5, 2, []).unwrap()).makespan(), 3);
    }

    #[test]
    fn lower_bound_examples() {
        let chain = Instance::new(4, 2, [(1, 2), (2, 3), (3, 4)]).unwrap();
        assert_eq!(lower_bounds(&chain), LowerBounds { load: 2, chain: 4 });
        assert_eq!(lower_bounds(&Instance::new(4, 2, []).unwrap()), LowerBounds { load: 2, chain: 1 });
        let diamond = Instance::new(4, 2, [(1, 2), (1, 3), (2, 4), (3, 4)]).unwrap();
        assert_eq!(lower_bounds(&diamond), LowerBounds { load: 2, chain: 3 });
    }

    #[test]
    fn busy_profile_accounting() {
        let inst = Instance::new(6, 2, [(4, 5), (5, 6)]).unwrap();
        let s = list_schedule(&inst);
        assert!(validate(&inst, &s).is_ok());
        let (busy, idle) = busy_profile(&inst, &s);
        assert_eq!((busy, idle), (2, 2));
        let lb = lower_bounds(&inst);
        assert!(busy <= lb.load && idle <= lb.chain);
    }
}
