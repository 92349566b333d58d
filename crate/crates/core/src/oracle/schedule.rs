use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::instance::Instance;

/// Job → slot map (1-based slots) plus the set of discarded jobs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub slots: BTreeMap<usize, usize>,
    #[serde(default)]
    pub discarded: BTreeSet<usize>,
}

impl Schedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_slots(slots: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Schedule { slots: slots.into_iter().collect(), discarded: BTreeSet::new() }
    }

    pub fn makespan(&self) -> usize {
        self.slots.values().copied().max().unwrap_or(0)
    }

    pub fn slot(&self, job: usize) -> Option<usize> {
        self.slots.get(&job).copied()
    }

    pub fn assign(&mut self, job: usize, slot: usize) {
        self.discarded.remove(&job);
        self.slots.insert(job, slot);
    }

    pub fn discard(&mut self, job: usize) {
        self.slots.remove(&job);
        self.discarded.insert(job);
    }

    pub fn is_complete(&self, n: usize) -> bool {
        self.discarded.is_empty() && self.slots.len() == n
    }

    /// Number of jobs per slot, index 0 unused.
    pub fn load(&self) -> Vec<usize> {
        let mut load = vec![0; self.makespan() + 1];
        for &t in self.slots.values() {
            load[t] += 1;
        }
        load
    }

    /// Jobs at `slot`, ascending.
    pub fn jobs_at(&self, slot: usize) -> Vec<usize> {
        self.slots.iter().filter(|&(_, &t)| t == slot).map(|(&j, _)| j).collect()
    }

    /// Merges `other` into `self`. Callers guarantee disjoint job sets.
    pub fn absorb(&mut self, other: Schedule) {
        for (j, t) in other.slots {
            self.slots.insert(j, t);
        }
        self.discarded.extend(other.discarded);
    }

    /// Slot contents by time, for display: `[[jobs at 1], [jobs at 2], …]`.
    pub fn by_slot(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.makespan()];
        for (&j, &t) in &self.slots {
            out[t - 1].push(j);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `before ≺ after` but `after` is not strictly later.
    Precedence { before: usize, after: usize, slot_before: usize, slot_after: usize },
    Capacity { slot: usize, jobs: usize, machines: usize },
    ScheduledAndDiscarded { job: usize },
    Missing { job: usize },
    UnknownJob { job: usize },
    ZeroSlot { job: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Precedence { before, after, slot_before, slot_after } => write!(
                f,
                "precedence ({before},{after}): slot {slot_before} is not before slot {slot_after}"
            ),
            Violation::Capacity { slot, jobs, machines } => {
                write!(f, "capacity: {jobs} jobs at slot {slot} on {machines} machines")
            }
            Violation::ScheduledAndDiscarded { job } => write!(f, "job {job} both scheduled and discarded"),
            Violation::Missing { job } => write!(f, "job {job} neither scheduled nor discarded"),
            Violation::UnknownJob { job } => write!(f, "job {job} not in the instance"),
            Violation::ZeroSlot { job } => write!(f, "job {job} at slot 0"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks capacity, precedence (over the transitive closure) and the
/// scheduled/discarded partition. Every job must be accounted for.
pub fn validate(inst: &Instance, sched: &Schedule) -> ValidationReport {
    let mut report = validate_partial(inst, sched);
    for j in inst.jobs() {
        if !sched.slots.contains_key(&j) && !sched.discarded.contains(&j) {
            report.violations.push(Violation::Missing { job: j });
        }
    }
    report
}

/// Like [`validate`] but jobs absent from both maps are allowed.
pub fn validate_partial(inst: &Instance, sched: &Schedule) -> ValidationReport {
    let mut violations = Vec::new();
    for &j in sched.slots.keys().chain(sched.discarded.iter()) {
        if j == 0 || j > inst.n() {
            violations.push(Violation::UnknownJob { job: j });
        }
    }
    for (&j, &t) in &sched.slots {
        if t == 0 {
            violations.push(Violation::ZeroSlot { job: j });
        }
        if sched.discarded.contains(&j) {
            violations.push(Violation::ScheduledAndDiscarded { job: j });
        }
    }
    for (t, &count) in sched.load().iter().enumerate().skip(1) {
        if count > inst.m() {
            violations.push(Violation::Capacity { slot: t, jobs: count, machines: inst.m() });
        }
    }
    if violations.iter().all(|v| !matches!(v, Violation::UnknownJob { .. })) {
        let rel = inst.closure();
        for (&u, &tu) in &sched.slots {
            for (&v, &tv) in &sched.slots {
                if rel.precedes(u, v) && tu >= tv {
                    violations.push(Violation::Precedence { before: u, after: v, slot_before: tu, slot_after: tv });
                }
            }
        }
    }
    ValidationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diamond() -> Instance {
        Instance::new(4, 2, [(1, 2), (1, 3), (2, 4), (3, 4)]).unwrap()
    }

    #[test]
    fn diamond_witness_is_valid() {
        let s = Schedule::from_slots([(1, 1), (2, 2), (3, 2), (4, 3)]);
        assert!(validate(&diamond(), &s).is_ok());
        assert_eq!(s.makespan(), 3);
    }

    #[test]
    fn same_slot_precedence_is_reported() {
        let inst = Instance::new(2, 2, [(1, 2)]).unwrap();
        let report = validate(&inst, &Schedule::from_slots([(1, 1), (2, 1)]));
        assert_eq!(
            report.violations,
            vec![Violation::Precedence { before: 1, after: 2, slot_before: 1, slot_after: 1 }]
        );
    }

    #[test]
    fn capacity_overflow_is_reported() {
        let inst = Instance::new(3, 2, []).unwrap();
        let report = validate(&inst, &Schedule::from_slots([(1, 1), (2, 1), (3, 1)]));
        assert_eq!(report.violations, vec![Violation::Capacity { slot: 1, jobs: 3, machines: 2 }]);
    }

    #[test]
    fn partition_violations() {
        let inst = Instance::new(3, 2, []).unwrap();
        let mut s = Schedule::from_slots([(1, 1)]);
        s.discarded.insert(1);
        let report = validate(&inst, &s);
        assert!(report.violations.contains(&Violation::ScheduledAndDiscarded { job: 1 }));
        assert!(report.violations.contains(&Violation::Missing { job: 2 }));
        assert!(validate_partial(&inst, &Schedule::from_slots([(2, 1)])).is_ok());
    }

    #[test]
    fn empty_schedule_has_zero_makespan() {
        assert_eq!(Schedule::new().makespan(), 0);
    }

    #[test]
    fn json_shape() {
        let s = Schedule::from_slots([(1, 1), (2, 2)]);
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"{"slots":{"1":1,"2":2},"discarded":[]}"#);
        let back: Schedule = serde_json::from_str(r#"{"slots":{"1":1,"2":2}}"#).unwrap();
        assert_eq!(back, s);
    }
}
