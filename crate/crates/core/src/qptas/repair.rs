use crate::instance::Instance;
use crate::oracle::Schedule;

/// Turns a partial schedule into a complete one: each discarded job, in
/// topological order, gets a fresh slot of its own right after its latest
/// predecessor, and everything later shifts by one.
pub fn repair_discarded(partial: &Schedule, inst: &Instance) -> Schedule {
    let rel = inst.closure();
    let mut slots = partial.slots.clone();
    for j in rel.topological_order() {
        if !partial.discarded.contains(&j) {
            continue;
        }
        let t = rel.preds(j).filter_map(|p| slots.get(&p).copied()).max().unwrap_or(0);
        for s in slots.values_mut() {
            if *s > t {
                *s += 1;
            }
        }
        slots.insert(j, t + 1);
    }
    Schedule::from_slots(slots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::validate;

    #[test]
    fn identity_without_discards() {
        let inst = Instance::new(2, 1, [(1, 2)]).unwrap();
        let s = Schedule::from_slots([(1, 1), (2, 2)]);
        assert_eq!(repair_discarded(&s, &inst), s);
    }

    #[test]
    fn free_job_goes_first() {
        let inst = Instance::new(3, 1, [(1, 2)]).unwrap();
        let mut s = Schedule::from_slots([(1, 1), (2, 2)]);
        s.discard(3);
        let out = repair_discarded(&s, &inst);
        assert_eq!(out, Schedule::from_slots([(3, 1), (1, 2), (2, 3)]));
        assert_eq!(out.makespan(), s.makespan() + 1);
    }

    #[test]
    fn discarded_chain_in_order() {
        // Chain 1 ≺ 2 ≺ 3 ≺ 4 with the middle two discarded.
        let inst = Instance::new(4, 2, [(1, 2), (2, 3), (3, 4)]).unwrap();
        let mut s = Schedule::from_slots([(1, 1), (4, 4)]);
        s.discard(3);
        s.discard(2);
        let out = repair_discarded(&s, &inst);
        assert!(validate(&inst, &out).is_ok());
        assert!(out.makespan() <= 4 + 2);
    }
}
