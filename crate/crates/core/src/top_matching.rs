//! Re-inserting the top jobs of a type-1 node into the gaps of the schedule
//! built by its children.
//!
//! Each top job gets a window made of whole blocks at the recursion level
//! `qk`: its support interval with the first and last touched block chopped
//! off. Jobs with an empty window are dropped (phase A). The rest are matched
//! to free machine slots inside their windows (phase B); unmatched jobs are
//! dropped. Phase C then places the matched jobs greedily by deadline so that
//! precedences among top jobs hold, dropping any job that no longer fits.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::instance::PrecRelation;
use crate::laminar::{Block, JobWindows, LaminarFamily, Span};
use crate::oracle::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Window {
    /// `r_j`.
    pub lo: usize,
    /// `d_j`.
    pub hi: usize,
    /// First and last block index at the recursion level touched by `S_j`.
    pub first_block: usize,
    pub last_block: usize,
    /// Nothing survived the chopping; `lo = hi = m_j`.
    pub empty: bool,
}

impl Window {
    pub fn slots(&self) -> std::ops::RangeInclusive<usize> {
        self.lo..=self.hi
    }
}

/// Extends a block-aligned span by one block at `level` on each side, clipped
/// to `within`.
pub fn ext(fam: &LaminarFamily, level: usize, within: Block, span: Span) -> Span {
    let (lo, hi) = fam.span(within);
    let len = fam.horizon >> level;
    (span.0.saturating_sub(len).max(lo), (span.1 + len).min(hi))
}

pub fn compute_windows(fam: &LaminarFamily, windows: &JobWindows, top: &[usize], level: usize) -> BTreeMap<usize, Window> {
    top.iter()
        .map(|&j| {
            let w = &windows.jobs[&j];
            let first = fam.block_of(level, w.support.0).index;
            let last = fam.block_of(level, w.support.1).index;
            let win = if last <= first + 1 {
                let mid = fam.midpoint(w.assigned);
                Window { lo: mid, hi: mid, first_block: first, last_block: last, empty: true }
            } else {
                let lo = fam.span(Block { level, index: first + 1 }).0;
                let hi = fam.span(Block { level, index: last - 1 }).1;
                Window { lo, hi, first_block: first, last_block: last, empty: false }
            };
            (j, win)
        })
        .collect()
}

/// Free machine slots per time slot of `span`: `m` minus the jobs already there.
pub fn slot_capacities(sched: &Schedule, span: Span, m: usize) -> BTreeMap<usize, usize> {
    let load = sched.load();
    (span.0..=span.1).map(|t| (t, m - load.get(t).copied().unwrap_or(0))).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Matching {
    pub matched: BTreeMap<usize, usize>,
    pub unmatched: Vec<usize>,
}

/// Maximum assignment of jobs to slots in their allowed sets, slot `t` used at
/// most `caps[t]` times. Augmenting paths, jobs tried in the given order.
pub fn capacitated_matching(jobs: &[(usize, Vec<usize>)], caps: &BTreeMap<usize, usize>) -> Matching {
    let mut users: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut slot_of: Vec<Option<usize>> = vec![None; jobs.len()];

    fn augment(
        j: usize,
        jobs: &[(usize, Vec<usize>)],
        caps: &BTreeMap<usize, usize>,
        users: &mut HashMap<usize, Vec<usize>>,
        slot_of: &mut [Option<usize>],
        seen: &mut BTreeSet<usize>,
    ) -> bool {
        for &t in &jobs[j].1 {
            let cap = caps.get(&t).copied().unwrap_or(0);
            if cap == 0 || !seen.insert(t) {
                continue;
            }
            let here = users.entry(t).or_default();
            if here.len() < cap {
                here.push(j);
                slot_of[j] = Some(t);
                return true;
            }
            for other in here.clone() {
                if augment(other, jobs, caps, users, slot_of, seen) {
                    let here = users.get_mut(&t).expect("slot in use");
                    let pos = here.iter().position(|&u| u == other).expect("user present");
                    here[pos] = j;
                    slot_of[j] = Some(t);
                    return true;
                }
            }
        }
        false
    }

    for j in 0..jobs.len() {
        let mut seen = BTreeSet::new();
        augment(j, jobs, caps, &mut users, &mut slot_of, &mut seen);
    }
    let mut matched = BTreeMap::new();
    let mut unmatched = Vec::new();
    for (j, (id, _)) in jobs.iter().enumerate() {
        match slot_of[j] {
            Some(t) => {
                matched.insert(*id, t);
            }
            None => unmatched.push(*id),
        }
    }
    Matching { matched, unmatched }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindowViolation {
    /// A bottom job related to a top job sits inside (or on the wrong side of)
    /// the top job's window.
    CrossPrecedence { top: usize, bottom: usize, bottom_slot: usize, window: (usize, usize) },
    /// `j ≺ i` among top jobs but the windows are not ordered.
    NotMonotone { before: usize, after: usize, before_window: (usize, usize), after_window: (usize, usize) },
    /// Top jobs of one block whose windows do not form one connected run.
    Disconnected { block: Block },
}

/// For `j` top and `i` scheduled below with `j ≺ i`, `σ̃(i) > d_j`; with
/// `i ≺ j`, `σ̃(i) < r_j`.
pub fn condition3_violations(
    rel: &PrecRelation,
    sigma: &Schedule,
    windows: &BTreeMap<usize, Window>,
) -> Vec<WindowViolation> {
    let mut out = Vec::new();
    for (&j, w) in windows.iter().filter(|(_, w)| !w.empty) {
        for (&i, &t) in &sigma.slots {
            let bad = (rel.precedes(j, i) && t <= w.hi) || (rel.precedes(i, j) && t >= w.lo);
            if bad {
                out.push(WindowViolation::CrossPrecedence { top: j, bottom: i, bottom_slot: t, window: (w.lo, w.hi) });
            }
        }
    }
    out
}

/// `j ≺ i` with both windows nonempty must give `r_j ≤ r_i` and `d_j ≤ d_i`.
pub fn monotonicity_violations(rel: &PrecRelation, windows: &BTreeMap<usize, Window>) -> Vec<WindowViolation> {
    let mut out = Vec::new();
    for (&j, wj) in windows.iter().filter(|(_, w)| !w.empty) {
        for (&i, wi) in windows.iter().filter(|(_, w)| !w.empty) {
            if rel.precedes(j, i) && (wj.lo > wi.lo || wj.hi > wi.hi) {
                out.push(WindowViolation::NotMonotone {
                    before: j,
                    after: i,
                    before_window: (wj.lo, wj.hi),
                    after_window: (wi.lo, wi.hi),
                });
            }
        }
    }
    out
}

/// The nonempty windows of the top jobs assigned to each block must cover one
/// connected run of slots.
pub fn connectivity_violations(assigned: &BTreeMap<usize, Block>, windows: &BTreeMap<usize, Window>) -> Vec<WindowViolation> {
    let mut by_block: BTreeMap<Block, Vec<Span>> = BTreeMap::new();
    for (j, w) in windows.iter().filter(|(_, w)| !w.empty) {
        by_block.entry(assigned[j]).or_default().push((w.lo, w.hi));
    }
    let mut out = Vec::new();
    for (block, mut spans) in by_block {
        spans.sort_unstable();
        let mut reach = spans[0].1;
        for s in &spans[1..] {
            if s.0 > reach + 1 {
                out.push(WindowViolation::Disconnected { block });
                break;
            }
            reach = reach.max(s.1);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InsertStats {
    pub top_jobs: usize,
    pub empty_window: usize,
    pub unmatched: usize,
    pub dropped_in_ordering: usize,
    pub placed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Insertion {
    pub schedule: Schedule,
    pub discarded: Vec<usize>,
    pub stats: InsertStats,
}

/// Places `windows`' jobs into the free capacity of `sigma` (whose slots all
/// lie in `span`). Cross precedences with `sigma` are the caller's contract
/// (see [`condition3_violations`]).
pub fn insert_top_jobs(
    rel: &PrecRelation,
    sigma: &Schedule,
    windows: &BTreeMap<usize, Window>,
    span: Span,
    m: usize,
) -> Insertion {
    let caps = slot_capacities(sigma, span, m);
    let mut discarded: Vec<usize> = windows.iter().filter(|(_, w)| w.empty).map(|(j, _)| *j).collect();
    let empty_window = discarded.len();

    let candidates: Vec<(usize, Vec<usize>)> =
        windows.iter().filter(|(_, w)| !w.empty).map(|(j, w)| (*j, w.slots().collect())).collect();
    let matching = capacitated_matching(&candidates, &caps);
    discarded.extend(&matching.unmatched);

    let mut order: Vec<usize> = matching.matched.keys().copied().collect();
    order.sort_by_key(|j| (windows[j].hi, windows[j].lo, *j));
    let mut used: BTreeMap<usize, usize> = BTreeMap::new();
    let mut placed: BTreeMap<usize, usize> = BTreeMap::new();
    let mut dropped_in_ordering = 0;
    for j in order {
        let w = windows[&j];
        let after = placed.iter().filter(|(p, _)| rel.precedes(**p, j)).map(|(_, t)| *t).max().unwrap_or(0);
        let before = placed.iter().filter(|(s, _)| rel.precedes(j, **s)).map(|(_, t)| *t).min().unwrap_or(usize::MAX);
        let slot = w.slots().find(|&t| t > after && t < before && used.get(&t).copied().unwrap_or(0) < caps[&t]);
        match slot {
            Some(t) => {
                *used.entry(t).or_insert(0) += 1;
                placed.insert(j, t);
            }
            None => {
                dropped_in_ordering += 1;
                discarded.push(j);
            }
        }
    }

    let mut schedule = sigma.clone();
    for (&j, &t) in &placed {
        schedule.assign(j, t);
    }
    discarded.sort_unstable();
    let stats = InsertStats {
        top_jobs: windows.len(),
        empty_window,
        unmatched: matching.unmatched.len(),
        dropped_in_ordering,
        placed: placed.len(),
    };
    Insertion { schedule, discarded, stats }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Instance;
    use crate::laminar::JobWindow;
    use rand::{Rng, SeedableRng};
    use rand_xoshiro::SplitMix64;

    fn hall_deficiency(jobs: &[(usize, Vec<usize>)], caps: &BTreeMap<usize, usize>) -> usize {
        (0u32..1 << jobs.len())
            .map(|mask| {
                let chosen: Vec<usize> = (0..jobs.len()).filter(|b| mask & (1 << b) != 0).collect();
                let nbhd: BTreeSet<usize> = chosen.iter().flat_map(|&b| jobs[b].1.iter().copied()).collect();
                let room: usize = nbhd.iter().map(|t| caps.get(t).copied().unwrap_or(0)).sum();
                chosen.len().saturating_sub(room)
            })
            .max()
            .unwrap_or(0)
    }

    #[test]
    fn ext_examples() {
        let fam = LaminarFamily::new(8);
        let root = fam.root();
        assert_eq!(ext(&fam, 3, root, (2, 3)), (1, 4));
        assert_eq!(ext(&fam, 3, root, (1, 1)), (1, 2));
        assert_eq!(ext(&fam, 3, root, (1, 8)), (1, 8));
    }

    #[test]
    fn window_examples() {
        let fam = LaminarFamily::new(8);
        let mk = |s: Span| JobWindows {
            jobs: [(1, JobWindow { support: s, fractional: s, initial: s, assigned: fam.minimal_containing(s) })].into_iter().collect(),
        };
        let w = compute_windows(&fam, &mk((2, 5)), &[1], 3);
        assert_eq!((w[&1].lo, w[&1].hi, w[&1].empty), (3, 4, false));
        let w = compute_windows(&fam, &mk((5, 5)), &[1], 3);
        assert!(w[&1].empty);
        assert_eq!((w[&1].lo, w[&1].hi), (5, 5));
        let w = compute_windows(&fam, &mk((2, 3)), &[1], 3);
        assert!(w[&1].empty);
        // Level 2 blocks have two slots each.
        let w = compute_windows(&fam, &mk((1, 8)), &[1], 2);
        assert_eq!((w[&1].lo, w[&1].hi), (3, 6));
    }

    #[test]
    fn matching_examples() {
        let caps: BTreeMap<usize, usize> = [(1, 1), (2, 1)].into_iter().collect();
        let m = capacitated_matching(&[(1, vec![1]), (2, vec![1])], &caps);
        assert_eq!((m.matched.len(), m.unmatched.len()), (1, 1));
        let m = capacitated_matching(&[(1, vec![1]), (2, vec![2])], &caps);
        assert!(m.unmatched.is_empty());
        // Needs an augmenting path: job 1 first takes slot 1, job 2 only fits there.
        let m = capacitated_matching(&[(1, vec![1, 2]), (2, vec![1])], &caps);
        assert!(m.unmatched.is_empty());
        assert_eq!(m.matched[&2], 1);
    }

    #[test]
    fn matching_agrees_with_hall() {
        let mut rng = SplitMix64::seed_from_u64(9);
        for _ in 0..200 {
            let slots = rng.gen_range(1..=6);
            let caps: BTreeMap<usize, usize> = (1..=slots).map(|t| (t, rng.gen_range(0..=2))).collect();
            let jobs: Vec<(usize, Vec<usize>)> = (1..=rng.gen_range(1..=6))
                .map(|j| (j, (1..=slots).filter(|_| rng.gen_bool(0.4)).collect()))
                .collect();
            let m = capacitated_matching(&jobs, &caps);
            assert_eq!(m.unmatched.len(), hall_deficiency(&jobs, &caps));
            for (j, t) in &m.matched {
                assert!(jobs[j - 1].1.contains(t));
            }
            for (t, c) in &caps {
                assert!(m.matched.values().filter(|s| *s == t).count() <= *c);
            }
        }
    }

    fn win(lo: usize, hi: usize) -> Window {
        Window { lo, hi, first_block: 0, last_block: 0, empty: false }
    }

    #[test]
    fn insertion_examples() {
        let inst = Instance::new(3, 2, []).unwrap();
        let sigma = Schedule::from_slots([(3, 1)]);
        let none = insert_top_jobs(inst.closure(), &sigma, &BTreeMap::new(), (1, 4), 2);
        assert_eq!(none.schedule, sigma);
        assert!(none.discarded.is_empty());
        let windows: BTreeMap<usize, Window> = [(1, win(1, 2)), (2, win(1, 2))].into_iter().collect();
        let out = insert_top_jobs(inst.closure(), &sigma, &windows, (1, 4), 2);
        assert!(out.discarded.is_empty());
        assert_eq!(out.schedule.slot(1), Some(1));
        assert_eq!(out.schedule.slot(2), Some(2));
    }

    #[test]
    fn ordering_phase_fixes_chain_order() {
        // 2 ≺ 1 with identical windows: matching alone may swap them.
        let inst = Instance::new(2, 1, [(2, 1)]).unwrap();
        let windows: BTreeMap<usize, Window> = [(1, win(1, 2)), (2, win(1, 2))].into_iter().collect();
        let out = insert_top_jobs(inst.closure(), &Schedule::new(), &windows, (1, 2), 1);
        assert_eq!(out.stats.placed + out.discarded.len(), 2);
        assert!(crate::oracle::validate_partial(&inst, &out.schedule).is_ok());
        let inst = Instance::new(2, 1, [(1, 2)]).unwrap();
        let out = insert_top_jobs(inst.closure(), &Schedule::new(), &windows, (1, 2), 1);
        assert_eq!(out.schedule, Schedule::from_slots([(1, 1), (2, 2)]));
    }

    #[test]
    fn window_checks() {
        let inst = Instance::new(3, 2, [(1, 2), (1, 3)]).unwrap();
        let windows: BTreeMap<usize, Window> = [(1, win(3, 4)), (2, win(1, 2))].into_iter().collect();
        assert_eq!(monotonicity_violations(inst.closure(), &windows).len(), 1);
        let sigma = Schedule::from_slots([(3, 4)]);
        assert_eq!(condition3_violations(inst.closure(), &sigma, &windows).len(), 1);
        let assigned: BTreeMap<usize, Block> = [(1, Block { level: 0, index: 1 }), (2, Block { level: 0, index: 1 })].into_iter().collect();
        let far: BTreeMap<usize, Window> = [(1, win(1, 1)), (2, win(4, 4))].into_iter().collect();
        assert_eq!(connectivity_violations(&assigned, &far).len(), 1);
        assert!(connectivity_violations(&assigned, &windows).is_empty());
    }
}
