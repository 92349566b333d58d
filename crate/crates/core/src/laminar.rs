//! Dyadic laminar family over `[1, T]`, support intervals, batches.
//!
//! Interval `(ℓ, p)` is `[(p−1)·T/2^ℓ + 1, p·T/2^ℓ]`. Its midpoint is the last
//! slot of its left child, so "right half" means slots after the midpoint.

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde::Serialize;

use crate::instance::Instance;

/// Slot range `[lo, hi]`, inclusive.
pub type Span = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Block {
    pub level: usize,
    /// 1-based position within the level.
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LaminarFamily {
    pub horizon: usize,
    pub depth: usize,
}

impl LaminarFamily {
    pub fn new(horizon: usize) -> Self {
        assert!(horizon.is_power_of_two(), "horizon {horizon} is not a power of two");
        LaminarFamily { horizon, depth: horizon.trailing_zeros() as usize }
    }

    pub fn root(&self) -> Block {
        Block { level: 0, index: 1 }
    }

    pub fn len(&self, b: Block) -> usize {
        self.horizon >> b.level
    }

    pub fn span(&self, b: Block) -> Span {
        let len = self.len(b);
        ((b.index - 1) * len + 1, b.index * len)
    }

    pub fn children(&self, b: Block) -> Option<(Block, Block)> {
        (b.level < self.depth).then(|| {
            (Block { level: b.level + 1, index: 2 * b.index - 1 }, Block { level: b.level + 1, index: 2 * b.index })
        })
    }

    pub fn parent(&self, b: Block) -> Option<Block> {
        (b.level > 0).then(|| Block { level: b.level - 1, index: b.index.div_ceil(2) })
    }

    /// Last slot of the left child.
    pub fn midpoint(&self, b: Block) -> usize {
        let (lo, _) = self.span(b);
        (lo + self.len(b) / 2).max(lo + 1) - 1
    }

    /// Blocks at `level` inside `within`, left to right.
    pub fn blocks_at(&self, within: Block, level: usize) -> Vec<Block> {
        assert!(level >= within.level && level <= self.depth);
        let width = 1 << (level - within.level);
        ((within.index - 1) * width + 1..=within.index * width).map(|index| Block { level, index }).collect()
    }

    /// Block at `level` containing `slot`.
    pub fn block_of(&self, level: usize, slot: usize) -> Block {
        Block { level, index: (slot - 1) / (self.horizon >> level) + 1 }
    }

    pub fn contains(&self, b: Block, s: Span) -> bool {
        let (lo, hi) = self.span(b);
        lo <= s.0 && s.1 <= hi
    }

    /// Is `inner` equal to or below `outer`?
    pub fn is_within(&self, inner: Block, outer: Block) -> bool {
        inner.level >= outer.level && (inner.index - 1) >> (inner.level - outer.level) == outer.index - 1
    }

    /// Smallest block containing `s`: descend from the root while a child
    /// still contains it.
    pub fn minimal_containing(&self, s: Span) -> Block {
        assert!(1 <= s.0 && s.0 <= s.1 && s.1 <= self.horizon, "span {s:?} outside [1, {}]", self.horizon);
        let mut b = self.root();
        while let Some((l, r)) = self.children(b) {
            if self.contains(l, s) {
                b = l;
            } else if self.contains(r, s) {
                b = r;
            } else {
                break;
            }
        }
        b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct JobWindow {
    /// Support interval `S_j`.
    pub support: Span,
    /// Fractional support interval `F_j`.
    pub fractional: Span,
    /// `F_j` when the run started.
    pub initial: Span,
    pub assigned: Block,
}

/// Per-job windows for the jobs currently in scope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JobWindows {
    pub jobs: BTreeMap<usize, JobWindow>,
}

impl JobWindows {
    /// `S_j = F_j` for every job, assigned to the minimal block.
    pub fn from_fractional(fam: &LaminarFamily, spans: impl IntoIterator<Item = (usize, Span)>) -> Self {
        let jobs = spans
            .into_iter()
            .map(|(j, f)| (j, JobWindow { support: f, fractional: f, initial: f, assigned: fam.minimal_containing(f) }))
            .collect();
        JobWindows { jobs }
    }

    pub fn restricted(&self, keep: impl Fn(usize, &JobWindow) -> bool) -> Self {
        JobWindows { jobs: self.jobs.iter().filter(|(j, w)| keep(**j, w)).map(|(j, w)| (*j, *w)).collect() }
    }

    pub fn assigned_to(&self, b: Block) -> Vec<usize> {
        self.jobs.iter().filter(|(_, w)| w.assigned == b).map(|(j, _)| *j).collect()
    }

    pub fn snapshot(&self) -> BTreeMap<usize, Block> {
        self.jobs.iter().map(|(j, w)| (*j, w.assigned)).collect()
    }
}

/// Recomputes every job's block from its `S_j`.
pub fn assign_jobs(windows: &mut JobWindows, fam: &LaminarFamily) {
    for w in windows.jobs.values_mut() {
        w.assigned = fam.minimal_containing(w.support);
    }
}

/// New `S_j` after conditioning at `level`, given the block of each job at the
/// start of the level (`snapshot`) and the fresh fractional supports.
///
/// A job that sat above `level` keeps straddling its old midpoint `m_j`: if
/// `F_j` fell into the left half, `S_j = [r_j, m_j + 1]`; into the right half,
/// `S_j = [m_j, d_j]`; otherwise `S_j = F_j`. Every other job gets `S_j = F_j`.
pub fn update_support_intervals(
    windows: &mut JobWindows,
    fam: &LaminarFamily,
    level: usize,
    snapshot: &BTreeMap<usize, Block>,
    fresh: &BTreeMap<usize, Span>,
) {
    for (j, w) in windows.jobs.iter_mut() {
        let f = fresh[j];
        w.fractional = f;
        let old = snapshot[j];
        w.support = if old.level < level {
            let mid = fam.midpoint(old);
            if f.1 <= mid {
                (f.0, mid + 1)
            } else if f.0 > mid {
                (mid, f.1)
            } else {
                f
            }
        } else {
            f
        };
    }
    assign_jobs(windows, fam);
}

/// Job counts per batch: batch `p` holds the levels `base + pk … base + (p+1)k − 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BatchView {
    pub k: usize,
    pub base_level: usize,
    pub counts: Vec<usize>,
}

impl BatchView {
    pub fn new(windows: &JobWindows, base_level: usize, k: usize, batches: usize) -> Self {
        let mut counts = vec![0; batches];
        for w in windows.jobs.values() {
            if w.assigned.level >= base_level {
                let p = (w.assigned.level - base_level) / k;
                if p < batches {
                    counts[p] += 1;
                }
            }
        }
        BatchView { k, base_level, counts }
    }

    pub fn batch_of_level(&self, level: usize) -> Option<usize> {
        (level >= self.base_level).then(|| (level - self.base_level) / self.k)
    }
}

/// `|J(B_p)| ≤ (ε / 4m) · Σ_{i<p} |J(B_i)|`, exactly.
pub fn is_good_batch(view: &BatchView, p: usize, epsilon: &BigRational, m: usize) -> bool {
    assert!(p >= 1, "batch 0 has nothing before it");
    let before: usize = view.counts[..p].iter().sum();
    let lhs = BigRational::from_integer((view.counts[p] * 4 * m).into());
    lhs <= epsilon * BigRational::from_integer(before.into())
}

/// An instance padded so that its horizon is a power of two.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Padded {
    pub instance: Instance,
    pub original_n: usize,
    pub original_horizon: usize,
    pub horizon: usize,
}

impl Padded {
    pub fn is_dummy(&self, job: usize) -> bool {
        job > self.original_n
    }

    pub fn dummies(&self) -> usize {
        self.instance.n() - self.original_n
    }
}

/// Rounds `T` up to a power of two and appends `m·(T' − T)` dummy jobs, each
/// preceded by every original job.
pub fn pad_to_power_of_two(inst: &Instance, horizon: usize) -> Padded {
    assert!(horizon >= 1);
    let padded = horizon.next_power_of_two();
    let extra = inst.m() * (padded - horizon);
    let n = inst.n() + extra;
    let mut prec = inst.prec().to_vec();
    for d in inst.n() + 1..=n {
        prec.extend(inst.jobs().map(|j| (j, d)));
    }
    let instance = Instance::from_parts_unchecked(n, inst.m(), prec);
    Padded { instance, original_n: inst.n(), original_horizon: horizon, horizon: padded }
}

/// `ε / 4m`.
pub fn epsilon_prime(epsilon: &BigRational, m: usize) -> BigRational {
    epsilon / BigRational::from_integer((4 * m).into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::exact_makespan;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn family_geometry() {
        let fam = LaminarFamily::new(8);
        assert_eq!(fam.depth, 3);
        assert_eq!(fam.span(Block { level: 1, index: 2 }), (5, 8));
        assert_eq!(fam.midpoint(fam.root()), 4);
        assert_eq!(fam.midpoint(Block { level: 1, index: 2 }), 6);
        assert_eq!(fam.children(Block { level: 1, index: 2 }), Some((Block { level: 2, index: 3 }, Block { level: 2, index: 4 })));
        assert_eq!(fam.blocks_at(Block { level: 1, index: 2 }, 3).len(), 4);
        for level in 0..=3 {
            let blocks = fam.blocks_at(fam.root(), level);
            assert_eq!(blocks.len(), 1 << level);
            assert!(blocks.iter().all(|&b| fam.len(b) == 8 >> level));
        }
        assert!(fam.is_within(Block { level: 3, index: 6 }, Block { level: 1, index: 2 }));
        assert!(!fam.is_within(Block { level: 3, index: 4 }, Block { level: 1, index: 2 }));
    }

    #[test]
    fn minimal_containing_examples() {
        let fam = LaminarFamily::new(8);
        assert_eq!(fam.minimal_containing((3, 3)), Block { level: 3, index: 3 });
        assert_eq!(fam.minimal_containing((4, 5)), fam.root());
        assert_eq!(fam.minimal_containing((1, 4)), Block { level: 1, index: 1 });
    }

    #[test]
    fn support_update_rules() {
        let fam = LaminarFamily::new(8);
        let mut w = JobWindows::from_fractional(&fam, [(1, (1, 8)), (2, (3, 6)), (3, (4, 5))]);
        let snap = w.snapshot();
        let fresh: BTreeMap<usize, Span> = [(1, (2, 3)), (2, (5, 6)), (3, (4, 5))].into_iter().collect();
        update_support_intervals(&mut w, &fam, 2, &snap, &fresh);
        assert_eq!(w.jobs[&1].support, (2, 5));
        assert_eq!(w.jobs[&2].support, (4, 6));
        assert_eq!(w.jobs[&3].support, (4, 5));
        assert!(w.jobs.values().all(|x| x.assigned == fam.root()));
        // A job at the conditioning level itself tracks F_j.
        let mut w = JobWindows::from_fractional(&fam, [(4, (1, 4))]);
        let snap = w.snapshot();
        update_support_intervals(&mut w, &fam, 1, &snap, &[(4, (3, 4))].into_iter().collect());
        assert_eq!(w.jobs[&4].support, (3, 4));
        assert_eq!(w.jobs[&4].assigned, Block { level: 2, index: 2 });
    }

    #[test]
    fn good_batch_examples() {
        let view = |c: Vec<usize>| BatchView { k: 1, base_level: 0, counts: c };
        // ε/4m = 1/8 with ε = 1, m = 2.
        assert!(is_good_batch(&view(vec![100, 12]), 1, &q(1, 1), 2));
        assert!(!is_good_batch(&view(vec![100, 13]), 1, &q(1, 1), 2));
        assert!(is_good_batch(&view(vec![0, 0]), 1, &q(1, 2), 3));
    }

    #[test]
    fn padding() {
        let inst = Instance::new(5, 2, [(1, 2)]).unwrap();
        let p = pad_to_power_of_two(&inst, 8);
        assert_eq!((p.horizon, p.dummies()), (8, 0));
        let p = pad_to_power_of_two(&inst, 5);
        assert_eq!((p.horizon, p.dummies()), (8, 6));
        assert!(p.is_dummy(6) && !p.is_dummy(5));
        for (n, m, edges) in [(5usize, 2usize, vec![(1, 2), (2, 3)]), (3, 1, vec![]), (6, 3, vec![(1, 4), (2, 4)])] {
            let inst = Instance::new(n, m, edges).unwrap();
            let (opt, _) = exact_makespan(&inst).unwrap();
            let padded = pad_to_power_of_two(&inst, opt);
            assert_eq!(exact_makespan(&padded.instance).unwrap().0, padded.horizon);
        }
    }
}
