use std::collections::BTreeMap;

use serde::Serialize;

use crate::laminar::Block;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditKind {
    DiscardTwice,
    ChargeTwice,
    /// More than `m/δ` conditionings on one interval in step 1.
    IntervalConditionings,
    /// More than `2^{Ck}·m/δ` conditionings in one node's step 1.
    NodeConditionings,
    /// A chain head without support in the right half, or a chain member
    /// left outside the right half afterwards.
    ChainHead,
    /// Longest chain among top jobs above `C·k·δ·|I|`.
    TopChain,
    /// `j ≺ i` with `i` below `I(j)_left` or `j` below `I(i)_right`.
    CrossAssignment,
    /// A bottom job inside the window of a related top job.
    WindowCrossing,
    WindowMonotone,
    WindowConnectivity,
    /// A job assigned above the current level moved during conditioning.
    AssignmentMoved,
    /// `F_j ⊆ S_j ⊆ F_j^{(r)}` broken.
    SupportSandwich,
    /// Discarded middle batch larger than `ε'·|J_top|`.
    MiddleBatch,
    /// Type-2 discards above `Σ retained / (R·ε')`.
    TopBatches,
    BaseCaseConditionings,
    /// A node returned a schedule that is infeasible or leaves its interval.
    NodeSchedule,
    /// A scoped job neither scheduled nor discarded by its node.
    LostJob,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditEntry {
    pub kind: AuditKind,
    pub node: Block,
    pub detail: String,
}

/// Collected invariant failures. A clean run has none.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Audit {
    pub entries: Vec<AuditEntry>,
}

impl Audit {
    pub fn push(&mut self, kind: AuditKind, node: Block, detail: impl Into<String>) {
        self.entries.push(AuditEntry { kind, node, detail: detail.into() });
    }

    pub fn is_clean(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count(&self, kind: AuditKind) -> usize {
        self.entries.iter().filter(|e| e.kind == kind).count()
    }

    pub fn by_kind(&self) -> BTreeMap<AuditKind, usize> {
        let mut out = BTreeMap::new();
        for e in &self.entries {
            *out.entry(e.kind).or_insert(0) += 1;
        }
        out
    }

    pub fn merge(&mut self, other: Audit) {
        self.entries.extend(other.entries);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscardKind {
    Type1,
    Type2,
}

/// Which node discarded or charged each job.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DiscardLedger {
    pub type1: BTreeMap<usize, Block>,
    pub type2: BTreeMap<usize, Block>,
    pub charges: BTreeMap<usize, usize>,
    pub charged_at: BTreeMap<usize, Block>,
}

impl DiscardLedger {
    pub fn is_discarded(&self, job: usize) -> bool {
        self.type1.contains_key(&job) || self.type2.contains_key(&job)
    }

    pub fn discard(&mut self, kind: DiscardKind, job: usize, node: Block, audit: &mut Audit) {
        if self.is_discarded(job) {
            audit.push(AuditKind::DiscardTwice, node, format!("job {job}"));
        }
        match kind {
            DiscardKind::Type1 => self.type1.insert(job, node),
            DiscardKind::Type2 => self.type2.insert(job, node),
        };
    }

    pub fn charge(&mut self, job: usize, node: Block, audit: &mut Audit) {
        let c = self.charges.entry(job).or_insert(0);
        *c += 1;
        if *c > 1 {
            audit.push(AuditKind::ChargeTwice, node, format!("job {job}"));
        }
        self.charged_at.insert(job, node);
    }

    /// Folds a child's ledger in, re-checking both once-only rules.
    pub fn merge(&mut self, other: DiscardLedger, audit: &mut Audit) {
        for (j, b) in other.type1 {
            self.discard(DiscardKind::Type1, j, b, audit);
        }
        for (j, b) in other.type2 {
            self.discard(DiscardKind::Type2, j, b, audit);
        }
        for (j, c) in other.charges {
            let node = other.charged_at[&j];
            for _ in 0..c {
                self.charge(j, node, audit);
            }
        }
    }

    pub fn discarded(&self) -> impl Iterator<Item = usize> + '_ {
        self.type1.keys().chain(self.type2.keys()).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn once_only_rules() {
        let b = Block { level: 0, index: 1 };
        let mut audit = Audit::default();
        let mut a = DiscardLedger::default();
        a.discard(DiscardKind::Type1, 3, b, &mut audit);
        a.charge(4, b, &mut audit);
        assert!(audit.is_clean());
        let mut other = DiscardLedger::default();
        other.discard(DiscardKind::Type2, 3, b, &mut audit);
        other.charge(4, b, &mut audit);
        other.charge(5, b, &mut audit);
        a.merge(other, &mut audit);
        assert_eq!(audit.count(AuditKind::DiscardTwice), 1);
        assert_eq!(audit.count(AuditKind::ChargeTwice), 1);
        assert_eq!(a.charges[&5], 1);
    }
}
