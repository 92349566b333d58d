//! One call of the recursive rounding on an interval of the laminar family.

use std::collections::BTreeMap;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use super::ledger::{Audit, AuditKind, DiscardKind, DiscardLedger};
use super::params::Params;
use super::QptasError;
use crate::instance::Instance;
use crate::laminar::{is_good_batch, update_support_intervals, BatchView, Block, JobWindows, LaminarFamily, Span};
use crate::oracle::{validate_partial, Schedule};
use crate::sa::{LiftedSolution, SaError};
use crate::scalar::{format_rational, Scalar};
use crate::top_matching::{
    compute_windows, condition3_violations, connectivity_violations, insert_top_jobs, monotonicity_violations, InsertStats,
    WindowViolation,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeStep {
    Base {
        conditionings: usize,
    },
    Type1 {
        q: usize,
        batch_counts: Vec<usize>,
        conditionings: usize,
        max_interval_conditionings: usize,
        middle_discards: usize,
        top_jobs: usize,
        top_chain: usize,
        window_crossings: usize,
        insertion: InsertStats,
        /// Top jobs lost while inserting, against `ε|I| / (4⌈log₂ n⌉)`.
        top_discards: usize,
        top_discard_target: String,
        /// `4m|I|/2^k + 2^{qk}·m·chain`.
        matching_bound: String,
    },
    Type2 {
        batch_counts: Vec<usize>,
        conditionings: usize,
        max_interval_conditionings: usize,
        discarded: usize,
        charged: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeTrace {
    pub node: Block,
    pub span: Span,
    pub depth: usize,
    pub scoped_jobs: usize,
    /// Conditionings on the path from the root before this node started.
    pub path_conditionings: usize,
    pub step: NodeStep,
}

impl NodeTrace {
    pub fn case(&self) -> Option<Case> {
        match self.step {
            NodeStep::Base { .. } => None,
            NodeStep::Type1 { .. } => Some(Case::A),
            NodeStep::Type2 { .. } => Some(Case::B),
        }
    }

    pub fn conditionings(&self) -> usize {
        match self.step {
            NodeStep::Base { conditionings }
            | NodeStep::Type1 { conditionings, .. }
            | NodeStep::Type2 { conditionings, .. } => conditionings,
        }
    }
}

/// Nodes in depth-first order, children left to right.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RecursionTrace {
    pub nodes: Vec<NodeTrace>,
    /// Largest number of conditionings along one root-to-leaf path.
    pub max_path_conditionings: usize,
}

impl RecursionTrace {
    pub fn total_conditionings(&self) -> usize {
        self.nodes.iter().map(NodeTrace::conditionings).sum()
    }
}

pub(super) struct Ctx<'a> {
    pub inst: &'a Instance,
    pub fam: LaminarFamily,
    pub params: &'a Params,
}

pub(super) struct NodeOut {
    pub schedule: Schedule,
    pub ledger: DiscardLedger,
    pub audit: Audit,
    pub trace: Vec<NodeTrace>,
    pub max_path: usize,
}

fn count(n: usize) -> BigRational {
    BigRational::from_integer(n.into())
}

fn condition<L: LiftedSolution>(
    ctx: &Ctx,
    node: Block,
    used: &mut usize,
    f: impl FnOnce() -> Result<L, SaError>,
) -> Result<L, QptasError> {
    let exhausted = || QptasError::BudgetExhausted { node, used: *used, budget: ctx.params.budget };
    if *used >= ctx.params.budget {
        return Err(exhausted());
    }
    let out = f().map_err(|e| match e {
        SaError::LevelExhausted => exhausted(),
        other => QptasError::Sa(other),
    })?;
    *used += 1;
    Ok(out)
}

fn fresh_spans<L: LiftedSolution>(sol: &L, windows: &JobWindows) -> Result<BTreeMap<usize, Span>, QptasError> {
    windows.jobs.keys().map(|&j| Ok((j, sol.fractional_support(j)?.1))).collect()
}

fn inside(outer: Span, inner: Span) -> bool {
    outer.0 <= inner.0 && inner.1 <= outer.1
}

fn check_sandwich(windows: &JobWindows, node: Block, audit: &mut Audit) {
    for (j, w) in &windows.jobs {
        if !inside(w.support, w.fractional) || !inside(w.initial, w.support) {
            audit.push(
                AuditKind::SupportSandwich,
                node,
                format!("job {j}: F = {:?}, S = {:?}, initial F = {:?}", w.fractional, w.support, w.initial),
            );
        }
    }
}

/// Entry point for one node. `windows` holds exactly the jobs assigned
/// inside `node`'s subtree.
pub(super) fn run_node<L: LiftedSolution>(
    ctx: &Ctx,
    node: Block,
    depth: usize,
    sol: L,
    windows: JobWindows,
    used: usize,
) -> Result<NodeOut, QptasError> {
    let levels_below = ctx.fam.depth - node.level;
    let scoped: Vec<usize> = windows.jobs.keys().copied().collect();
    let mut out = if ctx.params.is_base_case(levels_below) {
        base_node(ctx, node, depth, sol, windows, used)?
    } else {
        recursive_node(ctx, node, depth, sol, windows, used)?
    };

    let span = ctx.fam.span(node);
    let report = validate_partial(ctx.inst, &out.schedule);
    if !report.is_ok() {
        let first = report.violations.iter().map(|v| v.to_string()).next().unwrap_or_default();
        out.audit.push(AuditKind::NodeSchedule, node, first);
    }
    if let Some((j, t)) = out.schedule.slots.iter().find(|(_, t)| !(span.0..=span.1).contains(*t)) {
        out.audit.push(AuditKind::NodeSchedule, node, format!("job {j} at slot {t} outside {span:?}"));
    }
    for j in scoped {
        if !out.schedule.slots.contains_key(&j) && !out.schedule.discarded.contains(&j) {
            out.audit.push(AuditKind::LostJob, node, format!("job {j}"));
        }
    }
    Ok(out)
}

/// Conditions on the lexicographically smallest fractional `(j, t)` until
/// every scoped job sits in a single slot, then reads the schedule off.
pub fn base_case_integralize<L: LiftedSolution>(
    mut sol: L,
    jobs: &[usize],
    span: Span,
    mut condition: impl FnMut(&L, usize) -> Result<L, QptasError>,
) -> Result<(Schedule, usize), QptasError> {
    let one = <L::Scalar as num_traits::One>::one();
    let mut conditionings = 0;
    loop {
        let fractional = jobs.iter().find_map(|&j| {
            (span.0..=span.1).find_map(|t| {
                let y = sol.mass(j, t);
                (y.is_pos() && !y.near_eq(&one)).then_some((j, t))
            })
        });
        let Some((j, t)) = fractional else { break };
        let var = sol.time_index().var(j, t);
        sol = condition(&sol, var)?;
        conditionings += 1;
    }
    let mut sched = Schedule::new();
    for &j in jobs {
        match sol.support(j).as_slice() {
            [t] => sched.assign(j, *t),
            _ => sched.discard(j),
        }
    }
    Ok((sched, conditionings))
}

fn base_node<L: LiftedSolution>(
    ctx: &Ctx,
    node: Block,
    depth: usize,
    sol: L,
    windows: JobWindows,
    used: usize,
) -> Result<NodeOut, QptasError> {
    let span = ctx.fam.span(node);
    let jobs: Vec<usize> = windows.jobs.keys().copied().collect();
    let mut path = used;
    let (schedule, conditionings) =
        base_case_integralize(sol, &jobs, span, |s, var| condition(ctx, node, &mut path, || s.condition_on_var(var)))?;
    let mut audit = Audit::default();
    if conditionings > ctx.params.m * ctx.fam.len(node) {
        audit.push(AuditKind::BaseCaseConditionings, node, format!("{conditionings} conditionings"));
    }
    for j in &schedule.discarded {
        audit.push(AuditKind::NodeSchedule, node, format!("job {j} not integral after the base case"));
    }
    let trace = vec![NodeTrace {
        node,
        span,
        depth,
        scoped_jobs: jobs.len(),
        path_conditionings: used,
        step: NodeStep::Base { conditionings },
    }];
    Ok(NodeOut { schedule, ledger: DiscardLedger::default(), audit, trace, max_path: path })
}

struct Step1<L> {
    sol: L,
    windows: JobWindows,
    case: Case,
    q: usize,
    counts: Vec<usize>,
    conditionings: usize,
    max_interval: usize,
}

fn step1<L: LiftedSolution>(
    ctx: &Ctx,
    node: Block,
    mut sol: L,
    mut windows: JobWindows,
    used: &mut usize,
    audit: &mut Audit,
) -> Result<Step1<L>, QptasError> {
    let Params { k, c, m, .. } = *ctx.params;
    let rel = ctx.inst.closure();
    let fam = &ctx.fam;
    let interval_cap = ctx.params.per_interval_cap();
    let mut conditionings = 0;
    let mut max_interval = 0;

    for offset in 0..c * k {
        let level = node.level + offset;
        let snapshot = windows.snapshot();
        for block in fam.blocks_at(node, level) {
            let bound = &ctx.params.delta * count(fam.len(block));
            let right = fam.children(block).map(|(_, r)| r);
            let mid = fam.midpoint(block);
            let hi = fam.span(block).1;
            let mut here = 0;
            loop {
                let chain = rel.longest_chain(&windows.assigned_to(block));
                if count(chain.len()) <= bound {
                    break;
                }
                let head = chain[0];
                let event: Vec<usize> = sol.support(head).into_iter().filter(|&t| t > mid && t <= hi).collect();
                let Some(right) = right.filter(|_| !event.is_empty()) else {
                    audit.push(AuditKind::ChainHead, node, format!("job {head} has no support right of slot {mid}"));
                    break;
                };
                sol = condition(ctx, node, used, || sol.condition_on_event(head, &event))?;
                here += 1;
                let fresh = fresh_spans(&sol, &windows)?;
                update_support_intervals(&mut windows, fam, level, &snapshot, &fresh);

                for j in &chain {
                    if !fam.is_within(windows.jobs[j].assigned, right) {
                        audit.push(AuditKind::ChainHead, node, format!("chain job {j} not moved right of slot {mid}"));
                    }
                }
                for (j, w) in &windows.jobs {
                    let before = snapshot[j];
                    if before.level < level && w.assigned != before {
                        audit.push(
                            AuditKind::AssignmentMoved,
                            node,
                            format!("job {j} moved from {before:?} to {:?}", w.assigned),
                        );
                    }
                }
                check_sandwich(&windows, node, audit);
                if windows.jobs[&head].assigned == block {
                    break;
                }
            }
            if count(here) > interval_cap {
                audit.push(AuditKind::IntervalConditionings, node, format!("{here} conditionings on {block:?}"));
            }
            conditionings += here;
            max_interval = max_interval.max(here);
        }

        if (offset + 1) % k == 0 {
            let p = (offset + 1) / k - 1;
            if p >= 1 {
                let view = BatchView::new(&windows, node.level, k, c);
                if is_good_batch(&view, p, &ctx.params.epsilon, m) {
                    return finish_step1(ctx, node, sol, windows, Case::A, p + 1, view.counts, conditionings, max_interval, audit);
                }
            }
        }
    }
    let counts = BatchView::new(&windows, node.level, k, c).counts;
    finish_step1(ctx, node, sol, windows, Case::B, c, counts, conditionings, max_interval, audit)
}

#[allow(clippy::too_many_arguments)]
fn finish_step1<L>(
    ctx: &Ctx,
    node: Block,
    sol: L,
    windows: JobWindows,
    case: Case,
    q: usize,
    counts: Vec<usize>,
    conditionings: usize,
    max_interval: usize,
    audit: &mut Audit,
) -> Result<Step1<L>, QptasError> {
    if count(conditionings) > ctx.params.per_node_cap() {
        audit.push(AuditKind::NodeConditionings, node, format!("{conditionings} conditionings in step 1"));
    }
    Ok(Step1 { sol, windows, case, q, counts, conditionings, max_interval })
}

/// Jobs `j ≺ i` may not have `i` below `I(j)_left` nor `j` below `I(i)_right`.
fn check_cross_assignment(ctx: &Ctx, node: Block, windows: &JobWindows, audit: &mut Audit) {
    let rel = ctx.inst.closure();
    for (&j, wj) in &windows.jobs {
        for (&i, wi) in &windows.jobs {
            if !rel.precedes(j, i) {
                continue;
            }
            let i_left_of_j = ctx.fam.children(wj.assigned).is_some_and(|(l, _)| ctx.fam.is_within(wi.assigned, l));
            let j_right_of_i = ctx.fam.children(wi.assigned).is_some_and(|(_, r)| ctx.fam.is_within(wj.assigned, r));
            if i_left_of_j || j_right_of_i {
                audit.push(
                    AuditKind::CrossAssignment,
                    node,
                    format!("{j} ≺ {i} assigned to {:?} and {:?}", wj.assigned, wi.assigned),
                );
            }
        }
    }
}

/// Runs every child at `level` on its own copy of `sol`, in parallel, and
/// merges the results in left-to-right order.
fn recurse_children<L: LiftedSolution>(
    ctx: &Ctx,
    node: Block,
    depth: usize,
    level: usize,
    sol: &L,
    windows: &JobWindows,
    used: usize,
) -> Result<NodeOut, QptasError> {
    let children = ctx.fam.blocks_at(node, level);
    let results: Vec<Result<NodeOut, QptasError>> = children
        .par_iter()
        .map(|&child| {
            let scope = windows.restricted(|_, w| ctx.fam.is_within(w.assigned, child));
            run_node(ctx, child, depth + 1, sol.clone(), scope, used)
        })
        .collect();
    let mut merged =
        NodeOut { schedule: Schedule::new(), ledger: DiscardLedger::default(), audit: Audit::default(), trace: Vec::new(), max_path: used };
    for r in results {
        let child = r?;
        merged.schedule.absorb(child.schedule);
        merged.ledger.merge(child.ledger, &mut merged.audit);
        merged.audit.merge(child.audit);
        merged.trace.extend(child.trace);
        merged.max_path = merged.max_path.max(child.max_path);
    }
    Ok(merged)
}

fn recursive_node<L: LiftedSolution>(
    ctx: &Ctx,
    node: Block,
    depth: usize,
    sol: L,
    windows: JobWindows,
    used: usize,
) -> Result<NodeOut, QptasError> {
    let mut audit = Audit::default();
    let mut path = used;
    let s1 = step1(ctx, node, sol, windows, &mut path, &mut audit)?;
    match s1.case {
        Case::A => type1(ctx, node, depth, s1, path, used, audit),
        Case::B => type2(ctx, node, depth, s1, path, used, audit),
    }
}

fn batch_of(ctx: &Ctx, node: Block, b: Block) -> usize {
    (b.level - node.level) / ctx.params.k
}

fn type1<L: LiftedSolution>(
    ctx: &Ctx,
    node: Block,
    depth: usize,
    s1: Step1<L>,
    path: usize,
    used_before: usize,
    mut audit: Audit,
) -> Result<NodeOut, QptasError> {
    let Params { k, m, c, .. } = *ctx.params;
    let q = s1.q;
    let rel = ctx.inst.closure();
    let fam = &ctx.fam;
    let span = fam.span(node);
    let bottom_level = node.level + q * k;

    let mut middle = Vec::new();
    let mut top = Vec::new();
    for (&j, w) in &s1.windows.jobs {
        if w.assigned.level < bottom_level {
            if batch_of(ctx, node, w.assigned) == q - 1 {
                middle.push(j);
            } else {
                top.push(j);
            }
        }
    }

    let eps = &ctx.params.epsilon;
    if count(middle.len() * 4 * m) > eps * count(top.len()) {
        audit.push(AuditKind::MiddleBatch, node, format!("{} middle jobs against {} top jobs", middle.len(), top.len()));
    }
    let top_chain = rel.longest_chain(&top).len();
    let chain_cap = count(c * k * fam.len(node)) * &ctx.params.delta;
    if count(top_chain) > chain_cap {
        audit.push(AuditKind::TopChain, node, format!("top chain {top_chain} above {}", format_rational(&chain_cap)));
    }
    check_cross_assignment(ctx, node, &s1.windows, &mut audit);

    let mut out = recurse_children(ctx, node, depth, bottom_level, &s1.sol, &s1.windows, path)?;
    audit.merge(std::mem::take(&mut out.audit));

    for &j in &middle {
        out.ledger.discard(DiscardKind::Type1, j, node, &mut audit);
    }

    let mut windows = compute_windows(fam, &s1.windows, &top, bottom_level);
    for v in monotonicity_violations(rel, &windows) {
        audit.push(AuditKind::WindowMonotone, node, format!("{v:?}"));
    }
    let assigned: BTreeMap<usize, Block> = top.iter().map(|&j| (j, s1.windows.jobs[&j].assigned)).collect();
    for v in connectivity_violations(&assigned, &windows) {
        audit.push(AuditKind::WindowConnectivity, node, format!("{v:?}"));
    }
    let mut crossing = Vec::new();
    let bottom_only = Schedule::from_slots(out.schedule.slots.clone());
    for v in condition3_violations(rel, &bottom_only, &windows) {
        if let WindowViolation::CrossPrecedence { top, .. } = v {
            crossing.push(top);
        }
        audit.push(AuditKind::WindowCrossing, node, format!("{v:?}"));
    }
    crossing.sort_unstable();
    crossing.dedup();
    for j in &crossing {
        windows.remove(j);
    }

    let insertion = insert_top_jobs(rel, &out.schedule, &windows, span, m);
    let mut schedule = insertion.schedule;
    let lost: Vec<usize> = crossing.iter().chain(&insertion.discarded).copied().collect();
    for &j in middle.iter().chain(&lost) {
        schedule.discard(j);
    }
    for &j in &lost {
        out.ledger.discard(DiscardKind::Type1, j, node, &mut audit);
    }

    let target = eps * count(fam.len(node)) / count(4 * ctx.params.log_n);
    let matching_bound = count(4 * m * fam.len(node)) / count(1usize << k.min(63))
        + count(m * top_chain) * BigRational::from_integer(num_bigint::BigInt::from(1u8) << (q * k));
    let mut trace = vec![NodeTrace {
        node,
        span,
        depth,
        scoped_jobs: s1.windows.jobs.len(),
        path_conditionings: used_before,
        step: NodeStep::Type1 {
            q,
            batch_counts: s1.counts,
            conditionings: s1.conditionings,
            max_interval_conditionings: s1.max_interval,
            middle_discards: middle.len(),
            top_jobs: top.len(),
            top_chain,
            window_crossings: crossing.len(),
            insertion: insertion.stats,
            top_discards: lost.len(),
            top_discard_target: format_rational(&target),
            matching_bound: format_rational(&matching_bound),
        },
    }];
    trace.append(&mut out.trace);
    Ok(NodeOut { schedule, ledger: out.ledger, audit, trace, max_path: out.max_path })
}

fn type2<L: LiftedSolution>(
    ctx: &Ctx,
    node: Block,
    depth: usize,
    s1: Step1<L>,
    path: usize,
    used_before: usize,
    mut audit: Audit,
) -> Result<NodeOut, QptasError> {
    let Params { k, c, retain, .. } = *ctx.params;
    let cut = c - retain;
    let bottom_level = node.level + cut * k;
    let step1_end = node.level + c * k;

    let dropped: Vec<usize> =
        s1.windows.jobs.iter().filter(|(_, w)| w.assigned.level < bottom_level).map(|(j, _)| *j).collect();
    let charged: Vec<usize> = s1
        .windows
        .jobs
        .iter()
        .filter(|(_, w)| (bottom_level..step1_end).contains(&w.assigned.level))
        .map(|(j, _)| *j)
        .collect();

    let discarded_count: usize = s1.counts[..cut].iter().sum();
    let retained_count: usize = s1.counts[cut..].iter().sum();
    if count(discarded_count * retain) * ctx.params.epsilon_prime() > count(retained_count) {
        audit.push(
            AuditKind::TopBatches,
            node,
            format!("{discarded_count} discarded against {retained_count} retained in {retain} batches"),
        );
    }

    let mut out = recurse_children(ctx, node, depth, bottom_level, &s1.sol, &s1.windows, path)?;
    audit.merge(std::mem::take(&mut out.audit));
    for &j in &dropped {
        out.ledger.discard(DiscardKind::Type2, j, node, &mut audit);
        out.schedule.discard(j);
    }
    for &j in &charged {
        out.ledger.charge(j, node, &mut audit);
    }

    let mut trace = vec![NodeTrace {
        node,
        span: ctx.fam.span(node),
        depth,
        scoped_jobs: s1.windows.jobs.len(),
        path_conditionings: used_before,
        step: NodeStep::Type2 {
            batch_counts: s1.counts,
            conditionings: s1.conditionings,
            max_interval_conditionings: s1.max_interval,
            discarded: dropped.len(),
            charged: charged.len(),
        },
    }];
    trace.append(&mut out.trace);
    Ok(NodeOut { schedule: out.schedule, ledger: out.ledger, audit, trace, max_path: out.max_path })
}
