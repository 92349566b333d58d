//! Constraint systems over `[0,1]` variables, the time-indexed scheduling LP
//! and exact feasibility.

mod presolve;
mod simplex;

use std::fmt;

use num_rational::BigRational;
use serde::Serialize;

use crate::instance::Instance;
use crate::oracle::Schedule;
use crate::scalar::{format_rational, Scalar};

pub use simplex::{solve_feasibility, solve_feasibility_with_stats, SolveStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

/// One row `Σ coeffs · y  rel  rhs`. Coefficients are sorted by variable and
/// never zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<S> {
    pub coeffs: Vec<(usize, S)>,
    pub relation: Relation,
    pub rhs: S,
}

impl<S: Scalar> Constraint<S> {
    /// Builds a row, merging repeated variables and dropping zero coefficients.
    pub fn new(terms: impl IntoIterator<Item = (usize, S)>, relation: Relation, rhs: S) -> Self {
        let mut coeffs: Vec<(usize, S)> = terms.into_iter().collect();
        coeffs.sort_by_key(|(v, _)| *v);
        let mut merged: Vec<(usize, S)> = Vec::with_capacity(coeffs.len());
        for (v, a) in coeffs {
            match merged.last_mut() {
                Some((last, acc)) if *last == v => *acc = acc.clone() + a,
                _ => merged.push((v, a)),
            }
        }
        merged.retain(|(_, a)| !a.is_zero());
        Constraint { coeffs: merged, relation, rhs }
    }

    pub fn activity(&self, values: &[S]) -> S {
        self.coeffs.iter().fold(S::zero(), |acc, (v, a)| acc + a.clone() * values[*v].clone())
    }

    pub fn is_satisfied(&self, values: &[S]) -> bool {
        let lhs = self.activity(values);
        match self.relation {
            Relation::Le => lhs.le_tol(&self.rhs),
            Relation::Ge => self.rhs.le_tol(&lhs),
            Relation::Eq => lhs.near_eq(&self.rhs),
        }
    }
}

/// A feasibility problem over variables `0..varcount`, each implicitly in
/// `[0, 1]`. Builders may also state the bounds as explicit rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<S> {
    pub varcount: usize,
    pub constraints: Vec<Constraint<S>>,
}

impl<S: Scalar> LinearProgram<S> {
    pub fn new(varcount: usize) -> Self {
        LinearProgram { varcount, constraints: Vec::new() }
    }

    pub fn push(&mut self, row: Constraint<S>) {
        debug_assert!(row.coeffs.iter().all(|(v, _)| *v < self.varcount));
        self.constraints.push(row);
    }

    /// Indices of violated rows (including the implicit `[0,1]` box, reported
    /// as `usize::MAX`).
    pub fn violations(&self, point: &LpPoint<S>) -> Vec<usize> {
        let mut bad: Vec<usize> = self
            .constraints
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_satisfied(&point.values))
            .map(|(i, _)| i)
            .collect();
        if point.values.len() != self.varcount
            || point.values.iter().any(|v| v.is_neg() || (v.clone() - S::one()).is_pos())
        {
            bad.push(usize::MAX);
        }
        bad
    }

    pub fn is_feasible_point(&self, point: &LpPoint<S>) -> bool {
        self.violations(point).is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpPoint<S> {
    pub values: Vec<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<S> {
    Feasible(LpPoint<S>),
    Infeasible,
}

impl<S> LpOutcome<S> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpOutcome::Feasible(_))
    }

    pub fn point(&self) -> Option<&LpPoint<S>> {
        match self {
            LpOutcome::Feasible(p) => Some(p),
            LpOutcome::Infeasible => None,
        }
    }
}

/// Bijection `(job j, slot t) ↔ (j−1)·T + (t−1)` over `[1,n] × [1,T]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TimeIndex {
    pub n: usize,
    pub horizon: usize,
}

impl TimeIndex {
    pub fn new(n: usize, horizon: usize) -> Self {
        TimeIndex { n, horizon }
    }

    pub fn var(&self, job: usize, slot: usize) -> usize {
        debug_assert!((1..=self.n).contains(&job) && (1..=self.horizon).contains(&slot));
        (job - 1) * self.horizon + (slot - 1)
    }

    pub fn decode(&self, var: usize) -> (usize, usize) {
        (var / self.horizon + 1, var % self.horizon + 1)
    }

    pub fn varcount(&self) -> usize {
        self.n * self.horizon
    }

    /// Reads an integral point back as a schedule; `None` if some job is not
    /// placed at exactly one slot with value one.
    pub fn decode_integral<S: Scalar>(&self, point: &LpPoint<S>) -> Option<Schedule> {
        let mut sched = Schedule::new();
        for j in 1..=self.n {
            let mut slot = None;
            for t in 1..=self.horizon {
                let v = &point.values[self.var(j, t)];
                if v.near_eq(&S::one()) {
                    if slot.replace(t).is_some() {
                        return None;
                    }
                } else if !v.near_zero() {
                    return None;
                }
            }
            sched.assign(j, slot?);
        }
        Some(sched)
    }

    /// The 0/1 point of a schedule whose jobs all sit in `[1, horizon]`.
    pub fn encode<S: Scalar>(&self, sched: &Schedule) -> LpPoint<S> {
        let mut values = vec![S::zero(); self.varcount()];
        for (&j, &t) in &sched.slots {
            values[self.var(j, t)] = S::one();
        }
        LpPoint { values }
    }
}

/// Row counts of the time-indexed LP, in emission order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TimeIndexedShape {
    pub assignment: usize,
    pub capacity: usize,
    pub precedence: usize,
    pub bounds: usize,
}

/// Builds the time-indexed LP for horizon `T`:
/// every job placed once, at most `m` jobs per slot, cumulative precedence
/// rows `Σ_{t'≤t} y_{j t'} ≥ Σ_{t'≤t+1} y_{i t'}` for every closure pair `j ≺ i`
/// and `t ∈ {0, …, T−1}`, and explicit `0 ≤ y ≤ 1` rows.
pub fn build_time_indexed_lp<S: Scalar>(inst: &Instance, horizon: usize) -> (LinearProgram<S>, TimeIndex) {
    assert!(horizon >= 1, "horizon must be positive");
    let idx = TimeIndex::new(inst.n(), horizon);
    let mut lp = LinearProgram::new(idx.varcount());
    for j in inst.jobs() {
        lp.push(Constraint::new((1..=horizon).map(|t| (idx.var(j, t), S::one())), Relation::Eq, S::one()));
    }
    for t in 1..=horizon {
        lp.push(Constraint::new(inst.jobs().map(|j| (idx.var(j, t), S::one())), Relation::Le, S::from_count(inst.m())));
    }
    for (j, i) in inst.closure().pairs() {
        for t in 0..horizon {
            let before = (1..=t).map(|tp| (idx.var(j, tp), S::one()));
            let after = (1..=t + 1).map(|tp| (idx.var(i, tp), -S::one()));
            lp.push(Constraint::new(before.chain(after), Relation::Ge, S::zero()));
        }
    }
    for v in 0..idx.varcount() {
        lp.push(Constraint::new([(v, S::one())], Relation::Ge, S::zero()));
        lp.push(Constraint::new([(v, S::one())], Relation::Le, S::one()));
    }
    (lp, idx)
}

pub fn time_indexed_shape(inst: &Instance, horizon: usize) -> TimeIndexedShape {
    TimeIndexedShape {
        assignment: inst.n(),
        capacity: horizon,
        precedence: inst.closure().pair_count() * horizon,
        bounds: 2 * inst.n() * horizon,
    }
}

/// Smallest `T ∈ [1, n]` for which the time-indexed LP is feasible, with the
/// point found at that `T`.
pub fn lp_min_makespan_with_point(inst: &Instance) -> (usize, LpPoint<BigRational>) {
    for horizon in 1..=inst.n() {
        let (lp, _) = build_time_indexed_lp::<BigRational>(inst, horizon);
        if let LpOutcome::Feasible(p) = solve_feasibility(&lp) {
            return (horizon, p);
        }
    }
    unreachable!("T = n always admits the chain-order schedule")
}

pub fn lp_min_makespan(inst: &Instance) -> usize {
    lp_min_makespan_with_point(inst).0
}

/// JSON-friendly view of a point: nonzero entries as `(job, slot, "p/q")`.
pub fn point_entries(idx: &TimeIndex, point: &LpPoint<BigRational>) -> Vec<(usize, usize, String)> {
    point
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| !num_traits::Zero::is_zero(*v))
        .map(|(var, v)| {
            let (j, t) = idx.decode(var);
            (j, t, format_rational(v))
        })
        .collect()
}
