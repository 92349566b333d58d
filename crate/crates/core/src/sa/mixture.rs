//! Convex combinations of integral schedules as lifted solutions.
//!
//! `y_S` is the total weight of the components whose 0/1 point has every
//! variable of `S` set. Such a point lies in the integer hull, so it satisfies
//! every lift level; conditioning on an event keeps the components in which
//! the event holds and renormalises. The level carried here is only a budget.

use std::collections::HashMap;

use super::key::{subsets_up_to, SubsetKey};
use super::solution::SaSolution;
use super::{LiftedSolution, SaError};
use crate::lp::TimeIndex;
use crate::oracle::Schedule;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Mixture<S> {
    pub level: usize,
    pub timeindex: TimeIndex,
    /// `(weight, slot of job j at index j−1)`; weights sum to one.
    pub components: Vec<(S, Vec<usize>)>,
}

impl<S: Scalar> Mixture<S> {
    /// Schedules must be complete and within the horizon; weights positive.
    /// Weights are normalised.
    pub fn new(timeindex: TimeIndex, level: usize, parts: Vec<(S, Schedule)>) -> Self {
        assert!(!parts.is_empty(), "a mixture needs at least one schedule");
        let total = parts.iter().fold(S::zero(), |acc, (w, _)| acc + w.clone());
        let components = parts
            .into_iter()
            .map(|(w, sched)| {
                assert!(w.is_pos(), "mixture weights must be positive");
                let slots: Vec<usize> = (1..=timeindex.n).map(|j| sched.slot(j).expect("complete schedule")).collect();
                assert!(slots.iter().all(|&t| (1..=timeindex.horizon).contains(&t)), "schedule exceeds the horizon");
                (w / total.clone(), slots)
            })
            .collect();
        Mixture { level, timeindex, components }
    }

    fn holds(&self, slots: &[usize], var: usize) -> bool {
        let (j, t) = self.timeindex.decode(var);
        slots[j - 1] == t
    }

    fn filtered(&self, keep: impl Fn(&[usize]) -> bool, what: impl FnOnce() -> String) -> Result<Self, SaError> {
        if self.level == 0 {
            return Err(SaError::LevelExhausted);
        }
        let kept: Vec<(S, Vec<usize>)> = self.components.iter().filter(|(_, s)| keep(s)).cloned().collect();
        let mass = kept.iter().fold(S::zero(), |acc, (w, _)| acc + w.clone());
        if !mass.is_pos() {
            return Err(SaError::ZeroMass { what: what() });
        }
        let components = kept.into_iter().map(|(w, s)| (w / mass.clone(), s)).collect();
        Ok(Mixture { level: self.level - 1, timeindex: self.timeindex, components })
    }

    /// Explicit values for every key of size at most `level + 1`.
    pub fn materialize(&self, level: usize) -> SaSolution<S> {
        let mut values: HashMap<SubsetKey, S> = HashMap::new();
        for (w, slots) in &self.components {
            let ones: Vec<usize> = slots.iter().enumerate().map(|(j, &t)| self.timeindex.var(j + 1, t)).collect();
            for k in subsets_up_to(&ones, level + 1) {
                let e = values.entry(k).or_insert_with(S::zero);
                *e = e.clone() + w.clone();
            }
        }
        SaSolution { level, values, timeindex: self.timeindex }
    }
}

impl<S: Scalar> LiftedSolution for Mixture<S> {
    type Scalar = S;

    fn level(&self) -> usize {
        self.level
    }

    fn time_index(&self) -> TimeIndex {
        self.timeindex
    }

    fn mass(&self, job: usize, slot: usize) -> S {
        self.components.iter().filter(|(_, s)| s[job - 1] == slot).fold(S::zero(), |acc, (w, _)| acc + w.clone())
    }

    fn value(&self, key: &SubsetKey) -> S {
        self.components
            .iter()
            .filter(|(_, s)| key.vars().iter().all(|&v| self.holds(s, v)))
            .fold(S::zero(), |acc, (w, _)| acc + w.clone())
    }

    fn condition_on_var(&self, var: usize) -> Result<Self, SaError> {
        let (j, t) = self.timeindex.decode(var);
        self.filtered(|s| s[j - 1] == t, || format!("y[{j},{t}]"))
    }

    fn condition_on_event(&self, job: usize, slots: &[usize]) -> Result<Self, SaError> {
        self.filtered(|s| slots.contains(&s[job - 1]), || format!("job {job} in slots {slots:?}"))
    }
}
