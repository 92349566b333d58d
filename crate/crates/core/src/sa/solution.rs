use std::collections::HashMap;

use super::key::{subsets_up_to, SubsetKey};
use super::lift::SaLift;
use super::{LiftedSolution, SaError};
use crate::lp::{LpPoint, TimeIndex};
use crate::oracle::Schedule;
use crate::scalar::Scalar;

/// Explicit level-`s` solution. Keys not present read as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SaSolution<S> {
    pub level: usize,
    pub values: HashMap<SubsetKey, S>,
    pub timeindex: TimeIndex,
}

impl<S: Scalar> SaSolution<S> {
    /// Reads a solved lift back into key form.
    pub fn from_lift_point(lift: &SaLift<S>, point: &LpPoint<S>, timeindex: TimeIndex) -> Self {
        let values = lift
            .keys
            .iter()
            .zip(&point.values)
            .filter(|(_, v)| !v.near_zero())
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        SaSolution { level: lift.level, values, timeindex }
    }

    /// The product solution `y_S = Π_{i ∈ S} y_i` of a schedule.
    pub fn from_schedule(timeindex: TimeIndex, sched: &Schedule, level: usize) -> Self {
        let ones: Vec<usize> = sched.slots.iter().map(|(&j, &t)| timeindex.var(j, t)).collect();
        let values = subsets_up_to(&ones, level + 1).into_iter().map(|k| (k, S::one())).collect();
        SaSolution { level, values, timeindex }
    }

    pub fn get(&self, key: &SubsetKey) -> S {
        self.values.get(key).cloned().unwrap_or_else(S::zero)
    }

    /// Dense point over the variables of `lift`. Keys of this solution that
    /// the lift does not know are ignored.
    pub fn to_point(&self, lift: &SaLift<S>) -> LpPoint<S> {
        LpPoint { values: lift.keys.iter().map(|k| self.get(k)).collect() }
    }

    /// Violated rows of `lift` (see [`crate::lp::LinearProgram::violations`]).
    pub fn lift_violations(&self, lift: &SaLift<S>) -> Vec<usize> {
        let mut bad = lift.lifted.violations(&self.to_point(lift));
        if self.values.keys().any(|k| k.len() > lift.level + 1) {
            bad.push(usize::MAX);
        }
        bad
    }

    /// Restriction to keys of size at most `level + 1`.
    pub fn project(&self, level: usize) -> Self {
        assert!(level <= self.level, "cannot project upward");
        let values = self.values.iter().filter(|(k, _)| k.len() <= level + 1).map(|(k, v)| (k.clone(), v.clone())).collect();
        SaSolution { level, values, timeindex: self.timeindex }
    }

    fn insert_add(values: &mut HashMap<SubsetKey, S>, key: SubsetKey, v: S) {
        let slot = values.entry(key).or_insert_with(S::zero);
        *slot = slot.clone() + v;
    }
}

/// `z_S = y_{S ∪ {i}} / y_i` for `|S| ≤ s`, at level `s − 1`.
pub fn condition_on_var<S: Scalar>(sol: &SaSolution<S>, var: usize) -> Result<SaSolution<S>, SaError> {
    if sol.level == 0 {
        return Err(SaError::LevelExhausted);
    }
    let mass = sol.get(&SubsetKey::singleton(var));
    if !mass.is_pos() {
        let (j, t) = sol.timeindex.decode(var);
        return Err(SaError::ZeroMass { what: format!("y[{j},{t}]") });
    }
    let mut values = HashMap::new();
    for (k, v) in &sol.values {
        if !k.contains(var) {
            continue;
        }
        let scaled = v.clone() / mass.clone();
        if k.len() <= sol.level {
            values.insert(k.clone(), scaled.clone());
        }
        values.insert(k.without(var), scaled);
    }
    values.retain(|_, v: &mut S| !v.near_zero());
    Ok(SaSolution { level: sol.level - 1, values, timeindex: sol.timeindex })
}

/// `z_S = Σ_{t ∈ E} y_{S ∪ {(j,t)}} / Σ_{t ∈ E} y_{(j,t)}`, at level `s − 1`:
/// the mass-weighted mix of conditioning on each `(j, t)`.
pub fn condition_on_event<S: Scalar>(sol: &SaSolution<S>, job: usize, slots: &[usize]) -> Result<SaSolution<S>, SaError> {
    if sol.level == 0 {
        return Err(SaError::LevelExhausted);
    }
    let idx = sol.timeindex;
    let mut event: Vec<usize> = slots.iter().map(|&t| idx.var(job, t)).collect();
    event.sort_unstable();
    event.dedup();
    let mass = event.iter().fold(S::zero(), |acc, &v| acc + sol.get(&SubsetKey::singleton(v)));
    if !mass.is_pos() {
        return Err(SaError::ZeroMass { what: format!("job {job} in slots {slots:?}") });
    }
    let mut values = HashMap::new();
    for (k, v) in &sol.values {
        for &e in k.vars().iter().filter(|v| event.binary_search(v).is_ok()) {
            let scaled = v.clone() / mass.clone();
            if k.len() <= sol.level {
                SaSolution::insert_add(&mut values, k.clone(), scaled.clone());
            }
            SaSolution::insert_add(&mut values, k.without(e), scaled);
        }
    }
    values.retain(|_, v: &mut S| !v.near_zero());
    Ok(SaSolution { level: sol.level - 1, values, timeindex: sol.timeindex })
}

/// Slots where `job` has positive mass and their hull `[r_j, d_j]`.
pub fn fractional_support<S: Scalar>(sol: &SaSolution<S>, job: usize) -> Result<(Vec<usize>, (usize, usize)), SaError> {
    LiftedSolution::fractional_support(sol, job)
}

impl<S: Scalar> LiftedSolution for SaSolution<S> {
    type Scalar = S;

    fn level(&self) -> usize {
        self.level
    }

    fn time_index(&self) -> TimeIndex {
        self.timeindex
    }

    fn mass(&self, job: usize, slot: usize) -> S {
        self.get(&SubsetKey::singleton(self.timeindex.var(job, slot)))
    }

    fn value(&self, key: &SubsetKey) -> S {
        self.get(key)
    }

    fn condition_on_var(&self, var: usize) -> Result<Self, SaError> {
        condition_on_var(self, var)
    }

    fn condition_on_event(&self, job: usize, slots: &[usize]) -> Result<Self, SaError> {
        condition_on_event(self, job, slots)
    }
}
