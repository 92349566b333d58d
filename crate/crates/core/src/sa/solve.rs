use serde::Serialize;

use super::lift::{build_sa_lift_with_cap, DEFAULT_MAX_LIFTED_VARS};
use super::solution::SaSolution;
use super::SaError;
use crate::instance::Instance;
use crate::lp::{build_time_indexed_lp, lp_min_makespan, solve_feasibility, LpOutcome};
use crate::oracle::{validate, Schedule};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum SaOutcome<S> {
    Feasible(SaSolution<S>),
    Infeasible,
}

impl<S> SaOutcome<S> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, SaOutcome::Feasible(_))
    }
}

/// Level-`s` lift of the time-indexed LP at horizon `T`, solved exactly.
pub fn solve_sa<S: Scalar>(inst: &Instance, horizon: usize, level: usize) -> Result<SaOutcome<S>, SaError> {
    solve_sa_with_cap(inst, horizon, level, DEFAULT_MAX_LIFTED_VARS)
}

pub fn solve_sa_with_cap<S: Scalar>(inst: &Instance, horizon: usize, level: usize, cap: usize) -> Result<SaOutcome<S>, SaError> {
    let (base, idx) = build_time_indexed_lp::<S>(inst, horizon);
    let lift = build_sa_lift_with_cap(&base, level, cap)?;
    Ok(match solve_feasibility(&lift.lifted) {
        LpOutcome::Feasible(point) => SaOutcome::Feasible(SaSolution::from_lift_point(&lift, &point, idx)),
        LpOutcome::Infeasible => SaOutcome::Infeasible,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SaCertificate {
    /// The lift was solved and found feasible.
    Solved,
    /// An integral schedule with makespan at most `T` is feasible for the base
    /// LP, and its product point is feasible for every lift level.
    Witness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SaMinMakespan {
    pub t_min: usize,
    pub lp_min: usize,
    pub certificate: SaCertificate,
    /// Number of lifted programs handed to the solver.
    pub solves: usize,
}

/// Smallest `T` with the level-`s` lift feasible.
///
/// The scan starts at the LP optimum, below which the lift is infeasible
/// because it projects onto the base LP. If `witness` is a valid schedule its
/// makespan closes the scan without solving.
pub fn sa_min_makespan(inst: &Instance, level: usize, witness: Option<&Schedule>, cap: usize) -> Result<SaMinMakespan, SaError> {
    let lp_min = lp_min_makespan(inst);
    let witness_t = witness.filter(|w| validate(inst, w).is_ok()).map(Schedule::makespan);
    let mut solves = 0;
    for horizon in lp_min..=inst.n() {
        if witness_t.is_some_and(|w| w <= horizon) {
            return Ok(SaMinMakespan { t_min: horizon, lp_min, certificate: SaCertificate::Witness, solves });
        }
        solves += 1;
        if solve_sa_with_cap::<crate::Rational>(inst, horizon, level, cap)?.is_feasible() {
            return Ok(SaMinMakespan { t_min: horizon, lp_min, certificate: SaCertificate::Solved, solves });
        }
    }
    unreachable!("T = n is always feasible")
}
