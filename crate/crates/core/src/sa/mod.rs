//! Sherali-Adams lifts of a `[0,1]` linear program, lifted solutions and
//! conditioning.
//!
//! A level-`s` solution assigns a value `y_S` to every set `S` of ground
//! variables with `|S| ≤ s+1`. Two backends implement [`LiftedSolution`]:
//! [`SaSolution`] stores the values explicitly (as returned by the LP solver)
//! and [`Mixture`] is a finite convex combination of integral schedules, which
//! is feasible for every level and answers queries lazily.

mod key;
mod lift;
mod mixture;
mod solution;
mod solve;

pub use key::{subsets_up_to, SubsetKey};
pub use lift::{build_sa_lift, build_sa_lift_with_cap, lifted_var_count, SaLift, DEFAULT_MAX_LIFTED_VARS};
pub use mixture::Mixture;
pub use solution::{condition_on_event, condition_on_var, fractional_support, SaSolution};
pub use solve::{sa_min_makespan, solve_sa, solve_sa_with_cap, SaCertificate, SaMinMakespan, SaOutcome};

use crate::lp::TimeIndex;
use crate::scalar::Scalar;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum SaError {
    #[error("lift would have {vars} variables, above the cap of {cap}")]
    TooLarge { vars: usize, cap: usize },
    #[error("no lift levels left to condition on")]
    LevelExhausted,
    #[error("cannot condition on an event of zero mass ({what})")]
    ZeroMass { what: String },
    #[error("job {job} has empty support")]
    EmptySupport { job: usize },
}

/// Common interface of the two solution backends, as used by the rounding
/// algorithm.
pub trait LiftedSolution: Clone + Send + Sync {
    type Scalar: Scalar;

    fn level(&self) -> usize;
    fn time_index(&self) -> TimeIndex;
    /// `y_{(job, slot)}`.
    fn mass(&self, job: usize, slot: usize) -> Self::Scalar;
    /// `y_S` for an arbitrary key of size at most `level + 1`.
    fn value(&self, key: &SubsetKey) -> Self::Scalar;
    fn condition_on_var(&self, var: usize) -> Result<Self, SaError>;
    fn condition_on_event(&self, job: usize, slots: &[usize]) -> Result<Self, SaError>;

    /// Slots with positive mass for `job`, ascending.
    fn support(&self, job: usize) -> Vec<usize> {
        (1..=self.time_index().horizon).filter(|&t| self.mass(job, t).is_pos()).collect()
    }

    /// Support and its hull `[r_j, d_j]`.
    fn fractional_support(&self, job: usize) -> Result<(Vec<usize>, (usize, usize)), SaError> {
        let supp = self.support(job);
        match (supp.first(), supp.last()) {
            (Some(&r), Some(&d)) => Ok((supp.clone(), (r, d))),
            _ => Err(SaError::EmptySupport { job }),
        }
    }
}
