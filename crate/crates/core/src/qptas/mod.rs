//! Recursive rounding of a lifted solution over the laminar family.
//!
//! Each node first shortens chains in its top `Ck` levels by conditioning
//! (step 1) and then recurses either below a good batch (type 1, top jobs are
//! re-inserted by matching) or below its top `C − R` batches (type 2, those
//! batches are dropped and the next `R` are charged). The output is a partial
//! schedule plus a ledger of discards; [`repair_discarded`] completes it.

mod ledger;
mod params;
mod recursion;
mod repair;

#[cfg(test)]
mod tests;

use std::collections::BTreeMap;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::Serialize;

pub use ledger::{Audit, AuditEntry, AuditKind, DiscardKind, DiscardLedger};
pub use params::{Mode, Params, DEFAULT_BASE_THRESHOLD};
pub use recursion::{base_case_integralize, Case, NodeStep, NodeTrace, RecursionTrace};
pub use repair::repair_discarded;

use crate::instance::Instance;
use crate::laminar::{pad_to_power_of_two, Block, JobWindows, LaminarFamily, Padded};
use crate::lp::TimeIndex;
use crate::oracle::{sample_optimal_schedule, validate, validate_partial, OracleError, Schedule};
use crate::sa::{solve_sa_with_cap, LiftedSolution, Mixture, SaError, SaOutcome};
use crate::Rational;

#[derive(Debug, thiserror::Error)]
pub enum QptasError {
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("horizon {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("no feasible fractional solution at T = {0}")]
    Infeasible(usize),
    #[error("round budget exhausted at node {node:?} after {used} conditionings on its path (budget {budget})")]
    BudgetExhausted { node: Block, used: usize, budget: usize },
    #[error(transparent)]
    Sa(#[from] SaError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QptasOutcome {
    /// Scheduled jobs plus the discarded set.
    pub schedule: Schedule,
    pub ledger: DiscardLedger,
    pub trace: RecursionTrace,
    pub audit: Audit,
}

/// Runs the recursion from the root on `sol`, whose horizon must be a power
/// of two and whose jobs are those of `inst`.
pub fn schedule_qptas<L: LiftedSolution>(inst: &Instance, sol: L, params: &Params) -> Result<QptasOutcome, QptasError> {
    let idx = sol.time_index();
    if !idx.horizon.is_power_of_two() {
        return Err(QptasError::NotPowerOfTwo(idx.horizon));
    }
    assert_eq!(idx.n, inst.n(), "solution and instance disagree on n");
    let fam = LaminarFamily::new(idx.horizon);
    let spans = inst.jobs().map(|j| Ok((j, sol.fractional_support(j)?.1))).collect::<Result<Vec<_>, SaError>>()?;
    let windows = JobWindows::from_fractional(&fam, spans);
    let ctx = recursion::Ctx { inst, fam, params };
    let out = recursion::run_node(&ctx, fam.root(), 0, sol, windows, 0)?;

    let mut audit = out.audit;
    let report = validate(inst, &out.schedule);
    for v in report.violations {
        audit.push(AuditKind::NodeSchedule, fam.root(), v.to_string());
    }
    let trace = RecursionTrace { nodes: out.trace, max_path_conditionings: out.max_path };
    Ok(QptasOutcome { schedule: out.schedule, ledger: out.ledger, trace, audit })
}

/// Where the starting fractional solution comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    /// A random convex combination of `samples` optimal schedules (needs
    /// `T ≥ OPT`), at the nominal level of the round budget.
    Mixture { samples: usize, seed: u64 },
    /// An explicit solution of the level-`level` lift at `T`.
    Lift { level: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QptasReport {
    pub horizon: usize,
    pub padded_horizon: usize,
    pub original_n: usize,
    pub dummies: usize,
    pub params: Params,
    pub source: Source,
    pub makespan_partial: usize,
    pub discards_type1: usize,
    pub discards_type2: usize,
    /// Discarded jobs that are padding.
    pub discarded_dummies: usize,
    pub makespan_final: usize,
    /// Makespan of the final schedule restricted to the original jobs.
    pub makespan_final_original: usize,
    pub conditionings: usize,
    pub partial: Schedule,
    #[serde(rename = "final")]
    pub final_schedule: Schedule,
    pub ledger: DiscardLedger,
    pub audit: Audit,
    pub audit_counts: BTreeMap<AuditKind, usize>,
    pub trace: RecursionTrace,
}

impl QptasReport {
    pub fn discards(&self) -> usize {
        self.discards_type1 + self.discards_type2
    }
}

/// `parts` random-weight optimal schedules of `padded`'s original jobs,
/// padding placed `m` per slot after `padded.original_horizon`.
pub fn optimal_mixture(padded: &Padded, samples: usize, seed: u64, level: usize) -> Result<Mixture<Rational>, QptasError> {
    let inst = &padded.instance;
    let original = Instance::from_parts_unchecked(
        padded.original_n,
        inst.m(),
        inst.prec().iter().copied().filter(|&(_, v)| v <= padded.original_n).collect(),
    );
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut parts = Vec::new();
    for _ in 0..samples.max(1) {
        let mut sched = sample_optimal_schedule(&original, &mut rng)?;
        if sched.makespan() > padded.original_horizon {
            return Err(QptasError::Infeasible(padded.original_horizon));
        }
        for (i, d) in (padded.original_n + 1..=inst.n()).enumerate() {
            sched.assign(d, padded.original_horizon + 1 + i / inst.m());
        }
        let w = BigRational::from_integer(rng.gen_range(1..=9).into());
        parts.push((w, sched));
    }
    Ok(Mixture::new(TimeIndex::new(inst.n(), padded.horizon), level, parts))
}

/// Pads `inst` to a power-of-two horizon, builds the starting solution, runs
/// the recursion and repairs the result.
pub fn run_qptas(inst: &Instance, horizon: usize, params: &Params, source: &Source) -> Result<QptasReport, QptasError> {
    let padded = pad_to_power_of_two(inst, horizon);
    let outcome = match source {
        Source::Mixture { samples, seed } => {
            let sol = optimal_mixture(&padded, *samples, *seed, params.budget)?;
            schedule_qptas(&padded.instance, sol, params)?
        }
        Source::Lift { level, cap } => {
            match solve_sa_with_cap::<Rational>(&padded.instance, padded.horizon, *level, *cap)? {
                SaOutcome::Feasible(sol) => schedule_qptas(&padded.instance, sol, params)?,
                SaOutcome::Infeasible => return Err(QptasError::Infeasible(padded.horizon)),
            }
        }
    };
    let final_schedule = repair_discarded(&outcome.schedule, &padded.instance);
    debug_assert!(validate(&padded.instance, &final_schedule).is_ok());
    debug_assert!(validate_partial(&padded.instance, &outcome.schedule).is_ok() || !outcome.audit.is_clean());
    let makespan_final_original =
        final_schedule.slots.iter().filter(|(j, _)| !padded.is_dummy(**j)).map(|(_, t)| *t).max().unwrap_or(0);
    Ok(QptasReport {
        horizon,
        padded_horizon: padded.horizon,
        original_n: padded.original_n,
        dummies: padded.dummies(),
        params: params.clone(),
        source: source.clone(),
        makespan_partial: outcome.schedule.makespan(),
        discards_type1: outcome.ledger.type1.len(),
        discards_type2: outcome.ledger.type2.len(),
        discarded_dummies: outcome.ledger.discarded().filter(|&j| padded.is_dummy(j)).count(),
        makespan_final: final_schedule.makespan(),
        makespan_final_original,
        conditionings: outcome.trace.total_conditionings(),
        partial: outcome.schedule,
        final_schedule,
        audit_counts: outcome.audit.by_kind(),
        ledger: outcome.ledger,
        audit: outcome.audit,
        trace: outcome.trace,
    })
}
