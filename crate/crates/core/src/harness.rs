//! Experiment drivers: the LP integrality-gap search and the per-instance
//! method comparison.

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::baseline::list_schedule;
use crate::instance::{generate, Instance, Model};
use crate::lp::{build_time_indexed_lp, lp_min_makespan_with_point, point_entries, solve_feasibility, LpOutcome};
use crate::oracle::{exact_makespan, validate, OracleError, Schedule};
use crate::qptas::{run_qptas, Params, QptasError, Source};
use crate::sa::{sa_min_makespan, SaCertificate, SaError};

pub const SCHEMA: &str = "precsched/1";

/// Edge densities cycled through by the gap search.
pub const GAP_DENSITIES: [(i64, i64); 3] = [(2, 5), (1, 2), (3, 5)];

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Sa(#[from] SaError),
    #[error(transparent)]
    Qptas(#[from] QptasError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GapSearchConfig {
    pub m: usize,
    pub n_max: usize,
    pub trials: usize,
    pub seed: u64,
    /// Also compute the level-`s` lift minimum on every LP-gap instance.
    pub sa_rounds: Option<usize>,
    pub lift_cap: usize,
}

/// Trial `x` uses `n = n_max − (x mod 3)`, density
/// `GAP_DENSITIES[(x / 3) mod 3]` and its own instance seed.
pub fn gap_trial(cfg: &GapSearchConfig, x: usize) -> (usize, BigRational, u64) {
    let n = cfg.n_max.saturating_sub(x % 3).max(1);
    let (a, b) = GAP_DENSITIES[(x / 3) % 3];
    let seed = cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(x as u64);
    (n, BigRational::new(a.into(), b.into()), seed)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaCheck {
    pub rounds: usize,
    pub t_min: usize,
    pub certificate: SaCertificate,
    pub solves: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapWitness {
    pub trial: usize,
    pub n: usize,
    #[serde(serialize_with = "crate::scalar::serialize_rational")]
    pub p: BigRational,
    pub instance_seed: u64,
    pub instance: Instance,
    pub lp_min: usize,
    pub opt: usize,
    #[serde(serialize_with = "crate::scalar::serialize_rational")]
    pub ratio: BigRational,
    /// Nonzero entries `(job, slot, value)` of the LP point at `lp_min`.
    pub lp_point: Vec<(usize, usize, String)>,
    pub schedule: Schedule,
    /// Re-verification: the LP is infeasible one below `lp_min`, feasible at
    /// it, and a fresh oracle run reproduces `opt` with a valid schedule.
    pub verified: bool,
    pub sa: Option<SaCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub config: GapSearchConfig,
    pub checked: usize,
    pub witnesses: Vec<GapWitness>,
    /// `OPT / lp_min` maximised over all trials; `1` with no witness.
    #[serde(serialize_with = "crate::scalar::serialize_rational")]
    pub max_ratio: BigRational,
    /// Trials whose lift minimum is still below OPT (only with `sa_rounds`).
    pub sa_gaps: Option<Vec<usize>>,
}

fn lp_feasible(inst: &Instance, horizon: usize) -> bool {
    horizon > 0 && matches!(solve_feasibility(&build_time_indexed_lp::<BigRational>(inst, horizon).0), LpOutcome::Feasible(_))
}

fn verify_witness(inst: &Instance, lp_min: usize, opt: usize) -> Result<bool, HarnessError> {
    let (again, sched) = exact_makespan(inst)?;
    let oracle_ok = again == opt && validate(inst, &sched).is_ok() && sched.makespan() == opt;
    let lp_ok = lp_feasible(inst, lp_min) && !lp_feasible(inst, lp_min - 1);
    Ok(oracle_ok && lp_ok && lp_min < opt)
}

fn run_trial(cfg: &GapSearchConfig, x: usize) -> Result<Option<GapWitness>, HarnessError> {
    let (n, p, seed) = gap_trial(cfg, x);
    let inst = generate(Model::Gnp, n, cfg.m, &p, seed).map_err(|e| HarnessError::Invalid(e.to_string()))?;
    let (opt, schedule) = exact_makespan(&inst)?;
    let (lp_min, point) = lp_min_makespan_with_point(&inst);
    if lp_min >= opt {
        return Ok(None);
    }
    let idx = build_time_indexed_lp::<BigRational>(&inst, lp_min).1;
    let verified = verify_witness(&inst, lp_min, opt)?;
    let sa = match cfg.sa_rounds {
        Some(rounds) => {
            let r = sa_min_makespan(&inst, rounds, Some(&schedule), cfg.lift_cap)?;
            Some(SaCheck { rounds, t_min: r.t_min, certificate: r.certificate, solves: r.solves })
        }
        None => None,
    };
    Ok(Some(GapWitness {
        trial: x,
        n,
        p,
        instance_seed: seed,
        lp_point: point_entries(&idx, &point),
        instance: inst,
        lp_min,
        opt,
        ratio: BigRational::new(opt.into(), lp_min.into()),
        schedule,
        verified,
        sa,
    }))
}

/// Samples `trials` seeded random instances and keeps those whose LP minimum
/// is below the optimum. Trials run in parallel; output is in trial order.
pub fn gap_search(cfg: &GapSearchConfig) -> Result<GapReport, HarnessError> {
    let results: Vec<Result<Option<GapWitness>, HarnessError>> =
        (0..cfg.trials).into_par_iter().map(|x| run_trial(cfg, x)).collect();
    let mut witnesses = Vec::new();
    for r in results {
        if let Some(w) = r? {
            witnesses.push(w);
        }
    }
    let max_ratio = witnesses.iter().map(|w| w.ratio.clone()).max().unwrap_or_else(|| BigRational::from_integer(1.into()));
    // Without an LP gap the lift minimum is squeezed to OPT, so only
    // witnesses can show a lift gap.
    let sa_gaps = cfg
        .sa_rounds
        .map(|_| witnesses.iter().filter(|w| w.sa.as_ref().is_some_and(|s| s.t_min < w.opt)).map(|w| w.trial).collect());
    Ok(GapReport { config: cfg.clone(), checked: cfg.trials, witnesses, max_ratio, sa_gaps })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub n: usize,
    pub m: usize,
    pub opt: usize,
    pub list: usize,
    pub lp: usize,
    pub sa1: usize,
    pub qptas_final: usize,
    /// Final makespan counting only the original (unpadded) jobs.
    pub qptas_final_original: usize,
    pub qptas_discards: usize,
    pub qptas_audit_clean: bool,
}

/// One row of every method on `inst`. The rounding runs at `T = OPT`.
pub fn compare(inst: &Instance, params: &Params, source: &Source, lift_cap: usize) -> Result<CompareRow, HarnessError> {
    let (opt, sched) = exact_makespan(inst)?;
    let list = list_schedule(inst).makespan();
    let (lp, _) = lp_min_makespan_with_point(inst);
    let sa1 = sa_min_makespan(inst, 1, Some(&sched), lift_cap)?.t_min;
    let q = run_qptas(inst, opt, params, source)?;
    Ok(CompareRow {
        n: inst.n(),
        m: inst.m(),
        opt,
        list,
        lp,
        sa1,
        qptas_final: q.makespan_final,
        qptas_final_original: q.makespan_final_original,
        qptas_discards: q.discards(),
        qptas_audit_clean: q.audit.is_clean(),
    })
}
