use super::*;
use crate::instance::{generate, Model};
use crate::oracle::exact_makespan;
use crate::sa::SaSolution;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn desk(m: usize, n: usize) -> Params {
    Params::desk(m, q(1, 2), 1, 3, q(1, 4), None, n).unwrap().with_base_threshold(2)
}

fn mixture(n: usize, horizon: usize, parts: &[(i64, &[(usize, usize)])]) -> Mixture<Rational> {
    let parts = parts.iter().map(|(w, s)| (q(*w, 1), Schedule::from_slots(s.iter().copied()))).collect();
    Mixture::new(TimeIndex::new(n, horizon), 1000, parts)
}

#[test]
fn chain_on_one_machine() {
    let inst = Instance::new(4, 1, [(1, 2), (2, 3), (3, 4)]).unwrap();
    let r = run_qptas(&inst, 4, &desk(1, 4), &Source::Mixture { samples: 3, seed: 1 }).unwrap();
    assert_eq!(r.discards(), 0);
    assert_eq!(r.final_schedule, Schedule::from_slots([(1, 1), (2, 2), (3, 3), (4, 4)]));
    assert!(r.audit.is_clean());
}

#[test]
fn integral_start_needs_no_conditioning() {
    let inst = Instance::new(3, 2, [(1, 3)]).unwrap();
    let sched: &[(usize, usize)] = &[(1, 1), (2, 5), (3, 6)];
    let sol = mixture(3, 8, &[(1, sched)]);
    let out = schedule_qptas(&inst, sol, &desk(2, 3)).unwrap();
    assert_eq!(out.schedule, Schedule::from_slots(sched.iter().copied()));
    assert_eq!(out.trace.total_conditionings(), 0);
    assert!(out.audit.is_clean());
}

#[test]
fn base_case_picks_smallest_fractional_slot() {
    let sol = mixture(1, 4, &[(1, &[(1, 2)]), (1, &[(1, 3)])]);
    let (sched, conds) = base_case_integralize(sol, &[1], (1, 4), |s, v| Ok(s.condition_on_var(v)?)).unwrap();
    assert_eq!(conds, 1);
    assert_eq!(sched.slot(1), Some(2));
}

#[test]
fn long_chain_is_pushed_right() {
    let inst = Instance::new(3, 1, [(1, 2), (2, 3)]).unwrap();
    let sol = mixture(3, 8, &[(1, &[(1, 1), (2, 2), (3, 3)]), (1, &[(1, 5), (2, 6), (3, 7)])]);
    let out = schedule_qptas(&inst, sol, &desk(1, 3)).unwrap();
    assert!(out.audit.is_clean(), "{:?}", out.audit);
    let root = &out.trace.nodes[0];
    assert_eq!(root.conditionings(), 1);
    assert_eq!(out.schedule, Schedule::from_slots([(1, 5), (2, 6), (3, 7)]));
}

#[test]
fn budget_is_enforced() {
    let inst = Instance::new(1, 1, []).unwrap();
    let sol = mixture(1, 2, &[(1, &[(1, 1)]), (1, &[(1, 2)])]);
    let err = schedule_qptas(&inst, sol, &desk(1, 1).with_budget(0)).unwrap_err();
    assert!(matches!(err, QptasError::BudgetExhausted { .. }));
}

#[test]
fn paper_mode_runs_as_one_base_case() {
    let inst = Instance::new(5, 2, [(1, 3), (2, 3), (3, 4)]).unwrap();
    let (opt, _) = exact_makespan(&inst).unwrap();
    let params = Params::paper(2, q(1, 2), 5).unwrap();
    let r = run_qptas(&inst, opt, &params, &Source::Mixture { samples: 4, seed: 3 }).unwrap();
    assert_eq!(r.trace.nodes.len(), 1);
    assert_eq!(r.discards(), 0);
    assert!(validate(&inst.clone(), &Schedule::from_slots(r.final_schedule.slots.iter().filter(|(j, _)| **j <= 5).map(|(j, t)| (*j, *t)))).is_ok());
}

#[test]
fn explicit_lift_source() {
    let inst = Instance::new(2, 1, []).unwrap();
    let r = run_qptas(&inst, 2, &desk(1, 2), &Source::Lift { level: 1, cap: 10_000 }).unwrap();
    assert!(r.audit.is_clean());
    assert_eq!(r.makespan_final, 2);
}

#[test]
fn lifted_and_mixture_backends_agree() {
    let inst = Instance::new(3, 1, [(1, 2), (2, 3)]).unwrap();
    let sol = mixture(3, 8, &[(1, &[(1, 1), (2, 2), (3, 3)]), (2, &[(1, 5), (2, 6), (3, 7)]), (1, &[(1, 2), (2, 4), (3, 8)])]);
    let explicit: SaSolution<Rational> = sol.materialize(4);
    let a = schedule_qptas(&inst, sol, &desk(1, 3)).unwrap();
    let b = schedule_qptas(&inst, explicit, &desk(1, 3)).unwrap();
    assert_eq!(a.schedule, b.schedule);
    assert_eq!(a.trace, b.trace);
}

#[test]
fn seeded_batch_stays_within_bounds() {
    for seed in 0..24u64 {
        let m = 2 + (seed as usize % 2);
        let n = 6 + (seed as usize % 5);
        let inst = generate(Model::Gnp, n, m, &q(2, 5), seed).unwrap();
        let (opt, _) = exact_makespan(&inst).unwrap();
        let r = run_qptas(&inst, opt, &desk(m, n), &Source::Mixture { samples: 4, seed }).unwrap();
        let padded = pad_to_power_of_two(&inst, opt);
        assert!(validate_partial(&padded.instance, &r.partial).is_ok());
        assert!(validate(&padded.instance, &r.final_schedule).is_ok());
        assert!(r.makespan_final <= padded.horizon + r.discards(), "seed {seed}");
        assert!(r.audit.is_clean(), "seed {seed}: {:?}", r.audit);
    }
}

#[test]
fn heavy_batches_trigger_type2() {
    // Supports: jobs 1 and 6 straddle the root midpoint, 2 and 3 a level-1
    // midpoint, 5 a level-2 midpoint. With ε' = 1/16 no batch is good.
    let inst = Instance::new(8, 1, []).unwrap();
    let identity: Vec<(usize, usize)> = (1..=8).map(|j| (j, j)).collect();
    let shuffled = [(1, 5), (2, 3), (3, 2), (4, 4), (5, 6), (6, 1), (7, 7), (8, 8)];
    let sol = mixture(8, 8, &[(1, &identity), (1, &shuffled)]);
    let params = Params::desk(1, q(1, 2), 1, 3, q(1, 1), None, 8).unwrap().with_base_threshold(2);
    let out = schedule_qptas(&inst, sol, &params).unwrap();
    assert!(out.audit.is_clean(), "{:?}", out.audit);
    match &out.trace.nodes[0].step {
        NodeStep::Type2 { batch_counts, discarded, charged, .. } => {
            assert_eq!(batch_counts, &vec![2, 2, 1]);
            assert_eq!((*discarded, *charged), (4, 1));
        }
        other => panic!("expected a type-2 root, got {other:?}"),
    }
    assert_eq!(out.ledger.type2.keys().copied().collect::<Vec<_>>(), vec![1, 2, 3, 6]);
    assert_eq!(out.ledger.charges.get(&5), Some(&1));
    let full = repair_discarded(&out.schedule, &inst);
    assert!(validate(&inst, &full).is_ok());
    assert!(full.makespan() <= 8 + 4);
}
