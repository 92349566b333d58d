use precsched::baseline::{list_schedule, lower_bounds};
use precsched::instance::{generate, Model};
use precsched::laminar::{pad_to_power_of_two, Block, LaminarFamily};
use precsched::lp::{build_time_indexed_lp, lp_min_makespan, solve_feasibility};
use precsched::oracle::{exact_makespan, naive_makespan, validate, Schedule};
use precsched::qptas::repair_discarded;
use precsched::{Instance, Rational};
use proptest::prelude::*;

fn instance(max_n: usize) -> impl Strategy<Value = Instance> {
    (1..=max_n, 1usize..=3, 0usize..4, any::<u64>()).prop_map(|(n, m, p, seed)| {
        let p = [(1, 5), (1, 3), (1, 2), (2, 3)][p];
        generate(Model::Gnp, n, m, &Rational::new(p.0.into(), p.1.into()), seed).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn list_sits_between_bounds(inst in instance(10)) {
        let (opt, sched) = exact_makespan(&inst).unwrap();
        let list = list_schedule(&inst);
        prop_assert!(validate(&inst, &sched).is_ok());
        prop_assert!(validate(&inst, &list).is_ok());
        prop_assert_eq!(sched.makespan(), opt);
        prop_assert!(lower_bounds(&inst).best() <= opt);
        prop_assert!(opt <= list.makespan());
        prop_assert!(inst.m() * list.makespan() <= (2 * inst.m() - 1) * opt);
    }

    #[test]
    fn search_agrees_with_brute_force(inst in instance(7)) {
        prop_assert_eq!(exact_makespan(&inst).unwrap().0, naive_makespan(&inst));
    }

    #[test]
    fn lp_is_a_relaxation(inst in instance(7)) {
        let (opt, _) = exact_makespan(&inst).unwrap();
        prop_assert!(lp_min_makespan(&inst) <= opt);
        prop_assert!(solve_feasibility(&build_time_indexed_lp::<Rational>(&inst, opt).0).is_feasible());
    }

    #[test]
    fn repair_completes_any_partial(inst in instance(9), mask in any::<u16>()) {
        let (_, sched) = exact_makespan(&inst).unwrap();
        let mut partial = sched.clone();
        for j in inst.jobs().filter(|j| mask >> (j - 1) & 1 == 1) {
            partial.discard(j);
        }
        let fixed = repair_discarded(&partial, &inst);
        prop_assert!(validate(&inst, &fixed).is_ok());
        prop_assert!(fixed.makespan() <= partial.makespan() + partial.discarded.len());
    }

    #[test]
    fn padding_keeps_the_optimum_tight(inst in instance(8)) {
        let (opt, _) = exact_makespan(&inst).unwrap();
        let padded = pad_to_power_of_two(&inst, opt);
        prop_assert!(padded.horizon.is_power_of_two() && padded.horizon >= opt && padded.horizon < 2 * opt);
        prop_assume!(padded.instance.n() <= 20);
        prop_assert_eq!(exact_makespan(&padded.instance).unwrap().0, padded.horizon);
    }

    #[test]
    fn laminar_children_split_the_parent(depth in 0usize..6, pick in any::<u64>()) {
        let fam = LaminarFamily::new(1 << depth);
        let level = (pick as usize) % (depth + 1);
        let b = Block { level, index: 1 + (pick as usize >> 8) % (1 << level) };
        let (lo, hi) = fam.span(b);
        let mid = fam.midpoint(b);
        prop_assert!(lo <= mid && mid <= hi);
        for t in lo..=hi {
            prop_assert_eq!(fam.block_of(level, t), b);
        }
        if let Some((l, r)) = fam.children(b) {
            prop_assert_eq!(fam.span(l), (lo, mid));
            prop_assert_eq!(fam.span(r), (mid + 1, hi));
            prop_assert_eq!(fam.parent(l), Some(b));
            prop_assert_eq!(fam.parent(r), Some(b));
        } else {
            prop_assert_eq!(lo, hi);
        }
    }

    #[test]
    fn schedules_round_trip_through_json(inst in instance(10)) {
        let sched = list_schedule(&inst);
        let text = serde_json::to_string(&sched).unwrap();
        prop_assert_eq!(serde_json::from_str::<Schedule>(&text).unwrap(), sched);
    }
}
