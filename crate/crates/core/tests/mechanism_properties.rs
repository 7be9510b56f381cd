//! Invariants of the mechanisms on random scenarios, under truthful reports
//! and under random misreport profiles.

use proptest::prelude::*;
use taskdiff_core::audit::{expected_utility_oracle, random_contexts, requester_utility_oracle, DeviationGrid};
use taskdiff_core::generate::{generate, GenConfig, QualityLevels};
use taskdiff_core::{
    build_graph, efficient_allocation, expected_utilities, rat, run_trials, Mechanism, MechanismKind, Rational, Report,
    ReportProfile, Scenario,
};

fn config() -> impl Strategy<Value = GenConfig> {
    (
        1usize..=9,
        1usize..=4,
        0.0f64..0.6,
        prop::sample::select(vec![1i128, 2, 10]),
        any::<u64>(),
    )
        .prop_map(|(agents, levels, density, top, seed)| GenConfig {
            agents,
            quality_levels: QualityLevels::Count(levels.min(top as usize * 10 + 1)),
            max_quality: Rational::from_integer(top),
            density,
            max_support: 4,
            seed,
        })
}

/// A scenario and a report profile: truthful, or with some agents
/// misreporting on a coarse grid.
fn case() -> impl Strategy<Value = (Scenario, ReportProfile)> {
    (config(), any::<bool>(), any::<u64>()).prop_map(|(c, truthful, seed)| {
        let (scenario, reports) = generate(&c).unwrap();
        if truthful {
            (scenario, reports)
        } else {
            let grid = DeviationGrid::standard(&scenario, rat(1, 5), seed);
            let ctx = random_contexts(&scenario, &grid, 1, seed).pop().unwrap();
            (scenario, ctx)
        }
    })
}

fn pev() -> Mechanism {
    Mechanism::new(MechanismKind::Pev)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn w_chain_is_nondecreasing((sc, reports) in case()) {
        for kind in [MechanismKind::Pev, MechanismKind::Qaidm] {
            let out = Mechanism::new(kind).run(&sc, &reports).unwrap();
            if let Some(seq) = &out.sequence {
                let w: Vec<Rational> = seq.order.iter().map(|id| out.w(*id).unwrap()).collect();
                prop_assert!(w.windows(2).all(|p| p[0] <= p[1]), "{w:?}");
                prop_assert!(w.iter().all(|x| !x.is_negative()));
            }
        }
    }

    #[test]
    fn requester_utility_is_first_w_at_every_quality((sc, reports) in case()) {
        let out = pev().run(&sc, &reports).unwrap();
        let first = out.first_w();
        prop_assert!(!first.is_negative());
        for &q in sc.quality_levels() {
            let p = out.payoffs(q);
            if out.is_null() {
                prop_assert_eq!(p.requester_utility, Rational::ZERO);
            } else {
                prop_assert_eq!(p.requester_utility, first);
            }
            // Budget identity.
            prop_assert_eq!(p.total() + p.requester_utility, if out.is_null() { Rational::ZERO } else { q });
        }
    }

    #[test]
    fn only_sequence_members_are_paid((sc, reports) in case()) {
        let graph = build_graph(&sc, &reports).unwrap();
        for kind in [MechanismKind::Pev, MechanismKind::Qaidm] {
            let out = Mechanism::new(kind).run(&sc, &reports).unwrap();
            for &q in sc.quality_levels() {
                let p = out.payoffs(q);
                for id in sc.agent_ids() {
                    let member = out.sequence.as_ref().is_some_and(|s| s.contains(id));
                    if !member {
                        prop_assert_eq!(p.get(id), Rational::ZERO);
                    }
                    if !graph.is_participant(id) {
                        prop_assert_eq!(p.get(id), Rational::ZERO);
                        prop_assert!(out.selected() != Some(id));
                    }
                }
                // Members after the selected one receive nothing.
                if let (Some(seq), Some(t)) = (&out.sequence, out.selected_index) {
                    for id in &seq.order[t..] {
                        prop_assert_eq!(p.get(*id), Rational::ZERO);
                    }
                }
            }
        }
    }

    #[test]
    fn selected_agent_is_the_first_whose_condition_holds((sc, reports) in case()) {
        let out = pev().run(&sc, &reports).unwrap();
        let (Some(seq), Some(t)) = (&out.sequence, out.selected_index) else {
            return Ok(());
        };
        let welfare = |k: usize| reports.declaration(seq.order[k]).unwrap().expected_welfare();
        let condition = |k: usize| welfare(k) == out.w(seq.order[k + 1]).unwrap();
        let m = seq.len();
        prop_assert!(t == m || condition(t - 1));
        prop_assert!((0..t - 1).all(|k| !condition(k)));
        prop_assert_eq!(seq.order.last().copied(), out.welfare_champion);
    }

    #[test]
    fn w_values_match_efficient_allocation_without_the_agent((sc, reports) in case()) {
        let out = pev().run(&sc, &reports).unwrap();
        for (&id, &w) in &out.w_values {
            let garbled = reports.with(id, Report::Nil).without(id);
            prop_assert_eq!(efficient_allocation(&sc, &garbled).unwrap().welfare, w);
        }
    }

    #[test]
    fn efficient_allocation_is_a_maximum((sc, reports) in case()) {
        let graph = build_graph(&sc, &reports).unwrap();
        let best = graph
            .participants()
            .into_iter()
            .filter_map(|id| reports.declaration(id).map(|d| d.expected_welfare()))
            .fold(Rational::ZERO, Rational::max);
        let eff = efficient_allocation(&sc, &reports).unwrap();
        prop_assert_eq!(eff.welfare, best);
        if let Some(id) = eff.allocation.selected {
            prop_assert_eq!(reports.declaration(id).unwrap().expected_welfare(), best);
        }
    }

    #[test]
    fn oracle_equals_analytic((sc, reports) in case()) {
        for kind in MechanismKind::ALL {
            let mech = Mechanism::new(kind);
            let Ok(out) = mech.run(&sc, &reports) else { continue };
            let analytic = expected_utilities(&sc, &reports, &out);
            for id in sc.agent_ids() {
                prop_assert_eq!(expected_utility_oracle(&sc, &reports, mech, id).unwrap(), analytic.get(id));
            }
            prop_assert_eq!(requester_utility_oracle(&sc, &reports, mech).unwrap(), analytic.requester);
        }
    }

    #[test]
    fn truthful_reporting_is_individually_rational(c in config()) {
        let (sc, reports) = generate(&c).unwrap();
        let out = pev().run(&sc, &reports).unwrap();
        let u = expected_utilities(&sc, &reports, &out);
        prop_assert!(u.agents.values().all(|x| !x.is_negative()));
        prop_assert!(!u.requester.is_negative());
    }

    #[test]
    fn own_report_perturbations_keep_payoff(
        (sc, reports) in case(),
        pick in any::<prop::sample::Index>(),
        shift in 1i128..5,
        lower in any::<bool>(),
    ) {
        let out = pev().run(&sc, &reports).unwrap();
        let Some(seq) = &out.sequence else { return Ok(()) };
        let id = seq.order[pick.index(seq.len())];
        let mut d = reports.declaration(id).unwrap().clone();
        let delta = rat(shift, 10);
        d.cost = if lower { (d.cost - delta).max(Rational::ZERO) } else { d.cost + delta };
        let moved = pev().run(&sc, &reports.with(id, Report::Declared(d))).unwrap();
        if moved.selected() == out.selected() && moved.sequence == out.sequence {
            for &q in sc.quality_levels() {
                prop_assert_eq!(moved.payoffs(q).get(id), out.payoffs(q).get(id));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn pev_and_idm_coincide_on_point_masses(mut c in config(), q in 1i128..=10) {
        c.quality_levels = QualityLevels::Explicit(vec![rat(q, 2)]);
        let (sc, reports) = generate(&c).unwrap();
        let a = pev().run(&sc, &reports).unwrap();
        let b = Mechanism::new(MechanismKind::Idm).run(&sc, &reports).unwrap();
        prop_assert_eq!(a.selected(), b.selected());
        prop_assert_eq!(&a.sequence, &b.sequence);
        prop_assert_eq!(&a.w_values, &b.w_values);
        prop_assert_eq!(a.payoffs(rat(q, 2)), b.payoffs(rat(q, 2)));
        prop_assert_eq!(expected_utilities(&sc, &reports, &a), expected_utilities(&sc, &reports, &b));
    }

    #[test]
    fn requester_utility_never_varies_across_trials(c in config(), seed in any::<u64>()) {
        let (sc, reports) = generate(&c).unwrap();
        let stats = run_trials(&sc, &reports, pev(), 200, seed).unwrap();
        prop_assert_eq!(stats.requester.variance, Rational::ZERO);
    }
}
