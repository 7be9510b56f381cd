use std::collections::BTreeMap;

use super::{
    Allocation, MechanismError, MechanismKind, MechanismOutcome, PayoffBasis, PayoffVector, Prepared, SelectedPayoff,
    TieBreak,
};
use crate::net::{ReportProfile, Scenario};
use crate::rational::Rational;

/// Allocation phase of the PEV-based diffusion mechanism, smallest-id ties.
pub fn pev_allocate(scenario: &Scenario, reports: &ReportProfile) -> Result<MechanismOutcome, MechanismError> {
    pev_allocate_with(scenario, reports, TieBreak::SmallestId)
}

pub fn pev_allocate_with(
    scenario: &Scenario,
    reports: &ReportProfile,
    tie_break: TieBreak,
) -> Result<MechanismOutcome, MechanismError> {
    sequence_mechanism(MechanismKind::Pev, scenario, reports, tie_break)
}

/// Payoff phase: `w_{i_{k+1}} − w_{i_k}` for `k < t`, `q_π − w_{i_t}` for the
/// selected agent, zero for everyone else.
pub fn pev_payoffs(outcome: &MechanismOutcome, realized_quality: Rational) -> PayoffVector {
    outcome.payoffs(realized_quality)
}

/// The quality-aware IDM: PEV's allocation, but the selected agent is paid
/// `E_{f′}[Q] − w_{i_t}` from its own report. Use
/// [`MechanismOutcome::payoffs`] for the payoff vector at a realized quality.
pub fn qaidm_run(scenario: &Scenario, reports: &ReportProfile) -> Result<MechanismOutcome, MechanismError> {
    qaidm_run_with(scenario, reports, TieBreak::SmallestId)
}

pub(crate) fn qaidm_run_with(
    scenario: &Scenario,
    reports: &ReportProfile,
    tie_break: TieBreak,
) -> Result<MechanismOutcome, MechanismError> {
    sequence_mechanism(MechanismKind::Qaidm, scenario, reports, tie_break)
}

fn sequence_mechanism(
    kind: MechanismKind,
    scenario: &Scenario,
    reports: &ReportProfile,
    tie_break: TieBreak,
) -> Result<MechanismOutcome, MechanismError> {
    let prepared = Prepared::new(scenario, reports, |d| d.expected_welfare())?;
    let graph = &prepared.graph;

    // Step 1: welfare champion over participants.
    let (champion, champion_welfare) = prepared.best(None, tie_break);
    let Some(champion) = champion.filter(|_| !champion_welfare.is_negative()) else {
        return Ok(MechanismOutcome::null(kind));
    };
    let champion_id = graph.id_at(champion);

    // Steps 2-3: critical sequence and w for each member.
    let sequence = graph.critical_sequence(champion_id)?;
    let vertices: Vec<usize> = sequence
        .order
        .iter()
        .map(|&id| graph.vertex_of(id).expect("sequence members are graph vertices"))
        .collect();
    let w: Vec<Rational> = vertices.iter().map(|&v| prepared.floored_best(Some(v))).collect();

    // Step 4: first member whose own welfare equals the next member's w.
    let m = vertices.len();
    let t = (0..m - 1)
        .find(|&k| prepared.welfare[vertices[k]] == Some(w[k + 1]))
        .unwrap_or(m - 1);

    let selected = sequence.order[t];
    let mut transfers = BTreeMap::new();
    for k in 0..t {
        transfers.insert(sequence.order[k], w[k + 1] - w[k]);
    }
    for k in t + 1..m {
        transfers.insert(sequence.order[k], Rational::ZERO);
    }
    let basis = match kind {
        MechanismKind::Qaidm => {
            let declared = reports
                .declaration(selected)
                .expect("the selected agent declared a type");
            PayoffBasis::ReportedExpectation(declared.pmf.expectation())
        }
        _ => PayoffBasis::RealizedQuality,
    };

    Ok(MechanismOutcome {
        mechanism: kind,
        allocation: Allocation {
            selected: Some(selected),
        },
        welfare_champion: Some(champion_id),
        w_values: sequence.order.iter().copied().zip(w.iter().copied()).collect(),
        selected_index: Some(t + 1),
        transfers,
        selected_payoff: Some(SelectedPayoff {
            agent: selected,
            basis,
            offset: w[t],
        }),
        sequence: Some(sequence),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{AgentId, AgentType, Node};
    use crate::poq::Pmf;
    use crate::rational::rat;

    fn a(k: u32) -> AgentId {
        AgentId(k)
    }

    fn point_agents(requester: &[u32], agents: &[(u32, Rational, &[u32])], q: Rational) -> Scenario {
        Scenario::new(
            requester.iter().map(|&k| a(k)),
            agents.iter().map(|&(id, cost, out)| {
                (
                    a(id),
                    AgentType::new(Pmf::point(q), cost, out.iter().map(|&k| Node::Agent(a(k)))),
                )
            }),
            [q],
        )
        .unwrap()
    }

    #[test]
    fn single_agent_is_selected_with_zero_w() {
        let sc = point_agents(&[1], &[(1, rat(1, 2), &[])], rat(1, 1));
        let out = pev_allocate(&sc, &sc.truthful()).unwrap();
        assert_eq!(out.selected(), Some(a(1)));
        assert_eq!(out.w(a(1)), Some(Rational::ZERO));
        assert_eq!(out.selected_index, Some(1));
        let p = pev_payoffs(&out, rat(1, 1));
        assert_eq!(p.get(a(1)), rat(1, 1));
        assert_eq!(p.requester_utility, Rational::ZERO);
    }

    #[test]
    fn conduit_selected_when_its_welfare_matches_next_w() {
        // s -> 1 -> 2 with c1 = 2/5, c2 = 1/10, q = 1.
        let sc = point_agents(&[1], &[(1, rat(2, 5), &[2]), (2, rat(1, 10), &[1])], rat(1, 1));
        let out = pev_allocate(&sc, &sc.truthful()).unwrap();
        assert_eq!(out.welfare_champion, Some(a(2)));
        assert_eq!(out.sequence.as_ref().unwrap().order, vec![a(1), a(2)]);
        assert_eq!(out.w(a(1)), Some(Rational::ZERO));
        assert_eq!(out.w(a(2)), Some(rat(3, 5)));
        assert_eq!(out.selected_index, Some(1));
        assert_eq!(out.selected(), Some(a(1)));
        let p = pev_payoffs(&out, rat(1, 1));
        assert_eq!(p.get(a(1)), rat(1, 1));
        assert_eq!(p.get(a(2)), Rational::ZERO);
        assert_eq!(p.requester_utility, Rational::ZERO);
    }

    #[test]
    fn all_negative_welfare_yields_null_outcome() {
        let sc = point_agents(&[1, 2], &[(1, rat(2, 1), &[]), (2, rat(3, 1), &[])], rat(1, 1));
        let out = pev_allocate(&sc, &sc.truthful()).unwrap();
        assert!(out.is_null());
        let p = pev_payoffs(&out, rat(1, 1));
        assert!(p.payoffs.is_empty());
        assert_eq!(p.requester_utility, Rational::ZERO);
    }

    #[test]
    fn nobody_participates_when_requester_has_no_neighbours() {
        let sc = point_agents(&[], &[(1, Rational::ZERO, &[])], rat(1, 1));
        assert!(pev_allocate(&sc, &sc.truthful()).unwrap().is_null());
    }

    #[test]
    fn seeded_ties_are_reproducible_and_smallest_id_is_default() {
        let sc = point_agents(
            &[1, 2, 3],
            &[(1, rat(1, 2), &[]), (2, rat(1, 2), &[]), (3, rat(1, 2), &[])],
            rat(1, 1),
        );
        let default = pev_allocate(&sc, &sc.truthful()).unwrap();
        assert_eq!(default.selected(), Some(a(1)));
        let seeded = |seed| pev_allocate_with(&sc, &sc.truthful(), TieBreak::Seeded(seed)).unwrap();
        assert_eq!(seeded(9), seeded(9));
        let picks: std::collections::BTreeSet<_> = (0..64).map(|s| seeded(s).selected().unwrap()).collect();
        assert_eq!(picks.len(), 3);
    }

    #[test]
    fn qaidm_pays_on_the_report() {
        let sc = Scenario::new(
            [a(1), a(2)],
            [
                (a(1), AgentType::new(Pmf::point(rat(1, 1)), Rational::ZERO, [])),
                (a(2), AgentType::new(Pmf::point(rat(5, 1)), Rational::ZERO, [])),
            ],
            [rat(1, 1), rat(5, 1), rat(10, 1)],
        )
        .unwrap();
        let truthful = qaidm_run(&sc, &sc.truthful()).unwrap();
        assert_eq!(truthful.selected(), Some(a(2)));
        assert_eq!(truthful.payoffs(rat(5, 1)).get(a(2)), rat(4, 1));

        let mut lie = sc.truthful();
        let mut d = lie.declaration(a(1)).unwrap().clone();
        d.pmf = Pmf::point(rat(10, 1));
        lie.set(a(1), crate::net::Report::Declared(d));
        let out = qaidm_run(&sc, &lie).unwrap();
        assert_eq!(out.selected(), Some(a(1)));
        let p = out.payoffs(rat(1, 1));
        assert_eq!(p.get(a(1)), rat(5, 1));
        assert_eq!(p.requester_utility, rat(-4, 1));
    }
}
