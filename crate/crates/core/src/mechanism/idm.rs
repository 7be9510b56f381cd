use std::collections::BTreeMap;

use super::{Allocation, MechanismError, MechanismKind, MechanismOutcome, PayoffBasis, SelectedPayoff, TieBreak};
use crate::net::{build_graph, AgentId, DiffusionGraph, ReportProfile, Scenario};
use crate::rational::Rational;

/// Information diffusion mechanism for the setting where every agent
/// performs at the single quality `q`.
///
/// Written in terms of reported costs (least cost wins) and the dominator
/// tree, independently of the PEV code path, so the two can be checked
/// against each other on degenerate scenarios. When no participant has cost
/// at most `q` the dummy agent wins and nobody is paid.
pub fn idm_run(scenario: &Scenario, reports: &ReportProfile, q: Rational) -> Result<MechanismOutcome, MechanismError> {
    idm_run_with(scenario, reports, q, TieBreak::SmallestId)
}

pub(crate) fn idm_run_with(
    scenario: &Scenario,
    reports: &ReportProfile,
    q: Rational,
    tie_break: TieBreak,
) -> Result<MechanismOutcome, MechanismError> {
    require_point_masses(MechanismKind::Idm, scenario, reports, q)?;
    let graph = build_graph(scenario, reports)?;
    let costs: BTreeMap<AgentId, Rational> = reports
        .iter()
        .filter_map(|(id, r)| r.declaration().map(|d| (id, d.cost)))
        .collect();

    let participants = graph.participants();
    let Some((champion, least_cost)) = least_cost(&participants, &costs, None, tie_break) else {
        return Ok(MechanismOutcome::null(MechanismKind::Idm));
    };
    if least_cost > q {
        return Ok(MechanismOutcome::null(MechanismKind::Idm));
    }

    let sequence = graph.critical_sequence_fast(champion)?;
    let w: Vec<Rational> = sequence
        .order
        .iter()
        .map(|&i| welfare_without(&graph, &costs, i, q))
        .collect();

    let m = sequence.len();
    let mut chosen = None;
    for k in 0..m - 1 {
        let id = sequence.order[k];
        if chosen.is_none() && costs.get(&id).is_some_and(|c| q - *c == w[k + 1]) {
            chosen = Some(k);
        }
    }
    let t = chosen.unwrap_or(m - 1);

    let mut transfers = BTreeMap::new();
    for (k, &id) in sequence.order.iter().enumerate() {
        if k < t {
            transfers.insert(id, w[k + 1] - w[k]);
        } else if k > t {
            transfers.insert(id, Rational::ZERO);
        }
    }
    let selected = sequence.order[t];
    Ok(MechanismOutcome {
        mechanism: MechanismKind::Idm,
        allocation: Allocation {
            selected: Some(selected),
        },
        welfare_champion: Some(champion),
        w_values: sequence.order.iter().copied().zip(w.iter().copied()).collect(),
        selected_index: Some(t + 1),
        transfers,
        selected_payoff: Some(SelectedPayoff {
            agent: selected,
            basis: PayoffBasis::RealizedQuality,
            offset: w[t],
        }),
        sequence: Some(sequence),
    })
}

/// Smallest reported cost among `candidates` reachable without `excluded`.
fn least_cost(
    candidates: &std::collections::BTreeSet<AgentId>,
    costs: &BTreeMap<AgentId, Rational>,
    excluded: Option<AgentId>,
    tie_break: TieBreak,
) -> Option<(AgentId, Rational)> {
    let priced: Vec<(AgentId, Rational)> = candidates
        .iter()
        .filter(|&&id| Some(id) != excluded)
        .filter_map(|&id| costs.get(&id).map(|&c| (id, c)))
        .collect();
    let min = priced.iter().map(|&(_, c)| c).min()?;
    let tied: Vec<AgentId> = priced.iter().filter(|&&(_, c)| c == min).map(|&(id, _)| id).collect();
    Some((tie_break.choose(&tied), min))
}

/// Best welfare `q − c` once `removed` leaves the network, or zero (dummy).
fn welfare_without(
    graph: &DiffusionGraph,
    costs: &BTreeMap<AgentId, Rational>,
    removed: AgentId,
    q: Rational,
) -> Rational {
    let skip = graph.vertex_of(removed);
    let reach = graph.reachable_without(skip);
    let reachable = (1..graph.len()).filter(|&v| reach[v]).map(|v| graph.id_at(v)).collect();
    least_cost(&reachable, costs, Some(removed), TieBreak::SmallestId)
        .map_or(Rational::ZERO, |(_, c)| (q - c).max(Rational::ZERO))
}

/// IDM and VCG precondition: true and reported PoQs are all the point mass at `q`.
pub(crate) fn require_point_masses(
    kind: MechanismKind,
    scenario: &Scenario,
    reports: &ReportProfile,
    q: Rational,
) -> Result<(), MechanismError> {
    for (&id, ty) in scenario.agents() {
        if ty.pmf.as_point() != Some(q) {
            return Err(MechanismError::NonDegenerate {
                mechanism: kind,
                agent: id,
            });
        }
    }
    for (id, report) in reports.iter() {
        if let Some(d) = report.declaration() {
            if d.pmf.as_point() != Some(q) {
                return Err(MechanismError::NonDegenerate {
                    mechanism: kind,
                    agent: id,
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{AgentType, Node};
    use crate::poq::Pmf;
    use crate::rational::rat;

    #[test]
    fn dummy_agent_wins_when_everyone_costs_more_than_q() {
        let sc = Scenario::new(
            [AgentId(1)],
            [(AgentId(1), AgentType::new(Pmf::point(rat(1, 1)), rat(3, 2), []))],
            [rat(1, 1)],
        )
        .unwrap();
        assert!(idm_run(&sc, &sc.truthful(), rat(1, 1)).unwrap().is_null());
    }

    #[test]
    fn rejects_non_degenerate_poq() {
        let pmf = Pmf::new([(rat(1, 1), rat(1, 2)), (rat(2, 1), rat(1, 2))]).unwrap();
        let sc = Scenario::new(
            [AgentId(1)],
            [(AgentId(1), AgentType::new(pmf, Rational::ZERO, [Node::Requester]))],
            [rat(1, 1), rat(2, 1)],
        )
        .unwrap();
        assert!(matches!(
            idm_run(&sc, &sc.truthful(), rat(1, 1)),
            Err(MechanismError::NonDegenerate { agent: AgentId(1), .. })
        ));
    }
}
