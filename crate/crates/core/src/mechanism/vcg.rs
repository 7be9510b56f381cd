use std::collections::BTreeMap;

use super::idm::require_point_masses;
use super::{
    Allocation, MechanismError, MechanismKind, MechanismOutcome, PayoffBasis, Prepared, SelectedPayoff, TieBreak,
};
use crate::net::{ReportProfile, Scenario};
use crate::rational::Rational;

/// VCG on the diffusion graph with a common quality `q`.
///
/// The least-cost participant wins. Each participant `i` is paid
/// `W + πᵢ c′ᵢ − wᵢ`, where `W = q − c′_winner` and `wᵢ` is the best welfare
/// once `i` leaves the network (taking everyone only it reached).
/// Conduits that uniquely connect the winner are paid their externality,
/// which can push the requester into deficit.
pub fn vcg_run(scenario: &Scenario, reports: &ReportProfile, q: Rational) -> Result<MechanismOutcome, MechanismError> {
    vcg_run_with(scenario, reports, q, TieBreak::SmallestId)
}

pub(crate) fn vcg_run_with(
    scenario: &Scenario,
    reports: &ReportProfile,
    q: Rational,
    tie_break: TieBreak,
) -> Result<MechanismOutcome, MechanismError> {
    require_point_masses(MechanismKind::Vcg, scenario, reports, q)?;
    let prepared = Prepared::new(scenario, reports, |d| q - d.cost)?;
    let graph = &prepared.graph;
    let (winner, welfare) = prepared.best(None, tie_break);
    let Some(winner) = winner.filter(|_| !welfare.is_negative()) else {
        return Ok(MechanismOutcome::null(MechanismKind::Vcg));
    };
    let winner_id = graph.id_at(winner);

    let reach = graph.reachable_without(None);
    let mut w_values = BTreeMap::new();
    let mut transfers = BTreeMap::new();
    let mut winner_offset = Rational::ZERO;
    for v in (1..graph.len()).filter(|&v| reach[v]) {
        let id = graph.id_at(v);
        let w = prepared.floored_best(Some(v));
        w_values.insert(id, w);
        if v == winner {
            winner_offset = w;
        } else {
            transfers.insert(id, welfare - w);
        }
    }

    Ok(MechanismOutcome {
        mechanism: MechanismKind::Vcg,
        allocation: Allocation {
            selected: Some(winner_id),
        },
        welfare_champion: Some(winner_id),
        sequence: None,
        w_values,
        selected_index: None,
        transfers,
        selected_payoff: Some(SelectedPayoff {
            agent: winner_id,
            basis: PayoffBasis::RealizedQuality,
            offset: winner_offset,
        }),
    })
}
