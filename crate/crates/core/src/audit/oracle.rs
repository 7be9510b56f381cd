//! Brute-force expected utilities: run the mechanism once, then enumerate
//! every quality the selected agent can actually deliver.

use crate::mechanism::{Mechanism, MechanismError, MechanismOutcome};
use crate::net::{AgentId, ReportProfile, Scenario};
use crate::rational::Rational;

/// `E_{f_sel}[uᵢ]` under `reports`, with true costs and the selected agent's
/// true PoQ.
pub fn expected_utility_oracle(
    scenario: &Scenario,
    reports: &ReportProfile,
    mechanism: Mechanism,
    agent: AgentId,
) -> Result<Rational, MechanismError> {
    let outcome = mechanism.run(scenario, reports)?;
    Ok(agent_utility_over_support(scenario, &outcome, agent))
}

/// `E_{f_sel}[u_s]` under `reports`.
pub fn requester_utility_oracle(
    scenario: &Scenario,
    reports: &ReportProfile,
    mechanism: Mechanism,
) -> Result<Rational, MechanismError> {
    let outcome = mechanism.run(scenario, reports)?;
    Ok(requester_utility_over_support(scenario, &outcome))
}

pub(crate) fn agent_utility_over_support(scenario: &Scenario, outcome: &MechanismOutcome, agent: AgentId) -> Rational {
    let Some(selected) = outcome.selected() else {
        return Rational::ZERO;
    };
    let Some(truth) = scenario.agent(selected) else {
        return Rational::ZERO;
    };
    let own_cost = match scenario.agent(agent) {
        Some(ty) if agent == selected => ty.cost,
        _ => Rational::ZERO,
    };
    truth
        .pmf
        .support()
        .iter()
        .map(|&(q, p)| p * (outcome.payoffs(q).get(agent) - own_cost))
        .sum()
}

pub(crate) fn requester_utility_over_support(scenario: &Scenario, outcome: &MechanismOutcome) -> Rational {
    realized_requester_utilities(scenario, outcome)
        .into_iter()
        .map(|(_, p, u)| p * u)
        .sum()
}

/// `(q, f_sel(q), u_s(q))` for every point of the selected agent's true
/// support; empty for a null outcome.
pub fn realized_requester_utilities(
    scenario: &Scenario,
    outcome: &MechanismOutcome,
) -> Vec<(Rational, Rational, Rational)> {
    let Some(truth) = outcome.selected().and_then(|id| scenario.agent(id)) else {
        return Vec::new();
    };
    truth
        .pmf
        .support()
        .iter()
        .map(|&(q, p)| (q, p, outcome.payoffs(q).requester_utility))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::mechanism::{expected_utilities, MechanismKind};
    use crate::rational::rat;

    #[test]
    fn example2_selected_agent_expectation() {
        let (sc, reports) = bundled::load("example2").unwrap();
        let pev = Mechanism::new(MechanismKind::Pev);
        assert_eq!(
            expected_utility_oracle(&sc, &reports, pev, AgentId(9)).unwrap(),
            rat(29, 10)
        );
        assert_eq!(
            expected_utility_oracle(&sc, &reports, pev, AgentId(6)).unwrap(),
            rat(1, 2)
        );
        assert_eq!(
            expected_utility_oracle(&sc, &reports, pev, AgentId(1)).unwrap(),
            Rational::ZERO
        );
        assert_eq!(requester_utility_oracle(&sc, &reports, pev).unwrap(), rat(4, 1));
    }

    #[test]
    fn oracle_matches_analytic_on_bundled_scenarios() {
        for name in bundled::NAMES {
            let (sc, reports) = bundled::load(name).unwrap();
            for kind in MechanismKind::ALL {
                let mech = Mechanism::new(kind);
                let Ok(outcome) = mech.run(&sc, &reports) else { continue };
                let analytic = expected_utilities(&sc, &reports, &outcome);
                for id in sc.agent_ids() {
                    assert_eq!(
                        expected_utility_oracle(&sc, &reports, mech, id).unwrap(),
                        analytic.get(id),
                        "{name} {kind} agent {id}"
                    );
                }
                assert_eq!(
                    requester_utility_oracle(&sc, &reports, mech).unwrap(),
                    analytic.requester
                );
            }
        }
    }
}
