//! Exhaustive IC search at micro scale: every diffusion topology on a few
//! agents, every true type profile on a coarse grid, and every report on the
//! same grid as a unilateral deviation.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::seq::index::sample;
use rayon::prelude::*;

use super::grid::DeviationGrid;
use super::oracle::{agent_utility_over_support, realized_requester_utilities};
use super::Witness;
use crate::mechanism::{Mechanism, MechanismOutcome};
use crate::net::{AgentId, AgentType, Node, Report, Scenario};
use crate::poq::{stream, Pmf};
use crate::rational::Rational;
use crate::scenario_file::{ReportEntry, ScenarioFile};

/// Which true types each agent takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrueTypes {
    /// Every `(PoQ, cost)` pair on the grid.
    All,
    /// One representative `(PoQ, cost)` per value of `E[Q] − c`.
    WelfareClasses,
}

/// Which part of the product `topologies × type profiles` is visited.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coverage {
    Exhaustive,
    /// This many `(topology, type profile)` pairs drawn uniformly without
    /// replacement.
    Sampled {
        scenarios: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MicroSuite {
    pub agents: usize,
    /// Probability and cost step; quality levels are `{0, 1}`.
    pub step: Rational,
    pub true_types: TrueTypes,
    pub coverage: Coverage,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MicroSuiteReport {
    pub agents: usize,
    pub topologies: usize,
    pub type_profiles: usize,
    pub scenarios: u64,
    pub deviations: u64,
    pub violation: Option<Witness>,
}

/// A diffusion topology: who the requester invites and who each agent can
/// invite. Agent ids are `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    pub requester: BTreeSet<AgentId>,
    pub neighbors: Vec<BTreeSet<Node>>,
}

/// Every topology on `n` agents in which all agents are reachable from the
/// requester.
pub fn connected_topologies(n: usize) -> Vec<Topology> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::new();
    for rmask in 1u32..(1 << n) {
        for emask in 0u64..(1 << pairs.len()) {
            let mut adj = vec![Vec::new(); n];
            for (k, &(i, j)) in pairs.iter().enumerate() {
                if emask >> k & 1 == 1 {
                    adj[i].push(j);
                }
            }
            let mut seen: Vec<bool> = (0..n).map(|i| rmask >> i & 1 == 1).collect();
            let mut stack: Vec<usize> = (0..n).filter(|&i| seen[i]).collect();
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            if seen.iter().all(|&b| b) {
                out.push(Topology {
                    requester: (0..n)
                        .filter(|&i| rmask >> i & 1 == 1)
                        .map(|i| AgentId(i as u32 + 1))
                        .collect(),
                    neighbors: adj
                        .iter()
                        .map(|vs| vs.iter().map(|&j| Node::Agent(AgentId(j as u32 + 1))).collect())
                        .collect(),
                });
            }
        }
    }
    out
}

impl MicroSuite {
    fn levels(&self) -> [Rational; 2] {
        [Rational::ZERO, Rational::ONE]
    }

    fn grid_points(&self, upto: Rational) -> Vec<Rational> {
        let mut v = Vec::new();
        let mut x = Rational::ZERO;
        while x <= upto {
            v.push(x);
            x += self.step;
        }
        v
    }

    fn two_point(&self, p_high: Rational) -> Pmf {
        Pmf::new([(Rational::ZERO, Rational::ONE - p_high), (Rational::ONE, p_high)]).expect("valid")
    }

    /// The true types each agent ranges over.
    pub fn types(&self) -> Vec<(Pmf, Rational)> {
        let grid = self.grid_points(Rational::ONE);
        match self.true_types {
            TrueTypes::All => grid
                .iter()
                .flat_map(|&p| grid.iter().map(move |&c| (p, c)))
                .map(|(p, c)| (self.two_point(p), c))
                .collect(),
            TrueTypes::WelfareClasses => {
                let half = Rational::new(1, 2);
                let mut values: Vec<Rational> = grid.iter().map(|&c| -c).collect();
                values.extend(grid.iter().copied().skip(1));
                values.sort();
                values
                    .into_iter()
                    .map(|v| {
                        let p = if v > half {
                            Rational::ONE
                        } else if v < -half {
                            Rational::ZERO
                        } else {
                            half
                        };
                        (self.two_point(p), p - v)
                    })
                    .collect()
            }
        }
    }

    /// Deviation grid: every PoQ on the grid, every cost on the grid up to
    /// one step above the top quality (all costs beyond that make every
    /// reported welfare negative), every invitation subset, and `nil`.
    pub fn deviation_grid(&self) -> DeviationGrid {
        DeviationGrid::full(self.step, Rational::ONE + self.step)
    }

    pub fn run(&self, mechanism: Mechanism) -> MicroSuiteReport {
        let topologies = connected_topologies(self.agents);
        let types = self.types();
        let n = self.agents;
        let profiles = types.len().pow(n as u32);
        let total = topologies.len() * profiles;

        let indices: Vec<usize> = match self.coverage {
            Coverage::Exhaustive => (0..total).collect(),
            Coverage::Sampled { scenarios, seed } => {
                let mut picked = sample(&mut stream(seed, n as u64), total, scenarios.min(total)).into_vec();
                picked.sort_unstable();
                picked
            }
        };

        let template_scenario = self.scenario(&topologies[0], &types, 0);
        let grid = self.deviation_grid();
        // Deviations depend on the true neighbour set only.
        let mut by_neighbors: BTreeMap<BTreeSet<Node>, Arc<Vec<Report>>> = BTreeMap::new();
        let mut deviations_of = |t: &Topology| -> Vec<Arc<Vec<Report>>> {
            t.neighbors
                .iter()
                .map(|nb| {
                    by_neighbors
                        .entry(nb.clone())
                        .or_insert_with(|| {
                            Arc::new(grid.reports_around(&template_scenario, &types[0].0, Rational::ZERO, nb))
                        })
                        .clone()
                })
                .collect()
        };
        let work: Vec<(usize, Vec<Arc<Vec<Report>>>)> = indices
            .iter()
            .map(|&ix| (ix, deviations_of(&topologies[ix / profiles])))
            .collect();
        let deviations: u64 = work
            .iter()
            .map(|(_, d)| d.iter().map(|r| r.len() as u64).sum::<u64>())
            .sum();

        let violation = work.par_iter().find_map_first(|(ix, options)| {
            let scenario = self.scenario(&topologies[ix / profiles], &types, ix % profiles);
            self.search(&scenario, mechanism, options)
        });

        MicroSuiteReport {
            agents: n,
            topologies: topologies.len(),
            type_profiles: profiles,
            scenarios: indices.len() as u64,
            deviations,
            violation,
        }
    }

    /// The scenario for `profile`, read as a base-`types.len()` number whose
    /// digit `k` is agent `k + 1`'s type.
    fn scenario(&self, topology: &Topology, types: &[(Pmf, Rational)], mut profile: usize) -> Scenario {
        let agents = topology.neighbors.iter().enumerate().map(|(k, nb)| {
            let (pmf, cost) = &types[profile % types.len()];
            profile /= types.len();
            (
                AgentId(k as u32 + 1),
                AgentType::new(pmf.clone(), *cost, nb.iter().copied()),
            )
        });
        Scenario::new(
            topology.requester.iter().copied(),
            agents.collect::<Vec<_>>(),
            self.levels(),
        )
        .expect("grid scenario is valid")
    }

    fn search(&self, scenario: &Scenario, mechanism: Mechanism, deviations: &[Arc<Vec<Report>>]) -> Option<Witness> {
        let truthful = scenario.truthful();
        let honest: MechanismOutcome = mechanism.run(scenario, &truthful).ok()?;
        for (k, options) in deviations.iter().enumerate() {
            let id = AgentId(k as u32 + 1);
            let truth = scenario.agent(id)?;
            let base = agent_utility_over_support(scenario, &honest, id);
            for deviation in options.iter() {
                let Ok(outcome) = mechanism.run(scenario, &truthful.with(id, deviation.clone())) else {
                    continue;
                };
                let u = agent_utility_over_support(scenario, &outcome, id);
                if u > base {
                    return Some(Witness::Deviation {
                        scenario: ScenarioFile::from_domain(scenario, &truthful),
                        agent: id,
                        deviation: ReportEntry::from_report(deviation, truth),
                        truthful_utility: base,
                        deviated_utility: u,
                        requester_outcomes: realized_requester_utilities(scenario, &outcome),
                    });
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanism::MechanismKind;
    use crate::rational::rat;

    #[test]
    fn topology_counts() {
        assert_eq!(connected_topologies(1).len(), 1);
        // {1}: needs 1→2; {2}: needs 2→1; {1,2}: anything. 2 + 2 + 4.
        assert_eq!(connected_topologies(2).len(), 8);
    }

    #[test]
    fn type_lists() {
        let mut suite = MicroSuite {
            agents: 1,
            step: rat(1, 4),
            true_types: TrueTypes::All,
            coverage: Coverage::Exhaustive,
        };
        assert_eq!(suite.types().len(), 25);
        suite.true_types = TrueTypes::WelfareClasses;
        let welfare: Vec<Rational> = suite.types().iter().map(|(p, c)| p.expectation() - *c).collect();
        assert_eq!(welfare, (-4..=4).map(|k| rat(k, 4)).collect::<Vec<_>>());
    }

    #[test]
    fn single_agent_exhaustive() {
        let suite = MicroSuite {
            agents: 1,
            step: rat(1, 4),
            true_types: TrueTypes::All,
            coverage: Coverage::Exhaustive,
        };
        let r = suite.run(Mechanism::new(MechanismKind::Pev));
        assert_eq!(r.scenarios, 25);
        assert!(r.violation.is_none());
        // Five PoQs, six costs, the empty invitation set, and nil.
        assert_eq!(r.deviations, 25 * (5 * 6 + 1));
    }

    #[test]
    fn qaidm_fails_at_micro_scale() {
        let suite = MicroSuite {
            agents: 1,
            step: rat(1, 4),
            true_types: TrueTypes::All,
            coverage: Coverage::Exhaustive,
        };
        let mech = Mechanism::new(MechanismKind::Qaidm);
        let w = suite.run(mech).violation.expect("qaidm pays on reports");
        assert!(w.replays_exactly(mech));
    }
}
