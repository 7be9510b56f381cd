//! Finite deviation spaces for the incentive audit.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample;

use crate::net::{AgentId, Declaration, Node, Report, Scenario};
use crate::poq::{stream, Pmf};
use crate::rational::{rat, Rational};

/// Which alternative PoQ reports to try.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PmfDeviations {
    /// Only the true PoQ. Used for mechanisms defined on a common point mass.
    TruthOnly,
    /// The true PoQ, point masses at the lowest and highest quality level, and
    /// every shift of `k · step` mass from a support point to any quality
    /// level (which also extends the support).
    Neighborhood { step: Rational },
    /// Every distribution over the scenario's quality levels whose
    /// probabilities are multiples of `step`.
    Simplex { step: Rational },
}

/// Which alternative costs to try.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostDeviations {
    /// Absolute cost values, used as given.
    pub absolute: Vec<Rational>,
    /// Multipliers applied to the true cost.
    pub scalings: Vec<Rational>,
    /// Amounts added to the true cost.
    pub offsets: Vec<Rational>,
}

/// A finite slice of one agent's report space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviationGrid {
    pub costs: CostDeviations,
    pub pmfs: PmfDeviations,
    /// Try every subset of the true neighbour set (or a sample of them).
    pub vary_invitations: bool,
    /// Neighbour sets up to this size are enumerated exhaustively.
    pub max_exhaustive_neighbors: usize,
    /// Subsets sampled for larger neighbour sets.
    pub sampled_subsets: usize,
    pub include_nil: bool,
    pub seed: u64,
}

impl DeviationGrid {
    /// The default audit grid for `scenario`: PoQ neighbourhood with mass
    /// steps of `step`, absolute costs on a grid of `step · 5` up to the top
    /// quality level, common multiplicative cost scalings, and all
    /// invitation subsets.
    pub fn standard(scenario: &Scenario, step: Rational, seed: u64) -> Self {
        let top = scenario.quality_levels().iter().copied().max().unwrap_or(Rational::ONE);
        let cost_step = step * rat(5, 1);
        let mut absolute = Vec::new();
        let mut c = Rational::ZERO;
        while c <= top {
            absolute.push(c);
            c += cost_step;
        }
        absolute.push(top + Rational::ONE);
        DeviationGrid {
            costs: CostDeviations {
                absolute,
                scalings: [(0, 1), (1, 2), (9, 10), (11, 10), (3, 2), (2, 1)]
                    .iter()
                    .map(|&(n, d)| rat(n, d))
                    .collect(),
                offsets: Vec::new(),
            },
            pmfs: PmfDeviations::Neighborhood { step },
            vary_invitations: true,
            max_exhaustive_neighbors: 12,
            sampled_subsets: 2048,
            include_nil: true,
            seed,
        }
    }

    /// The whole discretized type space: every PoQ over the quality levels
    /// on a `step` grid, every cost in `0..=max_cost` on the same grid, every
    /// invitation subset, and `nil`.
    pub fn full(step: Rational, max_cost: Rational) -> Self {
        let mut absolute = Vec::new();
        let mut c = Rational::ZERO;
        while c <= max_cost {
            absolute.push(c);
            c += step;
        }
        DeviationGrid {
            costs: CostDeviations {
                absolute,
                scalings: Vec::new(),
                offsets: Vec::new(),
            },
            pmfs: PmfDeviations::Simplex { step },
            vary_invitations: true,
            max_exhaustive_neighbors: 12,
            sampled_subsets: 2048,
            include_nil: true,
            seed: 0,
        }
    }

    /// Small own-report perturbations with invitations held fixed.
    pub fn perturbations(step: Rational) -> Self {
        DeviationGrid {
            costs: CostDeviations {
                absolute: Vec::new(),
                scalings: vec![rat(1, 2), rat(2, 1)],
                offsets: vec![-step, step],
            },
            pmfs: PmfDeviations::Neighborhood { step },
            vary_invitations: false,
            max_exhaustive_neighbors: 0,
            sampled_subsets: 0,
            include_nil: false,
            seed: 0,
        }
    }

    /// Keeps the PoQ fixed at the truth.
    pub fn truth_pmf_only(mut self) -> Self {
        self.pmfs = PmfDeviations::TruthOnly;
        self
    }

    /// Every report in the grid for `agent`, truthful report excluded,
    /// in a fixed order.
    pub fn reports_for(&self, scenario: &Scenario, agent: AgentId) -> Vec<Report> {
        let Some(truth) = scenario.agent(agent) else {
            return Vec::new();
        };
        let truthful = Report::truthful(truth);
        let mut out = self.reports_around(scenario, &truth.pmf, truth.cost, &truth.neighbors);
        out.retain(|r| *r != truthful);
        out
    }

    /// Every report in the grid for an agent with the given true type,
    /// truthful report included.
    pub fn reports_around(
        &self,
        scenario: &Scenario,
        pmf: &Pmf,
        cost: Rational,
        neighbors: &BTreeSet<Node>,
    ) -> Vec<Report> {
        let pmfs = self.pmf_options(scenario, pmf);
        let costs = self.cost_options(cost);
        let invitations = self.invitation_options(neighbors);
        let mut out = Vec::with_capacity(pmfs.len() * costs.len() * invitations.len() + 1);
        if self.include_nil {
            out.push(Report::Nil);
        }
        for invited in &invitations {
            for pmf in &pmfs {
                for &cost in &costs {
                    out.push(Report::Declared(Declaration {
                        pmf: pmf.clone(),
                        cost,
                        invited: invited.clone(),
                    }));
                }
            }
        }
        out
    }

    fn cost_options(&self, true_cost: Rational) -> Vec<Rational> {
        let mut set = BTreeSet::from([true_cost]);
        set.extend(self.costs.absolute.iter().copied());
        set.extend(self.costs.offsets.iter().map(|&d| true_cost + d));
        set.extend(self.costs.scalings.iter().map(|&m| true_cost * m));
        set.into_iter().filter(|c| !c.is_negative()).collect()
    }

    fn pmf_options(&self, scenario: &Scenario, truth: &Pmf) -> Vec<Pmf> {
        let levels: Vec<Rational> = scenario.quality_levels().iter().copied().collect();
        let mut out = vec![truth.clone()];
        match &self.pmfs {
            PmfDeviations::TruthOnly => {}
            PmfDeviations::Neighborhood { step } => {
                out.push(Pmf::point(levels[0]));
                out.push(Pmf::point(levels[levels.len() - 1]));
                for &(from, mass) in truth.support() {
                    for &to in levels.iter().filter(|&&q| q != from) {
                        let mut moved = *step;
                        while moved <= mass {
                            let mut points: BTreeMap<Rational, Rational> = truth.support().iter().copied().collect();
                            *points.get_mut(&from).expect("support point") -= moved;
                            *points.entry(to).or_insert(Rational::ZERO) += moved;
                            if let Ok(p) = Pmf::new(points) {
                                out.push(p);
                            }
                            moved += *step;
                        }
                    }
                }
            }
            PmfDeviations::Simplex { step } => {
                let units = (Rational::ONE / *step).numer();
                let mut counts = vec![0i128; levels.len()];
                simplex(&levels, units, 0, &mut counts, &mut out);
            }
        }
        let mut seen = BTreeSet::new();
        out.retain(|p| seen.insert(format!("{p:?}")));
        out
    }

    fn invitation_options(&self, neighbors: &BTreeSet<Node>) -> Vec<BTreeSet<Node>> {
        if !self.vary_invitations {
            return vec![neighbors.clone()];
        }
        let keep_requester = neighbors.contains(&Node::Requester);
        let agents: Vec<Node> = neighbors.iter().copied().filter(|n| *n != Node::Requester).collect();
        let build = |mask: u64| {
            let mut set: BTreeSet<Node> = agents
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &n)| n)
                .collect();
            if keep_requester {
                set.insert(Node::Requester);
            }
            set
        };
        let n = agents.len();
        if n <= self.max_exhaustive_neighbors {
            // Full set first so that the most common deviation comes early.
            (0..1u64 << n).rev().map(build).collect()
        } else {
            let full = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
            let mut masks = vec![full, 0];
            let mut rng = stream(self.seed, n as u64);
            let universe = 1usize << n.min(30);
            for m in sample(&mut rng, universe, self.sampled_subsets.min(universe)) {
                masks.push(m as u64);
            }
            masks.sort_unstable_by(|a, b| b.cmp(a));
            masks.dedup();
            masks.into_iter().map(build).collect()
        }
    }
}

fn simplex(levels: &[Rational], remaining: i128, k: usize, counts: &mut Vec<i128>, out: &mut Vec<Pmf>) {
    let total: i128 = counts.iter().sum::<i128>() + remaining;
    if k + 1 == levels.len() {
        counts[k] = remaining;
        let points = levels
            .iter()
            .zip(counts.iter())
            .map(|(&q, &c)| (q, Rational::new(c, total)));
        if let Ok(p) = Pmf::new(points) {
            out.push(p);
        }
        counts[k] = 0;
        return;
    }
    for c in 0..=remaining {
        counts[k] = c;
        simplex(levels, remaining - c, k + 1, counts, out);
    }
    counts[k] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::AgentType;

    fn two_level_scenario() -> Scenario {
        let pmf = Pmf::new([(rat(0, 1), rat(1, 2)), (rat(1, 1), rat(1, 2))]).unwrap();
        Scenario::new(
            [AgentId(1)],
            [
                (
                    AgentId(1),
                    AgentType::new(
                        pmf.clone(),
                        rat(1, 4),
                        [Node::Agent(AgentId(2)), Node::Agent(AgentId(3))],
                    ),
                ),
                (AgentId(2), AgentType::new(pmf.clone(), rat(1, 4), [])),
                (AgentId(3), AgentType::new(pmf, rat(1, 4), [])),
            ],
            [rat(0, 1), rat(1, 1)],
        )
        .unwrap()
    }

    #[test]
    fn full_grid_enumerates_the_discretized_type_space() {
        let sc = two_level_scenario();
        let grid = DeviationGrid::full(rat(1, 4), rat(1, 1));
        let reports = grid.reports_for(&sc, AgentId(1));
        // 5 PoQs x 5 costs x 4 invitation subsets, minus truth, plus nil.
        assert_eq!(reports.len(), 5 * 5 * 4 - 1 + 1);
        for r in &reports {
            sc.check_report(AgentId(1), r).unwrap();
        }
        let unique: BTreeSet<String> = reports.iter().map(|r| format!("{r:?}")).collect();
        assert_eq!(unique.len(), reports.len());
    }

    #[test]
    fn neighborhood_grid_shifts_mass_and_collapses() {
        let sc = two_level_scenario();
        let grid = DeviationGrid::standard(&sc, rat(1, 4), 0);
        let pmfs = grid.pmf_options(&sc, &sc.agent(AgentId(1)).unwrap().pmf);
        let expectations: BTreeSet<Rational> = pmfs.iter().map(|p| p.expectation()).collect();
        let want: BTreeSet<Rational> = [0, 1, 2, 3, 4].iter().map(|&k| rat(k, 4)).collect();
        assert_eq!(expectations, want);
    }

    #[test]
    fn large_neighbour_sets_are_sampled_reproducibly() {
        let n = 14u32;
        let pmf = Pmf::point(rat(1, 1));
        let mut agents = vec![(
            AgentId(0),
            AgentType::new(pmf.clone(), rat(0, 1), (1..=n).map(|k| Node::Agent(AgentId(k)))),
        )];
        agents.extend((1..=n).map(|k| (AgentId(k), AgentType::new(pmf.clone(), rat(0, 1), []))));
        let sc = Scenario::new([AgentId(0)], agents, [rat(1, 1)]).unwrap();
        let grid = DeviationGrid::standard(&sc, rat(1, 10), 5).truth_pmf_only();
        let subsets = grid.invitation_options(&sc.agent(AgentId(0)).unwrap().neighbors);
        assert!(subsets.len() <= 2048 + 2 && subsets.len() > 1900);
        assert_eq!(
            subsets,
            grid.invitation_options(&sc.agent(AgentId(0)).unwrap().neighbors)
        );
    }
}
