//! Verified contract mechanisms: an allocation phase run on reports, and a
//! payoff phase run once the selected agent's quality has been verified.
//!
//! * [`pev_allocate`] / [`pev_payoffs`]: the PEV-based diffusion mechanism.
//! * [`idm_run`]: the information diffusion mechanism for a single common
//!   quality level.
//! * [`qaidm_run`]: the quality-aware IDM variant that pays the winner on its
//!   *reported* expected quality. It is not incentive compatible and exists
//!   so the audit can demonstrate the failure.
//! * [`vcg_run`]: pivot payments on the diffusion graph, which can run a
//!   deficit.

mod idm;
mod pev;
mod vcg;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::{build_graph, AgentId, CriticalSequence, DiffusionGraph, ModelError, ReportProfile, Scenario};
use crate::poq::pick_index;
use crate::rational::Rational;

pub use idm::idm_run;
pub use pev::{pev_allocate, pev_allocate_with, pev_payoffs, qaidm_run};
pub use vcg::vcg_run;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MechanismError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{mechanism} needs every PoQ to be the point mass at one quality; agent {agent} differs")]
    NonDegenerate { mechanism: MechanismKind, agent: AgentId },
    #[error("{0} needs a common quality level but the scenario has none")]
    NoUniformQuality(MechanismKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MechanismKind {
    Pev,
    Idm,
    Qaidm,
    Vcg,
}

impl MechanismKind {
    pub const ALL: [MechanismKind; 4] = [
        MechanismKind::Pev,
        MechanismKind::Idm,
        MechanismKind::Qaidm,
        MechanismKind::Vcg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MechanismKind::Pev => "pev",
            MechanismKind::Idm => "idm",
            MechanismKind::Qaidm => "qaidm",
            MechanismKind::Vcg => "vcg",
        }
    }

    /// Mechanisms that only make sense when every PoQ is one common point mass.
    pub fn needs_uniform_quality(self) -> bool {
        matches!(self, MechanismKind::Idm | MechanismKind::Vcg)
    }

    /// Mechanisms built on the critical-sequence skeleton.
    pub fn uses_critical_sequence(self) -> bool {
        !matches!(self, MechanismKind::Vcg)
    }
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MechanismKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MechanismKind::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown mechanism `{s}` (expected pev, idm, qaidm or vcg)"))
    }
}

/// How ties in an argmax are broken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    SmallestId,
    /// Uniform among the tied agents, reproducible from the seed.
    Seeded(u64),
}

impl TieBreak {
    /// `tied` must be sorted by id and non-empty.
    pub(crate) fn choose(self, tied: &[AgentId]) -> AgentId {
        match self {
            TieBreak::SmallestId => tied[0],
            TieBreak::Seeded(seed) => tied[pick_index(seed, tied.len() as u64, tied.len())],
        }
    }
}

/// A mechanism together with its tie-breaking rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mechanism {
    pub kind: MechanismKind,
    pub tie_break: TieBreak,
}

impl Mechanism {
    pub fn new(kind: MechanismKind) -> Self {
        Mechanism {
            kind,
            tie_break: TieBreak::SmallestId,
        }
    }

    /// Runs the allocation phase. IDM and VCG take their common quality
    /// level from the scenario's true types.
    pub fn run(&self, scenario: &Scenario, reports: &ReportProfile) -> Result<MechanismOutcome, MechanismError> {
        match self.kind {
            MechanismKind::Pev => pev_allocate_with(scenario, reports, self.tie_break),
            MechanismKind::Qaidm => pev::qaidm_run_with(scenario, reports, self.tie_break),
            MechanismKind::Idm => {
                let q = scenario
                    .uniform_quality()
                    .ok_or(MechanismError::NoUniformQuality(self.kind))?;
                idm::idm_run_with(scenario, reports, q, self.tie_break)
            }
            MechanismKind::Vcg => {
                let q = scenario
                    .uniform_quality()
                    .ok_or(MechanismError::NoUniformQuality(self.kind))?;
                vcg::vcg_run_with(scenario, reports, q, self.tie_break)
            }
        }
    }
}

impl From<MechanismKind> for Mechanism {
    fn from(kind: MechanismKind) -> Self {
        Mechanism::new(kind)
    }
}

/// At most one worker is selected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub selected: Option<AgentId>,
}

impl Allocation {
    pub const NULL: Allocation = Allocation { selected: None };

    /// `πᵢ`.
    pub fn indicator(&self, id: AgentId) -> u8 {
        u8::from(self.selected == Some(id))
    }

    pub fn is_null(&self) -> bool {
        self.selected.is_none()
    }
}

/// What the selected agent's payoff is computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayoffBasis {
    /// The verified realized quality `q_π`.
    RealizedQuality,
    /// The selected agent's reported expected quality, whatever is realized.
    ReportedExpectation(Rational),
}

/// `p = basis − offset` for the selected agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectedPayoff {
    pub agent: AgentId,
    pub basis: PayoffBasis,
    pub offset: Rational,
}

impl SelectedPayoff {
    pub fn at(&self, realized_quality: Rational) -> Rational {
        match self.basis {
            PayoffBasis::RealizedQuality => realized_quality - self.offset,
            PayoffBasis::ReportedExpectation(e) => e - self.offset,
        }
    }
}

/// Result of the allocation phase, with everything the payoff phase needs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MechanismOutcome {
    pub mechanism: MechanismKind,
    pub allocation: Allocation,
    /// The participant maximizing reported expected welfare.
    pub welfare_champion: Option<AgentId>,
    pub sequence: Option<CriticalSequence>,
    /// `wᵢ` for every sequence member (every participant for VCG).
    pub w_values: BTreeMap<AgentId, Rational>,
    /// `t`, 1-based position of the selected agent in the sequence.
    pub selected_index: Option<usize>,
    /// Payoffs that do not depend on the realized quality.
    pub transfers: BTreeMap<AgentId, Rational>,
    pub selected_payoff: Option<SelectedPayoff>,
}

impl MechanismOutcome {
    pub(crate) fn null(mechanism: MechanismKind) -> Self {
        MechanismOutcome {
            mechanism,
            allocation: Allocation::NULL,
            welfare_champion: None,
            sequence: None,
            w_values: BTreeMap::new(),
            selected_index: None,
            transfers: BTreeMap::new(),
            selected_payoff: None,
        }
    }

    pub fn selected(&self) -> Option<AgentId> {
        self.allocation.selected
    }

    pub fn is_null(&self) -> bool {
        self.allocation.is_null()
    }

    pub fn w(&self, id: AgentId) -> Option<Rational> {
        self.w_values.get(&id).copied()
    }

    /// `w_{i₁}`; zero for a null outcome.
    pub fn first_w(&self) -> Rational {
        self.sequence
            .as_ref()
            .and_then(|s| s.order.first())
            .and_then(|id| self.w(*id))
            .unwrap_or(Rational::ZERO)
    }

    /// The payoff phase, once quality `realized_quality` has been verified.
    pub fn payoffs(&self, realized_quality: Rational) -> PayoffVector {
        let Some(rule) = self.selected_payoff else {
            return PayoffVector::default();
        };
        let mut payoffs = self.transfers.clone();
        payoffs.insert(rule.agent, rule.at(realized_quality));
        let total: Rational = payoffs.values().sum();
        PayoffVector {
            payoffs,
            requester_utility: realized_quality - total,
        }
    }
}

/// Payoffs after verification. Agents absent from the map receive zero.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PayoffVector {
    pub payoffs: BTreeMap<AgentId, Rational>,
    pub requester_utility: Rational,
}

impl PayoffVector {
    pub fn get(&self, id: AgentId) -> Rational {
        self.payoffs.get(&id).copied().unwrap_or(Rational::ZERO)
    }

    pub fn total(&self) -> Rational {
        self.payoffs.values().sum()
    }
}

/// Utilities of every agent and of the requester.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Utilities {
    pub agents: BTreeMap<AgentId, Rational>,
    pub requester: Rational,
}

impl Utilities {
    pub fn get(&self, id: AgentId) -> Rational {
        self.agents.get(&id).copied().unwrap_or(Rational::ZERO)
    }
}

/// Realized utilities `uᵢ = pᵢ − πᵢ cᵢ` with true costs.
pub fn realized_utilities(scenario: &Scenario, outcome: &MechanismOutcome, realized_quality: Rational) -> Utilities {
    let payoffs = outcome.payoffs(realized_quality);
    let agents = scenario
        .agents()
        .iter()
        .map(|(&id, ty)| {
            let cost = if outcome.selected() == Some(id) {
                ty.cost
            } else {
                Rational::ZERO
            };
            (id, payoffs.get(id) - cost)
        })
        .collect();
    Utilities {
        agents,
        requester: payoffs.requester_utility,
    }
}

/// Analytic expected utilities over the selected agent's true PoQ.
///
/// Payoffs are affine in the realized quality, so the expectation is the
/// payoff rule evaluated at the true expected quality.
pub fn expected_utilities(scenario: &Scenario, _reports: &ReportProfile, outcome: &MechanismOutcome) -> Utilities {
    let Some(selected) = outcome.selected() else {
        return Utilities {
            agents: scenario.agent_ids().map(|id| (id, Rational::ZERO)).collect(),
            requester: Rational::ZERO,
        };
    };
    let mean_quality = scenario
        .agent(selected)
        .map(|ty| ty.pmf.expectation())
        .unwrap_or(Rational::ZERO);
    realized_utilities(scenario, outcome, mean_quality)
}

/// An allocation maximizing reported expected welfare over `I(θ′)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EfficientAllocation {
    pub allocation: Allocation,
    /// Expected welfare of the allocation; zero for the null option.
    pub welfare: Rational,
}

/// `π*(θ′)` with the null option: nobody is selected when there are no
/// participants or every participant's reported welfare is negative.
pub fn efficient_allocation(scenario: &Scenario, reports: &ReportProfile) -> Result<EfficientAllocation, ModelError> {
    efficient_allocation_with(scenario, reports, TieBreak::SmallestId)
}

pub fn efficient_allocation_with(
    scenario: &Scenario,
    reports: &ReportProfile,
    tie_break: TieBreak,
) -> Result<EfficientAllocation, ModelError> {
    let prepared = Prepared::new(scenario, reports, |d| d.expected_welfare())?;
    let (best, welfare) = prepared.best(None, tie_break);
    Ok(match best {
        Some(v) if !welfare.is_negative() => EfficientAllocation {
            allocation: Allocation {
                selected: Some(prepared.graph.id_at(v)),
            },
            welfare,
        },
        _ => EfficientAllocation {
            allocation: Allocation::NULL,
            welfare: Rational::ZERO,
        },
    })
}

/// The diffusion graph together with each vertex's reported welfare.
pub(crate) struct Prepared {
    pub graph: DiffusionGraph,
    /// Reported welfare per vertex; `None` for `s` and nil reports.
    pub welfare: Vec<Option<Rational>>,
}

impl Prepared {
    pub fn new(
        scenario: &Scenario,
        reports: &ReportProfile,
        welfare_of: impl Fn(&crate::net::Declaration) -> Rational,
    ) -> Result<Self, ModelError> {
        let graph = build_graph(scenario, reports)?;
        let welfare = (0..graph.len())
            .map(|v| {
                if v == crate::net::ROOT {
                    None
                } else {
                    reports.declaration(graph.id_at(v)).map(&welfare_of)
                }
            })
            .collect();
        Ok(Prepared { graph, welfare })
    }

    /// Argmax of reported welfare over participants with `skip` deleted.
    /// Returns the raw maximum (possibly negative) or `(None, 0)` when no
    /// participant declared a type.
    pub fn best(&self, skip: Option<usize>, tie_break: TieBreak) -> (Option<usize>, Rational) {
        let reach = self.graph.reachable_without(skip);
        let mut best: Option<Rational> = None;
        let mut tied: Vec<usize> = Vec::new();
        for (v, w) in self.welfare.iter().enumerate() {
            let Some(w) = w else { continue };
            if !reach[v] || Some(v) == skip {
                continue;
            }
            match best {
                Some(b) if *w < b => {}
                Some(b) if *w == b => tied.push(v),
                _ => {
                    best = Some(*w);
                    tied.clear();
                    tied.push(v);
                }
            }
        }
        match best {
            None => (None, Rational::ZERO),
            Some(b) if tied.len() == 1 => (Some(tied[0]), b),
            Some(b) => {
                let ids: Vec<AgentId> = tied.iter().map(|&v| self.graph.id_at(v)).collect();
                let pick = tie_break.choose(&ids);
                (self.graph.vertex_of(pick), b)
            }
        }
    }

    /// Maximum expected welfare with `skip` deleted, floored at zero by the
    /// null option.
    pub fn floored_best(&self, skip: Option<usize>) -> Rational {
        self.best(skip, TieBreak::SmallestId).1.max(Rational::ZERO)
    }
}
