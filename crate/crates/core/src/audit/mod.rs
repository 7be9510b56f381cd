//! Property checks for the mechanisms: individual rationality, incentive
//! compatibility over a finite deviation grid, weak budget balance, the two
//! structural lemmas about `w` values and payoffs, and the efficiency gap.
//!
//! Every violation carries a [`Witness`] that can be replayed from its own
//! data. IC verdicts are "holds on grid": the grid is a finite slice of a
//! continuous report space.

mod exhaustive;
mod grid;
mod oracle;

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::mechanism::{efficient_allocation, Mechanism, MechanismError, MechanismKind, MechanismOutcome};
use crate::net::{AgentId, Report, ReportProfile, Scenario};
use crate::poq::stream;
use crate::rational::{rat, Rational};
use crate::scenario_file::{ReportEntry, ScenarioFile, ScenarioFileError};

pub use exhaustive::{connected_topologies, Coverage, MicroSuite, MicroSuiteReport, Topology, TrueTypes};
pub use grid::{CostDeviations, DeviationGrid, PmfDeviations};
pub use oracle::{expected_utility_oracle, realized_requester_utilities, requester_utility_oracle};

use oracle::{agent_utility_over_support, requester_utility_over_support};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Property {
    #[serde(rename = "IR")]
    Ir,
    #[serde(rename = "IC")]
    Ic,
    #[serde(rename = "WBB")]
    Wbb,
    WChain,
    PayoffIndependence,
    Efficiency,
}

impl Property {
    pub const ALL: [Property; 6] = [
        Property::Ir,
        Property::Ic,
        Property::Wbb,
        Property::WChain,
        Property::PayoffIndependence,
        Property::Efficiency,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Ir => "IR",
            Property::Ic => "IC",
            Property::Wbb => "WBB",
            Property::WChain => "w-chain",
            Property::PayoffIndependence => "payoff-independence",
            Property::Efficiency => "Efficiency",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    HoldsOnGrid,
    Violated,
    /// The mechanism's preconditions fail on this scenario, or the property
    /// is not defined for it.
    NotApplicable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::HoldsOnGrid => "holds-on-grid",
            Verdict::Violated => "violated",
            Verdict::NotApplicable => "not-applicable",
        })
    }
}

/// A named exact value backing a verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub label: String,
    pub value: Rational,
}

fn cert(label: impl Into<String>, value: Rational) -> Certificate {
    Certificate {
        label: label.into(),
        value,
    }
}

/// Self-contained evidence of a violation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// A unilateral deviation that strictly raises `agent`'s expected
    /// utility. `scenario` holds the true types and, in its reports block,
    /// the other agents' reports.
    Deviation {
        scenario: ScenarioFile,
        agent: AgentId,
        deviation: ReportEntry,
        truthful_utility: Rational,
        deviated_utility: Rational,
        /// Requester utility at each quality the selected agent can deliver
        /// under the deviation: `(q, probability, u_s)`.
        requester_outcomes: Vec<(Rational, Rational, Rational)>,
    },
    /// A single exact quantity with the wrong sign or value.
    Value {
        scenario: ScenarioFile,
        description: String,
        realized_quality: Option<Rational>,
        expected: Rational,
        actual: Rational,
    },
}

/// Utilities recomputed from a [`Witness::Deviation`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replay {
    pub truthful_utility: Rational,
    pub deviated_utility: Rational,
    pub requester_outcomes: Vec<(Rational, Rational, Rational)>,
}

impl Replay {
    pub fn delta(&self) -> Rational {
        self.deviated_utility - self.truthful_utility
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error(transparent)]
    File(#[from] ScenarioFileError),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error("only deviation witnesses can be replayed")]
    NotADeviation,
    #[error("agent {0} is not in the witness scenario")]
    UnknownAgent(AgentId),
}

impl Witness {
    /// Re-runs the deviation from the witness data alone.
    pub fn replay(&self, mechanism: Mechanism) -> Result<Replay, ReplayError> {
        let Witness::Deviation {
            scenario,
            agent,
            deviation,
            ..
        } = self
        else {
            return Err(ReplayError::NotADeviation);
        };
        let (scenario, context) = scenario.to_domain()?;
        let truth = scenario.agent(*agent).ok_or(ReplayError::UnknownAgent(*agent))?;
        let honest = context.with(*agent, Report::truthful(truth));
        let deviated = context.with(*agent, deviation.to_report(truth));
        let outcome = mechanism.run(&scenario, &deviated)?;
        Ok(Replay {
            truthful_utility: expected_utility_oracle(&scenario, &honest, mechanism, *agent)?,
            deviated_utility: agent_utility_over_support(&scenario, &outcome, *agent),
            requester_outcomes: realized_requester_utilities(&scenario, &outcome),
        })
    }

    /// Whether the stored utilities are reproduced exactly.
    pub fn replays_exactly(&self, mechanism: Mechanism) -> bool {
        match (self, self.replay(mechanism)) {
            (
                Witness::Deviation {
                    truthful_utility,
                    deviated_utility,
                    requester_outcomes,
                    ..
                },
                Ok(r),
            ) => {
                r.truthful_utility == *truthful_utility
                    && r.deviated_utility == *deviated_utility
                    && r.requester_outcomes == *requester_outcomes
            }
            _ => false,
        }
    }
}

/// The verdict on one property for one mechanism.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub property: Property,
    pub mechanism: MechanismKind,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Box<Witness>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub certificate: Vec<Certificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub scenarios_checked: u64,
    pub cases_checked: u64,
}

impl AuditReport {
    fn new(property: Property, mechanism: MechanismKind) -> Self {
        AuditReport {
            property,
            mechanism,
            verdict: Verdict::HoldsOnGrid,
            witness: None,
            certificate: Vec::new(),
            note: None,
            scenarios_checked: 1,
            cases_checked: 0,
        }
    }

    fn not_applicable(property: Property, mechanism: MechanismKind, why: impl Into<String>) -> Self {
        AuditReport {
            verdict: Verdict::NotApplicable,
            note: Some(why.into()),
            ..AuditReport::new(property, mechanism)
        }
    }

    fn violated(mut self, witness: Witness) -> Self {
        self.verdict = Verdict::Violated;
        self.witness = Some(Box::new(witness));
        self
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::HoldsOnGrid
    }

    pub fn is_violated(&self) -> bool {
        self.verdict == Verdict::Violated
    }

    pub fn certificate_value(&self, label: &str) -> Option<Rational> {
        self.certificate.iter().find(|c| c.label == label).map(|c| c.value)
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<10} {:<6} {} ({} scenario(s), {} case(s))",
            self.property.name(),
            self.mechanism,
            self.verdict,
            self.scenarios_checked,
            self.cases_checked
        )?;
        if let Some(note) = &self.note {
            write!(f, "\n    note: {note}")?;
        }
        if !self.certificate.is_empty() {
            let parts: Vec<String> = self
                .certificate
                .iter()
                .map(|c| format!("{}={}", c.label, c.value))
                .collect();
            write!(f, "\n    {}", parts.join(", "))?;
        }
        match self.witness.as_deref() {
            Some(Witness::Deviation {
                scenario,
                agent,
                deviation,
                truthful_utility,
                deviated_utility,
                requester_outcomes,
            }) => {
                let deviation = serde_json::to_string(deviation).unwrap_or_default();
                write!(
                    f,
                    "\n    witness: agent {agent} reports {deviation}: expected utility {truthful_utility} -> {deviated_utility} (+{})",
                    *deviated_utility - *truthful_utility
                )?;
                if !scenario.reports.is_empty() {
                    let ctx = serde_json::to_string(&scenario.reports).unwrap_or_default();
                    write!(f, "\n    others report: {ctx}")?;
                }
                for (q, p, u) in requester_outcomes {
                    write!(f, "\n    at q={q} (prob {p}): requester utility {u}")?;
                }
            }
            Some(Witness::Value {
                description,
                realized_quality,
                expected,
                actual,
                ..
            }) => {
                write!(f, "\n    witness: {description}: expected {expected}, got {actual}")?;
                if let Some(q) = realized_quality {
                    write!(f, " at q={q}")?;
                }
            }
            None => {}
        }
        Ok(())
    }
}

/// Knobs shared by [`audit_all`] and the CLI.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditOptions {
    /// Mass step of PoQ deviations.
    pub grid_step: Rational,
    pub seed: u64,
    /// Randomized non-truthful contexts for the IC search, beyond all-truthful.
    pub random_contexts: usize,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            grid_step: rat(1, 10),
            seed: 0,
            random_contexts: 2,
        }
    }
}

/// Runs `mechanism` on the truthful profile, or explains why it cannot.
fn truthful_outcome(
    scenario: &Scenario,
    mechanism: Mechanism,
    property: Property,
) -> Result<(ReportProfile, MechanismOutcome), AuditReport> {
    let reports = scenario.truthful();
    match mechanism.run(scenario, &reports) {
        Ok(outcome) => Ok((reports, outcome)),
        Err(e) => Err(AuditReport::not_applicable(property, mechanism.kind, e.to_string())),
    }
}

/// Every agent's expected utility under truthful reporting is nonnegative.
pub fn check_ir(scenario: &Scenario, mechanism: Mechanism) -> AuditReport {
    let (_, outcome) = match truthful_outcome(scenario, mechanism, Property::Ir) {
        Ok(x) => x,
        Err(report) => return report,
    };
    let mut report = AuditReport::new(Property::Ir, mechanism.kind);
    let on_sequence = |id: AgentId| outcome.sequence.as_ref().is_some_and(|s| s.contains(id));
    for id in scenario.agent_ids() {
        let u = agent_utility_over_support(scenario, &outcome, id);
        report.cases_checked += 1;
        if !u.is_zero() || on_sequence(id) || outcome.w_values.contains_key(&id) {
            report.certificate.push(cert(format!("u{id}"), u));
        }
        if u.is_negative() && !report.is_violated() {
            report = report.violated(Witness::Value {
                scenario: ScenarioFile::from_domain(scenario, &scenario.truthful()),
                description: format!("expected utility of agent {id} under truthful reports"),
                realized_quality: None,
                expected: Rational::ZERO,
                actual: u,
            });
        }
    }
    report
}

/// No agent gains in expectation by a unilateral grid deviation while the
/// others report truthfully.
pub fn check_ic(scenario: &Scenario, mechanism: Mechanism, grid: &DeviationGrid) -> AuditReport {
    check_ic_in_contexts(scenario, mechanism, grid, &[scenario.truthful()])
}

/// Like [`check_ic`], once per context profile for the other agents.
pub fn check_ic_in_contexts(
    scenario: &Scenario,
    mechanism: Mechanism,
    grid: &DeviationGrid,
    contexts: &[ReportProfile],
) -> AuditReport {
    let grid = if mechanism.kind.needs_uniform_quality() {
        grid.clone().truth_pmf_only()
    } else {
        grid.clone()
    };
    let mut report = AuditReport::new(Property::Ic, mechanism.kind);
    if let Err(e) = mechanism.run(scenario, &scenario.truthful()) {
        return AuditReport::not_applicable(Property::Ic, mechanism.kind, e.to_string());
    }

    let deviations: BTreeMap<AgentId, Vec<Report>> = scenario
        .agent_ids()
        .map(|id| (id, grid.reports_for(scenario, id)))
        .collect();
    let cases: Vec<(usize, AgentId, &Report)> = contexts
        .iter()
        .enumerate()
        .flat_map(|(c, _)| {
            deviations
                .iter()
                .flat_map(move |(&id, reports)| reports.iter().map(move |r| (c, id, r)))
        })
        .collect();

    // Truthful utilities, one per (context, agent).
    let baseline: BTreeMap<(usize, AgentId), Option<Rational>> = contexts
        .par_iter()
        .enumerate()
        .flat_map_iter(|(c, ctx)| {
            scenario.agents().iter().map(move |(&id, ty)| {
                let honest = ctx.with(id, Report::truthful(ty));
                let u = expected_utility_oracle(scenario, &honest, mechanism, id).ok();
                ((c, id), u)
            })
        })
        .collect();

    let found = cases.par_iter().find_map_first(|&(c, id, deviation)| {
        let truthful_utility = baseline[&(c, id)]?;
        let deviated = contexts[c].with(id, deviation.clone());
        let outcome = mechanism.run(scenario, &deviated).ok()?;
        let deviated_utility = agent_utility_over_support(scenario, &outcome, id);
        (deviated_utility > truthful_utility).then(|| {
            let truth = scenario.agent(id).expect("agent from scenario");
            let mut context = contexts[c].clone();
            context.set(id, Report::truthful(truth));
            Witness::Deviation {
                scenario: ScenarioFile::from_domain(scenario, &context),
                agent: id,
                deviation: ReportEntry::from_report(deviation, truth),
                truthful_utility,
                deviated_utility,
                requester_outcomes: realized_requester_utilities(scenario, &outcome),
            }
        })
    });
    report.cases_checked = cases.len() as u64;
    report.note = Some(format!("{} context(s)", contexts.len()));
    match found {
        Some(w) => report.violated(w),
        None => report,
    }
}

/// Profiles in which each agent independently keeps its true report or
/// switches to a random grid deviation with probability 1/2.
pub fn random_contexts(scenario: &Scenario, grid: &DeviationGrid, count: usize, seed: u64) -> Vec<ReportProfile> {
    let options: BTreeMap<AgentId, Vec<Report>> = scenario
        .agent_ids()
        .map(|id| (id, grid.reports_for(scenario, id)))
        .collect();
    (0..count)
        .map(|k| {
            let mut rng = stream(seed ^ 0x00C0_FFEE, k as u64);
            let mut profile = scenario.truthful();
            for (&id, reports) in &options {
                if !reports.is_empty() && rng.random_bool(0.5) {
                    profile.set(id, reports[rng.random_range(0..reports.len())].clone());
                }
            }
            profile
        })
        .collect()
}

/// Weak budget balance under truthful reports.
///
/// For the critical-sequence mechanisms that pay on realized quality, the
/// requester's realized utility must equal `w_{i₁} ≥ 0` at every quality the
/// selected agent can deliver. For the others, the expected requester
/// utility must be nonnegative.
pub fn check_wbb(scenario: &Scenario, mechanism: Mechanism) -> AuditReport {
    let (reports, outcome) = match truthful_outcome(scenario, mechanism, Property::Wbb) {
        Ok(x) => x,
        Err(report) => return report,
    };
    let mut report = AuditReport::new(Property::Wbb, mechanism.kind);
    let file = || ScenarioFile::from_domain(scenario, &reports);
    let realized = realized_requester_utilities(scenario, &outcome);
    report.cases_checked = realized.len().max(1) as u64;
    for &(q, _, u) in &realized {
        report.certificate.push(cert(format!("u_s@{q}"), u));
    }
    let expected = requester_utility_over_support(scenario, &outcome);
    report.certificate.push(cert("E[u_s]", expected));

    match mechanism.kind {
        MechanismKind::Pev | MechanismKind::Idm => {
            let first = outcome.first_w();
            report.certificate.push(cert("w_first", first));
            if first.is_negative() {
                return report.violated(Witness::Value {
                    scenario: file(),
                    description: "w of the first critical agent".into(),
                    realized_quality: None,
                    expected: Rational::ZERO,
                    actual: first,
                });
            }
            if let Some(&(q, _, u)) = realized.iter().find(|(_, _, u)| *u != first) {
                return report.violated(Witness::Value {
                    scenario: file(),
                    description: "requester utility vs w of the first critical agent".into(),
                    realized_quality: Some(q),
                    expected: first,
                    actual: u,
                });
            }
        }
        MechanismKind::Qaidm | MechanismKind::Vcg => {
            if expected.is_negative() {
                return report.violated(Witness::Value {
                    scenario: file(),
                    description: "expected requester utility".into(),
                    realized_quality: None,
                    expected: Rational::ZERO,
                    actual: expected,
                });
            }
        }
    }
    report
}

/// True expected welfare of the efficient participant minus that of the
/// mechanism's selection, under truthful reports. Holds iff the gap is zero.
pub fn check_efficiency_gap(scenario: &Scenario, mechanism: Mechanism) -> AuditReport {
    let (reports, outcome) = match truthful_outcome(scenario, mechanism, Property::Efficiency) {
        Ok(x) => x,
        Err(report) => return report,
    };
    let mut report = AuditReport::new(Property::Efficiency, mechanism.kind);
    let true_welfare = |id: AgentId| scenario.agent(id).map_or(Rational::ZERO, |t| t.expected_welfare());
    let efficient = efficient_allocation(scenario, &reports)
        .map(|e| e.welfare)
        .unwrap_or(Rational::ZERO);
    let achieved = outcome.selected().map_or(Rational::ZERO, true_welfare);
    let gap = efficient - achieved;
    report.cases_checked = 1;
    report.certificate = vec![
        cert("efficient_welfare", efficient),
        cert("selected_welfare", achieved),
        cert("gap", gap),
    ];
    if !gap.is_zero() {
        report = report.violated(Witness::Value {
            scenario: ScenarioFile::from_domain(scenario, &reports),
            description: "expected welfare of the selected agent vs the efficient one".into(),
            realized_quality: None,
            expected: efficient,
            actual: achieved,
        });
    }
    report
}

/// Two structural checks: the `w` chain is nondecreasing along the critical
/// sequence, and a sequence member's payoff does not move with its own PoQ or
/// cost report while selection and sequence stay fixed (`wᵢ` is computed
/// without that report).
pub fn check_lemmas(scenario: &Scenario, mechanism: Mechanism, step: Rational) -> [AuditReport; 2] {
    if !mechanism.kind.uses_critical_sequence() {
        let why = "no critical sequence";
        return [
            AuditReport::not_applicable(Property::WChain, mechanism.kind, why),
            AuditReport::not_applicable(Property::PayoffIndependence, mechanism.kind, why),
        ];
    }
    let (reports, outcome) = match truthful_outcome(scenario, mechanism, Property::WChain) {
        Ok(x) => x,
        Err(r) => {
            let note = r.note.clone().unwrap_or_default();
            return [
                r,
                AuditReport::not_applicable(Property::PayoffIndependence, mechanism.kind, note),
            ];
        }
    };
    [
        check_w_chain(scenario, &reports, &outcome),
        check_payoff_independence(scenario, &reports, &outcome, mechanism, step),
    ]
}

fn check_w_chain(scenario: &Scenario, reports: &ReportProfile, outcome: &MechanismOutcome) -> AuditReport {
    let mut report = AuditReport::new(Property::WChain, outcome.mechanism);
    let Some(sequence) = &outcome.sequence else {
        report.note = Some("null outcome".into());
        return report;
    };
    let chain: Vec<(AgentId, Rational)> = sequence
        .order
        .iter()
        .map(|&id| (id, outcome.w(id).unwrap_or(Rational::ZERO)))
        .collect();
    report.certificate = chain.iter().map(|&(id, w)| cert(format!("w{id}"), w)).collect();
    report.cases_checked = chain.len().saturating_sub(1) as u64;
    if let Some(pair) = chain.windows(2).find(|p| p[0].1 > p[1].1) {
        report = report.violated(Witness::Value {
            scenario: ScenarioFile::from_domain(scenario, reports),
            description: format!("w{} must not exceed w{}", pair[0].0, pair[1].0),
            realized_quality: None,
            expected: pair[1].1,
            actual: pair[0].1,
        });
    }
    report
}

fn check_payoff_independence(
    scenario: &Scenario,
    reports: &ReportProfile,
    outcome: &MechanismOutcome,
    mechanism: Mechanism,
    step: Rational,
) -> AuditReport {
    let mut report = AuditReport::new(Property::PayoffIndependence, outcome.mechanism);
    let Some(sequence) = &outcome.sequence else {
        report.note = Some("null outcome".into());
        return report;
    };
    let levels: Vec<Rational> = scenario.quality_levels().iter().copied().collect();
    let payoff_profile =
        |o: &MechanismOutcome, id: AgentId| -> Vec<Rational> { levels.iter().map(|&q| o.payoffs(q).get(id)).collect() };
    let grid = DeviationGrid::perturbations(step);
    let file = || ScenarioFile::from_domain(scenario, reports);

    for &id in &sequence.order {
        let truth = scenario.agent(id).expect("sequence member");

        // wᵢ must not depend on i's own report.
        let garbled = reports.with(id, Report::truthful(truth)).without(id);
        let recomputed = efficient_allocation(scenario, &garbled)
            .map(|e| e.welfare)
            .unwrap_or(Rational::ZERO);
        let stored = outcome.w(id).unwrap_or(Rational::ZERO);
        report.cases_checked += 1;
        if recomputed != stored {
            return report.violated(Witness::Value {
                scenario: file(),
                description: format!("w{id} recomputed with agent {id} removed"),
                realized_quality: None,
                expected: recomputed,
                actual: stored,
            });
        }

        let base = payoff_profile(outcome, id);
        for deviation in grid.reports_for(scenario, id) {
            let perturbed = reports.with(id, deviation.clone());
            let Ok(other) = mechanism.run(scenario, &perturbed) else {
                continue;
            };
            if other.selected() != outcome.selected() || other.sequence != outcome.sequence {
                continue;
            }
            report.cases_checked += 1;
            let moved = payoff_profile(&other, id);
            if let Some(k) = (0..levels.len()).find(|&k| moved[k] != base[k]) {
                let entry = serde_json::to_string(&ReportEntry::from_report(&deviation, truth)).unwrap_or_default();
                return report.violated(Witness::Value {
                    scenario: file(),
                    description: format!("payoff of agent {id} after it reports {entry}"),
                    realized_quality: Some(levels[k]),
                    expected: base[k],
                    actual: moved[k],
                });
            }
        }
    }
    report
}

/// Every check in a fixed order: IR, IC, WBB, w-chain, payoff independence,
/// efficiency.
pub fn audit_all(scenario: &Scenario, mechanism: Mechanism, options: &AuditOptions) -> Vec<AuditReport> {
    audit_properties(scenario, mechanism, &Property::ALL, options)
}

/// The checks for `properties`, in [`Property::ALL`] order.
pub fn audit_properties(
    scenario: &Scenario,
    mechanism: Mechanism,
    properties: &[Property],
    options: &AuditOptions,
) -> Vec<AuditReport> {
    let wants = |p: Property| properties.contains(&p);
    let mut out = Vec::new();
    if wants(Property::Ir) {
        out.push(check_ir(scenario, mechanism));
    }
    if wants(Property::Ic) {
        let grid = DeviationGrid::standard(scenario, options.grid_step, options.seed);
        let mut contexts = vec![scenario.truthful()];
        contexts.extend(random_contexts(scenario, &grid, options.random_contexts, options.seed));
        out.push(check_ic_in_contexts(scenario, mechanism, &grid, &contexts));
    }
    if wants(Property::Wbb) {
        out.push(check_wbb(scenario, mechanism));
    }
    if wants(Property::WChain) || wants(Property::PayoffIndependence) {
        let [l1, l2] = check_lemmas(scenario, mechanism, options.grid_step);
        if wants(Property::WChain) {
            out.push(l1);
        }
        if wants(Property::PayoffIndependence) {
            out.push(l2);
        }
    }
    if wants(Property::Efficiency) {
        out.push(check_efficiency_gap(scenario, mechanism));
    }
    out
}
