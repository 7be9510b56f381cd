//! A rendered mechanism run: outcome, payoffs and utilities in one of three
//! modes (a fixed or sampled realized quality, the expectation, or a Monte
//! Carlo batch).

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::mechanism::{expected_utilities, realized_utilities, Mechanism, MechanismKind, Utilities};
use crate::net::{build_graph, AgentId, CriticalSequence, ReportProfile, Scenario};
use crate::poq::stream;
use crate::rational::Rational;
use crate::sim::{compare, run_trials, Comparison, SimError, TrialStats};

/// How the selected agent's quality is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RunMode {
    /// Evaluate at this realized quality.
    Quality { quality: Rational },
    /// Expectations over the selected agent's true PoQ.
    Expected,
    /// One draw from the selected agent's true PoQ.
    Sample { seed: u64 },
    /// Many draws, compared with the expectations.
    MonteCarlo { seed: u64, trials: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub stats: TrialStats,
    pub comparison: Comparison,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub mechanism: MechanismKind,
    pub participants: Vec<AgentId>,
    pub welfare_champion: Option<AgentId>,
    pub sequence: Option<CriticalSequence>,
    pub w_values: BTreeMap<AgentId, Rational>,
    pub selected: Option<AgentId>,
    pub selected_index: Option<usize>,
    pub mode: RunMode,
    /// The realized quality, or the selected agent's true expected quality in
    /// the expectation and Monte Carlo modes. `None` for a null outcome.
    pub quality: Option<Rational>,
    /// Payoffs (expected payoffs outside the fixed-quality modes) of every
    /// agent that can receive one.
    pub payoffs: BTreeMap<AgentId, Rational>,
    pub utilities: BTreeMap<AgentId, Rational>,
    pub requester_utility: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<MonteCarloSummary>,
}

impl RunReport {
    pub fn build(
        scenario: &Scenario,
        reports: &ReportProfile,
        mechanism: Mechanism,
        mode: RunMode,
    ) -> Result<RunReport, SimError> {
        let outcome = mechanism.run(scenario, reports)?;
        let graph = build_graph(scenario, reports).map_err(|e| SimError::Mechanism(e.into()))?;
        let true_pmf = outcome.selected().and_then(|id| scenario.agent(id)).map(|t| &t.pmf);

        let (quality, utilities): (Option<Rational>, Utilities) = match (mode, true_pmf) {
            (_, None) => (None, expected_utilities(scenario, reports, &outcome)),
            (RunMode::Quality { quality }, Some(_)) => (Some(quality), realized_utilities(scenario, &outcome, quality)),
            (RunMode::Sample { seed }, Some(pmf)) => {
                let q = pmf.sample(&mut stream(seed, 0));
                (Some(q), realized_utilities(scenario, &outcome, q))
            }
            (RunMode::Expected | RunMode::MonteCarlo { .. }, Some(pmf)) => {
                (Some(pmf.expectation()), expected_utilities(scenario, reports, &outcome))
            }
        };
        let at = quality.unwrap_or(Rational::ZERO);
        let payoff_vector = outcome.payoffs(at);

        let mut listed: Vec<AgentId> = outcome.w_values.keys().copied().collect();
        listed.extend(outcome.transfers.keys().copied());
        listed.extend(outcome.selected());
        listed.extend(utilities.agents.iter().filter(|(_, u)| !u.is_zero()).map(|(id, _)| *id));
        listed.sort_unstable();
        listed.dedup();

        let monte_carlo = match mode {
            RunMode::MonteCarlo { seed, trials } => {
                let stats = run_trials(scenario, reports, mechanism, trials, seed)?;
                let comparison = compare(&stats, &expected_utilities(scenario, reports, &outcome));
                Some(MonteCarloSummary { stats, comparison })
            }
            _ => None,
        };

        Ok(RunReport {
            mechanism: mechanism.kind,
            participants: graph.participants().into_iter().collect(),
            welfare_champion: outcome.welfare_champion,
            sequence: outcome.sequence.clone(),
            w_values: outcome.w_values.clone(),
            selected: outcome.selected(),
            selected_index: outcome.selected_index,
            mode,
            quality,
            payoffs: listed.iter().map(|&id| (id, payoff_vector.get(id))).collect(),
            utilities: listed.iter().map(|&id| (id, utilities.get(id))).collect(),
            requester_utility: utilities.requester,
            monte_carlo,
        })
    }

    pub fn payoff(&self, id: AgentId) -> Rational {
        self.payoffs.get(&id).copied().unwrap_or(Rational::ZERO)
    }

    pub fn utility(&self, id: AgentId) -> Rational {
        self.utilities.get(&id).copied().unwrap_or(Rational::ZERO)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("run reports always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn join<T: fmt::Display>(prefix: &str, items: &BTreeMap<AgentId, T>) -> String {
    let parts: Vec<String> = items.iter().map(|(id, v)| format!("{prefix}{id}={v}")).collect();
    if parts.is_empty() {
        "-".into()
    } else {
        parts.join(" ")
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |x: Option<AgentId>| x.map_or_else(|| "none".to_string(), |id| id.to_string());
        let participants: Vec<String> = self.participants.iter().map(|id| id.to_string()).collect();
        let mut out = String::new();
        writeln!(out, "mechanism     {}", self.mechanism)?;
        writeln!(out, "participants  {}", participants.join(" "))?;
        writeln!(out, "champion      {}", opt(self.welfare_champion))?;
        if let Some(seq) = &self.sequence {
            writeln!(out, "sequence      {seq}")?;
        }
        writeln!(out, "w             {}", join("w", &self.w_values))?;
        match (self.selected, self.selected_index) {
            (Some(id), Some(t)) => writeln!(out, "selected      {id} (t={t})")?,
            (sel, _) => writeln!(out, "selected      {}", opt(sel))?,
        }
        let mode = match self.mode {
            RunMode::Quality { .. } => "realized".to_string(),
            RunMode::Expected => "expected".to_string(),
            RunMode::Sample { seed } => format!("sampled (seed {seed})"),
            RunMode::MonteCarlo { seed, trials } => format!("expected, {trials} trials (seed {seed})"),
        };
        match self.quality {
            Some(q) if matches!(self.mode, RunMode::Quality { .. } | RunMode::Sample { .. }) => {
                writeln!(out, "quality       {q} [{mode}]")?
            }
            Some(q) => writeln!(out, "quality       E[Q]={q} [{mode}]")?,
            None => writeln!(out, "quality       - [{mode}]")?,
        }
        writeln!(out, "payoffs       {}", join("p", &self.payoffs))?;
        writeln!(out, "utilities     {}", join("u", &self.utilities))?;
        writeln!(out, "requester     {}", self.requester_utility)?;
        if let Some(mc) = &self.monte_carlo {
            let verdict = if mc.comparison.pass() {
                "consistent"
            } else {
                "INCONSISTENT"
            };
            writeln!(
                out,
                "monte carlo   {verdict} (band {} standard errors)",
                mc.comparison.band
            )?;
            for line in mc.comparison.to_string().lines() {
                writeln!(out, "  {line}")?;
            }
        }
        f.write_str(out.trim_end())
    }
}
