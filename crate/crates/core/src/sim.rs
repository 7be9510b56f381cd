//! Monte Carlo runs: the allocation is computed once from the reports, then
//! the selected agent's quality is drawn from its true PoQ in every trial.
//!
//! Trial `k` draws from its own stream derived from `(seed, k)`, so results
//! do not depend on how trials are split across threads.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::mechanism::{realized_utilities, Mechanism, MechanismError, MechanismKind, Utilities};
use crate::net::{AgentId, ReportProfile, Scenario};
use crate::poq::stream;
use crate::rational::Rational;

/// Exact sample moments of one utility series.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Moments {
    pub mean: Rational,
    /// Unbiased sample variance; zero for a single trial.
    pub variance: Rational,
}

impl Moments {
    /// Moments of a series in which value `x` occurs `n` times for each `(x, n)`.
    fn from_counts(values: impl IntoIterator<Item = (Rational, u64)> + Clone, trials: u64) -> Self {
        let n = Rational::from_integer(trials as i128);
        let mean = values
            .clone()
            .into_iter()
            .map(|(x, c)| x * Rational::from_integer(c as i128))
            .sum::<Rational>()
            / n;
        let variance = if trials < 2 {
            Rational::ZERO
        } else {
            values
                .into_iter()
                .map(|(x, c)| (x - mean) * (x - mean) * Rational::from_integer(c as i128))
                .sum::<Rational>()
                / (n - Rational::ONE)
        };
        Moments { mean, variance }
    }

    pub fn std_error(&self, trials: u64) -> f64 {
        (self.variance.to_f64() / trials as f64).sqrt()
    }
}

/// Empirical utilities over `trials` quality draws.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialStats {
    pub mechanism: MechanismKind,
    pub trials: u64,
    pub seed: u64,
    pub selected: Option<AgentId>,
    /// How often each quality was realized.
    pub quality_counts: BTreeMap<Rational, u64>,
    pub agents: BTreeMap<AgentId, Moments>,
    pub requester: Moments,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("at least one trial is needed")]
    NoTrials,
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
}

/// Runs `mechanism` once on `reports` and replays the payoff phase over
/// `trials` independent draws of the selected agent's true quality.
pub fn run_trials(
    scenario: &Scenario,
    reports: &ReportProfile,
    mechanism: Mechanism,
    trials: u64,
    seed: u64,
) -> Result<TrialStats, SimError> {
    if trials == 0 {
        return Err(SimError::NoTrials);
    }
    let outcome = mechanism.run(scenario, reports)?;
    let mut stats = TrialStats {
        mechanism: mechanism.kind,
        trials,
        seed,
        selected: outcome.selected(),
        quality_counts: BTreeMap::new(),
        agents: scenario.agent_ids().map(|id| (id, Moments::default())).collect(),
        requester: Moments::default(),
    };
    let Some(pmf) = outcome.selected().and_then(|id| scenario.agent(id)).map(|t| &t.pmf) else {
        return Ok(stats);
    };

    let support = pmf.support();
    let counts = (0..trials)
        .into_par_iter()
        .fold(
            || vec![0u64; support.len()],
            |mut acc, k| {
                let q = pmf.sample(&mut stream(seed, k));
                let slot = support.iter().position(|&(x, _)| x == q).expect("draw from support");
                acc[slot] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; support.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let per_quality: Vec<(Utilities, u64)> = support
        .iter()
        .zip(&counts)
        .filter(|(_, &c)| c > 0)
        .map(|(&(q, _), &c)| {
            stats.quality_counts.insert(q, c);
            (realized_utilities(scenario, &outcome, q), c)
        })
        .collect();
    for (id, moments) in stats.agents.iter_mut() {
        *moments = Moments::from_counts(per_quality.iter().map(|(u, c)| (u.get(*id), *c)), trials);
    }
    stats.requester = Moments::from_counts(per_quality.iter().map(|(u, c)| (u.requester, *c)), trials);
    Ok(stats)
}

/// Who a comparison line is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Agent(AgentId),
    Requester,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::Agent(id) => write!(f, "agent {id}"),
            Party::Requester => f.write_str("requester"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonLine {
    pub party: Party,
    pub empirical: Rational,
    pub analytic: Rational,
    pub std_error: f64,
    /// `None` when the sample variance is zero and equality is required.
    pub z: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub lines: Vec<ComparisonLine>,
    pub band: f64,
}

impl Comparison {
    pub fn pass(&self) -> bool {
        self.lines.iter().all(|l| l.pass)
    }

    pub fn max_z(&self) -> f64 {
        self.lines.iter().filter_map(|l| l.z).map(f64::abs).fold(0.0, f64::max)
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            let z = l.z.map_or_else(|| "exact".to_string(), |z| format!("z={z:+.3}"));
            let verdict = if l.pass { "ok" } else { "FAIL" };
            writeln!(
                f,
                "{:<10} empirical {:<12} analytic {:<8} {z:<10} {verdict}",
                l.party.to_string(),
                format!("{:.6}", l.empirical.to_f64()),
                l.analytic.to_string()
            )?;
        }
        Ok(())
    }
}

/// Width of the acceptance band in standard errors.
pub const Z_BAND: f64 = 4.0;

/// Checks every empirical mean against its analytic value: within
/// [`Z_BAND`] standard errors, or exactly equal when the sample variance is
/// zero.
pub fn compare(stats: &TrialStats, analytic: &Utilities) -> Comparison {
    let line = |party: Party, m: &Moments, expected: Rational| {
        if m.variance.is_zero() {
            ComparisonLine {
                party,
                empirical: m.mean,
                analytic: expected,
                std_error: 0.0,
                z: None,
                pass: m.mean == expected,
            }
        } else {
            let se = m.std_error(stats.trials);
            let z = (m.mean - expected).to_f64() / se;
            ComparisonLine {
                party,
                empirical: m.mean,
                analytic: expected,
                std_error: se,
                z: Some(z),
                pass: z.abs() <= Z_BAND,
            }
        }
    };
    let mut lines: Vec<ComparisonLine> = stats
        .agents
        .iter()
        .map(|(&id, m)| line(Party::Agent(id), m, analytic.get(id)))
        .collect();
    lines.push(line(Party::Requester, &stats.requester, analytic.requester));
    Comparison { lines, band: Z_BAND }
}
