//! JSON scenario files.
//!
//! ```json
//! {
//!   "quality_levels": ["1", "5/2"],
//!   "requester_neighbors": [1],
//!   "agents": [
//!     { "id": 1, "cost": "0.5", "pmf": [["1", "1/2"], ["5/2", "1/2"]], "neighbors": ["s", 2] },
//!     { "id": 2, "cost": "1/10", "pmf": [["1", "1"]], "neighbors": [1] }
//!   ],
//!   "reports": { "1": { "cost": "0.7", "invited": [] }, "2": "nil" }
//! }
//! ```
//!
//! Rationals are `"a/b"` fractions, decimal strings (converted exactly) or
//! integers. The optional `reports` block overrides the truthful report of
//! individual agents; omitted fields default to the agent's true values.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::{AgentId, AgentType, Declaration, ModelError, Node, Report, ReportProfile, Scenario};
use crate::poq::Pmf;
use crate::rational::Rational;

#[derive(Debug, Error)]
pub enum ScenarioFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Syntax(#[from] serde_json::Error),
    #[error("{field}: {source}")]
    Model {
        field: String,
        #[source]
        source: Box<ModelError>,
    },
    #[error("duplicate agent id {0}")]
    DuplicateAgent(AgentId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub quality_levels: Vec<Rational>,
    pub requester_neighbors: Vec<AgentId>,
    pub agents: Vec<AgentEntry>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub reports: BTreeMap<AgentId, ReportEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AgentEntry {
    pub id: AgentId,
    pub cost: Rational,
    pub pmf: Pmf,
    pub neighbors: Vec<Node>,
}

// Hand-written so that field errors are raised right where the field ends,
// which is where serde_json records the line, and can still name the agent.
impl<'de> Deserialize<'de> for AgentEntry {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::{Error, MapAccess, Visitor};

        #[derive(Deserialize)]
        #[serde(field_identifier, rename_all = "lowercase")]
        enum Field {
            Id,
            Cost,
            Pmf,
            Neighbors,
        }

        struct EntryVisitor;

        // Decodes a field from its raw JSON so the error can carry the field
        // name; the caller's deserializer still supplies the line.
        fn typed<T: serde::de::DeserializeOwned, E: Error>(
            raw: serde_json::Value,
            field: impl FnOnce() -> String,
        ) -> Result<T, E> {
            serde_json::from_value(raw).map_err(|e| E::custom(format!("{}: {e}", field())))
        }

        impl<'de> Visitor<'de> for EntryVisitor {
            type Value = AgentEntry;

            fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str("an agent object with id, cost, pmf and neighbors")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<AgentEntry, A::Error> {
                let mut id: Option<AgentId> = None;
                let mut cost: Option<Rational> = None;
                let mut pmf: Option<Pmf> = None;
                let mut neighbors: Option<Vec<Node>> = None;
                let who = |id: Option<AgentId>| id.map_or_else(|| "agent".to_string(), |id| format!("agent {id}"));
                while let Some(key) = map.next_key::<Field>()? {
                    match key {
                        Field::Id => id = Some(map.next_value()?),
                        Field::Cost => {
                            let c: Rational = typed(map.next_value()?, || format!("{}: cost", who(id)))?;
                            if c.is_negative() {
                                return Err(A::Error::custom(format!("{}: cost: {c} is negative", who(id))));
                            }
                            cost = Some(c);
                        }
                        Field::Pmf => {
                            let points: Vec<(Rational, Rational)> =
                                typed(map.next_value()?, || format!("{}: pmf", who(id)))?;
                            let p = Pmf::new(points).map_err(|v| A::Error::custom(format!("{}: pmf: {v}", who(id))))?;
                            pmf = Some(p);
                        }
                        Field::Neighbors => neighbors = Some(map.next_value()?),
                    }
                }
                Ok(AgentEntry {
                    id: id.ok_or_else(|| A::Error::missing_field("id"))?,
                    cost: cost.ok_or_else(|| A::Error::missing_field("cost"))?,
                    pmf: pmf.ok_or_else(|| A::Error::missing_field("pmf"))?,
                    neighbors: neighbors.unwrap_or_default(),
                })
            }
        }

        deserializer.deserialize_struct("AgentEntry", &["id", "cost", "pmf", "neighbors"], EntryVisitor)
    }
}

/// A per-agent override: `"nil"` or any subset of the report fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReportEntry {
    Nil(NilMarker),
    Declared(ReportOverride),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NilMarker {
    #[serde(rename = "nil")]
    Nil,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pmf: Option<Pmf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invited: Option<Vec<Node>>,
}

impl ReportEntry {
    /// The override that turns `truth` into `report`.
    pub fn from_report(report: &Report, truth: &AgentType) -> Self {
        match report {
            Report::Nil => ReportEntry::Nil(NilMarker::Nil),
            Report::Declared(d) => ReportEntry::Declared(ReportOverride {
                pmf: (d.pmf != truth.pmf).then(|| d.pmf.clone()),
                cost: (d.cost != truth.cost).then_some(d.cost),
                invited: (d.invited != truth.neighbors).then(|| d.invited.iter().copied().collect()),
            }),
        }
    }

    /// Applies the override to `truth`.
    pub fn to_report(&self, truth: &AgentType) -> Report {
        match self {
            ReportEntry::Nil(_) => Report::Nil,
            ReportEntry::Declared(o) => Report::Declared(Declaration {
                pmf: o.pmf.clone().unwrap_or_else(|| truth.pmf.clone()),
                cost: o.cost.unwrap_or(truth.cost),
                invited: o
                    .invited
                    .as_ref()
                    .map_or_else(|| truth.neighbors.clone(), |v| v.iter().copied().collect()),
            }),
        }
    }
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self, ScenarioFileError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario files always serialize");
        s.push('\n');
        s
    }

    /// Converts to validated domain objects.
    pub fn to_domain(&self) -> Result<(Scenario, ReportProfile), ScenarioFileError> {
        let mut agents = BTreeMap::new();
        for entry in &self.agents {
            let ty = AgentType::new(entry.pmf.clone(), entry.cost, entry.neighbors.iter().copied());
            if agents.insert(entry.id, ty).is_some() {
                return Err(ScenarioFileError::DuplicateAgent(entry.id));
            }
        }
        let scenario = Scenario::new(
            self.requester_neighbors.iter().copied(),
            agents,
            self.quality_levels.iter().copied(),
        )
        .map_err(|source| ScenarioFileError::Model {
            field: "scenario".to_string(),
            source: Box::new(source),
        })?;

        let mut reports = scenario.truthful();
        for (&id, entry) in &self.reports {
            let field = format!("reports.{id}");
            let truth = scenario.agent(id).ok_or_else(|| ScenarioFileError::Model {
                field: field.clone(),
                source: Box::new(ModelError::UnknownAgent {
                    id,
                    context: "the reports block".to_string(),
                }),
            })?;
            let report = entry.to_report(truth);
            scenario
                .check_report(id, &report)
                .map_err(|source| ScenarioFileError::Model {
                    field,
                    source: Box::new(source),
                })?;
            reports.set(id, report);
        }
        Ok((scenario, reports))
    }

    /// The file form of a scenario; reports that differ from the truth are
    /// written to the `reports` block.
    pub fn from_domain(scenario: &Scenario, reports: &ReportProfile) -> Self {
        let agents = scenario
            .agents()
            .iter()
            .map(|(&id, ty)| AgentEntry {
                id,
                cost: ty.cost,
                pmf: ty.pmf.clone(),
                neighbors: ty.neighbors.iter().copied().collect(),
            })
            .collect();
        let mut overrides = BTreeMap::new();
        for (&id, ty) in scenario.agents() {
            let report = reports.get(id);
            if *report == Report::truthful(ty) {
                continue;
            }
            let entry = ReportEntry::from_report(report, ty);
            overrides.insert(id, entry);
        }
        ScenarioFile {
            description: None,
            quality_levels: scenario.quality_levels().iter().copied().collect(),
            requester_neighbors: scenario.requester_neighbors().iter().copied().collect(),
            agents,
            reports: overrides,
        }
    }
}

/// Reads and validates a scenario file.
pub fn parse_scenario(path: &Path) -> Result<(Scenario, ReportProfile), ScenarioFileError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioFileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario_str(&text)
}

pub fn parse_scenario_str(text: &str) -> Result<(Scenario, ReportProfile), ScenarioFileError> {
    ScenarioFile::from_json(text)?.to_domain()
}
