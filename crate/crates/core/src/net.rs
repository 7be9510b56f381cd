//! Social network, agent types, report profiles and the diffusion graph they
//! induce.
//!
//! Invitations flow outward: the requester `s` reaches its neighbours, and
//! every agent with a non-nil report adds edges to the neighbours it invited.
//! An agent participates when some directed path from `s` reaches it.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::poq::{Pmf, PmfViolation};
use crate::rational::Rational;

/// A worker identity. The requester is not an `AgentId`; see [`Node`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub u32);

impl fmt::Debug for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A vertex of the social network: the requester or a worker.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Requester,
    Agent(AgentId),
}

impl Node {
    pub fn agent(self) -> Option<AgentId> {
        match self {
            Node::Requester => None,
            Node::Agent(id) => Some(id),
        }
    }
}

impl From<AgentId> for Node {
    fn from(id: AgentId) -> Self {
        Node::Agent(id)
    }
}

impl fmt::Debug for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Requester => f.write_str("s"),
            Node::Agent(id) => write!(f, "{id}"),
        }
    }
}

// Serialized as the string "s" or a bare integer id.
impl Serialize for Node {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Node::Requester => serializer.serialize_str("s"),
            Node::Agent(id) => serializer.serialize_u32(id.0),
        }
    }
}

impl<'de> Deserialize<'de> for Node {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct Visitor;

        impl serde::de::Visitor<'_> for Visitor {
            type Value = Node;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an agent id or \"s\"")
            }

            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<Node, E> {
                if v == "s" {
                    return Ok(Node::Requester);
                }
                v.parse::<u32>()
                    .map(|id| Node::Agent(AgentId(id)))
                    .map_err(|_| E::custom(format!("invalid node `{v}`")))
            }

            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<Node, E> {
                u32::try_from(v)
                    .map(|id| Node::Agent(AgentId(id)))
                    .map_err(|_| E::custom(format!("agent id {v} out of range")))
            }

            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<Node, E> {
                u32::try_from(v)
                    .map(|id| Node::Agent(AgentId(id)))
                    .map_err(|_| E::custom(format!("agent id {v} out of range")))
            }
        }

        deserializer.deserialize_any(Visitor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown agent {id} referenced by {context}")]
    UnknownAgent { id: AgentId, context: String },
    #[error("agent {0} lists itself as a neighbour")]
    SelfNeighbor(AgentId),
    #[error("agent {0} has a negative cost")]
    NegativeCost(AgentId),
    #[error("agent {id}: invalid PoQ: {violation}")]
    InvalidPmf { id: AgentId, violation: PmfViolation },
    #[error("agent {id}: quality {quality} is not a scenario quality level")]
    QualityOutsideLevels { id: AgentId, quality: Rational },
    #[error("agent {id} invites {invited}, who is not among its neighbours")]
    InviteOutsideNeighbors { id: AgentId, invited: Node },
    #[error("agent {0} is not reachable from the requester")]
    Unreachable(AgentId),
    #[error("the requester cannot be removed from a report profile")]
    RequesterRemoval,
    #[error("the requester cannot be its own neighbour")]
    RequesterSelfNeighbor,
    #[error("scenario has no quality levels")]
    NoQualityLevels,
    #[error("quality level {0} is negative")]
    NegativeQualityLevel(Rational),
}

/// An agent's private type: PoQ, cost to perform the task, and neighbours.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentType {
    pub pmf: Pmf,
    pub cost: Rational,
    pub neighbors: BTreeSet<Node>,
}

impl AgentType {
    pub fn new(pmf: Pmf, cost: Rational, neighbors: impl IntoIterator<Item = Node>) -> Self {
        AgentType {
            pmf,
            cost,
            neighbors: neighbors.into_iter().collect(),
        }
    }

    pub fn expected_welfare(&self) -> Rational {
        self.pmf.expectation() - self.cost
    }
}

/// What a participating agent declares.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Declaration {
    pub pmf: Pmf,
    pub cost: Rational,
    pub invited: BTreeSet<Node>,
}

impl Declaration {
    pub fn expected_welfare(&self) -> Rational {
        self.pmf.expectation() - self.cost
    }
}

/// An agent's report: either nothing (`nil`) or a declared type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Report {
    Nil,
    Declared(Declaration),
}

impl Report {
    pub fn truthful(ty: &AgentType) -> Self {
        Report::Declared(Declaration {
            pmf: ty.pmf.clone(),
            cost: ty.cost,
            invited: ty.neighbors.clone(),
        })
    }

    pub fn declaration(&self) -> Option<&Declaration> {
        match self {
            Report::Nil => None,
            Report::Declared(d) => Some(d),
        }
    }
}

/// The ground truth: requester neighbourhood, every agent's true type and
/// the finite set of quality levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    requester_neighbors: BTreeSet<AgentId>,
    agents: BTreeMap<AgentId, AgentType>,
    quality_levels: BTreeSet<Rational>,
}

impl Scenario {
    pub fn new(
        requester_neighbors: impl IntoIterator<Item = AgentId>,
        agents: impl IntoIterator<Item = (AgentId, AgentType)>,
        quality_levels: impl IntoIterator<Item = Rational>,
    ) -> Result<Self, ModelError> {
        let scenario = Scenario {
            requester_neighbors: requester_neighbors.into_iter().collect(),
            agents: agents.into_iter().collect(),
            quality_levels: quality_levels.into_iter().collect(),
        };
        scenario.validate()?;
        Ok(scenario)
    }

    fn validate(&self) -> Result<(), ModelError> {
        if self.quality_levels.is_empty() {
            return Err(ModelError::NoQualityLevels);
        }
        if let Some(q) = self.quality_levels.iter().find(|q| q.is_negative()) {
            return Err(ModelError::NegativeQualityLevel(*q));
        }
        for id in &self.requester_neighbors {
            self.require_known(*id, "the requester's neighbour set")?;
        }
        for (&id, ty) in &self.agents {
            if ty.cost.is_negative() {
                return Err(ModelError::NegativeCost(id));
            }
            if ty.neighbors.contains(&Node::Agent(id)) {
                return Err(ModelError::SelfNeighbor(id));
            }
            for n in &ty.neighbors {
                if let Node::Agent(other) = n {
                    self.require_known(*other, &format!("agent {id}'s neighbour set"))?;
                }
            }
            self.check_levels(id, &ty.pmf)?;
        }
        Ok(())
    }

    fn require_known(&self, id: AgentId, context: &str) -> Result<(), ModelError> {
        if self.agents.contains_key(&id) {
            Ok(())
        } else {
            Err(ModelError::UnknownAgent {
                id,
                context: context.to_string(),
            })
        }
    }

    fn check_levels(&self, id: AgentId, pmf: &Pmf) -> Result<(), ModelError> {
        match pmf.qualities().find(|q| !self.quality_levels.contains(q)) {
            Some(quality) => Err(ModelError::QualityOutsideLevels { id, quality }),
            None => Ok(()),
        }
    }

    pub fn requester_neighbors(&self) -> &BTreeSet<AgentId> {
        &self.requester_neighbors
    }

    pub fn agents(&self) -> &BTreeMap<AgentId, AgentType> {
        &self.agents
    }

    pub fn agent(&self, id: AgentId) -> Option<&AgentType> {
        self.agents.get(&id)
    }

    pub fn agent_ids(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.agents.keys().copied()
    }

    pub fn quality_levels(&self) -> &BTreeSet<Rational> {
        &self.quality_levels
    }

    /// The fully truthful report profile.
    pub fn truthful(&self) -> ReportProfile {
        ReportProfile::truthful(self)
    }

    /// Checks that a report is one agent `id` could actually make: known id,
    /// invitations within its true neighbours, nonnegative cost and a PoQ over
    /// the scenario's quality levels.
    pub fn check_report(&self, id: AgentId, report: &Report) -> Result<(), ModelError> {
        let ty = self.agents.get(&id).ok_or_else(|| ModelError::UnknownAgent {
            id,
            context: "the report profile".to_string(),
        })?;
        let Report::Declared(d) = report else {
            return Ok(());
        };
        if d.cost.is_negative() {
            return Err(ModelError::NegativeCost(id));
        }
        if let Some(&invited) = d.invited.iter().find(|n| !ty.neighbors.contains(n)) {
            return Err(ModelError::InviteOutsideNeighbors { id, invited });
        }
        self.check_levels(id, &d.pmf)
    }

    pub fn check_profile(&self, reports: &ReportProfile) -> Result<(), ModelError> {
        for (&id, report) in &reports.reports {
            self.check_report(id, report)?;
        }
        for &id in &reports.removed {
            self.require_known(id, "the report profile")?;
        }
        Ok(())
    }

    /// True when every agent's PoQ is the point mass at one common quality.
    pub fn uniform_quality(&self) -> Option<Rational> {
        let mut points = self.agents.values().map(|t| t.pmf.as_point());
        let first = points.next()??;
        points.all(|p| p == Some(first)).then_some(first)
    }
}

/// Reports of all agents. Agents absent from the map report `nil`.
///
/// Agents listed in `removed` are deleted from the network entirely: they
/// neither forward invitations nor participate.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReportProfile {
    reports: BTreeMap<AgentId, Report>,
    removed: BTreeSet<AgentId>,
}

impl ReportProfile {
    pub fn new(reports: impl IntoIterator<Item = (AgentId, Report)>) -> Self {
        ReportProfile {
            reports: reports.into_iter().collect(),
            removed: BTreeSet::new(),
        }
    }

    pub fn truthful(scenario: &Scenario) -> Self {
        ReportProfile::new(scenario.agents.iter().map(|(&id, ty)| (id, Report::truthful(ty))))
    }

    pub fn get(&self, id: AgentId) -> &Report {
        static NIL: Report = Report::Nil;
        if self.removed.contains(&id) {
            return &NIL;
        }
        self.reports.get(&id).unwrap_or(&NIL)
    }

    pub fn declaration(&self, id: AgentId) -> Option<&Declaration> {
        self.get(id).declaration()
    }

    pub fn set(&mut self, id: AgentId, report: Report) {
        self.removed.remove(&id);
        self.reports.insert(id, report);
    }

    pub fn with(&self, id: AgentId, report: Report) -> Self {
        let mut next = self.clone();
        next.set(id, report);
        next
    }

    /// `(nil, θ′₋ᵢ)` with node deletion: `id` neither forwards nor works.
    pub fn without(&self, id: AgentId) -> Self {
        let mut next = self.clone();
        next.reports.insert(id, Report::Nil);
        next.removed.insert(id);
        next
    }

    pub fn is_removed(&self, id: AgentId) -> bool {
        self.removed.contains(&id)
    }

    pub fn removed(&self) -> &BTreeSet<AgentId> {
        &self.removed
    }

    pub fn iter(&self) -> impl Iterator<Item = (AgentId, &Report)> {
        self.reports.iter().map(|(&id, r)| (id, r))
    }
}

/// Replaces `node`'s report by `nil` and deletes it from the network.
pub fn without_agent(reports: &ReportProfile, node: Node) -> Result<ReportProfile, ModelError> {
    match node {
        Node::Requester => Err(ModelError::RequesterRemoval),
        Node::Agent(id) => Ok(reports.without(id)),
    }
}

/// The directed graph `G(θ′)`.
///
/// Vertex 0 is the requester; vertex `k > 0` is the `k`-th agent of the
/// scenario in id order.
#[derive(Debug, Clone)]
pub struct DiffusionGraph {
    ids: Vec<AgentId>,
    adj: Vec<Vec<usize>>,
    present: Vec<bool>,
}

pub(crate) const ROOT: usize = 0;

/// Builds `G(θ′)`: edges `s → r_s` plus `i → r′ᵢ` for every non-nil report.
pub fn build_graph(scenario: &Scenario, reports: &ReportProfile) -> Result<DiffusionGraph, ModelError> {
    let ids: Vec<AgentId> = scenario.agents.keys().copied().collect();
    let index_of = |id: AgentId, context: &dyn Fn() -> String| {
        ids.binary_search(&id)
            .map(|k| k + 1)
            .map_err(|_| ModelError::UnknownAgent { id, context: context() })
    };
    let mut present = vec![true; ids.len() + 1];
    for &id in &reports.removed {
        present[index_of(id, &|| "the removed set".to_string())?] = false;
    }
    let mut adj = vec![Vec::new(); ids.len() + 1];
    for &id in &scenario.requester_neighbors {
        let k = index_of(id, &|| "the requester's neighbour set".to_string())?;
        adj[ROOT].push(k);
    }
    for (&id, report) in &reports.reports {
        let from = index_of(id, &|| "the report profile".to_string())?;
        let Report::Declared(d) = report else { continue };
        if !present[from] {
            continue;
        }
        for node in &d.invited {
            if let Node::Agent(to) = node {
                let k = index_of(*to, &|| format!("agent {id}'s invitations"))?;
                adj[from].push(k);
            }
        }
    }
    for (k, out) in adj.iter_mut().enumerate() {
        out.retain(|&to| present[to] && to != k);
        out.sort_unstable();
        out.dedup();
    }
    Ok(DiffusionGraph { ids, adj, present })
}

/// `I(θ′)`: agents reachable from `s`.
pub fn participants(graph: &DiffusionGraph) -> BTreeSet<AgentId> {
    graph.participants()
}

/// Critical agents of `target` in nested-dominance order.
pub fn critical_sequence(graph: &DiffusionGraph, target: AgentId) -> Result<CriticalSequence, ModelError> {
    graph.critical_sequence(target)
}

impl DiffusionGraph {
    pub(crate) fn len(&self) -> usize {
        self.adj.len()
    }

    pub(crate) fn id_at(&self, vertex: usize) -> AgentId {
        self.ids[vertex - 1]
    }

    pub(crate) fn vertex_of(&self, id: AgentId) -> Option<usize> {
        self.ids.binary_search(&id).ok().map(|k| k + 1)
    }

    /// Reachability from `s` with `skip` deleted.
    pub(crate) fn reachable_without(&self, skip: Option<usize>) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[ROOT] = true;
        if let Some(v) = skip {
            // Marking as seen blocks traversal; cleared below.
            seen[v] = true;
        }
        let mut queue = VecDeque::from([ROOT]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        if let Some(v) = skip {
            seen[v] = false;
        }
        seen
    }

    pub fn participants(&self) -> BTreeSet<AgentId> {
        self.reachable_without(None)
            .iter()
            .enumerate()
            .skip(1)
            .filter(|&(_, &r)| r)
            .map(|(k, _)| self.id_at(k))
            .collect()
    }

    pub fn is_participant(&self, id: AgentId) -> bool {
        self.vertex_of(id)
            .is_some_and(|v| self.present[v] && self.reachable_without(None)[v])
    }

    /// All directed edges, `s` first, then by source id.
    pub fn edges(&self) -> Vec<(Node, AgentId)> {
        let node = |v: usize| {
            if v == ROOT {
                Node::Requester
            } else {
                Node::Agent(self.id_at(v))
            }
        };
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(v, out)| out.iter().map(move |&w| (node(v), self.id_at(w))))
            .collect()
    }

    /// Reference computation: `j` is critical for `target` iff deleting `j`
    /// disconnects `target` from `s`. Members are ordered by their position
    /// on a shortest path, which on any path is the dominance order.
    pub fn critical_sequence(&self, target: AgentId) -> Result<CriticalSequence, ModelError> {
        let t = self.vertex_of(target).ok_or_else(|| ModelError::UnknownAgent {
            id: target,
            context: "critical sequence target".to_string(),
        })?;
        let path = self.shortest_path(t).ok_or(ModelError::Unreachable(target))?;
        let order = path
            .into_iter()
            .skip(1)
            .filter(|&v| v == t || !self.reachable_without(Some(v))[t])
            .map(|v| self.id_at(v))
            .collect();
        Ok(CriticalSequence { target, order })
    }

    /// Same result via the dominator tree of the reachable subgraph.
    pub fn critical_sequence_fast(&self, target: AgentId) -> Result<CriticalSequence, ModelError> {
        let t = self.vertex_of(target).ok_or_else(|| ModelError::UnknownAgent {
            id: target,
            context: "critical sequence target".to_string(),
        })?;
        let idom = self.immediate_dominators();
        if t == ROOT || idom[t].is_none() {
            return Err(ModelError::Unreachable(target));
        }
        let mut chain = Vec::new();
        let mut v = t;
        while v != ROOT {
            chain.push(self.id_at(v));
            v = idom[v].expect("reachable vertices have an immediate dominator");
        }
        chain.reverse();
        Ok(CriticalSequence { target, order: chain })
    }

    fn shortest_path(&self, t: usize) -> Option<Vec<usize>> {
        let mut parent = vec![usize::MAX; self.adj.len()];
        parent[ROOT] = ROOT;
        let mut queue = VecDeque::from([ROOT]);
        while let Some(v) = queue.pop_front() {
            if v == t {
                break;
            }
            for &w in &self.adj[v] {
                if parent[w] == usize::MAX {
                    parent[w] = v;
                    queue.push_back(w);
                }
            }
        }
        if parent[t] == usize::MAX {
            return None;
        }
        let mut path = vec![t];
        let mut v = t;
        while v != ROOT {
            v = parent[v];
            path.push(v);
        }
        path.reverse();
        Some(path)
    }

    /// Immediate dominators rooted at `s` (Cooper, Harvey and Kennedy's
    /// iterative scheme over reverse postorder). `None` for unreachable
    /// vertices and for the root itself.
    pub(crate) fn immediate_dominators(&self) -> Vec<Option<usize>> {
        let n = self.adj.len();
        let mut postorder = Vec::with_capacity(n);
        let mut visited = vec![false; n];
        let mut stack = vec![(ROOT, 0usize)];
        visited[ROOT] = true;
        while let Some((v, next)) = stack.pop() {
            if next < self.adj[v].len() {
                stack.push((v, next + 1));
                let w = self.adj[v][next];
                if !visited[w] {
                    visited[w] = true;
                    stack.push((w, 0));
                }
            } else {
                postorder.push(v);
            }
        }
        let mut rpo_number = vec![usize::MAX; n];
        for (k, &v) in postorder.iter().rev().enumerate() {
            rpo_number[v] = k;
        }
        let mut preds = vec![Vec::new(); n];
        for (v, out) in self.adj.iter().enumerate() {
            if visited[v] {
                for &w in out {
                    preds[w].push(v);
                }
            }
        }
        let mut idom = vec![usize::MAX; n];
        idom[ROOT] = ROOT;
        let intersect = |idom: &[usize], mut a: usize, mut b: usize| {
            while a != b {
                while rpo_number[a] > rpo_number[b] {
                    a = idom[a];
                }
                while rpo_number[b] > rpo_number[a] {
                    b = idom[b];
                }
            }
            a
        };
        let mut changed = true;
        while changed {
            changed = false;
            for &v in postorder.iter().rev().skip(1) {
                let mut new_idom = usize::MAX;
                for &p in &preds[v] {
                    if idom[p] == usize::MAX {
                        continue;
                    }
                    new_idom = if new_idom == usize::MAX {
                        p
                    } else {
                        intersect(&idom, p, new_idom)
                    };
                }
                if idom[v] != new_idom {
                    idom[v] = new_idom;
                    changed = true;
                }
            }
        }
        idom.iter()
            .enumerate()
            .map(|(v, &d)| (v != ROOT && d != usize::MAX).then_some(d))
            .collect()
    }
}

/// `(s, i₁, …, i_m)` with `i_m` the target; `s` is implicit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalSequence {
    pub target: AgentId,
    pub order: Vec<AgentId>,
}

impl CriticalSequence {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// 1-based position, matching `i_k`.
    pub fn position(&self, id: AgentId) -> Option<usize> {
        self.order.iter().position(|&x| x == id).map(|k| k + 1)
    }

    pub fn contains(&self, id: AgentId) -> bool {
        self.order.contains(&id)
    }
}

impl fmt::Display for CriticalSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(s")?;
        for id in &self.order {
            write!(f, ", {id}")?;
        }
        f.write_str(")")
    }
}
