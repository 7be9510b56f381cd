//! Scenarios shipped with the crate.
//!
//! Only the agent types and a few path facts of these scenarios are fixed;
//! each edge list is a reconstruction that satisfies them. [`load`] re-checks
//! those constraints every time and refuses a bundled file that no longer
//! satisfies them.

use thiserror::Error;

use crate::mechanism::efficient_allocation;
use crate::net::{build_graph, AgentId, Node, ReportProfile, Scenario};
use crate::poq::Pmf;
use crate::rational::{rat, Rational};
use crate::scenario_file::{parse_scenario_str, ScenarioFileError};

pub const EXAMPLE2: &str = include_str!("../scenarios/example2.json");
pub const FIGURE1: &str = include_str!("../scenarios/figure1.json");
pub const FIGURE5: &str = include_str!("../scenarios/figure5.json");
pub const QAIDM_FAILURE: &str = include_str!("../scenarios/qaidm_failure.json");

pub const NAMES: [&str; 4] = ["example2", "figure1", "figure5", "qaidm_failure"];

#[derive(Debug, Error)]
pub enum BundledError {
    #[error("no bundled scenario named `{0}`")]
    Unknown(String),
    #[error("bundled scenario {name}: {source}")]
    File {
        name: &'static str,
        #[source]
        source: ScenarioFileError,
    },
    #[error("bundled scenario {name} violates a reference constraint: {message}")]
    Constraint { name: &'static str, message: String },
}

fn canonical(name: &str) -> Option<&'static str> {
    let stem = name.strip_suffix(".json").unwrap_or(name);
    NAMES.into_iter().find(|n| *n == stem)
}

/// JSON text of a bundled scenario; `name` may carry a `.json` suffix.
pub fn source(name: &str) -> Option<&'static str> {
    Some(match canonical(name)? {
        "example2" => EXAMPLE2,
        "figure1" => FIGURE1,
        "figure5" => FIGURE5,
        "qaidm_failure" => QAIDM_FAILURE,
        _ => unreachable!(),
    })
}

/// Parses a bundled scenario and verifies its reconstruction constraints.
pub fn load(name: &str) -> Result<(Scenario, ReportProfile), BundledError> {
    let canonical = canonical(name).ok_or_else(|| BundledError::Unknown(name.to_string()))?;
    let text = source(canonical).expect("canonical names have sources");
    let (scenario, reports) = parse_scenario_str(text).map_err(|source| BundledError::File {
        name: canonical,
        source,
    })?;
    check_constraints(canonical, &scenario).map_err(|message| BundledError::Constraint {
        name: canonical,
        message,
    })?;
    Ok((scenario, reports))
}

fn ensure(cond: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(message())
    }
}

fn a(k: u32) -> AgentId {
    AgentId(k)
}

/// Best worker and welfare once `removed` leaves the network.
fn best_without(scenario: &Scenario, removed: u32) -> Result<(Option<AgentId>, Rational), String> {
    let alloc = efficient_allocation(scenario, &scenario.truthful().without(a(removed))).map_err(|e| e.to_string())?;
    Ok((alloc.allocation.selected, alloc.welfare))
}

fn critical_order(scenario: &Scenario, target: u32) -> Result<Vec<AgentId>, String> {
    let g = build_graph(scenario, &scenario.truthful()).map_err(|e| e.to_string())?;
    g.critical_sequence(a(target))
        .map(|s| s.order)
        .map_err(|e| e.to_string())
}

fn pmf(points: &[(i128, i128, i128)]) -> Pmf {
    Pmf::new(points.iter().map(|&(q, n, d)| (rat(q, 1), rat(n, d)))).expect("table rows are distributions")
}

/// The reference ten-agent type table: `(id, PoQ, cost)`.
pub fn example2_table() -> Vec<(AgentId, Pmf, Rational)> {
    vec![
        (a(1), pmf(&[(2, 1, 2), (3, 1, 2)]), rat(1, 2)),
        (a(2), pmf(&[(1, 1, 1)]), rat(1, 5)),
        (a(3), pmf(&[(5, 1, 1)]), rat(1, 1)),
        (a(4), pmf(&[(3, 1, 1)]), rat(1, 1)),
        (a(5), pmf(&[(4, 2, 5), (6, 3, 5)]), rat(8, 5)),
        (a(6), pmf(&[(3, 3, 10), (4, 3, 5), (7, 1, 10)]), rat(9, 10)),
        (a(7), pmf(&[(6, 1, 2), (8, 1, 2)]), rat(21, 5)),
        (a(8), pmf(&[(1, 1, 5), (3, 4, 5)]), rat(0, 1)),
        (a(9), pmf(&[(8, 4, 5), (10, 1, 5)]), rat(1, 1)),
        (a(10), pmf(&[(4, 1, 2), (5, 3, 10), (6, 1, 5)]), rat(1, 5)),
    ]
}

pub fn check_constraints(name: &str, scenario: &Scenario) -> Result<(), String> {
    match name {
        "example2" => check_example2(scenario),
        "figure1" => check_figure1(scenario),
        "figure5" => check_figure5(scenario),
        "qaidm_failure" => check_qaidm_failure(scenario),
        _ => Ok(()),
    }
}

fn check_example2(sc: &Scenario) -> Result<(), String> {
    ensure(sc.agents().len() == 10, || "expected ten agents".into())?;
    for (id, pmf, cost) in example2_table() {
        let ty = sc.agent(id).ok_or_else(|| format!("agent {id} missing"))?;
        ensure(ty.pmf == pmf && ty.cost == cost, || {
            format!("agent {id} differs from the type table")
        })?;
    }
    let levels: Vec<Rational> = (1..=10).map(|q| rat(q, 1)).collect();
    ensure(sc.quality_levels().iter().copied().eq(levels), || {
        "quality levels must be 1..=10".into()
    })?;
    let order = critical_order(sc, 9)?;
    ensure(order == [a(2), a(6), a(9)], || {
        format!("critical sequence of 9 is {order:?}, not (s, 2, 6, 9)")
    })?;
    for (removed, via, w) in [(2, 3, rat(4, 1)), (6, 3, rat(4, 1)), (9, 10, rat(9, 2))] {
        let (best, welfare) = best_without(sc, removed)?;
        ensure(best == Some(a(via)) && welfare == w, || {
            format!("without agent {removed} the best worker should be {via} at {w}, got {best:?} at {welfare}")
        })?;
    }
    Ok(())
}

fn check_figure1(sc: &Scenario) -> Result<(), String> {
    let q = rat(1, 1);
    ensure(sc.uniform_quality() == Some(q), || {
        "every agent must deliver quality 1 surely".into()
    })?;
    ensure(sc.agents().len() == 7, || "expected seven agents".into())?;
    ensure(sc.requester_neighbors().iter().copied().eq([a(1), a(2), a(3)]), || {
        "requester neighbours must be {1, 2, 3}".into()
    })?;
    let cost = |k| sc.agent(a(k)).map(|t| t.cost);
    ensure(cost(2) == Some(rat(3, 5)), || "c2 must be 0.6".into())?;
    ensure(cost(4) == Some(rat(1, 10)), || "c4 must be 0.1".into())?;
    ensure(critical_order(sc, 4)?.contains(&a(1)), || {
        "agent 4 must be reachable only through agent 1".into()
    })?;
    for removed in [1, 4] {
        let (best, welfare) = best_without(sc, removed)?;
        ensure(best == Some(a(2)) && welfare == rat(2, 5), || {
            format!("without agent {removed} the best welfare should be 0.4 via agent 2")
        })?;
    }
    let full = efficient_allocation(sc, &sc.truthful()).map_err(|e| e.to_string())?;
    ensure(
        full.allocation.selected == Some(a(4)) && full.welfare == rat(9, 10),
        || "with full diffusion agent 4 must win at welfare 0.9".into(),
    )
}

fn check_figure5(sc: &Scenario) -> Result<(), String> {
    let q = rat(1, 1);
    ensure(sc.uniform_quality() == Some(q), || {
        "both agents must deliver quality 1 surely".into()
    })?;
    ensure(sc.requester_neighbors().iter().copied().eq([a(1)]), || {
        "s must know only agent 1".into()
    })?;
    let one = sc.agent(a(1)).ok_or("agent 1 missing")?;
    let two = sc.agent(a(2)).ok_or("agent 2 missing")?;
    ensure(
        one.neighbors.iter().copied().eq([Node::Requester, Node::Agent(a(2))]),
        || "agent 1's neighbours must be s and 2".into(),
    )?;
    ensure(one.cost == rat(2, 5) && two.cost == rat(1, 10), || {
        "costs must be c1 = 2/5, c2 = 1/10".into()
    })?;
    ensure(
        two.expected_welfare() > one.expected_welfare() && one.expected_welfare().is_positive(),
        || "need E[Q2 - c2] > E[Q1 - c1] > 0".into(),
    )
}

fn check_qaidm_failure(sc: &Scenario) -> Result<(), String> {
    let one = sc.agent(a(1)).ok_or("agent 1 missing")?;
    let two = sc.agent(a(2)).ok_or("agent 2 missing")?;
    ensure(one.pmf.expectation() == rat(1, 1) && one.cost.is_zero(), || {
        "agent 1 must be (E[Q]=1, c=0)".into()
    })?;
    ensure(two.pmf.expectation() == rat(5, 1) && two.cost.is_zero(), || {
        "agent 2 must be (E[Q]=5, c=0)".into()
    })?;
    ensure(sc.quality_levels().contains(&rat(10, 1)), || {
        "quality 10 must be reportable".into()
    })
}
