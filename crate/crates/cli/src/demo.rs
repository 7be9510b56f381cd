//! Worked examples replayed on the bundled scenarios, each asserting the
//! values it is expected to reproduce.

use std::fmt::{self, Display};

use serde::Serialize;

use taskdiff_core::audit::check_efficiency_gap;
use taskdiff_core::{
    bundled, efficient_allocation, rat, AgentId, Mechanism, MechanismKind, Rational, RunMode, RunReport,
};

use crate::CliError;

pub const NAMES: [&str; 4] = ["example1", "example2", "prop1", "idm-vs-pev"];

/// One asserted value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub label: String,
    pub expected: String,
    pub actual: String,
    pub ok: bool,
}

fn check<T: PartialEq + Display>(label: impl Into<String>, expected: T, actual: T) -> Check {
    Check {
        label: label.into(),
        ok: expected == actual,
        expected: expected.to_string(),
        actual: actual.to_string(),
    }
}

struct Agent(Option<AgentId>);

impl PartialEq for Agent {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(id) => write!(f, "{id}"),
            None => f.write_str("none"),
        }
    }
}

fn agent(k: u32) -> Agent {
    Agent(Some(AgentId(k)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Demo {
    pub name: String,
    pub title: String,
    pub runs: Vec<(String, RunReport)>,
    pub checks: Vec<Check>,
}

impl Demo {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn run(&self, label: &str) -> Option<&RunReport> {
        self.runs.iter().find(|(l, _)| l == label).map(|(_, r)| r)
    }
}

impl Display for Demo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "== {}: {}", self.name, self.title)?;
        for (label, report) in &self.runs {
            writeln!(f, "\n-- {label}")?;
            writeln!(f, "{report}")?;
        }
        writeln!(f)?;
        for c in &self.checks {
            let mark = if c.ok { "ok  " } else { "FAIL" };
            write!(f, "{mark} {} = {}", c.label, c.actual)?;
            if !c.ok {
                write!(f, " (expected {})", c.expected)?;
            }
            writeln!(f)?;
        }
        let passed = self.checks.iter().filter(|c| c.ok).count();
        write!(f, "{passed}/{} checks passed", self.checks.len())
    }
}

fn build(name: &str, mechanism: MechanismKind, mode: RunMode) -> Result<RunReport, CliError> {
    let (scenario, reports) = bundled::load(name).map_err(|e| CliError::Precondition(e.to_string()))?;
    Ok(RunReport::build(&scenario, &reports, Mechanism::new(mechanism), mode)?)
}

pub fn run_demo(name: &str) -> Result<Demo, CliError> {
    match name {
        "example1" => example1(),
        "example2" => example2(),
        "prop1" => prop1(),
        "idm-vs-pev" => idm_vs_pev(),
        other => Err(CliError::Usage(format!(
            "unknown demo `{other}` (expected one of {})",
            NAMES.join(", ")
        ))),
    }
}

/// VCG on the figure1 network pays agent 1 for the diffusion that reached
/// agent 4 and runs a deficit; IDM on the same network does not.
pub fn example1() -> Result<Demo, CliError> {
    let q = RunMode::Quality { quality: Rational::ONE };
    let vcg = build("figure1", MechanismKind::Vcg, q)?;
    let idm = build("figure1", MechanismKind::Idm, q)?;
    let checks = vec![
        check("vcg selected", agent(4), Agent(vcg.selected)),
        check("vcg w1", rat(2, 5), vcg.w_values[&AgentId(1)]),
        check("vcg w4", rat(2, 5), vcg.w_values[&AgentId(4)]),
        check("vcg p1", rat(1, 2), vcg.payoff(AgentId(1))),
        check("vcg p4", rat(3, 5), vcg.payoff(AgentId(4))),
        check("vcg u_s", rat(-1, 10), vcg.requester_utility),
        check("idm u_s >= 0", true, !idm.requester_utility.is_negative()),
    ];
    Ok(Demo {
        name: "example1".into(),
        title: "network VCG runs a deficit on the figure1 network (q = 1)".into(),
        runs: vec![("vcg".into(), vcg), ("idm".into(), idm)],
        checks,
    })
}

/// PEV on the bundled example2 scenario with agent 9 delivering quality 8.
pub fn example2() -> Result<Demo, CliError> {
    let realized = build("example2", MechanismKind::Pev, RunMode::Quality { quality: rat(8, 1) })?;
    let expected = build("example2", MechanismKind::Pev, RunMode::Expected)?;
    let w = |k: u32| realized.w_values.get(&AgentId(k)).copied().unwrap_or(Rational::ZERO);
    let checks = vec![
        check(
            "sequence",
            "(s, 2, 6, 9)".to_string(),
            realized.sequence.as_ref().map(|s| s.to_string()).unwrap_or_default(),
        ),
        check("w2", rat(4, 1), w(2)),
        check("w6", rat(4, 1), w(6)),
        check("w9", rat(9, 2), w(9)),
        check("selected", agent(9), Agent(realized.selected)),
        check("p2", Rational::ZERO, realized.payoff(AgentId(2))),
        check("p6", rat(1, 2), realized.payoff(AgentId(6))),
        check("p9", rat(7, 2), realized.payoff(AgentId(9))),
        check("u2", Rational::ZERO, realized.utility(AgentId(2))),
        check("u6", rat(1, 2), realized.utility(AgentId(6))),
        check("u9", rat(5, 2), realized.utility(AgentId(9))),
        check("u_s", rat(4, 1), realized.requester_utility),
        check("E[u9]", rat(29, 10), expected.utility(AgentId(9))),
        check("E[u_s]", rat(4, 1), expected.requester_utility),
    ];
    Ok(Demo {
        name: "example2".into(),
        title: "PEV-based diffusion on the example2 scenario, realized quality 8".into(),
        runs: vec![("realized q=8".into(), realized), ("expected".into(), expected)],
        checks,
    })
}

/// On the figure5 network PEV selects the conduit agent 1 although agent 2
/// is efficient.
pub fn prop1() -> Result<Demo, CliError> {
    let (scenario, reports) = bundled::load("figure5").map_err(|e| CliError::Precondition(e.to_string()))?;
    let pev = Mechanism::new(MechanismKind::Pev);
    let run = RunReport::build(&scenario, &reports, pev, RunMode::Expected)?;
    let efficient = efficient_allocation(&scenario, &reports).map_err(|e| CliError::Precondition(e.to_string()))?;
    let gap = check_efficiency_gap(&scenario, pev);
    let checks = vec![
        check("champion", agent(2), Agent(run.welfare_champion)),
        check("efficient agent", agent(2), Agent(efficient.allocation.selected)),
        check("selected", agent(1), Agent(run.selected)),
        check("w1", Rational::ZERO, run.w_values[&AgentId(1)]),
        check("w2", rat(3, 5), run.w_values[&AgentId(2)]),
        check(
            "efficiency gap",
            rat(3, 10),
            gap.certificate_value("gap").unwrap_or(Rational::ZERO),
        ),
        check("u_s", Rational::ZERO, run.requester_utility),
    ];
    Ok(Demo {
        name: "prop1".into(),
        title: "PEV gives up efficiency on the figure5 network".into(),
        runs: vec![("pev".into(), run)],
        checks,
    })
}

/// With every PoQ the point mass at one quality, PEV and IDM coincide.
pub fn idm_vs_pev() -> Result<Demo, CliError> {
    let mut runs = Vec::new();
    let mut checks = Vec::new();
    for name in ["figure1", "figure5"] {
        let (scenario, _) = bundled::load(name).map_err(|e| CliError::Precondition(e.to_string()))?;
        let q = scenario
            .uniform_quality()
            .ok_or_else(|| CliError::Precondition(format!("{name} has no common quality")))?;
        let mode = RunMode::Quality { quality: q };
        let pev = build(name, MechanismKind::Pev, mode)?;
        let idm = build(name, MechanismKind::Idm, mode)?;
        checks.push(check(
            format!("{name} selected"),
            Agent(idm.selected),
            Agent(pev.selected),
        ));
        checks.push(check(
            format!("{name} sequence"),
            format!("{:?}", idm.sequence),
            format!("{:?}", pev.sequence),
        ));
        checks.push(check(
            format!("{name} w"),
            format!("{:?}", idm.w_values),
            format!("{:?}", pev.w_values),
        ));
        checks.push(check(
            format!("{name} payoffs"),
            format!("{:?}", idm.payoffs),
            format!("{:?}", pev.payoffs),
        ));
        checks.push(check(
            format!("{name} u_s"),
            idm.requester_utility,
            pev.requester_utility,
        ));
        runs.push((format!("{name} pev"), pev));
        runs.push((format!("{name} idm"), idm));
    }
    Ok(Demo {
        name: "idm-vs-pev".into(),
        title: "PEV reduces to IDM when every PoQ is a point mass".into(),
        runs,
        checks,
    })
}
