//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion with its
//! measured runtime and exits nonzero if any criterion fails.
//!
//! Runs as a plain binary (`harness = false`) so the lines are always shown:
//!
//! ```text
//! cargo test --release -p taskdiff-cli --test acceptance
//! ```

use std::process::ExitCode;
use std::time::{Duration, Instant};

use taskdiff_cli::demo;
use taskdiff_core::audit::{check_ic, requester_utility_oracle, Coverage, MicroSuite, MicroSuiteReport, TrueTypes};
use taskdiff_core::generate::{generate, GenConfig, QualityLevels};
use taskdiff_core::{
    bundled, check_ir, check_lemmas, check_wbb, compare, expected_utilities, expected_utility_oracle, random_contexts,
    rat, run_trials, AgentId, DeviationGrid, Mechanism, MechanismKind, Rational, ReportProfile, Scenario, Witness,
};

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

struct Criterion {
    id: u8,
    name: &'static str,
    budget: Duration,
    check: fn(&mut Suite) -> Outcome,
}

/// Scenarios shared between criteria; criterion 8 re-checks every scenario
/// the earlier ones touched.
#[derive(Default)]
struct Suite {
    scenarios: Vec<(String, Scenario, ReportProfile)>,
}

fn pev() -> Mechanism {
    Mechanism::new(MechanismKind::Pev)
}

fn demo_checks(name: &str) -> Outcome {
    match demo::run_demo(name) {
        Ok(d) => {
            let failed: Vec<String> = d
                .checks
                .iter()
                .filter(|c| !c.ok)
                .map(|c| format!("{}={} (want {})", c.label, c.actual, c.expected))
                .collect();
            if failed.is_empty() {
                outcome(true, format!("{} exact checks", d.checks.len()))
            } else {
                outcome(false, failed.join(", "))
            }
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn example2(_: &mut Suite) -> Outcome {
    demo_checks("example2")
}

fn example1(_: &mut Suite) -> Outcome {
    demo_checks("example1")
}

fn random_config(k: u64) -> GenConfig {
    let agents = 1 + (k % 9) as usize;
    let levels = 1 + (k % 4) as usize;
    GenConfig {
        agents,
        quality_levels: QualityLevels::Count(levels),
        max_quality: Rational::from_integer([1, 2, 10][(k % 3) as usize]),
        density: [0.0, 0.2, 0.5][(k / 3 % 3) as usize],
        max_support: 4,
        seed: 0x5eed_0000 + k,
    }
}

fn theorem_suite(suite: &mut Suite) -> Outcome {
    let mut failures = Vec::new();
    let mut largest = 0;
    for k in 0..200 {
        let (scenario, reports) = match generate(&random_config(k)) {
            Ok(pair) => pair,
            Err(e) => return outcome(false, format!("generator seed {k}: {e}")),
        };
        largest = largest.max(scenario.agent_ids().count());
        let [w_chain, independence] = check_lemmas(&scenario, pev(), rat(1, 10));
        for report in [
            check_ir(&scenario, pev()),
            check_wbb(&scenario, pev()),
            w_chain,
            independence,
        ] {
            if !report.holds() {
                failures.push(format!("scenario {k}: {} {:?}", report.property.name(), report.verdict));
            }
        }
        suite.scenarios.push((format!("random {k}"), scenario, reports));
    }
    if failures.is_empty() {
        outcome(
            true,
            format!("200 scenarios, up to {largest} agents, IR+WBB+lemmas hold"),
        )
    } else {
        outcome(false, failures.join("; "))
    }
}

fn micro_suite(_: &mut Suite) -> Outcome {
    let step = rat(1, 4);
    let runs = [
        MicroSuite {
            agents: 1,
            step,
            true_types: TrueTypes::All,
            coverage: Coverage::Exhaustive,
        },
        MicroSuite {
            agents: 2,
            step,
            true_types: TrueTypes::All,
            coverage: Coverage::Exhaustive,
        },
        MicroSuite {
            agents: 3,
            step,
            true_types: TrueTypes::WelfareClasses,
            coverage: Coverage::Exhaustive,
        },
        MicroSuite {
            agents: 3,
            step,
            true_types: TrueTypes::All,
            coverage: Coverage::Sampled {
                scenarios: 3000,
                seed: 3,
            },
        },
        MicroSuite {
            agents: 4,
            step,
            true_types: TrueTypes::WelfareClasses,
            coverage: Coverage::Sampled {
                scenarios: 12000,
                seed: 4,
            },
        },
    ];
    let mut parts = Vec::new();
    for suite in runs {
        let report: MicroSuiteReport = suite.run(pev());
        let scope = match (suite.true_types, suite.coverage) {
            (TrueTypes::All, Coverage::Exhaustive) => "all types, exhaustive".to_string(),
            (TrueTypes::WelfareClasses, Coverage::Exhaustive) => "welfare classes, exhaustive".to_string(),
            (TrueTypes::All, Coverage::Sampled { scenarios, .. }) => format!("all types, {scenarios} sampled"),
            (TrueTypes::WelfareClasses, Coverage::Sampled { scenarios, .. }) => {
                format!("welfare classes, {scenarios} sampled")
            }
        };
        if let Some(w) = report.violation {
            return outcome(false, format!("n={} ({scope}): {}", report.agents, witness_summary(&w)));
        }
        parts.push(format!(
            "n={} {scope}: {} scenarios/{} deviations",
            report.agents, report.scenarios, report.deviations
        ));
    }
    outcome(true, format!("0 profitable deviations; {}", parts.join("; ")))
}

fn witness_summary(w: &Witness) -> String {
    match w {
        Witness::Deviation {
            agent,
            truthful_utility,
            deviated_utility,
            ..
        } => format!("agent {agent} gains {truthful_utility} -> {deviated_utility}"),
        Witness::Value {
            description, actual, ..
        } => format!("{description}: {actual}"),
    }
}

fn qaidm_failure(suite: &mut Suite) -> Outcome {
    let (scenario, reports) = match bundled::load("qaidm_failure") {
        Ok(pair) => pair,
        Err(e) => return outcome(false, e.to_string()),
    };
    let qaidm = Mechanism::new(MechanismKind::Qaidm);
    let report = check_ic(&scenario, qaidm, &DeviationGrid::standard(&scenario, rat(1, 10), 0));
    suite.scenarios.push(("qaidm_failure".into(), scenario, reports));
    let Some(witness) = report.witness.as_deref() else {
        return outcome(false, format!("no violation found ({:?})", report.verdict));
    };
    if !witness.replays_exactly(qaidm) {
        return outcome(false, "witness does not replay");
    }
    let Witness::Deviation { requester_outcomes, .. } = witness else {
        return outcome(false, "witness is not a deviation");
    };
    let Some(&(q, _, u_s)) = requester_outcomes.iter().min_by_key(|(q, _, _)| *q) else {
        return outcome(false, "witness has no realized outcomes");
    };
    outcome(
        u_s.is_negative(),
        format!("{}; requester utility {u_s} at q={q}", witness_summary(witness)),
    )
}

fn prop1(suite: &mut Suite) -> Outcome {
    if let Ok((scenario, reports)) = bundled::load("figure5") {
        suite.scenarios.push(("figure5".into(), scenario, reports));
    }
    demo_checks("prop1")
}

fn reduction(suite: &mut Suite) -> Outcome {
    let idm = Mechanism::new(MechanismKind::Idm);
    for k in 0..50u64 {
        let mut config = random_config(1000 + k);
        let q = rat(1 + (k % 10) as i128, 2);
        config.quality_levels = QualityLevels::Explicit(vec![q]);
        let (scenario, reports) = match generate(&config) {
            Ok(pair) => pair,
            Err(e) => return outcome(false, e.to_string()),
        };
        let a = pev().run(&scenario, &reports);
        let b = idm.run(&scenario, &reports);
        let (Ok(a), Ok(mut b)) = (a, b) else {
            return outcome(
                false,
                format!("scenario {k}: a mechanism refused the point-mass scenario"),
            );
        };
        b.mechanism = a.mechanism;
        if a != b || a.payoffs(q) != b.payoffs(q) {
            return outcome(false, format!("scenario {k}: outcomes differ"));
        }
        suite.scenarios.push((format!("point-mass {k}"), scenario, reports));
    }
    outcome(
        true,
        "50 point-mass scenarios, identical allocation, sequence, w and payoffs",
    )
}

fn oracle_equivalence(suite: &mut Suite) -> Outcome {
    for name in bundled::NAMES {
        if suite.scenarios.iter().any(|(label, _, _)| label == name) {
            continue;
        }
        if let Ok((scenario, reports)) = bundled::load(name) {
            suite.scenarios.push((name.to_string(), scenario, reports));
        }
    }
    let mut comparisons = 0u64;
    for (label, scenario, truthful) in &suite.scenarios {
        let grid = DeviationGrid::standard(scenario, rat(1, 5), 0);
        let mut profiles = vec![truthful.clone()];
        profiles.extend(random_contexts(scenario, &grid, 1, 0));
        for reports in &profiles {
            for kind in MechanismKind::ALL {
                let mech = Mechanism::new(kind);
                let Ok(out) = mech.run(scenario, reports) else { continue };
                let analytic = expected_utilities(scenario, reports, &out);
                for id in scenario.agent_ids() {
                    if expected_utility_oracle(scenario, reports, mech, id).ok() != Some(analytic.get(id)) {
                        return outcome(false, format!("{label}: {} agent {id} disagrees", kind.name()));
                    }
                    comparisons += 1;
                }
                if requester_utility_oracle(scenario, reports, mech).ok() != Some(analytic.requester) {
                    return outcome(false, format!("{label}: {} requester disagrees", kind.name()));
                }
                comparisons += 1;
            }
        }
    }
    outcome(
        true,
        format!("{} scenarios, {comparisons} exact comparisons", suite.scenarios.len()),
    )
}

fn monte_carlo(_: &mut Suite) -> Outcome {
    let (scenario, reports) = match bundled::load("example2") {
        Ok(pair) => pair,
        Err(e) => return outcome(false, e.to_string()),
    };
    let stats = match run_trials(&scenario, &reports, pev(), 100_000, 20_240_601) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    let out = match pev().run(&scenario, &reports) {
        Ok(o) => o,
        Err(e) => return outcome(false, e.to_string()),
    };
    let comparison = compare(&stats, &expected_utilities(&scenario, &reports, &out));
    let u9 = stats
        .agents
        .get(&AgentId(9))
        .map(|m| m.mean.to_f64())
        .unwrap_or(f64::NAN);
    outcome(
        comparison.pass() && stats.requester.variance == Rational::ZERO,
        format!(
            "n=1e5, max |z| {:.2}, mean u9 {u9:.4}, requester mean {} variance {}",
            comparison.max_z(),
            stats.requester.mean,
            stats.requester.variance
        ),
    )
}

const CRITERIA: [Criterion; 9] = [
    Criterion {
        id: 1,
        name: "demo example2, exact values",
        budget: Duration::from_secs(1),
        check: example2,
    },
    Criterion {
        id: 2,
        name: "demo example1, exact values",
        budget: Duration::from_secs(1),
        check: example1,
    },
    Criterion {
        id: 3,
        name: "IR/WBB/lemma suite on 200 random scenarios",
        budget: Duration::from_secs(60),
        check: theorem_suite,
    },
    Criterion {
        id: 4,
        name: "IC micro-suite, <=4 agents, 1/4 grid",
        budget: Duration::from_secs(600),
        check: micro_suite,
    },
    Criterion {
        id: 5,
        name: "quality-aware IDM IC failure",
        budget: Duration::from_secs(5),
        check: qaidm_failure,
    },
    Criterion {
        id: 6,
        name: "demo prop1, efficiency gap on figure5",
        budget: Duration::from_secs(1),
        check: prop1,
    },
    Criterion {
        id: 7,
        name: "PEV equals IDM on 50 point-mass scenarios",
        budget: Duration::from_secs(10),
        check: reduction,
    },
    Criterion {
        id: 8,
        name: "oracle equals analytic utilities",
        budget: Duration::MAX,
        check: oracle_equivalence,
    },
    Criterion {
        id: 9,
        name: "Monte Carlo consistency on example2",
        budget: Duration::from_secs(30),
        check: monte_carlo,
    },
];

fn main() -> ExitCode {
    let mut suite = Suite::default();
    let mut failed = 0;
    for c in &CRITERIA {
        let start = Instant::now();
        let result = (c.check)(&mut suite);
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.budget;
        let ok = result.ok && in_time;
        failed += usize::from(!ok);
        let timing = if in_time {
            format!("{:.2}s", elapsed.as_secs_f64())
        } else {
            format!("{:.2}s OVER {}s budget", elapsed.as_secs_f64(), c.budget.as_secs())
        };
        println!(
            "{} AC{} {} [{timing}]: {}",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            result.detail
        );
    }
    println!("{}/{} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
