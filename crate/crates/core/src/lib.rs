//! Truthful diffusion mechanisms for allocating a single task on a social
//! network when workers' execution quality is uncertain.
//!
//! The requester only knows its direct neighbours; workers invite their own
//! neighbours, report a probability distribution over completion quality
//! (PoQ) and a cost, and are paid after the selected worker's quality is
//! verified. The crate provides:
//!
//! * [`net`]: scenarios, report profiles, diffusion graphs, critical agents.
//! * [`poq`]: exact discrete PoQ distributions and seeded sampling.
//! * [`mechanism`]: PEV-based diffusion, IDM, quality-aware IDM and VCG.
//! * [`audit`]: IR / IC / WBB / lemma / efficiency checks with witnesses.
//! * [`sim`]: Monte Carlo runs over realized qualities.
//! * [`scenario_file`], [`bundled`], [`generate`], [`report`]: file formats,
//!   shipped scenarios, random scenario generation and run reports.

pub mod audit;
pub mod bundled;
pub mod generate;
pub mod mechanism;
pub mod net;
pub mod poq;
pub mod rational;
pub mod report;
pub mod scenario_file;
pub mod sim;

pub use audit::{
    audit_all, check_efficiency_gap, check_ic, check_ir, check_lemmas, check_wbb, expected_utility_oracle,
    random_contexts, AuditOptions, AuditReport, DeviationGrid, Property, Verdict, Witness,
};
pub use mechanism::{
    efficient_allocation, expected_utilities, idm_run, pev_allocate, pev_payoffs, qaidm_run, realized_utilities,
    vcg_run, Allocation, Mechanism, MechanismError, MechanismKind, MechanismOutcome, PayoffVector, TieBreak, Utilities,
};
pub use net::{
    build_graph, critical_sequence, participants, without_agent, AgentId, AgentType, CriticalSequence, Declaration,
    DiffusionGraph, ModelError, Node, Report, ReportProfile, Scenario,
};
pub use poq::{expectation, expected_welfare, Pmf, PmfViolation};
pub use rational::{rat, Rational};
pub use report::{RunMode, RunReport};
pub use scenario_file::{parse_scenario, ScenarioFile, ScenarioFileError};
pub use sim::{compare, run_trials, Comparison, TrialStats};
