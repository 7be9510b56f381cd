//! Fixtures shared by the benchmarks.

use taskdiff_core::generate::{generate, GenConfig, QualityLevels};
use taskdiff_core::{Rational, ReportProfile, Scenario};

/// A truthful random scenario with `agents` agents and four quality levels.
pub fn random_scenario(agents: usize, seed: u64) -> (Scenario, ReportProfile) {
    let config = GenConfig {
        quality_levels: QualityLevels::Count(4),
        density: 0.1,
        ..GenConfig::new(agents, seed)
    };
    generate(&config).expect("valid generator config")
}

/// Every agent delivers `q` for sure, so IDM and VCG apply.
pub fn point_mass_scenario(agents: usize, seed: u64, q: Rational) -> (Scenario, ReportProfile) {
    let config = GenConfig {
        quality_levels: QualityLevels::Explicit(vec![q]),
        density: 0.1,
        ..GenConfig::new(agents, seed)
    };
    generate(&config).expect("valid generator config")
}
