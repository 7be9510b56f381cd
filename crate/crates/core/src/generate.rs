//! Random scenarios in which every agent is reachable from the requester.
//!
//! Costs, qualities and probabilities lie on a 1/10 grid; output depends only
//! on the configuration and seed.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::net::{AgentId, AgentType, Node, ReportProfile, Scenario};
use crate::poq::{stream, Pmf};
use crate::rational::Rational;
use crate::scenario_file::ScenarioFile;

#[derive(Debug, Clone, PartialEq)]
pub enum QualityLevels {
    /// This many distinct levels drawn from `0..=max_quality`.
    Count(usize),
    Explicit(Vec<Rational>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub agents: usize,
    pub quality_levels: QualityLevels,
    /// Upper end of drawn quality levels and of costs.
    pub max_quality: Rational,
    /// Probability of each extra invitation edge beyond a spanning tree.
    pub density: f64,
    /// Largest PoQ support.
    pub max_support: usize,
    pub seed: u64,
}

impl GenConfig {
    pub fn new(agents: usize, seed: u64) -> Self {
        GenConfig {
            agents,
            quality_levels: QualityLevels::Count(3),
            max_quality: Rational::from_integer(10),
            density: 0.25,
            max_support: 4,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("at least one agent is needed")]
    NoAgents,
    #[error("at least one quality level is needed")]
    NoQualityLevels,
    #[error("density must lie in [0, 1], got {0}")]
    Density(String),
    #[error("cannot draw {wanted} distinct quality levels on the 1/10 grid up to {max}")]
    TooManyLevels { wanted: usize, max: Rational },
}

fn tenths(k: i128) -> Rational {
    Rational::new(k, 10)
}

/// A random scenario with truthful reports.
pub fn generate(config: &GenConfig) -> Result<(Scenario, ReportProfile), GenError> {
    if config.agents == 0 {
        return Err(GenError::NoAgents);
    }
    if !(0.0..=1.0).contains(&config.density) {
        return Err(GenError::Density(config.density.to_string()));
    }
    let mut rng = stream(config.seed, 0);
    let top = (config.max_quality * Rational::from_integer(10)).numer().max(0);

    let levels: Vec<Rational> = match &config.quality_levels {
        QualityLevels::Explicit(v) if v.is_empty() => return Err(GenError::NoQualityLevels),
        QualityLevels::Explicit(v) => v.iter().copied().collect::<BTreeSet<_>>().into_iter().collect(),
        QualityLevels::Count(0) => return Err(GenError::NoQualityLevels),
        QualityLevels::Count(k) => {
            let grid: Vec<i128> = (0..=top).collect();
            if *k > grid.len() {
                return Err(GenError::TooManyLevels {
                    wanted: *k,
                    max: config.max_quality,
                });
            }
            let mut picked: Vec<Rational> = grid.choose_multiple(&mut rng, *k).map(|&x| tenths(x)).collect();
            picked.sort();
            picked
        }
    };
    let cost_top = (levels[levels.len() - 1] * Rational::from_integer(10)).numer().max(1);

    let ids: Vec<AgentId> = (1..=config.agents as u32).map(AgentId).collect();
    let mut order = ids.clone();
    order.shuffle(&mut rng);

    // A random spanning arborescence rooted at the requester keeps everyone
    // reachable; extra edges are then added independently.
    let mut requester_neighbors = BTreeSet::new();
    let mut neighbors: BTreeMap<AgentId, BTreeSet<Node>> = ids.iter().map(|&id| (id, BTreeSet::new())).collect();
    for (k, &id) in order.iter().enumerate() {
        let parent = rng.random_range(0..=k);
        if parent == 0 {
            requester_neighbors.insert(id);
        } else {
            neighbors
                .get_mut(&order[parent - 1])
                .expect("placed")
                .insert(Node::Agent(id));
        }
    }
    for &from in &ids {
        if rng.random_bool(config.density) {
            requester_neighbors.insert(from);
        }
        for &to in &ids {
            if from != to && rng.random_bool(config.density) {
                neighbors.get_mut(&from).expect("agent").insert(Node::Agent(to));
            }
        }
    }

    let mut agents = BTreeMap::new();
    for &id in &ids {
        let size = rng.random_range(1..=config.max_support.clamp(1, levels.len().min(10)));
        let support: Vec<Rational> = levels.choose_multiple(&mut rng, size).copied().collect();
        // Split ten tenths into `size` positive parts.
        let mut cuts: Vec<i128> = (1..10)
            .collect::<Vec<_>>()
            .choose_multiple(&mut rng, size - 1)
            .copied()
            .collect();
        cuts.sort_unstable();
        cuts.insert(0, 0);
        cuts.push(10);
        let points = support
            .iter()
            .zip(cuts.windows(2))
            .map(|(&q, w)| (q, tenths(w[1] - w[0])));
        let pmf = Pmf::new(points).expect("masses sum to one");
        let cost = tenths(rng.random_range(0..=cost_top));
        agents.insert(id, AgentType::new(pmf, cost, neighbors[&id].iter().copied()));
    }

    let scenario = Scenario::new(requester_neighbors, agents, levels).expect("generated scenario is valid");
    let reports = scenario.truthful();
    Ok((scenario, reports))
}

/// [`generate`], in file form.
pub fn generate_file(config: &GenConfig) -> Result<ScenarioFile, GenError> {
    let (scenario, reports) = generate(config)?;
    let mut file = ScenarioFile::from_domain(&scenario, &reports);
    file.description = Some(format!(
        "generated: {} agents, density {}, seed {}",
        config.agents, config.density, config.seed
    ));
    Ok(file)
}
