//! Generated policy families: exhaustive deterministic tables and seeded
//! random stochastic tables.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{enumerate_histories, Agent, AgentDefault, EnvDefault, Environment};
use crate::error::Result;
use crate::model::{Distribution, FrameworkSpec, Rational, Symbol, Turn};

fn cartesian<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![Vec::new()];
    for c in choices {
        let mut next = Vec::with_capacity(out.len() * c.len());
        for prefix in &out {
            for item in c {
                let mut v = prefix.clone();
                v.push(item.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Every deterministic agent tabulated on agent-turn histories of length
/// at most `depth`, playing the first available action beyond the table.
pub fn all_deterministic_agents(spec: &Arc<FrameworkSpec>, depth: usize) -> Result<Vec<Agent>> {
    let keys = enumerate_histories(spec, depth, Some(Turn::Agent));
    let choices: Vec<Vec<Symbol>> = keys.iter().map(|h| spec.available_actions(h)).collect();
    let tail = spec
        .universe
        .actions()
        .next()
        .expect("universe has actions");
    cartesian(&choices)
        .into_iter()
        .map(|pick| {
            let table = keys
                .iter()
                .cloned()
                .zip(pick.into_iter().map(Distribution::point))
                .collect();
            Agent::new(spec.clone(), table, AgentDefault::Fixed(tail))
        })
        .collect()
}

/// Percepts allowed at `h` for a generated environment: only zero-reward
/// percepts past the reward horizon.
fn env_choices(spec: &FrameworkSpec, h: &[Symbol]) -> Vec<Symbol> {
    let all = spec.available_percepts(h);
    if h.len() < spec.reward_depth() {
        all
    } else {
        all.into_iter()
            .filter(|y| spec.universe.reward(*y).is_zero())
            .collect()
    }
}

/// Every deterministic environment tabulated on environment-turn histories
/// of length at most `depth`, with the zero-reward tail beyond.
pub fn all_deterministic_envs(spec: &Arc<FrameworkSpec>, depth: usize) -> Result<Vec<Environment>> {
    let keys = enumerate_histories(spec, depth, Some(Turn::Environment));
    let choices: Vec<Vec<Symbol>> = keys.iter().map(|h| env_choices(spec, h)).collect();
    cartesian(&choices)
        .into_iter()
        .map(|pick| {
            let table = keys
                .iter()
                .cloned()
                .zip(pick.into_iter().map(Distribution::point))
                .collect();
            Environment::new(spec.clone(), table, EnvDefault::Zero)
        })
        .collect()
}

/// A random distribution over `symbols` with weights drawn from `0..=grain`.
pub fn random_distribution(rng: &mut ChaCha8Rng, symbols: &[Symbol], grain: i64) -> Distribution {
    loop {
        let weights: Vec<i64> = symbols.iter().map(|_| rng.gen_range(0..=grain)).collect();
        let total: i64 = weights.iter().sum();
        if total == 0 {
            continue;
        }
        let entries = symbols
            .iter()
            .zip(&weights)
            .map(|(s, w)| (*s, Rational::new(*w, total)));
        return Distribution::new(entries).expect("weights normalize");
    }
}

/// Seeded random agents. Point masses when the framework is deterministic.
pub fn random_agents(
    spec: &Arc<FrameworkSpec>,
    depth: usize,
    n: usize,
    seed: u64,
) -> Result<Vec<Agent>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keys = enumerate_histories(spec, depth, Some(Turn::Agent));
    let tail = spec
        .universe
        .actions()
        .next()
        .expect("universe has actions");
    (0..n)
        .map(|_| {
            let mut table = BTreeMap::new();
            for h in &keys {
                let avail = spec.available_actions(h);
                let d = if spec.deterministic_agents {
                    Distribution::point(avail[rng.gen_range(0..avail.len())])
                } else {
                    random_distribution(&mut rng, &avail, 3)
                };
                table.insert(h.clone(), d);
            }
            Agent::new(spec.clone(), table, AgentDefault::Fixed(tail))
        })
        .collect()
}

/// Seeded random environments respecting the reward horizon.
pub fn random_envs(
    spec: &Arc<FrameworkSpec>,
    depth: usize,
    n: usize,
    seed: u64,
) -> Result<Vec<Environment>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keys = enumerate_histories(spec, depth, Some(Turn::Environment));
    (0..n)
        .map(|_| {
            let mut table = BTreeMap::new();
            for h in &keys {
                let avail = env_choices(spec, h);
                let d = if spec.deterministic_environments {
                    Distribution::point(avail[rng.gen_range(0..avail.len())])
                } else {
                    random_distribution(&mut rng, &avail, 3)
                };
                table.insert(h.clone(), d);
            }
            Environment::new(spec.clone(), table, EnvDefault::Zero)
        })
        .collect()
}

/// Every agent differing from `base` at exactly one of `sites`, by a point
/// mass on a different available action.
pub fn single_site_perturbations(
    base: &Agent,
    sites: &[Vec<Symbol>],
) -> Result<Vec<(Vec<Symbol>, Symbol, Agent)>> {
    let mut out = Vec::new();
    for g in sites {
        let current = base.dist(g);
        for x in base.spec().available_actions(g) {
            if current.as_point() == Some(x) {
                continue;
            }
            out.push((
                g.clone(),
                x,
                base.with_entry(g.clone(), Distribution::point(x))?,
            ));
        }
    }
    Ok(out)
}
