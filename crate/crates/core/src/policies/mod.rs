//! Table agents and environments, proof-bearing environment constructors,
//! mixtures, corpora and the JSON policy format.

mod agent;
mod constructors;
pub mod corpus;
mod environment;
pub mod json;
mod mixture;

use std::collections::BTreeSet;

pub use agent::{Agent, AgentDefault, AgentFormula};
pub use constructors::{
    build_cutoff_environment, build_descending_environment, build_flexible_environment,
    build_indicator_environment, FlexibleEnvironment,
};
pub use environment::{EnvDefault, EnvFormula, Environment};
pub use mixture::mixture_agent;

use crate::error::{Error, Result};
use crate::model::{AvailabilitySets, FrameworkSpec, History, Symbol, Turn};

/// Every history of length at most `max_len`, shortest first, optionally
/// restricted to one turn kind. Symbols range over availability sets.
pub fn enumerate_histories(
    spec: &FrameworkSpec,
    max_len: usize,
    turn: Option<Turn>,
) -> Vec<Vec<Symbol>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<Symbol>> = vec![Vec::new()];
    for len in 0..=max_len {
        for h in &layer {
            let t = if spec.orientation.is_agent_turn(len) {
                Turn::Agent
            } else {
                Turn::Environment
            };
            if turn.is_none_or(|want| want == t) {
                out.push(h.clone());
            }
        }
        if len == max_len {
            break;
        }
        let mut next = Vec::new();
        for h in &layer {
            let choices = if spec.orientation.is_agent_turn(len) {
                spec.available_actions(h)
            } else {
                spec.available_percepts(h)
            };
            for s in choices {
                let mut g = h.clone();
                g.push(s);
                next.push(g);
            }
        }
        layer = next;
    }
    out
}

/// Available symbols at one history.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AvailabilityEntry {
    pub turn: Turn,
    pub symbols: Vec<Symbol>,
}

/// Availability at `h` as recorded by `spec`.
pub fn availability(spec: &FrameworkSpec, h: &History) -> Result<AvailabilityEntry> {
    if h.orientation() != spec.orientation {
        return Err(Error::WrongOrientation);
    }
    Ok(match h.turn() {
        Turn::Agent => AvailabilityEntry {
            turn: Turn::Agent,
            symbols: spec.available_actions(h.symbols()),
        },
        Turn::Environment => AvailabilityEntry {
            turn: Turn::Environment,
            symbols: spec.available_percepts(h.symbols()),
        },
    })
}

/// Union of supports over a supplied family, at every history up to `depth`.
///
/// When the family is only a sample this under-approximates the true sets.
pub fn family_availability(
    spec: &FrameworkSpec,
    agents: &[Agent],
    envs: &[Environment],
    depth: usize,
) -> AvailabilitySets {
    let mut sets = AvailabilitySets::default();
    for h in enumerate_histories(spec, depth, None) {
        if spec.orientation.is_agent_turn(h.len()) {
            if agents.is_empty() {
                continue;
            }
            let union: BTreeSet<Symbol> = agents
                .iter()
                .flat_map(|a| a.dist(&h).support().collect::<Vec<_>>())
                .collect();
            sets.actions.insert(h, union);
        } else {
            if envs.is_empty() {
                continue;
            }
            let union: BTreeSet<Symbol> = envs
                .iter()
                .flat_map(|e| e.dist(&h).support().collect::<Vec<_>>())
                .collect();
            sets.percepts.insert(h, union);
        }
    }
    sets
}
