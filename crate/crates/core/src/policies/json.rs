//! The JSON policy format.
//!
//! ```json
//! {"kind":"agent","table":{"":{"x0":"1/2","x1":"1/2"}},"default":{"uniform":true}}
//! ```
//!
//! Histories are `/`-joined symbol names; `""` is the empty history.
//! Formula-backed policies are exported by tabulating the histories
//! reachable against a supplied counterpart family, which preserves every
//! value those pairs produce.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Agent, AgentDefault, EnvDefault, Environment};
use crate::error::{Error, Result};
use crate::model::{Distribution, FrameworkSpec, Rational, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Agent,
    Environment,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefaultDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniform: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub percept: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyDoc {
    pub kind: PolicyKind,
    pub table: BTreeMap<String, BTreeMap<String, Rational>>,
    pub default: DefaultDoc,
}

fn table_doc(
    spec: &FrameworkSpec,
    table: impl IntoIterator<Item = (Vec<Symbol>, Distribution)>,
) -> BTreeMap<String, BTreeMap<String, Rational>> {
    table
        .into_iter()
        .map(|(h, d)| (spec.universe.format_history(&h), d.to_named(&spec.universe)))
        .collect()
}

fn parse_table(
    spec: &FrameworkSpec,
    table: &BTreeMap<String, BTreeMap<String, Rational>>,
) -> Result<BTreeMap<Vec<Symbol>, Distribution>> {
    table
        .iter()
        .map(|(h, d)| {
            Ok((
                spec.universe.parse_symbols(h)?,
                Distribution::from_named(d, &spec.universe)?,
            ))
        })
        .collect()
}

/// Histories of positive probability under some (agent, environment) pair,
/// up to length `depth`.
pub fn reachable_histories(
    agents: &[Agent],
    envs: &[Environment],
    depth: usize,
) -> BTreeSet<Vec<Symbol>> {
    let mut seen = BTreeSet::new();
    for a in agents {
        for e in envs {
            let mut stack = vec![Vec::new()];
            while let Some(h) = stack.pop() {
                seen.insert(h.clone());
                if h.len() >= depth {
                    continue;
                }
                let d = if a.spec().orientation.is_agent_turn(h.len()) {
                    a.dist(&h)
                } else {
                    e.dist(&h)
                };
                for s in d.support() {
                    let mut g = h.clone();
                    g.push(s);
                    stack.push(g);
                }
            }
        }
    }
    seen
}

pub fn agent_to_doc(agent: &Agent, envs: &[Environment]) -> PolicyDoc {
    let spec = agent.spec();
    let u = &spec.universe;
    let (table, default) = match agent.default_rule() {
        AgentDefault::Formula(_) => {
            let depth = envs.iter().map(Environment::value_depth).max().unwrap_or(0);
            let hs = reachable_histories(std::slice::from_ref(agent), envs, depth);
            let table: Vec<_> = hs
                .into_iter()
                .filter(|h| spec.orientation.is_agent_turn(h.len()))
                .map(|h| {
                    let d = agent.dist(&h);
                    (h, d)
                })
                .collect();
            let tail = u.actions().next().expect("universe has actions");
            (
                table,
                DefaultDoc {
                    action: Some(u.name(tail).to_string()),
                    ..Default::default()
                },
            )
        }
        AgentDefault::Fixed(x) => (
            agent
                .table()
                .iter()
                .map(|(h, d)| (h.clone(), d.clone()))
                .collect(),
            DefaultDoc {
                action: Some(u.name(*x).to_string()),
                ..Default::default()
            },
        ),
        AgentDefault::Uniform => (
            agent
                .table()
                .iter()
                .map(|(h, d)| (h.clone(), d.clone()))
                .collect(),
            DefaultDoc {
                uniform: Some(true),
                ..Default::default()
            },
        ),
    };
    PolicyDoc {
        kind: PolicyKind::Agent,
        table: table_doc(spec, table),
        default,
    }
}

pub fn env_to_doc(env: &Environment, agents: &[Agent]) -> PolicyDoc {
    let spec = env.spec();
    let table: Vec<_> = match env.default_rule() {
        EnvDefault::Formula { .. } => {
            let hs = reachable_histories(agents, std::slice::from_ref(env), env.value_depth());
            hs.into_iter()
                .filter(|h| !spec.orientation.is_agent_turn(h.len()))
                .map(|h| {
                    let d = env.dist(&h);
                    (h, d)
                })
                .collect()
        }
        EnvDefault::Zero => env
            .table()
            .iter()
            .map(|(h, d)| (h.clone(), d.clone()))
            .collect(),
    };
    PolicyDoc {
        kind: PolicyKind::Environment,
        table: table_doc(spec, table),
        default: DefaultDoc {
            percept: Some(spec.universe.name(env.zero_percept()).to_string()),
            ..Default::default()
        },
    }
}

pub fn agent_from_doc(doc: &PolicyDoc, spec: Arc<FrameworkSpec>) -> Result<Agent> {
    if doc.kind != PolicyKind::Agent {
        return Err(Error::Parse("expected an agent policy".into()));
    }
    let table = parse_table(&spec, &doc.table)?;
    let default = match (
        &doc.default.uniform,
        &doc.default.action,
        &doc.default.percept,
    ) {
        (Some(true), None, None) => AgentDefault::Uniform,
        (None, Some(a), None) => AgentDefault::Fixed(spec.universe.action(a)?),
        _ => {
            return Err(Error::Parse(
                "agent default must be {\"uniform\":true} or {\"action\":..}".into(),
            ))
        }
    };
    Agent::new(spec, table, default)
}

pub fn env_from_doc(doc: &PolicyDoc, spec: Arc<FrameworkSpec>) -> Result<Environment> {
    if doc.kind != PolicyKind::Environment {
        return Err(Error::Parse("expected an environment policy".into()));
    }
    let table = parse_table(&spec, &doc.table)?;
    match (
        &doc.default.uniform,
        &doc.default.action,
        &doc.default.percept,
    ) {
        (None, None, Some(p)) => {
            let y = spec.universe.percept(p)?;
            if !spec.universe.reward(y).is_zero() {
                return Err(Error::Parse(format!(
                    "default percept `{p}` must have reward 0"
                )));
            }
            if Some(y) != spec.universe.zero_percept() {
                return Err(Error::Parse(format!(
                    "default percept must be the first zero-reward percept `{}`",
                    spec.universe
                        .name(spec.universe.zero_percept().expect("checked"))
                )));
            }
        }
        _ => {
            return Err(Error::Parse(
                "environment default must be {\"percept\":..}".into(),
            ))
        }
    }
    Environment::new(spec, table, EnvDefault::Zero)
}
