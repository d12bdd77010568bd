//! Translation maps between frameworks and checkers for their laws.
//!
//! A translation pairs an agent map (source agents to destination agents)
//! with an environment map running the other way, destination environments
//! to source environments.

mod catalog;
mod laws;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use catalog::{
    drop_first_action, frameworks_from_base, identity, inclusion, local_reverse_translation,
    parse_translation, prepend_action, prepend_percept, sum_map, times_map, DiamondFrameworks,
    Edge, Vertex,
};
pub use laws::{
    check_condition1, check_condition2, check_condition3, check_injectivity, check_strong,
    check_weak, Law, LawReport, Verdict, Witness,
};

use crate::error::{Error, Result};
use crate::model::{FrameworkSpec, Symbol};
use crate::policies::{Agent, Environment};

pub type AgentMap = Arc<dyn Fn(&Agent) -> Result<Agent> + Send + Sync>;
pub type EnvMap = Arc<dyn Fn(&Environment) -> Result<Environment> + Send + Sync>;
/// Destination agent-turn history to the source histories that determine
/// the translated agent there.
pub type Dependency = Arc<dyn Fn(&[Symbol]) -> Vec<Vec<Symbol>> + Send + Sync>;

/// What a translation claims to be, weakest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Claim {
    None,
    Pre,
    Weak,
    Strong,
}

#[derive(Clone)]
pub struct Translation {
    pub id: String,
    pub source: Arc<FrameworkSpec>,
    pub dest: Arc<FrameworkSpec>,
    agent_map: AgentMap,
    env_map: Option<EnvMap>,
    dependency: Option<Dependency>,
    witness_lift: Option<AgentMap>,
    pub claimed: Claim,
}

impl fmt::Debug for Translation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Translation")
            .field("id", &self.id)
            .field("source", &self.source.name)
            .field("dest", &self.dest.name)
            .field("env_map", &self.env_map.is_some())
            .field("claimed", &self.claimed)
            .finish()
    }
}

impl Translation {
    pub fn new(
        id: impl Into<String>,
        source: Arc<FrameworkSpec>,
        dest: Arc<FrameworkSpec>,
        agent_map: AgentMap,
        claimed: Claim,
    ) -> Self {
        Translation {
            id: id.into(),
            source,
            dest,
            agent_map,
            env_map: None,
            dependency: None,
            witness_lift: None,
            claimed,
        }
    }

    pub fn with_env_map(mut self, env_map: EnvMap) -> Self {
        self.env_map = Some(env_map);
        self
    }

    pub fn with_dependency(mut self, dependency: Dependency) -> Self {
        self.dependency = Some(dependency);
        self
    }

    /// A map from destination agents back to source agents, used to carry
    /// destination disagreements over when checking strongness.
    pub fn with_witness_lift(mut self, lift: AgentMap) -> Self {
        self.witness_lift = Some(lift);
        self
    }

    pub fn without_env_map(mut self) -> Self {
        self.env_map = None;
        self
    }

    pub fn has_env_map(&self) -> bool {
        self.env_map.is_some()
    }

    pub fn apply_agent_map(&self, pi: &Agent) -> Result<Agent> {
        if !pi.spec().same_histories(&self.source) {
            return Err(Error::FrameworkMismatch);
        }
        (self.agent_map)(pi)
    }

    pub fn apply_env_map(&self, mu: &Environment) -> Result<Environment> {
        let f = self.env_map.as_ref().ok_or(Error::MissingEnvMap)?;
        if !mu.spec().same_histories(&self.dest) {
            return Err(Error::FrameworkMismatch);
        }
        f(mu)
    }

    pub fn dependency(&self, h: &[Symbol]) -> Option<Vec<Vec<Symbol>>> {
        self.dependency.as_ref().map(|d| d(h))
    }

    pub fn lift(&self, pi: &Agent) -> Option<Result<Agent>> {
        self.witness_lift.as_ref().map(|l| l(pi))
    }

    pub fn agent_map(&self) -> &AgentMap {
        &self.agent_map
    }

    pub fn env_map(&self) -> Option<&EnvMap> {
        self.env_map.as_ref()
    }
}

/// `T1 . T2`: apply `t1` first. Agents map as (π^*)^∘ and environments as
/// (μ_∘)_*.
pub fn compose(t1: &Translation, t2: &Translation) -> Result<Translation> {
    if !t1.dest.same_histories(&t2.source)
        || t1.dest.deterministic_agents != t2.source.deterministic_agents
        || t1.dest.deterministic_environments != t2.source.deterministic_environments
    {
        return Err(Error::SpecMismatch(format!(
            "`{}` ends in {} but `{}` starts in {}",
            t1.id, t1.dest.name, t2.id, t2.source.name
        )));
    }
    let (a1, a2) = (t1.agent_map.clone(), t2.agent_map.clone());
    let agent_map: AgentMap = Arc::new(move |pi| a2(&a1(pi)?));
    let mut out = Translation::new(
        format!("{} . {}", t1.id, t2.id),
        t1.source.clone(),
        t2.dest.clone(),
        agent_map,
        t1.claimed.min(t2.claimed),
    );
    if let (Some(e1), Some(e2)) = (t1.env_map.clone(), t2.env_map.clone()) {
        out.env_map = Some(Arc::new(move |mu| e1(&e2(mu)?)));
    }
    if let (Some(d1), Some(d2)) = (t1.dependency.clone(), t2.dependency.clone()) {
        out.dependency = Some(Arc::new(move |h| {
            let mut set = BTreeSet::new();
            for g in d2(h) {
                set.extend(d1(&g));
            }
            set.into_iter().collect()
        }));
    }
    if let (Some(l1), Some(l2)) = (t1.witness_lift.clone(), t2.witness_lift.clone()) {
        out.witness_lift = Some(Arc::new(move |pi| l1(&l2(pi)?)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
