use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Orientation, Rational, Symbol, Universe};
use crate::error::{Error, Result};

/// Which component of a deterministic framework to randomize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RandomizeMode {
    Agents,
    Environments,
    Both,
}

/// Per-history availability sets of a restricted deterministic family.
///
/// Histories without an entry fall back to the full alphabet.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AvailabilitySets {
    pub actions: BTreeMap<Vec<Symbol>, BTreeSet<Symbol>>,
    pub percepts: BTreeMap<Vec<Symbol>, BTreeSet<Symbol>>,
}

/// A finitely generated framework descriptor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameworkSpec {
    pub name: String,
    pub universe: Arc<Universe>,
    pub orientation: Orientation,
    pub deterministic_agents: bool,
    pub deterministic_environments: bool,
    /// Histories of length at most this are tabulated.
    pub table_depth: usize,
    /// Percepts emitted after this many rounds carry reward 0.
    pub reward_horizon: usize,
    pub integer_rewards: bool,
    /// Declared bounds on every achievable value, if any.
    pub value_range: Option<(Rational, Rational)>,
    pub randomized_agents: bool,
    pub randomized_environments: bool,
    pub availability: Option<Arc<AvailabilitySets>>,
}

impl FrameworkSpec {
    /// Stochastic agents and environments, table depth 2, horizon 2.
    pub fn new(name: &str, universe: Arc<Universe>, orientation: Orientation) -> Self {
        FrameworkSpec {
            name: name.to_string(),
            universe,
            orientation,
            deterministic_agents: false,
            deterministic_environments: false,
            table_depth: 2,
            reward_horizon: 2,
            integer_rewards: false,
            value_range: None,
            randomized_agents: false,
            randomized_environments: false,
            availability: None,
        }
    }

    pub fn deterministic(mut self) -> Self {
        self.deterministic_agents = true;
        self.deterministic_environments = true;
        self
    }

    pub fn with_depth(mut self, table_depth: usize) -> Self {
        self.table_depth = table_depth;
        self
    }

    pub fn with_horizon(mut self, reward_horizon: usize) -> Self {
        self.reward_horizon = reward_horizon;
        self
    }

    pub fn with_integer_rewards(mut self) -> Self {
        self.integer_rewards = true;
        self
    }

    pub fn with_value_range(mut self, lo: Rational, hi: Rational) -> Self {
        self.value_range = Some((lo, hi));
        self
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    /// Checks the invariants; returns advisory warnings on success.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.integer_rewards {
            let emitted: Vec<Symbol> = match &self.availability {
                Some(av) if !av.percepts.is_empty() => av
                    .percepts
                    .values()
                    .flatten()
                    .copied()
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect(),
                _ => self.universe.percepts().collect(),
            };
            if let Some(p) = emitted
                .iter()
                .find(|p| !self.universe.reward(**p).is_integer())
            {
                return Err(Error::InvalidFramework(format!(
                    "integer rewards declared but `{}` has reward {}",
                    self.universe.name(*p),
                    self.universe.reward(*p)
                )));
            }
        }
        if let Some((lo, hi)) = &self.value_range {
            if lo > hi {
                return Err(Error::InvalidFramework("empty value range".into()));
            }
        }
        let mut warnings = Vec::new();
        if self.table_depth < self.reward_horizon {
            warnings.push(format!(
                "table depth {} is below reward horizon {}",
                self.table_depth, self.reward_horizon
            ));
        }
        Ok(warnings)
    }

    /// Same histories and alphabets, so policies can move between them.
    pub fn same_histories(&self, other: &FrameworkSpec) -> bool {
        self.orientation == other.orientation && *self.universe == *other.universe
    }

    /// Largest history length whose final percept may carry nonzero reward.
    pub fn reward_depth(&self) -> usize {
        match self.orientation {
            Orientation::AgentFirst => 2 * self.reward_horizon,
            Orientation::PerceptFirst => (2 * self.reward_horizon).saturating_sub(1),
        }
    }

    /// Actions available at `h`.
    pub fn available_actions(&self, h: &[Symbol]) -> Vec<Symbol> {
        match self.availability.as_ref().and_then(|a| a.actions.get(h)) {
            Some(set) => set.iter().copied().collect(),
            None => self.universe.actions().collect(),
        }
    }

    /// Percepts available at `h`.
    pub fn available_percepts(&self, h: &[Symbol]) -> Vec<Symbol> {
        match self.availability.as_ref().and_then(|a| a.percepts.get(h)) {
            Some(set) => set.iter().copied().collect(),
            None => self.universe.percepts().collect(),
        }
    }

    /// Number of distinct integers in the declared value range.
    pub fn integer_range_size(&self) -> Option<usize> {
        let (lo, hi) = self.value_range.as_ref()?;
        let lo = lo.to_f64().ceil() as i64;
        let hi = hi.to_f64().floor() as i64;
        Some(if hi < lo { 0 } else { (hi - lo + 1) as usize })
    }
}

/// Builds F^a, F^e or F^ae from a framework deterministic in the chosen part.
///
/// Histories are unchanged; availability sets are those of the source.
pub fn randomize(spec: &FrameworkSpec, mode: RandomizeMode) -> Result<FrameworkSpec> {
    let agents = matches!(mode, RandomizeMode::Agents | RandomizeMode::Both);
    let envs = matches!(mode, RandomizeMode::Environments | RandomizeMode::Both);
    if (agents && (spec.randomized_agents || !spec.deterministic_agents))
        || (envs && (spec.randomized_environments || !spec.deterministic_environments))
    {
        return Err(Error::AlreadyRandomized(spec.name.clone()));
    }
    let mut out = spec.clone();
    let suffix = match mode {
        RandomizeMode::Agents => "^a",
        RandomizeMode::Environments => "^e",
        RandomizeMode::Both => "^ae",
    };
    out.name = format!("{}{}", spec.name, suffix);
    if agents {
        out.deterministic_agents = false;
        out.randomized_agents = true;
    }
    if envs {
        out.deterministic_environments = false;
        out.randomized_environments = true;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> FrameworkSpec {
        let u = Universe::new(
            &["x0", "x1"],
            &[("y0", Rational::zero()), ("y1", Rational::one())],
        )
        .unwrap();
        FrameworkSpec::new("F", Arc::new(u), Orientation::AgentFirst)
            .deterministic()
            .with_integer_rewards()
    }

    #[test]
    fn randomize_both_clears_flags() {
        let f = base();
        let fae = randomize(&f, RandomizeMode::Both).unwrap();
        assert!(!fae.deterministic_agents && !fae.deterministic_environments);
        assert!(fae.same_histories(&f));
        assert_eq!(fae.name, "F^ae");
    }

    #[test]
    fn randomize_envs_keeps_agents() {
        let fe = randomize(&base(), RandomizeMode::Environments).unwrap();
        assert!(fe.deterministic_agents);
        assert!(!fe.deterministic_environments);
    }

    #[test]
    fn randomizing_twice_fails() {
        let fa = randomize(&base(), RandomizeMode::Agents).unwrap();
        assert!(matches!(
            randomize(&fa, RandomizeMode::Agents),
            Err(Error::AlreadyRandomized(_))
        ));
        assert!(randomize(&fa, RandomizeMode::Environments).is_ok());
    }

    #[test]
    fn integer_flag_checked_against_rewards() {
        let u = Universe::new(&["x0", "x1"], &[("y0", Rational::new(1, 2))]).unwrap();
        let s =
            FrameworkSpec::new("G", Arc::new(u), Orientation::AgentFirst).with_integer_rewards();
        assert!(s.validate().is_err());
    }

    #[test]
    fn shallow_tables_warn() {
        let s = base().with_depth(1).with_horizon(3);
        assert_eq!(s.validate().unwrap().len(), 1);
    }
}
