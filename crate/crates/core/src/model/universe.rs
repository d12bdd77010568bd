use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Rational;
use crate::error::{Error, Result};

/// An action or percept, by index into the universe's alphabets.
///
/// Actions order before percepts; within a kind, alphabet order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Symbol {
    Action(u16),
    Percept(u16),
}

impl Symbol {
    pub fn is_action(self) -> bool {
        matches!(self, Symbol::Action(_))
    }

    pub fn is_percept(self) -> bool {
        matches!(self, Symbol::Percept(_))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Action(i) => write!(f, "a#{i}"),
            Symbol::Percept(i) => write!(f, "p#{i}"),
        }
    }
}

/// Action alphabet, percept alphabet and reward map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Universe {
    actions: Vec<String>,
    percepts: Vec<String>,
    rewards: Vec<Rational>,
    index: BTreeMap<String, Symbol>,
}

impl Universe {
    /// `percepts` pairs each percept name with its reward.
    pub fn new(actions: &[&str], percepts: &[(&str, Rational)]) -> Result<Self> {
        Self::from_parts(
            actions.iter().map(|s| s.to_string()).collect(),
            percepts.iter().map(|(s, _)| s.to_string()).collect(),
            percepts.iter().map(|(_, r)| r.clone()).collect(),
        )
    }

    fn from_parts(
        actions: Vec<String>,
        percepts: Vec<String>,
        rewards: Vec<Rational>,
    ) -> Result<Self> {
        if actions.len() < 2 {
            return Err(Error::InvalidUniverse("need at least two actions".into()));
        }
        if percepts.is_empty() {
            return Err(Error::InvalidUniverse("need at least one percept".into()));
        }
        if actions.len() > u16::MAX as usize || percepts.len() > u16::MAX as usize {
            return Err(Error::InvalidUniverse("alphabet too large".into()));
        }
        let mut index = BTreeMap::new();
        for (i, a) in actions.iter().enumerate() {
            check_name(a)?;
            if index.insert(a.clone(), Symbol::Action(i as u16)).is_some() {
                return Err(Error::InvalidUniverse(format!("duplicate symbol `{a}`")));
            }
        }
        for (i, p) in percepts.iter().enumerate() {
            check_name(p)?;
            if index.insert(p.clone(), Symbol::Percept(i as u16)).is_some() {
                return Err(Error::InvalidUniverse(format!(
                    "symbol `{p}` is both an action and a percept, or repeated"
                )));
            }
        }
        Ok(Universe {
            actions,
            percepts,
            rewards,
            index,
        })
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn num_percepts(&self) -> usize {
        self.percepts.len()
    }

    pub fn actions(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.actions.len()).map(|i| Symbol::Action(i as u16))
    }

    pub fn percepts(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.percepts.len()).map(|i| Symbol::Percept(i as u16))
    }

    pub fn action(&self, name: &str) -> Result<Symbol> {
        match self.index.get(name) {
            Some(s @ Symbol::Action(_)) => Ok(*s),
            _ => Err(Error::UnknownSymbol(name.to_string())),
        }
    }

    pub fn percept(&self, name: &str) -> Result<Symbol> {
        match self.index.get(name) {
            Some(s @ Symbol::Percept(_)) => Ok(*s),
            _ => Err(Error::UnknownSymbol(name.to_string())),
        }
    }

    pub fn symbol(&self, name: &str) -> Result<Symbol> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    pub fn contains(&self, s: Symbol) -> bool {
        match s {
            Symbol::Action(i) => (i as usize) < self.actions.len(),
            Symbol::Percept(i) => (i as usize) < self.percepts.len(),
        }
    }

    pub fn name(&self, s: Symbol) -> &str {
        match s {
            Symbol::Action(i) => &self.actions[i as usize],
            Symbol::Percept(i) => &self.percepts[i as usize],
        }
    }

    /// Reward of a percept; actions carry no reward.
    pub fn reward(&self, s: Symbol) -> Rational {
        match s {
            Symbol::Action(_) => Rational::zero(),
            Symbol::Percept(i) => self.rewards[i as usize].clone(),
        }
    }

    pub fn reward_ref(&self, s: Symbol) -> Option<&Rational> {
        match s {
            Symbol::Action(_) => None,
            Symbol::Percept(i) => Some(&self.rewards[i as usize]),
        }
    }

    /// First percept with reward exactly `r`.
    pub fn percept_with_reward(&self, r: &Rational) -> Option<Symbol> {
        self.percepts().find(|p| self.reward_ref(*p) == Some(r))
    }

    pub fn zero_percept(&self) -> Option<Symbol> {
        self.percept_with_reward(&Rational::zero())
    }

    pub fn unit_percept(&self) -> Option<Symbol> {
        self.percept_with_reward(&Rational::one())
    }

    pub fn all_rewards_integer(&self) -> bool {
        self.rewards.iter().all(Rational::is_integer)
    }

    /// Distinct reward values, ascending.
    pub fn reward_values(&self) -> BTreeSet<Rational> {
        self.rewards.iter().cloned().collect()
    }

    /// Symbols joined by `/`, the text form used in policy files.
    pub fn format_history(&self, h: &[Symbol]) -> String {
        h.iter()
            .map(|s| self.name(*s))
            .collect::<Vec<_>>()
            .join("/")
    }

    pub fn parse_symbols(&self, text: &str) -> Result<Vec<Symbol>> {
        if text.is_empty() {
            return Ok(Vec::new());
        }
        text.split('/').map(|n| self.symbol(n)).collect()
    }
}

fn check_name(n: &str) -> Result<()> {
    if n.is_empty() || n.contains('/') || n.chars().any(char::is_whitespace) {
        return Err(Error::InvalidUniverse(format!("bad symbol name `{n}`")));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct UniverseDoc {
    actions: Vec<String>,
    percepts: Vec<String>,
    rewards: BTreeMap<String, Rational>,
}

impl Serialize for Universe {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        UniverseDoc {
            actions: self.actions.clone(),
            percepts: self.percepts.clone(),
            rewards: self
                .percepts
                .iter()
                .cloned()
                .zip(self.rewards.iter().cloned())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Universe {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let mut doc = UniverseDoc::deserialize(d)?;
        let mut rewards = Vec::with_capacity(doc.percepts.len());
        for p in &doc.percepts {
            match doc.rewards.remove(p) {
                Some(r) => rewards.push(r),
                None => {
                    return Err(serde::de::Error::custom(format!(
                        "percept `{p}` has no reward"
                    )))
                }
            }
        }
        if let Some(extra) = doc.rewards.keys().next() {
            return Err(serde::de::Error::custom(format!(
                "reward given for unknown percept `{extra}`"
            )));
        }
        Universe::from_parts(doc.actions, doc.percepts, rewards).map_err(serde::de::Error::custom)
    }
}
