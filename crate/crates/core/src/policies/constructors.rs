use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::{EnvDefault, EnvFormula, Environment};
use crate::error::{Error, Result};
use crate::model::{Distribution, FrameworkSpec, History, Rational, Symbol, Turn};

fn env_turn(spec: &FrameworkSpec, h: &[Symbol]) -> Result<()> {
    let hist = History::new(h.to_vec(), spec.orientation)?;
    if hist.turn() != Turn::Environment {
        return Err(Error::WrongTurn {
            expected: "environment",
        });
    }
    Ok(())
}

fn available_with_reward(spec: &FrameworkSpec, h: &[Symbol], r: &Rational) -> Option<Symbol> {
    spec.available_percepts(h)
        .into_iter()
        .find(|y| spec.universe.reward(*y) == *r)
}

/// Deterministic environment rewarding 1 exactly at `h` and 0 elsewhere.
pub fn build_indicator_environment(spec: Arc<FrameworkSpec>, h: &[Symbol]) -> Result<Environment> {
    env_turn(&spec, h)?;
    let unit =
        available_with_reward(&spec, h, &Rational::one()).ok_or(Error::NoUnitRewardPercept)?;
    spec.universe
        .zero_percept()
        .ok_or(Error::NoZeroRewardPercept)?;
    let table = BTreeMap::from([(h.to_vec(), Distribution::point(unit))]);
    Environment::new(spec, table, EnvDefault::Zero)
}

/// Splices a +1 reward after `h ⌢ x` into deterministic `base`, zeroes
/// every other reward strictly below `h`, and agrees with `base` elsewhere.
pub fn build_cutoff_environment(
    spec: Arc<FrameworkSpec>,
    base: &Environment,
    h: &[Symbol],
    x: Symbol,
) -> Result<Environment> {
    let hist = History::new(h.to_vec(), spec.orientation)?;
    if hist.turn() != Turn::Agent {
        return Err(Error::WrongTurn { expected: "agent" });
    }
    if !base.is_deterministic() {
        return Err(Error::NotDeterministic(h.len()));
    }
    if !x.is_action() || !spec.available_actions(h).contains(&x) {
        return Err(Error::ActionUnavailable);
    }
    let mut hx = h.to_vec();
    hx.push(x);
    let unit =
        available_with_reward(&spec, &hx, &Rational::one()).ok_or(Error::NoUnitRewardPercept)?;
    let zero = spec
        .universe
        .zero_percept()
        .ok_or(Error::NoZeroRewardPercept)?;
    let universe = spec.universe.clone();
    let prefix = h.to_vec();
    let base_env = base.clone();
    let value_depth = base.value_depth().max(hx.len() + 1);
    let f: EnvFormula = Arc::new(move |g: &[Symbol]| {
        if g == hx.as_slice() {
            return Distribution::point(unit);
        }
        let below = g.len() > prefix.len() && g.starts_with(&prefix);
        let d = base_env.dist(g);
        if below {
            match d.as_point() {
                Some(y) if universe.reward(y).is_zero() => d,
                _ => Distribution::point(zero),
            }
        } else {
            d
        }
    });
    Environment::from_formula(spec, f, value_depth, true)
}

/// Deterministic environment paying `K − i` at the `i`-th antichain member
/// and 0 everywhere else.
pub fn build_descending_environment(
    spec: Arc<FrameworkSpec>,
    antichain: &[Vec<Symbol>],
) -> Result<Environment> {
    for h in antichain {
        env_turn(&spec, h)?;
    }
    for i in 0..antichain.len() {
        for j in 0..antichain.len() {
            if i != j && antichain[j].starts_with(&antichain[i]) {
                return Err(Error::NotAnAntichain(i.min(j), i.max(j)));
            }
        }
    }
    spec.universe
        .zero_percept()
        .ok_or(Error::NoZeroRewardPercept)?;
    let k = antichain.len() as i64;
    let mut table = BTreeMap::new();
    for (i, h) in antichain.iter().enumerate() {
        let r = Rational::from_integer(k - i as i64);
        let y = available_with_reward(&spec, h, &r).ok_or(Error::InsufficientRewardAlphabet)?;
        table.insert(h.clone(), Distribution::point(y));
    }
    Environment::new(spec, table, EnvDefault::Zero)
}

/// Result of [`build_flexible_environment`]: the environment and the
/// rewarding / non-rewarding percepts chosen at each I-entry.
#[derive(Debug, Clone)]
pub struct FlexibleEnvironment {
    pub env: Environment,
    pub rewarding: Vec<Symbol>,
    pub non_rewarding: Vec<Symbol>,
}

/// Environment paying 1 with probability `p_i` at each I-history, forcing
/// the given zero-reward percept at each J-history, and paying 0 elsewhere.
pub fn build_flexible_environment(
    spec: Arc<FrameworkSpec>,
    i_entries: &[(Vec<Symbol>, Rational)],
    j_entries: &[(Vec<Symbol>, Symbol)],
) -> Result<FlexibleEnvironment> {
    for (h, p) in i_entries {
        env_turn(&spec, h)?;
        if p.is_negative() || *p > Rational::one() {
            return Err(Error::InvalidDistribution(format!(
                "probability {p} outside [0,1]"
            )));
        }
    }
    for (a, (ha, _)) in i_entries.iter().enumerate() {
        for (b, (hb, _)) in i_entries.iter().enumerate() {
            if a != b && hb.starts_with(ha) {
                return Err(Error::ConditionC1Violation(a.min(b), a.max(b)));
            }
        }
    }
    let i_set: BTreeSet<&Vec<Symbol>> = i_entries.iter().map(|(h, _)| h).collect();
    let mut table = BTreeMap::new();
    for (j, (h, y)) in j_entries.iter().enumerate() {
        env_turn(&spec, h)?;
        if i_set.contains(h) {
            return Err(Error::ConditionC2Violation(j));
        }
        if !y.is_percept()
            || !spec.available_percepts(h).contains(y)
            || !spec.universe.reward(*y).is_zero()
        {
            return Err(Error::ConditionC3Violation(j));
        }
        if let Some(prev) = table.insert(h.clone(), Distribution::point(*y)) {
            if prev.as_point() != Some(*y) {
                return Err(Error::ConditionC3Violation(j));
            }
        }
    }
    let mut rewarding = Vec::new();
    let mut non_rewarding = Vec::new();
    for (h, p) in i_entries {
        let y =
            available_with_reward(&spec, h, &Rational::one()).ok_or(Error::NoUnitRewardPercept)?;
        let n =
            available_with_reward(&spec, h, &Rational::zero()).ok_or(Error::NoZeroRewardPercept)?;
        let d = Distribution::new([(y, p.clone()), (n, Rational::one() - p)])?;
        table.insert(h.clone(), d);
        rewarding.push(y);
        non_rewarding.push(n);
    }
    let env = Environment::new(spec, table, EnvDefault::Zero)?;
    Ok(FlexibleEnvironment {
        env,
        rewarding,
        non_rewarding,
    })
}
