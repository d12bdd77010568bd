use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::enumerate_histories;
use crate::error::{Error, Result};
use crate::model::{Distribution, FrameworkSpec, History, Symbol, Turn};

pub type EnvFormula = Arc<dyn Fn(&[Symbol]) -> Distribution + Send + Sync>;

/// Behavior of an environment on histories missing from its table.
#[derive(Clone)]
pub enum EnvDefault {
    /// Emit the universe's designated zero-reward percept.
    Zero,
    /// Computed on demand. No percept emitted at a history of length
    /// `value_depth` or more carries nonzero reward.
    Formula {
        f: EnvFormula,
        value_depth: usize,
        deterministic: bool,
    },
}

impl fmt::Debug for EnvDefault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvDefault::Zero => f.write_str("Zero"),
            EnvDefault::Formula { value_depth, .. } => write!(f, "Formula(depth {value_depth})"),
        }
    }
}

/// A table-represented environment with a zero-reward tail.
#[derive(Clone, Debug)]
pub struct Environment {
    spec: Arc<FrameworkSpec>,
    table: Arc<BTreeMap<Vec<Symbol>, Distribution>>,
    default: EnvDefault,
    zero: Symbol,
    value_depth: usize,
}

impl Environment {
    pub fn new(
        spec: Arc<FrameworkSpec>,
        table: BTreeMap<Vec<Symbol>, Distribution>,
        default: EnvDefault,
    ) -> Result<Self> {
        Self::build(spec, table, default, true)
    }

    fn build(
        spec: Arc<FrameworkSpec>,
        table: BTreeMap<Vec<Symbol>, Distribution>,
        default: EnvDefault,
        check_horizon: bool,
    ) -> Result<Self> {
        let zero = spec
            .universe
            .zero_percept()
            .ok_or(Error::NoZeroRewardPercept)?;
        let mut value_depth = match &default {
            EnvDefault::Zero => 0,
            EnvDefault::Formula { value_depth, .. } => *value_depth,
        };
        let reward_depth = spec.reward_depth();
        for (h, d) in &table {
            check_entry(&spec, h, d)?;
            if d.support().any(|y| !spec.universe.reward(y).is_zero()) {
                if check_horizon && h.len() + 1 > reward_depth {
                    return Err(Error::PolicyConstraint(format!(
                        "nonzero reward at `{}` past the reward horizon",
                        spec.universe.format_history(h)
                    )));
                }
                value_depth = value_depth.max(h.len() + 1);
            }
        }
        Ok(Environment {
            spec,
            table: Arc::new(table),
            default,
            zero,
            value_depth,
        })
    }

    /// Like [`Environment::new`] but exempt from the framework's reward
    /// horizon. The tail is still zero past the table, so values converge.
    pub fn unbounded(
        spec: Arc<FrameworkSpec>,
        table: BTreeMap<Vec<Symbol>, Distribution>,
        default: EnvDefault,
    ) -> Result<Self> {
        Self::build(spec, table, default, false)
    }

    /// Always emits the zero-reward percept.
    pub fn zero(spec: Arc<FrameworkSpec>) -> Result<Self> {
        Self::new(spec, BTreeMap::new(), EnvDefault::Zero)
    }

    /// Tabulates `f` up to `spec.table_depth` and keeps it as the tail rule.
    pub fn from_formula(
        spec: Arc<FrameworkSpec>,
        f: EnvFormula,
        value_depth: usize,
        deterministic: bool,
    ) -> Result<Self> {
        let mut table = BTreeMap::new();
        for h in enumerate_histories(&spec, spec.table_depth, Some(Turn::Environment)) {
            let d = f(&h);
            table.insert(h, d);
        }
        Self::build(
            spec,
            table,
            EnvDefault::Formula {
                f,
                value_depth,
                deterministic,
            },
            false,
        )
    }

    pub fn spec(&self) -> &Arc<FrameworkSpec> {
        &self.spec
    }

    pub fn table(&self) -> &BTreeMap<Vec<Symbol>, Distribution> {
        &self.table
    }

    pub fn default_rule(&self) -> &EnvDefault {
        &self.default
    }

    pub fn zero_percept(&self) -> Symbol {
        self.zero
    }

    /// Histories longer than this see only zero rewards.
    pub fn value_depth(&self) -> usize {
        self.value_depth
    }

    /// Percept distribution at an environment-turn history, unchecked.
    pub fn dist(&self, h: &[Symbol]) -> Distribution {
        if let Some(d) = self.table.get(h) {
            return d.clone();
        }
        match &self.default {
            EnvDefault::Zero => Distribution::point(self.zero),
            EnvDefault::Formula { f, .. } => f(h),
        }
    }

    pub fn eval(&self, h: &History) -> Result<Distribution> {
        if h.orientation() != self.spec.orientation {
            return Err(Error::WrongOrientation);
        }
        if h.turn() != Turn::Environment {
            return Err(Error::WrongTurn {
                expected: "environment",
            });
        }
        Ok(self.dist(h.symbols()))
    }

    pub fn percept(&self, h: &[Symbol]) -> Result<Symbol> {
        self.dist(h)
            .as_point()
            .ok_or(Error::NotDeterministic(h.len()))
    }

    pub fn is_deterministic(&self) -> bool {
        let tail = match &self.default {
            EnvDefault::Zero => true,
            EnvDefault::Formula { deterministic, .. } => *deterministic,
        };
        tail && self.table.values().all(|d| d.as_point().is_some())
    }

    pub fn rehome(&self, spec: Arc<FrameworkSpec>) -> Result<Self> {
        if !spec.same_histories(&self.spec) {
            return Err(Error::FrameworkMismatch);
        }
        Self::build(spec, (*self.table).clone(), self.default.clone(), false)
    }

    /// Tabulates every environment-turn history up to `depth`.
    pub fn tabulate(&self, depth: usize) -> BTreeMap<Vec<Symbol>, Distribution> {
        enumerate_histories(&self.spec, depth, Some(Turn::Environment))
            .into_iter()
            .map(|h| {
                let d = self.dist(&h);
                (h, d)
            })
            .collect()
    }

    /// Behavior on every history that can influence a value, for
    /// comparing environments for equality.
    pub fn canonical_key(&self, depth: usize) -> BTreeMap<Vec<Symbol>, Distribution> {
        self.tabulate(depth)
    }
}

fn check_entry(spec: &FrameworkSpec, h: &[Symbol], d: &Distribution) -> Result<()> {
    let hist = History::new(h.to_vec(), spec.orientation)?;
    if hist.is_agent_turn() {
        return Err(Error::WrongTurn {
            expected: "environment",
        });
    }
    if h.iter().any(|s| !spec.universe.contains(*s)) {
        return Err(Error::UnknownSymbol(format!("{h:?}")));
    }
    if !d.all_percepts() || d.support().any(|s| !spec.universe.contains(s)) {
        return Err(Error::PolicyConstraint(
            "environment support must be percepts".into(),
        ));
    }
    if spec.deterministic_environments && d.as_point().is_none() {
        return Err(Error::PolicyConstraint(format!(
            "non-point distribution at `{}` in deterministic framework",
            spec.universe.format_history(h)
        )));
    }
    let available = spec.available_percepts(h);
    if d.support().any(|s| !available.contains(&s)) {
        return Err(Error::PolicyConstraint(format!(
            "unavailable percept at `{}`",
            spec.universe.format_history(h)
        )));
    }
    Ok(())
}
