use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::enumerate_histories;
use crate::error::{Error, Result};
use crate::model::{Distribution, FrameworkSpec, History, Rational, Symbol, Turn};

pub type AgentFormula = Arc<dyn Fn(&[Symbol]) -> Distribution + Send + Sync>;

/// Behavior of an agent on histories missing from its table.
#[derive(Clone)]
pub enum AgentDefault {
    Fixed(Symbol),
    /// Uniform over the actions available at the history.
    Uniform,
    /// Computed on demand; used by translated and mixture agents.
    Formula(AgentFormula),
}

impl fmt::Debug for AgentDefault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentDefault::Fixed(s) => write!(f, "Fixed({s})"),
            AgentDefault::Uniform => f.write_str("Uniform"),
            AgentDefault::Formula(_) => f.write_str("Formula"),
        }
    }
}

/// A table-represented agent with a tail rule.
#[derive(Clone, Debug)]
pub struct Agent {
    spec: Arc<FrameworkSpec>,
    table: Arc<BTreeMap<Vec<Symbol>, Distribution>>,
    default: AgentDefault,
}

impl Agent {
    pub fn new(
        spec: Arc<FrameworkSpec>,
        table: BTreeMap<Vec<Symbol>, Distribution>,
        default: AgentDefault,
    ) -> Result<Self> {
        for (h, d) in &table {
            check_entry(&spec, h, d)?;
        }
        match &default {
            AgentDefault::Fixed(x) => {
                if !x.is_action() || !spec.universe.contains(*x) {
                    return Err(Error::PolicyConstraint("default must be an action".into()));
                }
            }
            AgentDefault::Uniform => {
                if spec.deterministic_agents {
                    return Err(Error::PolicyConstraint(
                        "uniform tail in a deterministic framework".into(),
                    ));
                }
            }
            AgentDefault::Formula(_) => {}
        }
        Ok(Agent {
            spec,
            table: Arc::new(table),
            default,
        })
    }

    /// Always plays `x`.
    pub fn constant(spec: Arc<FrameworkSpec>, x: Symbol) -> Result<Self> {
        Self::new(spec, BTreeMap::new(), AgentDefault::Fixed(x))
    }

    /// Uniform over available actions everywhere.
    pub fn uniform(spec: Arc<FrameworkSpec>) -> Result<Self> {
        Self::new(spec, BTreeMap::new(), AgentDefault::Uniform)
    }

    /// Tabulates `f` on every agent-turn history up to `spec.table_depth`
    /// and keeps `f` as the tail rule.
    pub fn from_formula(spec: Arc<FrameworkSpec>, f: AgentFormula) -> Result<Self> {
        let depth = spec.table_depth;
        Self::from_formula_to(spec, f, depth)
    }

    pub fn from_formula_to(
        spec: Arc<FrameworkSpec>,
        f: AgentFormula,
        depth: usize,
    ) -> Result<Self> {
        let mut table = BTreeMap::new();
        for h in enumerate_histories(&spec, depth, Some(Turn::Agent)) {
            let d = f(&h);
            table.insert(h, d);
        }
        Self::new(spec, table, AgentDefault::Formula(f))
    }

    pub fn spec(&self) -> &Arc<FrameworkSpec> {
        &self.spec
    }

    pub fn table(&self) -> &BTreeMap<Vec<Symbol>, Distribution> {
        &self.table
    }

    pub fn default_rule(&self) -> &AgentDefault {
        &self.default
    }

    /// Action distribution at an agent-turn history, unchecked.
    pub fn dist(&self, h: &[Symbol]) -> Distribution {
        if let Some(d) = self.table.get(h) {
            return d.clone();
        }
        match &self.default {
            AgentDefault::Fixed(x) => Distribution::point(*x),
            AgentDefault::Uniform => Distribution::uniform(&self.spec.available_actions(h)),
            AgentDefault::Formula(f) => f(h),
        }
    }

    pub fn prob(&self, x: Symbol, h: &[Symbol]) -> Rational {
        self.dist(h).prob(x)
    }

    /// Checked evaluation at a validated history.
    pub fn eval(&self, h: &History) -> Result<Distribution> {
        if h.orientation() != self.spec.orientation {
            return Err(Error::WrongOrientation);
        }
        if h.turn() != Turn::Agent {
            return Err(Error::WrongTurn { expected: "agent" });
        }
        Ok(self.dist(h.symbols()))
    }

    /// Conditional reach weight π_*(h): product of π's own choices along h.
    pub fn reach(&self, h: &[Symbol]) -> Rational {
        let mut w = Rational::one();
        for i in 0..h.len() {
            if h[i].is_action() {
                let p = self.prob(h[i], &h[..i]);
                if p.is_zero() {
                    return p;
                }
                w = w * p;
            }
        }
        w
    }

    /// The action of a deterministic agent at `h`.
    pub fn action(&self, h: &[Symbol]) -> Result<Symbol> {
        self.dist(h)
            .as_point()
            .ok_or(Error::NotDeterministic(h.len()))
    }

    /// Whether every tabulated entry and the tail are point masses.
    pub fn is_tabulated_deterministic(&self) -> bool {
        self.table.values().all(|d| d.as_point().is_some())
            && !matches!(self.default, AgentDefault::Uniform)
    }

    /// Same agent, moved to another framework with the same histories.
    pub fn rehome(&self, spec: Arc<FrameworkSpec>) -> Result<Self> {
        if !spec.same_histories(&self.spec) {
            return Err(Error::FrameworkMismatch);
        }
        let table = (*self.table).clone();
        Agent::new(spec, table, self.default.clone())
    }

    /// Copy with one entry overridden.
    pub fn with_entry(&self, h: Vec<Symbol>, d: Distribution) -> Result<Self> {
        check_entry(&self.spec, &h, &d)?;
        let mut table = (*self.table).clone();
        table.insert(h, d);
        Ok(Agent {
            spec: self.spec.clone(),
            table: Arc::new(table),
            default: self.default.clone(),
        })
    }

    /// Tabulates the agent on every agent-turn history up to `depth`.
    pub fn tabulate(&self, depth: usize) -> BTreeMap<Vec<Symbol>, Distribution> {
        enumerate_histories(&self.spec, depth, Some(Turn::Agent))
            .into_iter()
            .map(|h| {
                let d = self.dist(&h);
                (h, d)
            })
            .collect()
    }
}

fn check_entry(spec: &FrameworkSpec, h: &[Symbol], d: &Distribution) -> Result<()> {
    let hist = History::new(h.to_vec(), spec.orientation)?;
    if !hist.is_agent_turn() {
        return Err(Error::WrongTurn { expected: "agent" });
    }
    if h.iter().any(|s| !spec.universe.contains(*s)) {
        return Err(Error::UnknownSymbol(format!("{h:?}")));
    }
    if !d.all_actions() || d.support().any(|s| !spec.universe.contains(s)) {
        return Err(Error::PolicyConstraint(
            "agent support must be actions".into(),
        ));
    }
    if spec.deterministic_agents && d.as_point().is_none() {
        return Err(Error::PolicyConstraint(format!(
            "non-point distribution at `{}` in deterministic framework",
            spec.universe.format_history(h)
        )));
    }
    let available = spec.available_actions(h);
    if d.support().any(|s| !available.contains(&s)) {
        return Err(Error::PolicyConstraint(format!(
            "unavailable action at `{}`",
            spec.universe.format_history(h)
        )));
    }
    Ok(())
}
