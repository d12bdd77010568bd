use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Rational, Symbol, Universe};
use crate::error::{Error, Result};

/// Which party emits the first symbol of every history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    AgentFirst,
    PerceptFirst,
}

impl Orientation {
    pub fn flipped(self) -> Self {
        match self {
            Orientation::AgentFirst => Orientation::PerceptFirst,
            Orientation::PerceptFirst => Orientation::AgentFirst,
        }
    }

    /// Whether a history of length `len` awaits an action.
    pub fn is_agent_turn(self, len: usize) -> bool {
        match self {
            Orientation::AgentFirst => len.is_multiple_of(2),
            Orientation::PerceptFirst => len % 2 == 1,
        }
    }

    /// Whether position `i` of a history holds an action.
    pub fn action_at(self, i: usize) -> bool {
        self.is_agent_turn(i)
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::AgentFirst => "agent-first",
            Orientation::PerceptFirst => "percept-first",
        })
    }
}

/// Whose move a history is waiting for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Turn {
    Agent,
    Environment,
}

/// Checks alternation and orientation parity of a raw symbol sequence.
pub fn check_alternation(symbols: &[Symbol], orientation: Orientation) -> Result<()> {
    if let Some(first) = symbols.first() {
        if first.is_action() != orientation.action_at(0) {
            return Err(Error::OrientationMismatch);
        }
    }
    for (i, w) in symbols.windows(2).enumerate() {
        if w[0].is_action() == w[1].is_action() {
            return Err(Error::AlternationViolation { position: i + 1 });
        }
    }
    Ok(())
}

/// A finite alternating sequence of actions and percepts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct History {
    symbols: Vec<Symbol>,
    orientation: Orientation,
}

impl History {
    pub fn empty(orientation: Orientation) -> Self {
        History {
            symbols: Vec::new(),
            orientation,
        }
    }

    pub fn new(symbols: Vec<Symbol>, orientation: Orientation) -> Result<Self> {
        check_alternation(&symbols, orientation)?;
        Ok(History {
            symbols,
            orientation,
        })
    }

    /// Parses a sequence of symbol names against a universe.
    pub fn from_names(
        names: &[&str],
        universe: &Universe,
        orientation: Orientation,
    ) -> Result<Self> {
        let symbols = names
            .iter()
            .map(|n| universe.symbol(n))
            .collect::<Result<Vec<_>>>()?;
        Self::new(symbols, orientation)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.symbols
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn turn(&self) -> Turn {
        if self.orientation.is_agent_turn(self.len()) {
            Turn::Agent
        } else {
            Turn::Environment
        }
    }

    pub fn is_agent_turn(&self) -> bool {
        self.turn() == Turn::Agent
    }

    /// `self ⌢ s`, checked.
    pub fn extend(&self, s: Symbol) -> Result<Self> {
        let wants_action = self.is_agent_turn();
        if s.is_action() != wants_action {
            return Err(if self.is_empty() {
                Error::OrientationMismatch
            } else {
                Error::AlternationViolation {
                    position: self.len(),
                }
            });
        }
        let mut symbols = self.symbols.clone();
        symbols.push(s);
        Ok(History {
            symbols,
            orientation: self.orientation,
        })
    }

    /// Weak prefix relation `self ⊆ other`.
    pub fn is_prefix_of(&self, other: &History) -> bool {
        other.symbols.starts_with(&self.symbols)
    }

    /// Proper prefix relation `self ⊂ other`.
    pub fn is_proper_prefix_of(&self, other: &History) -> bool {
        self.len() < other.len() && self.is_prefix_of(other)
    }

    pub fn reward(&self, universe: &Universe) -> Rational {
        history_reward(&self.symbols, universe)
    }

    pub fn local_reverse(&self) -> Result<Self> {
        Ok(History {
            symbols: local_reverse(&self.symbols)?,
            orientation: self.orientation.flipped(),
        })
    }

    pub fn display<'a>(&'a self, universe: &'a Universe) -> impl fmt::Display + 'a {
        Named {
            symbols: &self.symbols,
            universe,
        }
    }
}

struct Named<'a> {
    symbols: &'a [Symbol],
    universe: &'a Universe,
}

impl fmt::Display for Named<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("⟨")?;
        for (i, s) in self.symbols.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(self.universe.name(*s))?;
        }
        f.write_str("⟩")
    }
}

/// Validates `symbols` against a framework and stamps its orientation.
pub fn validate_history(
    symbols: &[Symbol],
    universe: &Universe,
    orientation: Orientation,
) -> Result<History> {
    if let Some(s) = symbols.iter().find(|s| !universe.contains(**s)) {
        return Err(Error::UnknownSymbol(s.to_string()));
    }
    History::new(symbols.to_vec(), orientation)
}

/// Transposes each pair at positions `2i, 2i+1`.
pub fn local_reverse(symbols: &[Symbol]) -> Result<Vec<Symbol>> {
    if !symbols.len().is_multiple_of(2) {
        return Err(Error::OddLength(symbols.len()));
    }
    Ok(symbols.chunks(2).flat_map(|c| [c[1], c[0]]).collect())
}

/// Reward of the final percept; zero for the empty history or a trailing action.
pub fn history_reward(symbols: &[Symbol], universe: &Universe) -> Rational {
    match symbols.last() {
        Some(s @ Symbol::Percept(_)) => universe.reward(*s),
        _ => Rational::zero(),
    }
}
