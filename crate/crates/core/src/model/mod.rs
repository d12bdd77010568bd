//! Alphabets, histories, exact distributions and framework descriptors.

mod distribution;
mod framework;
mod history;
mod rational;
mod universe;

pub use distribution::Distribution;
pub use framework::{randomize, AvailabilitySets, FrameworkSpec, RandomizeMode};
pub use history::{
    check_alternation, history_reward, local_reverse, validate_history, History, Orientation, Turn,
};
pub use rational::{ParseRationalError, Rational};
pub use universe::{Symbol, Universe};
