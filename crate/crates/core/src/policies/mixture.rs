use std::sync::Arc;

use super::{Agent, AgentFormula};
use crate::error::{Error, Result};
use crate::model::{Distribution, Rational, Symbol};

/// The agent σ whose value in every environment is `w·V^π + (1−w)·V^ρ`.
///
/// σ(x|h) = (w·π_*(h⌢x) + (1−w)·ρ_*(h⌢x)) / (w·π_*(h) + (1−w)·ρ_*(h)), where
/// `_*` is the conditional reach weight. A zero denominator falls back to
/// uniform over the available actions.
pub fn mixture_agent(pi: &Agent, rho: &Agent, w: &Rational) -> Result<Agent> {
    if w.is_negative() || *w > Rational::one() {
        return Err(Error::WeightOutOfRange);
    }
    if !pi.spec().same_histories(rho.spec()) {
        return Err(Error::FrameworkMismatch);
    }
    let spec = pi.spec().clone();
    let (pi, rho, w) = (pi.clone(), rho.clone(), w.clone());
    let fallback_spec = spec.clone();
    let f: AgentFormula = Arc::new(move |h: &[Symbol]| {
        let a = &w * pi.reach(h);
        let b = (Rational::one() - &w) * rho.reach(h);
        let denom = &a + &b;
        if denom.is_zero() {
            return Distribution::uniform(&fallback_spec.available_actions(h));
        }
        if b.is_zero() {
            return pi.dist(h);
        }
        if a.is_zero() {
            return rho.dist(h);
        }
        Distribution::blend(&pi.dist(h), &rho.dist(h), &(a / denom))
    });
    Agent::from_formula(spec, f)
}
