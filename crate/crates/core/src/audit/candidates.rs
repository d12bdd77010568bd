//! Planted candidate translations for the audits. None of them is a real
//! pre-translation; the audits are expected to refute each one.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{Distribution, FrameworkSpec, Rational, Symbol};
use crate::policies::{Agent, AgentFormula, EnvFormula, Environment};
use crate::translations::{AgentMap, Claim, EnvMap, Translation};

fn agent_map(
    dest: Arc<FrameworkSpec>,
    f: fn(&Agent, &FrameworkSpec, &[Symbol]) -> Distribution,
) -> AgentMap {
    Arc::new(move |pi: &Agent| {
        let (pi, d) = (pi.clone(), dest.clone());
        let g: AgentFormula = Arc::new(move |h: &[Symbol]| f(&pi, &d, h));
        Agent::from_formula(dest.clone(), g)
    })
}

fn pointwise(h: &[Symbol]) -> Vec<Vec<Symbol>> {
    vec![h.to_vec()]
}

/// Swaps the first two actions, leaving percepts alone.
pub fn swap_action(s: Symbol) -> Symbol {
    match s {
        Symbol::Action(0) => Symbol::Action(1),
        Symbol::Action(1) => Symbol::Action(0),
        s => s,
    }
}

fn swap_history(h: &[Symbol]) -> Vec<Symbol> {
    h.iter().map(|s| swap_action(*s)).collect()
}

/// Deterministic environment in `source` reading `mu` at `view(h)`: the
/// most likely percept there (ties to the smallest), replaced by the zero
/// percept once the rewards already collected along `h` reach `budget`.
pub fn determinize_env(
    mu: &Environment,
    source: Arc<FrameworkSpec>,
    view: fn(&[Symbol]) -> Vec<Symbol>,
    budget: Option<Rational>,
) -> Result<Environment> {
    let m = mu.clone();
    let universe = source.universe.clone();
    let zero = universe.zero_percept().ok_or(Error::NoZeroRewardPercept)?;
    let f: EnvFormula = Arc::new(move |h: &[Symbol]| {
        if let Some(b) = &budget {
            let got: Rational = h.iter().map(|s| universe.reward(*s)).sum();
            if got >= *b {
                return Distribution::point(zero);
            }
        }
        Distribution::point(m.dist(&view(h)).argmax())
    });
    Environment::from_formula(source, f, mu.value_depth(), true)
}

/// Environment half shared by the candidates: determinize into a
/// deterministic-environment source, otherwise keep the policy as is.
/// `swapped` reads μ through the action relabeling.
fn env_into(source: &Arc<FrameworkSpec>, swapped: bool) -> EnvMap {
    let source = source.clone();
    let budget = source.value_range.as_ref().map(|(_, hi)| hi.clone());
    let view: fn(&[Symbol]) -> Vec<Symbol> = if swapped {
        swap_history
    } else {
        |h| h.to_vec()
    };
    Arc::new(move |mu: &Environment| {
        if source.deterministic_environments {
            determinize_env(mu, source.clone(), view, budget.clone())
        } else if !swapped {
            mu.rehome(source.clone())
        } else {
            let m = mu.clone();
            let f: EnvFormula = Arc::new(move |h: &[Symbol]| m.dist(&view(h)));
            Environment::from_formula(source.clone(), f, mu.value_depth(), mu.is_deterministic())
        }
    })
}

fn name(kind: &str, source: &FrameworkSpec, dest: &FrameworkSpec) -> String {
    format!("{kind}:{}->{}", source.name, dest.name)
}

fn check_pair(source: &FrameworkSpec, dest: &FrameworkSpec) -> Result<()> {
    if source.same_histories(dest) {
        Ok(())
    } else {
        Err(Error::FrameworkMismatch)
    }
}

/// Agents unchanged, environments determinized.
pub fn embed(source: Arc<FrameworkSpec>, dest: Arc<FrameworkSpec>) -> Result<Translation> {
    check_pair(&source, &dest)?;
    let d = dest.clone();
    let am: AgentMap = Arc::new(move |pi: &Agent| pi.rehome(d.clone()));
    Ok(Translation::new(
        name("embed", &source, &dest),
        source.clone(),
        dest,
        am,
        Claim::Pre,
    )
    .with_env_map(env_into(&source, false))
    .with_dependency(Arc::new(pointwise)))
}

/// π^* = ¾·π + ¼·uniform. Needs randomized destination agents.
pub fn smoothed(source: Arc<FrameworkSpec>, dest: Arc<FrameworkSpec>) -> Result<Translation> {
    check_pair(&source, &dest)?;
    if dest.deterministic_agents {
        return Err(Error::SpecMismatch(
            "smoothing needs randomized destination agents".into(),
        ));
    }
    let am = agent_map(dest.clone(), |pi, d, h| {
        let u = Distribution::uniform(&d.available_actions(h));
        Distribution::blend(&pi.dist(h), &u, &Rational::new(3, 4))
    });
    Ok(Translation::new(
        name("smoothed", &source, &dest),
        source.clone(),
        dest,
        am,
        Claim::Pre,
    )
    .with_env_map(env_into(&source, false))
    .with_dependency(Arc::new(pointwise)))
}

/// Exchanges the first two actions everywhere.
pub fn relabel(source: Arc<FrameworkSpec>, dest: Arc<FrameworkSpec>) -> Result<Translation> {
    check_pair(&source, &dest)?;
    let am = agent_map(dest.clone(), |pi, _, h| {
        let d = pi.dist(&swap_history(h));
        Distribution::new(d.iter().map(|(s, p)| (swap_action(s), p.clone())))
            .expect("relabeled distribution")
    });
    Ok(Translation::new(
        name("relabel", &source, &dest),
        source.clone(),
        dest,
        am,
        Claim::Pre,
    )
    .with_env_map(env_into(&source, true))
    .with_dependency(Arc::new(|h: &[Symbol]| vec![swap_history(h)])))
}

/// Ignores its input: every agent maps to always-first-action.
pub fn broken(source: Arc<FrameworkSpec>, dest: Arc<FrameworkSpec>) -> Result<Translation> {
    check_pair(&source, &dest)?;
    let x = dest
        .universe
        .actions()
        .next()
        .ok_or(Error::InvalidUniverse("no actions".into()))?;
    let d = dest.clone();
    let am: AgentMap = Arc::new(move |_: &Agent| Agent::constant(d.clone(), x));
    Ok(Translation::new(
        name("broken", &source, &dest),
        source.clone(),
        dest,
        am,
        Claim::Pre,
    )
    .with_env_map(env_into(&source, false))
    .with_dependency(Arc::new(|_: &[Symbol]| Vec::new())))
}

fn determinizer(
    kind: &str,
    source: Arc<FrameworkSpec>,
    dest: Arc<FrameworkSpec>,
    pick: fn(&Distribution, &[Symbol]) -> Symbol,
) -> Result<Translation> {
    check_pair(&source, &dest)?;
    let d = dest.clone();
    let am: AgentMap = Arc::new(move |pi: &Agent| {
        let pi = pi.clone();
        let g: AgentFormula =
            Arc::new(move |h: &[Symbol]| Distribution::point(pick(&pi.dist(h), h)));
        Agent::from_formula(d.clone(), g)
    });
    Ok(Translation::new(
        name(kind, &source, &dest),
        source.clone(),
        dest,
        am,
        Claim::Pre,
    )
    .with_env_map(env_into(&source, false))
    .with_dependency(Arc::new(pointwise)))
}

/// π^*(h) = the most likely action of π(h).
pub fn argmax_determinizer(
    source: Arc<FrameworkSpec>,
    dest: Arc<FrameworkSpec>,
) -> Result<Translation> {
    determinizer("argmax", source, dest, |d, _| d.argmax())
}

/// π^*(h) = the 1/3-quantile action of π(h).
pub fn quantile_determinizer(
    source: Arc<FrameworkSpec>,
    dest: Arc<FrameworkSpec>,
) -> Result<Translation> {
    determinizer("quantile", source, dest, |d, _| {
        d.quantile(&Rational::new(1, 3))
    })
}

/// π^*(h) = the quantile of π(h) at a level derived from `h` itself.
pub fn hash_determinizer(
    source: Arc<FrameworkSpec>,
    dest: Arc<FrameworkSpec>,
) -> Result<Translation> {
    determinizer("hash", source, dest, |d, h| d.quantile(&history_level(h)))
}

/// A fixed pseudo-random level in (0, 1] for each history (FNV-1a over the
/// symbol indices, reduced to 64ths).
fn history_level(h: &[Symbol]) -> Rational {
    let mut x: u64 = 0xcbf2_9ce4_8422_2325;
    for s in h {
        let b = match s {
            Symbol::Action(i) => 2 * u64::from(*i),
            Symbol::Percept(i) => 2 * u64::from(*i) + 1,
        };
        x = (x ^ b).wrapping_mul(0x0100_0000_01b3);
    }
    Rational::new((x % 64) as i64 + 1, 64)
}

/// Candidates for the chain audit between the given frameworks: embed,
/// relabel and, when the destination randomizes agents, smoothed.
pub fn chain_candidates(
    source: &Arc<FrameworkSpec>,
    dest: &Arc<FrameworkSpec>,
) -> Result<Vec<Translation>> {
    let mut out = vec![embed(source.clone(), dest.clone())?];
    if !dest.deterministic_agents {
        out.push(smoothed(source.clone(), dest.clone())?);
    }
    out.push(relabel(source.clone(), dest.clone())?);
    Ok(out)
}

/// Determinizing candidates for the cardinality audit.
pub fn cardinality_candidates(
    source: &Arc<FrameworkSpec>,
    dest: &Arc<FrameworkSpec>,
) -> Result<Vec<Translation>> {
    Ok(vec![
        argmax_determinizer(source.clone(), dest.clone())?,
        quantile_determinizer(source.clone(), dest.clone())?,
        hash_determinizer(source.clone(), dest.clone())?,
    ])
}

/// Every distribution over `symbols` with probabilities in multiples of
/// `1/grain`.
pub fn grid_distributions(symbols: &[Symbol], grain: i64) -> Vec<Distribution> {
    fn go(
        symbols: &[Symbol],
        left: i64,
        grain: i64,
        acc: &mut Vec<(Symbol, Rational)>,
        out: &mut Vec<Distribution>,
    ) {
        match symbols {
            [] => {}
            [last] => {
                acc.push((*last, Rational::new(left, grain)));
                out.push(Distribution::new(acc.clone()).expect("grid point sums to one"));
                acc.pop();
            }
            [s, rest @ ..] => {
                for k in 0..=left {
                    acc.push((*s, Rational::new(k, grain)));
                    go(rest, left - k, grain, acc, out);
                    acc.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    go(symbols, grain, grain, &mut Vec::new(), &mut out);
    out
}

/// The exhaustive family of agent-first environments reacting only to the
/// first action, with percept probabilities on a `1/grain` grid. Each
/// member is offered as a constant environment map, since the mixture
/// argument only looks at the image of one destination environment.
pub fn depth1_env_maps(source: &Arc<FrameworkSpec>, grain: i64) -> Result<Vec<(String, EnvMap)>> {
    let u = &source.universe;
    let percepts: Vec<Symbol> = u.percepts().collect();
    let actions: Vec<Symbol> = u.actions().collect();
    let grid = grid_distributions(&percepts, grain);
    let mut tables = vec![(String::new(), std::collections::BTreeMap::new())];
    for x in &actions {
        let mut next = Vec::new();
        for (label, table) in &tables {
            for d in &grid {
                let mut t: std::collections::BTreeMap<Vec<Symbol>, Distribution> = table.clone();
                t.insert(vec![*x], d.clone());
                let part: Vec<String> = d
                    .iter()
                    .map(|(s, p)| format!("{}={p}", u.name(s)))
                    .collect();
                let sep = if label.is_empty() { "" } else { ";" };
                next.push((format!("{label}{sep}{}:{}", u.name(*x), part.join(",")), t));
            }
        }
        tables = next;
    }
    tables
        .into_iter()
        .map(|(label, table)| {
            let env = Environment::new(source.clone(), table, crate::policies::EnvDefault::Zero)?;
            let map: EnvMap = Arc::new(move |_: &Environment| Ok(env.clone()));
            Ok((label, map))
        })
        .collect()
}
