//! Intelligence comparators: principal (dictator environment) and finite
//! majority, plus transfer of principal comparators along translations.
//!
//! Majority elections are an illustration only. They can be intransitive
//! and carry none of the guarantees the principal comparator has.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FrameworkSpec, Rational};
use crate::policies::{Agent, Environment};
use crate::translations::{check_injectivity, Law, LawReport, Translation, Verdict, Witness};
use crate::valuation::value;

/// What an even split counts as in a majority election.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieRule {
    /// Exactly half the votes is enough, so a split is `≤` both ways.
    Tie,
    /// Strictly more than half is required.
    Strict,
}

#[derive(Debug, Clone)]
pub enum ComparatorKind {
    Principal(Environment),
    Majority {
        envs: Vec<Environment>,
        tie_rule: TieRule,
    },
}

#[derive(Debug, Clone)]
pub struct Comparator {
    pub kind: ComparatorKind,
    pub spec: Arc<FrameworkSpec>,
}

impl Comparator {
    pub fn principal(mu: Environment) -> Self {
        let spec = mu.spec().clone();
        Comparator {
            kind: ComparatorKind::Principal(mu),
            spec,
        }
    }

    /// An even corpus needs an explicit tie rule.
    pub fn majority(envs: Vec<Environment>, tie_rule: Option<TieRule>) -> Result<Self> {
        let first = envs.first().ok_or(Error::EmptyCorpus)?;
        let spec = first.spec().clone();
        if envs.iter().any(|e| !e.spec().same_histories(&spec)) {
            return Err(Error::FrameworkMismatch);
        }
        let tie_rule = match tie_rule {
            Some(t) => t,
            None if envs.len() % 2 == 1 => TieRule::Strict,
            None => {
                return Err(Error::PolicyConstraint(
                    "even majority corpus needs a tie rule".into(),
                ))
            }
        };
        Ok(Comparator {
            kind: ComparatorKind::Majority { envs, tie_rule },
            spec,
        })
    }

    pub fn dictator(&self) -> Option<&Environment> {
        match &self.kind {
            ComparatorKind::Principal(mu) => Some(mu),
            ComparatorKind::Majority { .. } => None,
        }
    }
}

/// Votes cast by a majority corpus on one ordered pair. An environment
/// valuing both agents equally votes on both sides.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub voters: usize,
    /// Environments with V^π ≤ V^ρ.
    pub pi_le_rho: usize,
    /// Environments with V^ρ ≤ V^π.
    pub rho_le_pi: usize,
}

/// Evidence for one comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comparison {
    pub pi_le_rho: bool,
    pub rho_le_pi: bool,
    /// (V^π, V^ρ) in the dictator environment.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<[Rational; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tally: Option<Tally>,
}

impl Comparison {
    pub fn is_tie(&self) -> bool {
        self.pi_le_rho && self.rho_le_pi
    }
}

fn wins(votes: usize, voters: usize, rule: TieRule) -> bool {
    match rule {
        TieRule::Tie => 2 * votes >= voters,
        TieRule::Strict => 2 * votes > voters,
    }
}

pub fn compare(c: &Comparator, pi: &Agent, rho: &Agent) -> Result<Comparison> {
    if !pi.spec().same_histories(&c.spec) || !rho.spec().same_histories(&c.spec) {
        return Err(Error::FrameworkMismatch);
    }
    match &c.kind {
        ComparatorKind::Principal(mu) => {
            let (a, b) = (value(pi, mu)?, value(rho, mu)?);
            Ok(Comparison {
                pi_le_rho: a <= b,
                rho_le_pi: b <= a,
                values: Some([a, b]),
                tally: None,
            })
        }
        ComparatorKind::Majority { envs, tie_rule } => {
            let mut tally = Tally {
                voters: envs.len(),
                pi_le_rho: 0,
                rho_le_pi: 0,
            };
            for mu in envs {
                let (a, b) = (value(pi, mu)?, value(rho, mu)?);
                tally.pi_le_rho += usize::from(a <= b);
                tally.rho_le_pi += usize::from(b <= a);
            }
            Ok(Comparison {
                pi_le_rho: wins(tally.pi_le_rho, tally.voters, *tie_rule),
                rho_le_pi: wins(tally.rho_le_pi, tally.voters, *tie_rule),
                values: None,
                tally: Some(tally),
            })
        }
    }
}

/// The principal comparator at μ′_* in the source framework, given a
/// principal comparator at μ′ in the destination.
///
/// The environment map must be injective on `env_corpus` together with μ′;
/// a map without an environment half, or one that collides, is `NotWeak`.
pub fn induce_source_comparator(
    t: &Translation,
    dest: &Comparator,
    env_corpus: &[Environment],
) -> Result<Comparator> {
    let mu = dest.dictator().ok_or(Error::PolicyConstraint(
        "only principal comparators transfer".into(),
    ))?;
    if !mu.spec().same_histories(&t.dest) {
        return Err(Error::FrameworkMismatch);
    }
    if !t.has_env_map() {
        return Err(Error::NotWeak);
    }
    let mut envs = env_corpus.to_vec();
    envs.push(mu.clone());
    if !check_injectivity(t, &envs)?.passed() {
        return Err(Error::NotWeak);
    }
    Ok(Comparator::principal(t.apply_env_map(mu)?))
}

/// π ≤_c ρ ⇔ π^* ≤_{c′} ρ^* for every listed pair, both orders.
pub fn check_preservation(
    t: &Translation,
    source: &Comparator,
    dest: &Comparator,
    agents: &[Agent],
    pairs: &[(usize, usize)],
) -> Result<LawReport> {
    let images = agents
        .iter()
        .map(|a| t.apply_agent_map(a))
        .collect::<Result<Vec<_>>>()?;
    let mut checked = 0u64;
    for &(i, j) in pairs {
        let (pi, rho) = (
            agents.get(i).ok_or(Error::EmptyCorpus)?,
            agents.get(j).ok_or(Error::EmptyCorpus)?,
        );
        let s = compare(source, pi, rho)?;
        let d = compare(dest, &images[i], &images[j])?;
        checked += 2;
        for (a, b, sl, dl) in [
            (i, j, s.pi_le_rho, d.pi_le_rho),
            (j, i, s.rho_le_pi, d.rho_le_pi),
        ] {
            if sl != dl {
                let swap = |v: &Option<[Rational; 2]>| {
                    v.as_ref().map(|[x, y]| {
                        if a == i {
                            [x.clone(), y.clone()]
                        } else {
                            [y.clone(), x.clone()]
                        }
                    })
                };
                let w = Witness::Preservation {
                    pi: a,
                    rho: b,
                    source_le: sl,
                    dest_le: dl,
                    source_values: swap(&s.values),
                    dest_values: swap(&d.values),
                };
                return Ok(LawReport::new(
                    Law::Preservation,
                    Verdict::Fail,
                    Some(w),
                    checked,
                ));
            }
        }
    }
    Ok(LawReport::new(
        Law::Preservation,
        Verdict::Pass,
        None,
        checked,
    ))
}

/// Every ordered pair (i, j) with i < j.
pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect()
}
