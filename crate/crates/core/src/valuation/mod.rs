//! Exact expected total reward, seeded simulation, determined paths and
//! environment agreement predicates.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Rational, Symbol};
use crate::policies::{Agent, Environment};

/// Result of an exact evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueReport {
    pub value: Rational,
    pub horizon_used: usize,
    /// Positive-probability paths enumerated. The zero-reward tail past the
    /// environment's value depth is not expanded.
    pub path_count: u64,
    /// True when the horizon covers every reward the environment can pay.
    pub converged: bool,
}

fn check_pair(pi: &Agent, mu: &Environment) -> Result<()> {
    if pi.spec().same_histories(mu.spec()) {
        Ok(())
    } else {
        Err(Error::FrameworkMismatch)
    }
}

/// V^π_{μ,t}: expected sum of R(h_i) for i ≤ t, by weighted enumeration of
/// the interaction tree.
pub fn expected_value(pi: &Agent, mu: &Environment, t: usize) -> Result<ValueReport> {
    check_pair(pi, mu)?;
    let eff = t.min(mu.value_depth());
    let orientation = mu.spec().orientation;
    let universe = &mu.spec().universe;
    let mut value = Rational::zero();
    let mut paths = 0u64;
    let mut stack: Vec<(Vec<Symbol>, Rational)> = vec![(Vec::new(), Rational::one())];
    while let Some((h, w)) = stack.pop() {
        if h.len() >= eff {
            paths += 1;
            continue;
        }
        let d = if orientation.is_agent_turn(h.len()) {
            pi.dist(&h)
        } else {
            mu.dist(&h)
        };
        for (s, p) in d.iter() {
            let nw = &w * p;
            if let Some(r) = universe.reward_ref(s) {
                if !r.is_zero() {
                    value += &nw * r;
                }
            }
            let mut g = Vec::with_capacity(h.len() + 1);
            g.extend_from_slice(&h);
            g.push(s);
            stack.push((g, nw));
        }
    }
    Ok(ValueReport {
        value,
        horizon_used: t,
        path_count: paths,
        converged: t >= mu.value_depth(),
    })
}

/// V^π_μ, evaluated at t = max(2T + 2, value depth) where T is the
/// environment framework's reward horizon.
pub fn total_value(pi: &Agent, mu: &Environment) -> Result<ValueReport> {
    let t = (2 * mu.spec().reward_horizon + 2).max(mu.value_depth());
    expected_value(pi, mu, t)
}

/// Shorthand for the exact value alone.
pub fn value(pi: &Agent, mu: &Environment) -> Result<Rational> {
    Ok(total_value(pi, mu)?.value)
}

/// One sampled interaction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub symbols: Vec<Symbol>,
    pub total_reward: Rational,
}

/// Samples a length-`t` trajectory. Equal seeds replay identically.
pub fn simulate(pi: &Agent, mu: &Environment, t: usize, seed: u64) -> Result<Trajectory> {
    check_pair(pi, mu)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample(pi, mu, t, &mut rng))
}

/// Samples from a caller-owned generator, for long Monte Carlo runs.
pub fn sample(pi: &Agent, mu: &Environment, t: usize, rng: &mut ChaCha8Rng) -> Trajectory {
    let orientation = mu.spec().orientation;
    let universe = &mu.spec().universe;
    let mut h = Vec::with_capacity(t);
    let mut total = Rational::zero();
    while h.len() < t {
        let d = if orientation.is_agent_turn(h.len()) {
            pi.dist(&h)
        } else {
            mu.dist(&h)
        };
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut pick = None;
        for (s, p) in d.iter() {
            acc += p.to_f64();
            pick = Some(s);
            if u < acc {
                break;
            }
        }
        let s = pick.expect("distribution has support");
        total += universe.reward(s);
        h.push(s);
    }
    Trajectory {
        symbols: h,
        total_reward: total,
    }
}

/// The prefixes h_0 = ⟨⟩, h_1, …, h_length of the path determined by two
/// deterministic policies.
pub fn determined_path(pi: &Agent, mu: &Environment, length: usize) -> Result<Vec<Vec<Symbol>>> {
    check_pair(pi, mu)?;
    let orientation = mu.spec().orientation;
    let mut h = Vec::new();
    let mut out = vec![h.clone()];
    while h.len() < length {
        let s = if orientation.is_agent_turn(h.len()) {
            pi.action(&h)?
        } else {
            mu.percept(&h)?
        };
        h.push(s);
        out.push(h.clone());
    }
    Ok(out)
}

/// Whether μ and ν order π against ρ the same way.
pub fn agree_about(mu: &Environment, nu: &Environment, pi: &Agent, rho: &Agent) -> Result<bool> {
    if !mu.spec().same_histories(nu.spec()) {
        return Err(Error::FrameworkMismatch);
    }
    let a = value(pi, mu)? <= value(rho, mu)?;
    let b = value(pi, nu)? <= value(rho, nu)?;
    Ok(a == b)
}

/// Agent pair on which two environments disagree, with
/// (V^π_μ, V^ρ_μ, V^π_ν, V^ρ_ν).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Disagreement {
    pub pi: usize,
    pub rho: usize,
    pub values: [Rational; 4],
}

/// Corpus approximation of environment equivalence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceVerdict {
    pub distinguished: bool,
    pub witness: Option<Disagreement>,
    pub corpus_size: usize,
}

impl EquivalenceVerdict {
    /// "distinguished" or "not distinguished by corpus"; never "equivalent".
    pub fn label(&self) -> &'static str {
        if self.distinguished {
            "distinguished"
        } else {
            "not distinguished by corpus"
        }
    }
}

/// Values of every agent in one environment.
pub fn values(agents: &[Agent], mu: &Environment) -> Result<Vec<Rational>> {
    agents.iter().map(|a| value(a, mu)).collect()
}

/// First ordered pair (i, j) where the two value vectors order agents
/// differently.
pub fn first_disagreement(vm: &[Rational], vn: &[Rational]) -> Option<Disagreement> {
    for i in 0..vm.len() {
        for j in 0..vm.len() {
            if (vm[i] <= vm[j]) != (vn[i] <= vn[j]) {
                return Some(Disagreement {
                    pi: i,
                    rho: j,
                    values: [vm[i].clone(), vm[j].clone(), vn[i].clone(), vn[j].clone()],
                });
            }
        }
    }
    None
}

/// Checks every ordered agent pair of the corpus.
pub fn corpus_equivalent(
    mu: &Environment,
    nu: &Environment,
    agents: &[Agent],
) -> Result<EquivalenceVerdict> {
    if agents.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if !mu.spec().same_histories(nu.spec()) {
        return Err(Error::FrameworkMismatch);
    }
    let vm = values(agents, mu)?;
    let vn = values(agents, nu)?;
    let witness = first_disagreement(&vm, &vn);
    Ok(EquivalenceVerdict {
        distinguished: witness.is_some(),
        witness,
        corpus_size: agents.len(),
    })
}
