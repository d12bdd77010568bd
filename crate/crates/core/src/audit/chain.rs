use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{first_difference, Argument, AuditReport, AuditWitness, OrderViolation, Outcome};
use crate::error::{Error, Result};
use crate::model::{Distribution, FrameworkSpec, Rational, Symbol, Turn};
use crate::policies::corpus::single_site_perturbations;
use crate::policies::{build_flexible_environment, enumerate_histories, Agent, Environment};
use crate::translations::Translation;
use crate::valuation::value;

/// π_i as a single-site perturbation of π_0; π_0 itself has neither field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainAgent {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub site: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
}

/// Everything needed to rebuild and re-check a descending chain. Vectors
/// indexed by chain step hold entry `i − 1` for step `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescendingChainPlan {
    /// The source agent π_0 (always its first action).
    pub base_agent: String,
    /// π_0, π_1, …, π_K.
    pub agents: Vec<ChainAgent>,
    /// The selected path Q through the destination.
    pub path: String,
    /// h_1 ⊆ h_2 ⊂ … ⊂ h_K on Q.
    pub histories: Vec<String>,
    /// x_i with π^*_i(x_i|h_i) > π^*_0(x_i|h_i), off Q.
    pub actions: Vec<String>,
    pub probabilities: Vec<Rational>,
    pub margins: Vec<Rational>,
    /// F(h_i): probability that π^*_0 against μ_0 passes through h_i.
    pub reach: Vec<Rational>,
    /// V^{π*_i}_μ for i = 0..K.
    pub dest_values: Vec<Rational>,
    /// V^{π_i}_{μ*} for i = 0..K.
    pub source_values: Vec<Rational>,
    /// Declared source value range.
    pub value_range: [Rational; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<OrderViolation>,
}

fn depth(h: &str) -> usize {
    if h.is_empty() {
        0
    } else {
        h.split('/').count()
    }
}

fn is_prefix(a: &str, b: &str) -> bool {
    a.is_empty() || (b.starts_with(a) && (b.len() == a.len() || b[a.len()..].starts_with('/')))
}

/// Order in which destination values must strictly decrease: 1, 2, …, K, 0.
fn chain_order(k: usize) -> Vec<usize> {
    (1..=k).chain(std::iter::once(0)).collect()
}

impl DescendingChainPlan {
    pub fn len(&self) -> usize {
        self.histories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.histories.is_empty()
    }

    /// Checks the plan's structural and margin invariants exactly.
    pub fn verify(&self) -> std::result::Result<(), String> {
        let k = self.len();
        if [
            self.actions.len(),
            self.probabilities.len(),
            self.margins.len(),
            self.reach.len(),
        ] != [k; 4]
            || self.agents.len() != k + 1
        {
            return Err("plan vectors have inconsistent lengths".into());
        }
        if k > 0 && !self.probabilities[0].is_one() {
            return Err("p_1 must be 1".into());
        }
        for i in 0..k {
            if !self.reach[i].is_positive() {
                return Err(format!("F(h_{}) is not positive", i + 1));
            }
            if !self.margins[i].is_positive() {
                return Err(format!("Δ_{} is not positive", i + 1));
            }
            if !self.probabilities[i].is_positive() {
                return Err(format!("p_{} is not positive", i + 1));
            }
            if !is_prefix(&self.histories[i], &self.path) {
                return Err(format!("h_{} is not on Q", i + 1));
            }
            if i > 0 {
                let (a, b) = (&self.histories[i - 1], &self.histories[i]);
                if !is_prefix(a, b) || depth(a) >= depth(b) {
                    return Err(format!("h_{} does not strictly extend h_{}", i + 1, i));
                }
            }
        }
        // p_{i+1} < Δ_j / 2^{i−j} for every j ≤ i.
        for i in 1..k {
            for j in 1..=i {
                let bound = &self.margins[j - 1] * Rational::pow2_inv((i - j) as u32);
                if self.probabilities[i] >= bound {
                    return Err(format!("p_{} is not below Δ_{}/2^{}", i + 1, j, i - j));
                }
            }
        }
        // The reward left after step k cannot make up Δ_k.
        for kk in 0..k {
            let tail: Rational = self.probabilities[kk + 1..].iter().cloned().sum();
            if tail >= self.margins[kk] {
                return Err(format!("tail after step {} reaches Δ_{}", kk + 1, kk + 1));
            }
        }
        let order = chain_order(k);
        if self.dest_values.len() == k + 1 {
            for w in order.windows(2) {
                if self.dest_values[w[0]] <= self.dest_values[w[1]] {
                    return Err(format!(
                        "destination values do not descend from π_{} to π_{}",
                        w[0], w[1]
                    ));
                }
            }
        }
        Ok(())
    }
}

struct Prepared {
    base: Agent,
    base_star: Agent,
    q: Vec<Symbol>,
    reach: Vec<Rational>,
    range: (Rational, Rational),
}

fn prepare(t: &Translation, k: usize) -> Result<Prepared> {
    let src = &t.source;
    let (range, size) = match (
        &src.value_range,
        src.integer_range_size(),
        src.integer_rewards,
    ) {
        (Some(r), Some(n), true) => (r.clone(), n),
        _ => {
            return Err(Error::PropertyPrerequisiteFailed(
                "source needs integer rewards and a declared value range".into(),
            ))
        }
    };
    if k <= size {
        return Err(Error::RangeTooSmall { k, range: size });
    }
    let x = src
        .universe
        .actions()
        .next()
        .ok_or(Error::ActionUnavailable)?;
    let base = Agent::constant(src.clone(), x)?;
    let base_star = t.apply_agent_map(&base)?;
    let mu0 = build_flexible_environment(t.dest.clone(), &[], &[])?.env;
    let (q, reach) = lexicographic_path(&base_star, &mu0, t.dest.reward_depth());
    Ok(Prepared {
        base,
        base_star,
        q,
        reach,
        range,
    })
}

/// Smallest positive-probability symbol at every step, with the reach
/// probability of each prefix.
fn lexicographic_path(pi: &Agent, mu: &Environment, len: usize) -> (Vec<Symbol>, Vec<Rational>) {
    let o = mu.spec().orientation;
    let mut q = Vec::with_capacity(len);
    let mut reach = vec![Rational::one()];
    while q.len() < len {
        let d = if o.is_agent_turn(q.len()) {
            pi.dist(&q)
        } else {
            mu.dist(&q)
        };
        let (s, p) = d
            .iter()
            .next()
            .map(|(s, p)| (s, p.clone()))
            .expect("non-empty support");
        reach.push(reach.last().expect("seeded") * &p);
        q.push(s);
    }
    (q, reach)
}

fn flexible_env(
    dest: &Arc<FrameworkSpec>,
    q: &[Symbol],
    entries: &[(Vec<Symbol>, Rational)],
) -> Result<Environment> {
    let o = dest.orientation;
    let rewarding: BTreeSet<&Vec<Symbol>> = entries.iter().map(|(h, _)| h).collect();
    let j: Vec<(Vec<Symbol>, Symbol)> = (0..q.len())
        .filter(|&n| !o.is_agent_turn(n))
        .map(|n| (q[..n].to_vec(), q[n]))
        .filter(|(h, _)| !rewarding.contains(h))
        .collect();
    Ok(build_flexible_environment(dest.clone(), entries, &j)?.env)
}

/// Builds a chain π_0, …, π_K of source agents whose images descend
/// strictly in value in one destination environment, maps that
/// environment back, and looks for the ordered pair Condition 1 loses.
///
/// Needs `k` larger than the number of integers in the source value range.
pub fn build_descending_chain(
    t: &Translation,
    k: usize,
) -> Result<(DescendingChainPlan, AuditReport)> {
    let p = prepare(t, k)?;
    let u = t.source.universe.clone();
    let o = t.dest.orientation;
    let agent_nodes: Vec<usize> = (0..p.q.len()).filter(|&n| o.is_agent_turn(n)).collect();

    let mut agents = vec![(None, p.base.clone(), p.base_star.clone())];
    let mut steps: Vec<(usize, Symbol)> = Vec::new();
    let mut tried: BTreeSet<(Vec<Symbol>, Symbol)> = BTreeSet::new();
    for step in 1..=k {
        let from = steps.last().map_or(0, |(n, _)| n + 1);
        let mut found = None;
        'nodes: for &n in agent_nodes.iter().filter(|&&n| n >= from) {
            let h = &p.q[..n];
            let sites = match t.dependency(h) {
                Some(s) => s,
                None => enumerate_histories(&t.source, n + 1, Some(Turn::Agent)),
            };
            for (g, x, rho) in single_site_perturbations(&p.base, &sites)? {
                if !tried.insert((g.clone(), x)) {
                    continue;
                }
                let rho_star = t.apply_agent_map(&rho)?;
                let Some(at) = first_difference(&rho_star, &p.base_star, &p.q, 0) else {
                    continue;
                };
                if at < from {
                    continue;
                }
                let hp = &p.q[..at];
                let (new, old) = (rho_star.dist(hp), p.base_star.dist(hp));
                let pick = new
                    .iter()
                    .map(|(y, _)| y)
                    .find(|y| *y != p.q[at] && new.prob(*y) > old.prob(*y));
                if let Some(xi) = pick {
                    found = Some((at, xi, g, x, rho, rho_star));
                    break 'nodes;
                }
            }
        }
        let (at, xi, g, x, rho, rho_star) = found.ok_or(Error::ChainStalled { step })?;
        steps.push((at, xi));
        agents.push((Some((g, x)), rho, rho_star));
    }

    let mut probabilities: Vec<Rational> = Vec::with_capacity(k);
    let mut margins: Vec<Rational> = Vec::with_capacity(k);
    for (i, (at, xi)) in steps.iter().enumerate() {
        let pi = if i == 0 {
            Rational::one()
        } else {
            let m = (0..i)
                .map(|j| &margins[j] * Rational::pow2_inv((i - j) as u32))
                .reduce(|a, b| a.min(b))
                .expect("i > 0");
            m * Rational::new(1, 2)
        };
        let h = &p.q[..*at];
        let gain = agents[i + 1].2.prob(*xi, h) - p.base_star.prob(*xi, h);
        margins.push(&pi * &p.reach[*at] * gain);
        probabilities.push(pi);
    }

    let entries: Vec<(Vec<Symbol>, Rational)> = steps
        .iter()
        .zip(&probabilities)
        .map(|((at, xi), pr)| {
            let mut h = p.q[..*at].to_vec();
            h.push(*xi);
            (h, pr.clone())
        })
        .collect();
    let mu = flexible_env(&t.dest, &p.q, &entries)?;
    let mu_s = t.apply_env_map(&mu)?;
    let dest_values = agents
        .iter()
        .map(|(_, _, s)| value(s, &mu))
        .collect::<Result<Vec<_>>>()?;
    let source_values = agents
        .iter()
        .map(|(_, a, _)| value(a, &mu_s))
        .collect::<Result<Vec<_>>>()?;

    let order = chain_order(k);
    let label = |i: usize| format!("pi_{i}");
    let violation = order.windows(2).find_map(|w| {
        let (a, b) = (w[0], w[1]);
        (dest_values[a] > dest_values[b] && source_values[a] <= source_values[b]).then(|| {
            OrderViolation {
                pi: label(a),
                rho: label(b),
                dest_values: [dest_values[a].clone(), dest_values[b].clone()],
                source_values: [source_values[a].clone(), source_values[b].clone()],
            }
        })
    });

    let plan = DescendingChainPlan {
        base_agent: format!("always-{}", u.name(p.base.action(&[])?)),
        agents: agents
            .iter()
            .map(|(site, _, _)| match site {
                None => ChainAgent {
                    site: None,
                    action: None,
                },
                Some((g, x)) => ChainAgent {
                    site: Some(u.format_history(g)),
                    action: Some(u.name(*x).to_string()),
                },
            })
            .collect(),
        path: u.format_history(&p.q),
        histories: steps
            .iter()
            .map(|(at, _)| u.format_history(&p.q[..*at]))
            .collect(),
        actions: steps
            .iter()
            .map(|(_, xi)| u.name(*xi).to_string())
            .collect(),
        probabilities,
        margins,
        reach: steps.iter().map(|(at, _)| p.reach[*at].clone()).collect(),
        dest_values,
        source_values,
        value_range: [p.range.0.clone(), p.range.1.clone()],
        violation,
    };
    let shown = plan.violation.is_some() && plan.verify().is_ok();
    let report = AuditReport {
        target: t.id.clone(),
        argument: Argument::DescendingChain,
        outcome: if shown {
            Outcome::ContradictionExhibited
        } else {
            Outcome::NoContradictionFound
        },
        witness: AuditWitness::DescendingChain(plan.clone()),
    };
    Ok((plan, report))
}

/// Rebuilds the agents and the environment from `plan` alone and
/// recomputes every value through the evaluator.
pub fn recheck_chain(t: &Translation, plan: &DescendingChainPlan) -> Result<bool> {
    let p = prepare(t, plan.len())?;
    let u = &t.source.universe;
    let q = u.parse_symbols(&plan.path)?;
    if q != p.q {
        return Ok(false);
    }
    let mut entries = Vec::new();
    for ((h, x), pr) in plan
        .histories
        .iter()
        .zip(&plan.actions)
        .zip(&plan.probabilities)
    {
        let mut g = u.parse_symbols(h)?;
        g.push(u.action(x)?);
        entries.push((g, pr.clone()));
    }
    let mu = flexible_env(&t.dest, &q, &entries)?;
    let mu_s = t.apply_env_map(&mu)?;
    for (i, a) in plan.agents.iter().enumerate() {
        let agent = match (&a.site, &a.action) {
            (Some(g), Some(x)) => p
                .base
                .with_entry(u.parse_symbols(g)?, Distribution::point(u.action(x)?))?,
            _ => p.base.clone(),
        };
        let star = t.apply_agent_map(&agent)?;
        if value(&star, &mu)? != plan.dest_values[i]
            || value(&agent, &mu_s)? != plan.source_values[i]
        {
            return Ok(false);
        }
    }
    Ok(true)
}
