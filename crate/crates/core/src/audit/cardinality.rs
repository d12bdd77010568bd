use serde::{Deserialize, Serialize};

use super::{first_difference, Argument, AuditReport, AuditWitness, OrderViolation, Outcome};
use crate::error::{Error, Result};
use crate::model::{Distribution, Rational, Symbol, Turn};
use crate::policies::corpus::single_site_perturbations;
use crate::policies::{
    build_cutoff_environment, enumerate_histories, mixture_agent, Agent, Environment,
};
use crate::translations::Translation;
use crate::valuation::{determined_path, value};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardinalityWitness {
    pub base_agent: String,
    /// ρ is π with `action` forced at `site`.
    pub site: String,
    pub action: String,
    /// First history on Q where ρ^* and π^* act differently.
    pub h_plus: String,
    /// π^*(h⁺), the action the cutoff environment rewards.
    pub cutoff_action: String,
    /// (V^{π*}_μ, V^{ρ*}_μ)
    pub dest_values: [Rational; 2],
    /// (V^π_{μ*}, V^ρ_{μ*})
    pub source_values: [Rational; 2],
    /// Weights w on π in σ_w = w·π + (1−w)·ρ, ordered so that source values
    /// increase.
    pub weights: Vec<Rational>,
    pub sigma_source_values: Vec<Rational>,
    pub sigma_dest_values: Vec<Rational>,
    pub distinct_source_values: usize,
    pub dest_range_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<OrderViolation>,
}

struct Setup {
    pi: Agent,
    pi_star: Agent,
    q: Vec<Symbol>,
    mu0: Environment,
    range_size: usize,
}

fn setup(t: &Translation, n: usize) -> Result<Setup> {
    let dest = &t.dest;
    if !dest.deterministic_agents || !dest.deterministic_environments || !dest.integer_rewards {
        return Err(Error::PropertyPrerequisiteFailed(
            "destination must be deterministic with integer rewards".into(),
        ));
    }
    let range_size = dest.integer_range_size().ok_or_else(|| {
        Error::PropertyPrerequisiteFailed("destination has no declared value range".into())
    })?;
    if range_size > n {
        return Err(Error::RangeTooSmall {
            k: n,
            range: range_size,
        });
    }
    let x = t
        .source
        .universe
        .actions()
        .next()
        .ok_or(Error::ActionUnavailable)?;
    let pi = Agent::constant(t.source.clone(), x)?;
    let pi_star = t.apply_agent_map(&pi)?;
    let mu0 = Environment::zero(dest.clone())?;
    let path = determined_path(&pi_star, &mu0, dest.reward_depth())?;
    let q = path.last().cloned().unwrap_or_default();
    Ok(Setup {
        pi,
        pi_star,
        q,
        mu0,
        range_size,
    })
}

fn weights(n: usize) -> Vec<Rational> {
    (0..=n).map(|k| Rational::new(k as i64, n as i64)).collect()
}

/// Pair (π, ρ) separated by a cutoff environment, then the mixtures σ_w
/// for w = 0, 1/n, …, 1. Their n + 1 source values are distinct, so the
/// destination would need n + 1 distinct integers in a smaller range.
pub fn cardinality_audit(t: &Translation, n: usize) -> Result<AuditReport> {
    let s = setup(t, n)?;
    let u = t.source.universe.clone();
    let o = t.dest.orientation;

    let mut found = None;
    'nodes: for at in (1..s.q.len()).filter(|&m| o.is_agent_turn(m)) {
        let h = &s.q[..at];
        let sites = t
            .dependency(h)
            .unwrap_or_else(|| enumerate_histories(&t.source, at + 1, Some(Turn::Agent)));
        for (g, x, rho) in single_site_perturbations(&s.pi, &sites)? {
            let rho_star = t.apply_agent_map(&rho)?;
            if let Some(d) = first_difference(&rho_star, &s.pi_star, &s.q, 0) {
                if d >= 1 {
                    found = Some((d, g, x, rho, rho_star));
                    break 'nodes;
                }
            }
        }
    }
    let (at, g, x, rho, rho_star) = found.ok_or(Error::NoDisagreementFound)?;
    let hp = s.q[..at].to_vec();
    let cut = s.pi_star.action(&hp)?;
    let mu = build_cutoff_environment(t.dest.clone(), &s.mu0, &hp, cut)?;
    let mu_s = t.apply_env_map(&mu)?;
    let dest_values = [value(&s.pi_star, &mu)?, value(&rho_star, &mu)?];
    let source_values = [value(&s.pi, &mu_s)?, value(&rho, &mu_s)?];

    let mut w = CardinalityWitness {
        base_agent: format!("always-{}", u.name(s.pi.action(&[])?)),
        site: u.format_history(&g),
        action: u.name(x).to_string(),
        h_plus: u.format_history(&hp),
        cutoff_action: u.name(cut).to_string(),
        dest_values: dest_values.clone(),
        source_values: source_values.clone(),
        weights: Vec::new(),
        sigma_source_values: Vec::new(),
        sigma_dest_values: Vec::new(),
        distinct_source_values: 0,
        dest_range_size: s.range_size,
        violation: None,
    };
    let pair_violation = (dest_values[0] <= dest_values[1])
        != (source_values[0] <= source_values[1])
        || (dest_values[1] <= dest_values[0]) != (source_values[1] <= source_values[0]);
    if pair_violation {
        w.violation = Some(OrderViolation {
            pi: "pi".into(),
            rho: "rho".into(),
            dest_values: dest_values.clone(),
            source_values: source_values.clone(),
        });
    } else {
        let mut ws = weights(n);
        if source_values[0] < source_values[1] {
            ws.reverse();
        }
        for wt in &ws {
            let sigma = mixture_agent(&s.pi, &rho, wt)?;
            let star = t.apply_agent_map(&sigma)?;
            w.sigma_source_values.push(value(&sigma, &mu_s)?);
            w.sigma_dest_values.push(value(&star, &mu)?);
        }
        w.weights = ws;
        let sv = &w.sigma_source_values;
        let mut distinct = sv.clone();
        distinct.sort();
        distinct.dedup();
        w.distinct_source_values = distinct.len();
        let dv = &w.sigma_dest_values;
        w.violation = (0..n)
            .find(|&k| sv[k] < sv[k + 1] && dv[k] >= dv[k + 1])
            .map(|k| OrderViolation {
                pi: format!("sigma_{}", w.weights[k]),
                rho: format!("sigma_{}", w.weights[k + 1]),
                dest_values: [dv[k].clone(), dv[k + 1].clone()],
                source_values: [sv[k].clone(), sv[k + 1].clone()],
            });
    }
    let shown = w.violation.is_some();
    Ok(AuditReport {
        target: t.id.clone(),
        argument: Argument::Cardinality,
        outcome: if shown {
            Outcome::ContradictionExhibited
        } else {
            Outcome::NoContradictionFound
        },
        witness: AuditWitness::Cardinality(w),
    })
}

/// Rebuilds ρ, μ and every σ_w from the witness and recomputes all values.
pub fn recheck_cardinality(t: &Translation, w: &CardinalityWitness) -> Result<bool> {
    let s = setup(t, w.weights.len().saturating_sub(1).max(w.dest_range_size))?;
    let u = &t.source.universe;
    let rho = s.pi.with_entry(
        u.parse_symbols(&w.site)?,
        Distribution::point(u.action(&w.action)?),
    )?;
    let hp = u.parse_symbols(&w.h_plus)?;
    let mu = build_cutoff_environment(t.dest.clone(), &s.mu0, &hp, u.action(&w.cutoff_action)?)?;
    let mu_s = t.apply_env_map(&mu)?;
    let rho_star = t.apply_agent_map(&rho)?;
    if [value(&s.pi_star, &mu)?, value(&rho_star, &mu)?] != w.dest_values
        || [value(&s.pi, &mu_s)?, value(&rho, &mu_s)?] != w.source_values
    {
        return Ok(false);
    }
    for (i, wt) in w.weights.iter().enumerate() {
        let sigma = mixture_agent(&s.pi, &rho, wt)?;
        let star = t.apply_agent_map(&sigma)?;
        if value(&sigma, &mu_s)? != w.sigma_source_values[i]
            || value(&star, &mu)? != w.sigma_dest_values[i]
        {
            return Ok(false);
        }
    }
    Ok(true)
}
