use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Argument, AuditReport, AuditWitness, Outcome};
use crate::error::{Error, Result};
use crate::model::{Distribution, FrameworkSpec, Orientation, Rational, Symbol, Turn, Universe};
use crate::policies::{
    enumerate_histories, mixture_agent, Agent, AgentFormula, EnvDefault, Environment,
};
use crate::translations::{parse_translation, EnvMap, Translation};
use crate::valuation::value;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateVerdict {
    pub candidate: String,
    /// (V^π, V^ρ, V^σ) in the candidate's image of μ.
    pub source_values: [Rational; 3],
    /// V^σ = ½V^π + ½V^ρ held exactly.
    pub mixture_identity: bool,
    /// Ordered pair (by name) whose destination and source orders differ.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixtureWitness {
    /// (V^{π*}_μ, V^{ρ*}_μ, V^{σ*}_μ).
    pub dest_values: [Rational; 3],
    /// σ^* = π^* on every destination agent history π^* can reach, up to
    /// the checked depth; only asserted for the drop-first-action map.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_star_is_pi_star: Option<bool>,
    pub candidates_checked: usize,
    pub contradicted: usize,
    pub identity_failures: usize,
    pub survivors: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub example: Option<CandidateVerdict>,
}

/// Agent-first, randomized framework over x0, x1 and percepts y0:0, y1:1,
/// y2:2 used by the mixture falsifier.
pub fn mixture_demo_spec() -> Arc<FrameworkSpec> {
    let u = Universe::new(
        &["x0", "x1"],
        &[
            ("y0", Rational::zero()),
            ("y1", Rational::one()),
            ("y2", Rational::from_integer(2)),
        ],
    )
    .expect("static universe");
    Arc::new(FrameworkSpec::new("M", Arc::new(u), Orientation::AgentFirst).with_horizon(3))
}

enum MapKind {
    DropFirst(Symbol),
    Sum,
}

fn map_kind(t: &Translation) -> Result<MapKind> {
    if t.id == "sum-map" {
        return Ok(MapKind::Sum);
    }
    match t.id.strip_prefix("drop-first-action:") {
        Some(x) => Ok(MapKind::DropFirst(t.source.universe.action(x)?)),
        None => Err(Error::WrongAgentMapKind(t.id.clone())),
    }
}

fn formula(
    spec: &Arc<FrameworkSpec>,
    f: impl Fn(&[Symbol]) -> Symbol + Send + Sync + 'static,
) -> Result<Agent> {
    let g: AgentFormula = Arc::new(move |h: &[Symbol]| Distribution::point(f(h)));
    Agent::from_formula(spec.clone(), g)
}

fn rewarding_percepts(u: &Universe) -> Result<(Symbol, Symbol)> {
    let zero = u.zero_percept().ok_or(Error::DegenerateRewards)?;
    let unit = u.unit_percept().ok_or(Error::DegenerateRewards)?;
    Ok((zero, unit))
}

/// Refutes every candidate environment map for `drop-first-action:x` or
/// `sum-map` by the mixture argument.
///
/// Agents π, ρ and σ = ½π + ½ρ are chosen so that the destination values
/// of π^*, ρ^*, σ^* cannot be ordered consistently with the source values,
/// whatever μ_* is: in the source V^σ always sits exactly halfway.
pub fn falsify_mixture(t: &Translation, candidates: &[(String, EnvMap)]) -> Result<AuditReport> {
    let kind = map_kind(t)?;
    let src = t.source.clone();
    let u = src.universe.clone();
    let (y0, y1) = rewarding_percepts(&u)?;
    let (a, b) = match kind {
        MapKind::DropFirst(x) => (
            x,
            u.actions()
                .find(|y| *y != x)
                .ok_or(Error::ActionUnavailable)?,
        ),
        MapKind::Sum => {
            let mut it = u.actions();
            (
                it.next().ok_or(Error::ActionUnavailable)?,
                it.next().ok_or(Error::ActionUnavailable)?,
            )
        }
    };
    let (pi, rho) = match kind {
        MapKind::DropFirst(_) => (
            Agent::constant(src.clone(), a)?,
            Agent::constant(src.clone(), b)?,
        ),
        MapKind::Sum => {
            // Each plays its own first move, then `own, other` after it.
            let play = move |first: Symbol, other: Symbol| {
                move |h: &[Symbol]| match (h.first(), h.len()) {
                    (None, _) => first,
                    (Some(x), 2) if *x == first => first,
                    (Some(x), 4) if *x == first => other,
                    _ => first,
                }
            };
            (formula(&src, play(a, b))?, formula(&src, play(b, a))?)
        }
    };
    let half = Rational::new(1, 2);
    let sigma = mixture_agent(&pi, &rho, &half)?;
    let agents = [&pi, &rho, &sigma];
    let names = ["pi", "rho", "sigma"];

    let mut table = BTreeMap::from([
        (vec![], Distribution::point(y0)),
        (vec![y0, a], Distribution::point(y1)),
        (vec![y0, b], Distribution::point(y0)),
    ]);
    if matches!(kind, MapKind::Sum) {
        table.insert(vec![y0, b, y0, a], Distribution::point(y1));
    }
    let mu = Environment::new(t.dest.clone(), table, EnvDefault::Zero)?;
    let images = agents
        .iter()
        .map(|x| t.apply_agent_map(x))
        .collect::<Result<Vec<_>>>()?;
    let dest_values = [
        value(&images[0], &mu)?,
        value(&images[1], &mu)?,
        value(&images[2], &mu)?,
    ];

    let sigma_star_is_pi_star = match kind {
        MapKind::DropFirst(_) => Some(
            enumerate_histories(&t.dest, 5, Some(Turn::Agent))
                .iter()
                .filter(|h| images[0].reach(h).is_positive())
                .all(|h| images[2].dist(h) == images[0].dist(h)),
        ),
        MapKind::Sum => None,
    };

    let mut verdicts = Vec::with_capacity(candidates.len());
    for (label, map) in candidates {
        let mu_s = map(&mu)?;
        let sv = [
            value(&pi, &mu_s)?,
            value(&rho, &mu_s)?,
            value(&sigma, &mu_s)?,
        ];
        let mixture_identity = sv[2] == &half * &sv[0] + &half * &sv[1];
        let mut violation = None;
        'pairs: for i in 0..3 {
            for j in 0..3 {
                if (dest_values[i] <= dest_values[j]) != (sv[i] <= sv[j]) {
                    violation = Some([names[i].to_string(), names[j].to_string()]);
                    break 'pairs;
                }
            }
        }
        verdicts.push(CandidateVerdict {
            candidate: label.clone(),
            source_values: sv,
            mixture_identity,
            violation,
        });
    }
    let contradicted = verdicts.iter().filter(|v| v.violation.is_some()).count();
    let identity_failures = verdicts.iter().filter(|v| !v.mixture_identity).count();
    let survivors: Vec<String> = verdicts
        .iter()
        .filter(|v| v.violation.is_none())
        .map(|v| v.candidate.clone())
        .collect();
    let ok = !verdicts.is_empty()
        && survivors.is_empty()
        && identity_failures == 0
        && sigma_star_is_pi_star != Some(false);
    let witness = MixtureWitness {
        dest_values,
        sigma_star_is_pi_star,
        candidates_checked: verdicts.len(),
        contradicted,
        identity_failures,
        survivors,
        example: verdicts.into_iter().next(),
    };
    Ok(AuditReport {
        target: t.id.clone(),
        argument: Argument::Mixture,
        outcome: if ok {
            Outcome::ContradictionExhibited
        } else {
            Outcome::NoContradictionFound
        },
        witness: AuditWitness::Mixture(witness),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonStrongWitness {
    pub translation: String,
    /// V^π_μ, V^ρ_μ, V^{π†}_μ, V^{ρ†}_μ.
    pub v_pi: Rational,
    pub v_rho: Rational,
    pub v_pi_dagger: Rational,
    pub v_rho_dagger: Rational,
    /// π^†(x0 | ⟨y1⟩).
    pub pi_dagger_first_action: Rational,
}

/// Percept-first deterministic framework over x0, x1, y0:0, y1:1.
fn nonstrong_spec() -> Arc<FrameworkSpec> {
    let u = Universe::new(
        &["x0", "x1"],
        &[("y0", Rational::zero()), ("y1", Rational::one())],
    )
    .expect("static universe");
    Arc::new(FrameworkSpec::new("P", Arc::new(u), Orientation::PerceptFirst).deterministic())
}

/// The times-map demonstration on the default percept-first framework.
pub fn demo_nonstrong_times_map() -> Result<AuditReport> {
    demo_nonstrong_times_map_in(nonstrong_spec())
}

/// With π^† = (prepend-percept:y0 . times-map)(π): μ opens with a rewarding
/// percept and pays for an initial x0; π plays x0 only after y0; ρ always
/// plays x1. Then π and ρ tie in μ but π^† and ρ^† do not.
pub fn demo_nonstrong_times_map_in(spec: Arc<FrameworkSpec>) -> Result<AuditReport> {
    if spec.orientation != Orientation::PerceptFirst {
        return Err(Error::OrientationMismatch);
    }
    let u = spec.universe.clone();
    let (y0, y1) = rewarding_percepts(&u)?;
    let mut acts = u.actions();
    let (x0, x1) = (
        acts.next().ok_or(Error::ActionUnavailable)?,
        acts.next().ok_or(Error::ActionUnavailable)?,
    );
    let t = parse_translation(
        &format!("prepend-percept:{} . times-map", u.name(y0)),
        spec.clone(),
    )?;

    let mu = Environment::new(
        spec.clone(),
        BTreeMap::from([
            (vec![], Distribution::point(y1)),
            (vec![y1, x0], Distribution::point(y1)),
            (vec![y1, x1], Distribution::point(y0)),
        ]),
        EnvDefault::Zero,
    )?;
    let pi = formula(&spec, move |h| if h.first() == Some(&y0) { x0 } else { x1 })?;
    let rho = Agent::constant(spec.clone(), x1)?;
    let pi_d = t.apply_agent_map(&pi)?;
    let rho_d = t.apply_agent_map(&rho)?;
    let w = NonStrongWitness {
        translation: t.id.clone(),
        v_pi: value(&pi, &mu)?,
        v_rho: value(&rho, &mu)?,
        v_pi_dagger: value(&pi_d, &mu)?,
        v_rho_dagger: value(&rho_d, &mu)?,
        pi_dagger_first_action: pi_d.prob(x0, &[y1]),
    };
    let shown = w.v_pi == w.v_rho && w.v_pi_dagger != w.v_rho_dagger;
    Ok(AuditReport {
        target: t.id,
        argument: Argument::NonstrongDemo,
        outcome: if shown {
            Outcome::ContradictionExhibited
        } else {
            Outcome::NoContradictionFound
        },
        witness: AuditWitness::NonstrongDemo(w),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrependActionWitness {
    pub translation: String,
    /// (V^π_μ, V^ρ_μ) with π opening x0 and ρ opening another action.
    pub mu_values: [Rational; 2],
    /// (V^π_ν, V^ρ_ν).
    pub nu_values: [Rational; 2],
    /// μ_* and ν_* against the full deterministic source corpus.
    pub images_distinguished: bool,
    pub corpus_depth: usize,
    pub corpus_size: usize,
}

/// prepend-action:x0 on `spec`: μ always pays 0; ν pays for any opening
/// other than x0. The destination tells them apart, but μ_* and ν_* only
/// ever see histories after x0, where both pay 0.
pub fn demo_nonstrong_prepend_action(
    spec: Arc<FrameworkSpec>,
    corpus_depth: usize,
) -> Result<AuditReport> {
    if spec.orientation != Orientation::PerceptFirst {
        return Err(Error::OrientationMismatch);
    }
    let u = spec.universe.clone();
    let (_, y1) = rewarding_percepts(&u)?;
    let mut acts = u.actions();
    let (x0, x1) = (
        acts.next().ok_or(Error::ActionUnavailable)?,
        acts.next().ok_or(Error::ActionUnavailable)?,
    );
    let t = parse_translation(&format!("prepend-action:{}", u.name(x0)), spec.clone())?;
    let dest = t.dest.clone();

    let mu = Environment::zero(dest.clone())?;
    let nu_table = u
        .actions()
        .filter(|x| *x != x0)
        .map(|x| (vec![x], Distribution::point(y1)))
        .collect();
    let nu = Environment::new(dest.clone(), nu_table, EnvDefault::Zero)?;
    let pi = Agent::constant(dest.clone(), x0)?;
    let rho = Agent::constant(dest, x1)?;

    let corpus = crate::policies::corpus::all_deterministic_agents(&spec, corpus_depth)?;
    let eq = crate::valuation::corpus_equivalent(
        &t.apply_env_map(&mu)?,
        &t.apply_env_map(&nu)?,
        &corpus,
    )?;
    let w = PrependActionWitness {
        translation: t.id.clone(),
        mu_values: [value(&pi, &mu)?, value(&rho, &mu)?],
        nu_values: [value(&pi, &nu)?, value(&rho, &nu)?],
        images_distinguished: eq.distinguished,
        corpus_depth,
        corpus_size: eq.corpus_size,
    };
    let shown = w.mu_values[0] == w.mu_values[1]
        && w.nu_values[0] != w.nu_values[1]
        && !w.images_distinguished;
    Ok(AuditReport {
        target: t.id,
        argument: Argument::NonstrongDemo,
        outcome: if shown {
            Outcome::ContradictionExhibited
        } else {
            Outcome::NoContradictionFound
        },
        witness: AuditWitness::PrependActionDemo(w),
    })
}
