use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Translation;
use crate::error::{Error, Result};
use crate::model::{Distribution, Rational, Symbol};
use crate::policies::{Agent, Environment};
use crate::valuation::{first_disagreement, value, values, Disagreement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Law {
    Condition1,
    Condition2,
    Condition3,
    Injectivity,
    Weak,
    Strongness,
    Preservation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Concrete counterexample or existence witness. Indices refer to the
/// corpora passed to the check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// (V^{π*}_μ, V^{ρ*}_μ) and (V^π_{μ*}, V^ρ_{μ*}) order differently.
    Condition1 {
        pi: usize,
        rho: usize,
        mu: usize,
        dest_values: [Rational; 2],
        source_values: [Rational; 2],
    },
    /// ρ agrees with π on the declared dependency set but ρ^*(h) ≠ π^*(h).
    Dependency {
        rho: usize,
        history: String,
        expected: BTreeMap<String, Rational>,
        got: BTreeMap<String, Rational>,
    },
    /// ρ^* matches π^* on S1 and differs at `differs_at` in S2.
    FreeWill { rho: usize, differs_at: String },
    /// Two different environments with the same image.
    Collision { mu: usize, nu: usize },
    /// μ and ν are distinguished in the destination but their images are
    /// not distinguished by the source corpus.
    Strongness {
        mu: usize,
        nu: usize,
        dest: Disagreement,
    },
    /// The source comparator says `source_le` for π ≤ ρ but the destination
    /// says `dest_le` for π^* ≤ ρ^*.
    Preservation {
        pi: usize,
        rho: usize,
        source_le: bool,
        dest_le: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        source_values: Option<[Rational; 2]>,
        #[serde(skip_serializing_if = "Option::is_none")]
        dest_values: Option<[Rational; 2]>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawReport {
    pub law: Law,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub instances_checked: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub parts: Vec<LawReport>,
}

impl LawReport {
    pub fn new(
        law: Law,
        verdict: Verdict,
        witness: Option<Witness>,
        instances_checked: u64,
    ) -> Self {
        LawReport {
            law,
            verdict,
            witness,
            instances_checked,
            note: None,
            parts: Vec::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Condition 1 over every ordered pair of `agents` and every destination
/// environment: V^{π*}_μ ≤ V^{ρ*}_μ iff V^π_{μ*} ≤ V^ρ_{μ*}.
pub fn check_condition1(
    t: &Translation,
    agents: &[Agent],
    envs: &[Environment],
) -> Result<LawReport> {
    if !t.has_env_map() {
        return Err(Error::MissingEnvMap);
    }
    let images = agents
        .iter()
        .map(|a| t.apply_agent_map(a))
        .collect::<Result<Vec<_>>>()?;
    let mut checked = 0u64;
    for (m, mu) in envs.iter().enumerate() {
        let mu_s = t.apply_env_map(mu)?;
        let dest = values(&images, mu)?;
        let src = values(agents, &mu_s)?;
        checked += (agents.len() * agents.len()) as u64;
        if let Some(d) = first_disagreement(&dest, &src) {
            let w = Witness::Condition1 {
                pi: d.pi,
                rho: d.rho,
                mu: m,
                dest_values: [d.values[0].clone(), d.values[1].clone()],
                source_values: [d.values[2].clone(), d.values[3].clone()],
            };
            return Ok(LawReport::new(
                Law::Condition1,
                Verdict::Fail,
                Some(w),
                checked,
            ));
        }
    }
    Ok(LawReport::new(
        Law::Condition1,
        Verdict::Pass,
        None,
        checked,
    ))
}

/// Condition 2 at one destination history: every perturbation agreeing with
/// π on the declared dependency set must translate to the same action
/// distribution at `h`.
pub fn check_condition2(
    t: &Translation,
    pi: &Agent,
    h: &[Symbol],
    perturbations: &[Agent],
) -> Result<LawReport> {
    let deps = t.dependency(h).ok_or_else(|| {
        Error::SpecMismatch(format!("`{}` declares no dependency function", t.id))
    })?;
    let target = t.apply_agent_map(pi)?.dist(h);
    let mut checked = 0u64;
    for (i, rho) in perturbations.iter().enumerate() {
        if deps.iter().any(|g| rho.dist(g) != pi.dist(g)) {
            continue;
        }
        checked += 1;
        let got = t.apply_agent_map(rho)?.dist(h);
        if got != target {
            let u = &t.dest.universe;
            let w = Witness::Dependency {
                rho: i,
                history: u.format_history(h),
                expected: target.to_named(u),
                got: got.to_named(u),
            };
            return Ok(LawReport::new(
                Law::Condition2,
                Verdict::Fail,
                Some(w),
                checked,
            ));
        }
    }
    let verdict = if checked == 0 {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    let mut r = LawReport::new(Law::Condition2, verdict, None, checked);
    if checked == 0 {
        r = r.with_note("no perturbation agreed with the agent on the dependency set");
    }
    Ok(r)
}

/// Condition 3 on a finite slice: search `family` for ρ with ρ^* = π^* on
/// `s1` and ρ^* ≠ π^* somewhere on `s2`. Never fails; an exhausted search is
/// inconclusive.
pub fn check_condition3(
    t: &Translation,
    pi: &Agent,
    s1: &[Vec<Symbol>],
    s2: &[Vec<Symbol>],
    family: &[Agent],
) -> Result<LawReport> {
    let base = t.apply_agent_map(pi)?;
    let base_s1: Vec<Distribution> = s1.iter().map(|h| base.dist(h)).collect();
    for (i, rho) in family.iter().enumerate() {
        let img = t.apply_agent_map(rho)?;
        if s1.iter().zip(&base_s1).any(|(h, d)| img.dist(h) != *d) {
            continue;
        }
        if let Some(h) = s2.iter().find(|h| img.dist(h) != base.dist(h)) {
            let w = Witness::FreeWill {
                rho: i,
                differs_at: t.dest.universe.format_history(h),
            };
            return Ok(LawReport::new(
                Law::Condition3,
                Verdict::Pass,
                Some(w),
                (i + 1) as u64,
            ));
        }
    }
    Ok(LawReport::new(
        Law::Condition3,
        Verdict::Inconclusive,
        None,
        family.len() as u64,
    )
    .with_note("search exhausted the candidate family"))
}

fn key_depth(envs: &[Environment], spec_depth: usize) -> usize {
    envs.iter()
        .map(Environment::value_depth)
        .max()
        .unwrap_or(0)
        .max(spec_depth + 1)
}

/// Injectivity of the environment map on the corpus, comparing policies on
/// every history up to the depth where rewards can still occur.
pub fn check_injectivity(t: &Translation, envs: &[Environment]) -> Result<LawReport> {
    let images = envs
        .iter()
        .map(|e| t.apply_env_map(e))
        .collect::<Result<Vec<_>>>()?;
    let src_depth = key_depth(&images, t.source.table_depth);
    let dst_depth = key_depth(envs, t.dest.table_depth);
    let mut seen: BTreeMap<
        BTreeMap<Vec<Symbol>, Distribution>,
        (usize, BTreeMap<Vec<Symbol>, Distribution>),
    > = BTreeMap::new();
    for (i, (mu, img)) in envs.iter().zip(&images).enumerate() {
        let own = mu.canonical_key(dst_depth);
        let key = img.canonical_key(src_depth);
        match seen.get(&key) {
            Some((j, other)) if *other != own => {
                let w = Witness::Collision { mu: *j, nu: i };
                return Ok(LawReport::new(
                    Law::Injectivity,
                    Verdict::Fail,
                    Some(w),
                    (i + 1) as u64,
                ));
            }
            Some(_) => {}
            None => {
                seen.insert(key, (i, own));
            }
        }
    }
    Ok(LawReport::new(
        Law::Injectivity,
        Verdict::Pass,
        None,
        envs.len() as u64,
    ))
}

/// Condition 1 plus injectivity.
pub fn check_weak(t: &Translation, agents: &[Agent], envs: &[Environment]) -> Result<LawReport> {
    let c1 = check_condition1(t, agents, envs)?;
    let inj = check_injectivity(t, envs)?;
    let verdict = if c1.passed() && inj.passed() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let witness = c1.witness.clone().or_else(|| inj.witness.clone());
    let mut r = LawReport::new(
        Law::Weak,
        verdict,
        witness,
        c1.instances_checked + inj.instances_checked,
    );
    r.parts = vec![c1, inj];
    Ok(r)
}

/// Strongness relative to the corpora: every destination pair distinguished
/// by `dest_agents` must have images distinguished in the source, first via
/// the translation's witness lift and then by searching `source_agents`.
pub fn check_strong(
    t: &Translation,
    envs: &[Environment],
    dest_agents: &[Agent],
    source_agents: &[Agent],
) -> Result<LawReport> {
    if !t.has_env_map() {
        return Err(Error::MissingEnvMap);
    }
    if dest_agents.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if envs.len() < 2 {
        return Ok(LawReport::new(Law::Strongness, Verdict::Pass, None, 0)
            .with_note("vacuous: fewer than two environments"));
    }
    let images = envs
        .iter()
        .map(|e| t.apply_env_map(e))
        .collect::<Result<Vec<_>>>()?;
    let dest_vals = envs
        .iter()
        .map(|e| values(dest_agents, e))
        .collect::<Result<Vec<_>>>()?;
    let src_vals = images
        .iter()
        .map(|e| values(source_agents, e))
        .collect::<Result<Vec<_>>>()?;
    let mut checked = 0u64;
    for i in 0..envs.len() {
        for j in (i + 1)..envs.len() {
            let Some(d) = first_disagreement(&dest_vals[i], &dest_vals[j]) else {
                continue;
            };
            checked += 1;
            if let Some(lifted) = lift_disagrees(t, dest_agents, &d, &images[i], &images[j])? {
                if lifted {
                    continue;
                }
            }
            if first_disagreement(&src_vals[i], &src_vals[j]).is_some() {
                continue;
            }
            let w = Witness::Strongness {
                mu: i,
                nu: j,
                dest: d,
            };
            return Ok(
                LawReport::new(Law::Strongness, Verdict::Fail, Some(w), checked)
                    .with_note("relative to the supplied corpora"),
            );
        }
    }
    Ok(
        LawReport::new(Law::Strongness, Verdict::Pass, None, checked)
            .with_note("relative to the supplied corpora"),
    )
}

fn lift_disagrees(
    t: &Translation,
    dest_agents: &[Agent],
    d: &Disagreement,
    mu_s: &Environment,
    nu_s: &Environment,
) -> Result<Option<bool>> {
    let (Some(a), Some(b)) = (t.lift(&dest_agents[d.pi]), t.lift(&dest_agents[d.rho])) else {
        return Ok(None);
    };
    let (a, b) = (a?, b?);
    let m = value(&a, mu_s)? <= value(&b, mu_s)?;
    let n = value(&a, nu_s)? <= value(&b, nu_s)?;
    Ok(Some(m != n))
}
