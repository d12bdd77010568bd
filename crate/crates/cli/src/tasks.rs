//! Executes one configured task.

use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use rl_translate::audit::candidates::{cardinality_candidates, chain_candidates, depth1_env_maps};
use rl_translate::audit::{
    build_descending_chain, cardinality_audit, demo_nonstrong_prepend_action,
    demo_nonstrong_times_map_in, diamond_base_spec, diamond_report_with, falsify_mixture,
    mixture_demo_spec, recheck_cardinality, recheck_chain, AuditReport, AuditWitness,
};
use rl_translate::elections::{
    all_pairs, check_preservation, compare, induce_source_comparator, Comparator, TieRule,
};
use rl_translate::model::{FrameworkSpec, Orientation, Rational, Turn, Universe};
use rl_translate::policies::corpus::{
    all_deterministic_agents, all_deterministic_envs, random_agents, random_envs,
    single_site_perturbations,
};
use rl_translate::policies::json::{agent_from_doc, env_from_doc};
use rl_translate::policies::{enumerate_histories, Agent, Environment};
use rl_translate::translations::{
    check_condition1, check_condition2, check_injectivity, check_strong, check_weak,
    frameworks_from_base, parse_translation, Law, LawReport, Translation, Verdict, Vertex,
};
use rl_translate::valuation::{expected_value, total_value};
use rl_translate::Error;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    parse_edge, AuditKind, AuditTask, CheckTask, Corpus, DiamondTask, ElectTask, EvalTask, Expect,
    LawName, Loaded, PairsDoc, Task,
};

/// A finished task: its JSON payload and any side files, keyed by extension.
#[derive(Debug)]
pub struct TaskOutput {
    pub passed: bool,
    pub payload: Value,
    pub extra: Vec<(&'static str, String)>,
}

impl TaskOutput {
    fn new(passed: bool, payload: impl Serialize) -> Result<Self> {
        Ok(TaskOutput {
            passed,
            payload: serde_json::to_value(payload)?,
            extra: Vec::new(),
        })
    }
}

pub fn run_task(ctx: &Loaded, index: usize) -> Result<TaskOutput> {
    match &ctx.config.tasks[index].task {
        Task::Eval(t) => eval(ctx, t),
        Task::CheckTranslation(t) => check(ctx, t),
        Task::Audit(t) => audit(ctx, t),
        Task::Diamond(t) => diamond(ctx, t),
        Task::Elect(t) => elect(ctx, index, t),
    }
}

fn framework(ctx: &Loaded, id: &str) -> Result<Arc<FrameworkSpec>> {
    ctx.frameworks
        .get(id)
        .cloned()
        .ok_or_else(|| anyhow!("unknown framework `{id}`"))
}

fn corpus<'a>(ctx: &'a Loaded, id: &str) -> Result<&'a Corpus> {
    ctx.corpora
        .get(id)
        .ok_or_else(|| anyhow!("unknown corpus `{id}`"))
}

fn numbered<T>(v: Vec<T>) -> Vec<(String, T)> {
    v.into_iter()
        .enumerate()
        .map(|(i, x)| (i.to_string(), x))
        .collect()
}

pub fn agents(ctx: &Loaded, id: &str, spec: &Arc<FrameworkSpec>) -> Result<Vec<(String, Agent)>> {
    let out = match corpus(ctx, id)? {
        Corpus::AllDeterministic { depth } => numbered(all_deterministic_agents(
            spec,
            depth.unwrap_or(spec.table_depth),
        )?),
        Corpus::Random { count, depth, seed } => numbered(random_agents(
            spec,
            depth.unwrap_or(spec.table_depth),
            *count,
            *seed,
        )?),
        Corpus::Docs(docs) => docs
            .iter()
            .map(|(n, d)| {
                Ok((
                    n.clone(),
                    agent_from_doc(d, spec.clone()).with_context(|| format!("agent `{n}`"))?,
                ))
            })
            .collect::<Result<_>>()?,
    };
    if out.is_empty() {
        bail!("corpus `{id}` is empty");
    }
    Ok(out)
}

pub fn envs(
    ctx: &Loaded,
    id: &str,
    spec: &Arc<FrameworkSpec>,
) -> Result<Vec<(String, Environment)>> {
    let out = match corpus(ctx, id)? {
        Corpus::AllDeterministic { depth } => numbered(all_deterministic_envs(
            spec,
            depth.unwrap_or(spec.table_depth),
        )?),
        Corpus::Random { count, depth, seed } => numbered(random_envs(
            spec,
            depth.unwrap_or(spec.table_depth),
            *count,
            *seed,
        )?),
        Corpus::Docs(docs) => docs
            .iter()
            .map(|(n, d)| {
                Ok((
                    n.clone(),
                    env_from_doc(d, spec.clone()).with_context(|| format!("environment `{n}`"))?,
                ))
            })
            .collect::<Result<_>>()?,
    };
    if out.is_empty() {
        bail!("corpus `{id}` is empty");
    }
    Ok(out)
}

fn split<T>(named: Vec<(String, T)>) -> (Vec<String>, Vec<T>) {
    named.into_iter().unzip()
}

#[derive(Serialize)]
struct ValueRow {
    agent: String,
    env: String,
    value: Rational,
    horizon_used: usize,
    path_count: u64,
    converged: bool,
}

fn eval(ctx: &Loaded, t: &EvalTask) -> Result<TaskOutput> {
    let spec = framework(ctx, &t.framework)?;
    let agents = agents(ctx, &t.agents, &spec)?;
    let envs = envs(ctx, &t.envs, &spec)?;
    let mut rows = Vec::with_capacity(agents.len() * envs.len());
    for (an, a) in &agents {
        for (en, e) in &envs {
            let r = match t.horizon {
                Some(h) => expected_value(a, e, h)?,
                None => total_value(a, e)?,
            };
            rows.push(ValueRow {
                agent: an.clone(),
                env: en.clone(),
                value: r.value,
                horizon_used: r.horizon_used,
                path_count: r.path_count,
                converged: r.converged,
            });
        }
    }
    TaskOutput::new(true, json!({ "framework": spec.name, "rows": rows }))
}

fn condition2(t: &Translation, agents: &[Agent]) -> Result<LawReport> {
    let depth = t.source.table_depth;
    let sites = enumerate_histories(&t.source, depth, Some(Turn::Agent));
    let dest_histories = enumerate_histories(&t.dest, t.dest.table_depth, Some(Turn::Agent));
    let (mut checked, mut any_pass) = (0u64, false);
    for pi in agents {
        let family: Vec<Agent> = single_site_perturbations(pi, &sites)?
            .into_iter()
            .map(|(_, _, a)| a)
            .collect();
        for h in &dest_histories {
            let r = check_condition2(t, pi, h, &family)?;
            checked += r.instances_checked;
            match r.verdict {
                Verdict::Fail => return Ok(r),
                Verdict::Pass => any_pass = true,
                Verdict::Inconclusive => {}
            }
        }
    }
    let verdict = if any_pass {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    };
    Ok(LawReport::new(Law::Condition2, verdict, None, checked))
}

fn not_weak(law: Law, e: &Error) -> LawReport {
    LawReport::new(law, Verdict::Fail, None, 0).with_note(e.to_string())
}

fn preservation(t: &Translation, agents: &[Agent], envs: &[Environment]) -> Result<LawReport> {
    let pairs = all_pairs(agents.len());
    let mut checked = 0;
    for mu in envs {
        let dest = Comparator::principal(mu.clone());
        let src = match induce_source_comparator(t, &dest, envs) {
            Ok(c) => c,
            Err(e @ (Error::NotWeak | Error::MissingEnvMap)) => {
                return Ok(not_weak(Law::Preservation, &e))
            }
            Err(e) => return Err(e.into()),
        };
        let r = check_preservation(t, &src, &dest, agents, &pairs)?;
        if !r.passed() {
            return Ok(r);
        }
        checked += r.instances_checked;
    }
    Ok(LawReport::new(
        Law::Preservation,
        Verdict::Pass,
        None,
        checked,
    ))
}

fn check(ctx: &Loaded, t: &CheckTask) -> Result<TaskOutput> {
    let tr = parse_translation(&t.translation, framework(ctx, &t.framework)?)?;
    let (agent_names, agents) = split(agents(ctx, &t.agents, &tr.source)?);
    let (env_names, envs) = split(envs(ctx, &t.envs, &tr.dest)?);
    let mut reports = Vec::new();
    for law in &t.laws {
        let r = match law {
            LawName::Condition1 => check_condition1(&tr, &agents, &envs)?,
            LawName::Condition2 => condition2(&tr, &agents)?,
            LawName::Injectivity => match check_injectivity(&tr, &envs) {
                Err(e @ Error::MissingEnvMap) => not_weak(Law::Injectivity, &e),
                r => r?,
            },
            LawName::Weak => match check_weak(&tr, &agents, &envs) {
                Err(e @ Error::MissingEnvMap) => not_weak(Law::Weak, &e),
                r => r?,
            },
            LawName::Strong => {
                let id = t.dest_agents.as_deref().unwrap_or(&t.agents);
                let (_, dest_agents) = split(self::agents(ctx, id, &tr.dest)?);
                match check_strong(&tr, &envs, &dest_agents, &agents) {
                    Err(e @ Error::MissingEnvMap) => not_weak(Law::Strongness, &e),
                    r => r?,
                }
            }
            LawName::Preservation => preservation(&tr, &agents, &envs)?,
        };
        reports.push(r);
    }
    let passed = reports.iter().all(LawReport::passed);
    TaskOutput::new(
        passed,
        json!({
            "translation": tr.id,
            "claimed": tr.claimed,
            "source": tr.source.name,
            "dest": tr.dest.name,
            "agents": agent_names,
            "envs": env_names,
            "laws": reports,
        }),
    )
}

#[derive(Serialize)]
struct CandidateResult {
    candidate: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    rechecked: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<AuditReport>,
}

impl CandidateResult {
    fn refuted(&self) -> bool {
        self.rechecked != Some(false)
            && self.report.as_ref().is_some_and(AuditReport::contradiction)
    }

    fn from(candidate: &str, r: rl_translate::Result<(AuditReport, Option<bool>)>) -> Self {
        match r {
            Ok((report, rechecked)) => CandidateResult {
                candidate: candidate.into(),
                rechecked,
                error: None,
                report: Some(report),
            },
            Err(e) => CandidateResult {
                candidate: candidate.into(),
                rechecked: None,
                error: Some(e.to_string()),
                report: None,
            },
        }
    }
}

/// The percept-first deterministic framework used by the non-strongness
/// demonstrations when none is configured.
pub fn default_percept_first() -> Arc<FrameworkSpec> {
    let u = Universe::new(
        &["x0", "x1"],
        &[("y0", Rational::zero()), ("y1", Rational::one())],
    )
    .expect("static universe");
    Arc::new(FrameworkSpec::new("P", Arc::new(u), Orientation::PerceptFirst).deterministic())
}

fn audit_candidates(
    ctx: &Loaded,
    t: &AuditTask,
    default_edge: (Vertex, Vertex),
    planted: fn(&Arc<FrameworkSpec>, &Arc<FrameworkSpec>) -> rl_translate::Result<Vec<Translation>>,
) -> Result<Vec<Translation>> {
    let base = match &t.framework {
        Some(f) => framework(ctx, f)?,
        None => diamond_base_spec(),
    };
    let fw = frameworks_from_base(base)?;
    let (s, d) = match &t.edge {
        Some(e) => parse_edge(e).ok_or_else(|| anyhow!("bad edge `{e}`"))?,
        None => default_edge,
    };
    Ok(match &t.translation {
        Some(id) => vec![parse_translation(id, fw.get(s).clone())?],
        None => planted(fw.get(s), fw.get(d))?,
    })
}

fn audit(ctx: &Loaded, t: &AuditTask) -> Result<TaskOutput> {
    let results: Vec<CandidateResult> = match t.argument {
        AuditKind::Mixture => {
            let spec = match &t.framework {
                Some(f) => framework(ctx, f)?,
                None => mixture_demo_spec(),
            };
            let id = t
                .translation
                .as_deref()
                .ok_or_else(|| anyhow!("the mixture audit needs a translation"))?;
            let tr = parse_translation(id, spec.clone())?;
            let maps = depth1_env_maps(&spec, t.grain.unwrap_or(4))?;
            vec![CandidateResult::from(
                &tr.id,
                falsify_mixture(&tr, &maps).map(|r| (r, None)),
            )]
        }
        AuditKind::DescendingChain => {
            let k = t.chain_length.unwrap_or(6);
            audit_candidates(ctx, t, (Vertex::F, Vertex::Fae), chain_candidates)?
                .iter()
                .map(|c| {
                    let r = build_descending_chain(c, k).and_then(|(plan, r)| {
                        Ok((r, Some(plan.verify().is_ok() && recheck_chain(c, &plan)?)))
                    });
                    CandidateResult::from(&c.id, r)
                })
                .collect()
        }
        AuditKind::Cardinality => {
            let n = t.samples.unwrap_or(6);
            audit_candidates(ctx, t, (Vertex::Fae, Vertex::F), cardinality_candidates)?
                .iter()
                .map(|c| {
                    let r = cardinality_audit(c, n).and_then(|r| {
                        let ok = match &r.witness {
                            AuditWitness::Cardinality(w) => recheck_cardinality(c, w)?,
                            _ => false,
                        };
                        Ok((r, Some(ok)))
                    });
                    CandidateResult::from(&c.id, r)
                })
                .collect()
        }
        AuditKind::NonstrongTimesMap => {
            let spec = match &t.framework {
                Some(f) => framework(ctx, f)?,
                None => default_percept_first(),
            };
            vec![CandidateResult::from(
                "times-map",
                demo_nonstrong_times_map_in(spec).map(|r| (r, None)),
            )]
        }
        AuditKind::NonstrongPrependAction => {
            let spec = match &t.framework {
                Some(f) => framework(ctx, f)?,
                None => default_percept_first(),
            };
            let depth = t.corpus_depth.unwrap_or(2);
            vec![CandidateResult::from(
                "prepend-action",
                demo_nonstrong_prepend_action(spec, depth).map(|r| (r, None)),
            )]
        }
    };
    let passed = match t.expect {
        Expect::Contradiction => results.iter().all(CandidateResult::refuted),
        Expect::NoContradiction => results.iter().all(|r| r.error.is_none() && !r.refuted()),
    };
    TaskOutput::new(
        passed,
        json!({ "argument": t.argument, "expect": t.expect, "candidates": results }),
    )
}

fn diamond(ctx: &Loaded, t: &DiamondTask) -> Result<TaskOutput> {
    let base = match &t.framework {
        Some(f) => framework(ctx, f)?,
        None => diamond_base_spec(),
    };
    let r = diamond_report_with(
        base,
        t.chain_length.unwrap_or(6),
        t.samples.unwrap_or(6),
        t.seed.unwrap_or(ctx.config.seed),
    )?;
    let matrix = r.render();
    let mut out = TaskOutput::new(r.all_passed(), json!({ "matrix": matrix, "report": r }))?;
    out.extra.push(("tsv", matrix));
    Ok(out)
}

fn comparator(spec: &str, envs: &[(String, Environment)]) -> Result<Comparator> {
    let all = || envs.iter().map(|(_, e)| e.clone()).collect::<Vec<_>>();
    match spec.split_once(':') {
        Some(("principal", id)) => {
            let (_, mu) = envs
                .iter()
                .find(|(n, _)| n == id)
                .ok_or_else(|| anyhow!("unknown environment `{id}`"))?;
            Ok(Comparator::principal(mu.clone()))
        }
        Some(("majority", "tie")) => Ok(Comparator::majority(all(), Some(TieRule::Tie))?),
        Some(("majority", "strict")) => Ok(Comparator::majority(all(), Some(TieRule::Strict))?),
        None if spec == "majority" => Ok(Comparator::majority(all(), None)?),
        _ => bail!("bad comparator `{spec}`"),
    }
}

#[derive(Serialize)]
struct ElectRow {
    pi: String,
    rho: String,
    #[serde(flatten)]
    comparison: rl_translate::elections::Comparison,
}

fn csv_cell(v: Option<String>) -> String {
    v.unwrap_or_default()
}

fn tally_csv(rows: &[ElectRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "pi",
        "rho",
        "pi_le_rho",
        "rho_le_pi",
        "v_pi",
        "v_rho",
        "voters",
        "votes_pi_le_rho",
        "votes_rho_le_pi",
    ])?;
    for r in rows {
        let c = &r.comparison;
        let v = |i: usize| c.values.as_ref().map(|v| v[i].to_string());
        let t = |f: fn(&rl_translate::elections::Tally) -> usize| {
            c.tally.as_ref().map(|x| f(x).to_string())
        };
        w.write_record([
            r.pi.clone(),
            r.rho.clone(),
            c.pi_le_rho.to_string(),
            c.rho_le_pi.to_string(),
            csv_cell(v(0)),
            csv_cell(v(1)),
            csv_cell(t(|x| x.voters)),
            csv_cell(t(|x| x.pi_le_rho)),
            csv_cell(t(|x| x.rho_le_pi)),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn elect(ctx: &Loaded, index: usize, t: &ElectTask) -> Result<TaskOutput> {
    let spec = framework(ctx, &t.framework)?;
    let agents = agents(ctx, &t.agents, &spec)?;
    let envs = envs(ctx, &t.envs, &spec)?;
    let c = comparator(&t.comparator, &envs)?;
    let find = |n: &str| {
        agents
            .iter()
            .position(|(m, _)| m == n)
            .ok_or_else(|| anyhow!("unknown agent `{n}`"))
    };
    let pairs: Vec<(usize, usize)> = match (&t.pairs, ctx.pairs.get(&index)) {
        (_, Some(p)) => p
            .iter()
            .map(|[a, b]| Ok((find(a)?, find(b)?)))
            .collect::<Result<_>>()?,
        (PairsDoc::List(l), None) => l
            .iter()
            .map(|[a, b]| Ok((find(a)?, find(b)?)))
            .collect::<Result<_>>()?,
        (PairsDoc::Named(_), None) => all_pairs(agents.len()),
    };
    let rows = pairs
        .iter()
        .map(|&(i, j)| {
            Ok(ElectRow {
                pi: agents[i].0.clone(),
                rho: agents[j].0.clone(),
                comparison: compare(&c, &agents[i].1, &agents[j].1)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let csv = tally_csv(&rows)?;
    let mut out = TaskOutput::new(true, json!({ "comparator": t.comparator, "rows": rows }))?;
    out.extra.push(("csv", csv));
    Ok(out)
}
