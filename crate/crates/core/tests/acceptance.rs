//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails if
//! any criterion fails.
//!
//! Pinned tolerances: every exact check compares rationals for equality.
//! The Monte Carlo check accepts |mean - V| <= 4·s/√N with s the sample
//! standard deviation and N = 100000, and needs 38 of 40 instances.

mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rl_translate::audit::candidates::{cardinality_candidates, chain_candidates, depth1_env_maps};
use rl_translate::audit::{
    build_descending_chain, cardinality_audit, demo_nonstrong_prepend_action,
    demo_nonstrong_times_map, diamond_base_spec, diamond_report, falsify_mixture,
    mixture_demo_spec, recheck_cardinality, recheck_chain, AuditWitness, Polarity,
};
use rl_translate::elections::{
    all_pairs, check_preservation, induce_source_comparator, Comparator,
};
use rl_translate::model::{FrameworkSpec, Orientation, Rational};
use rl_translate::policies::corpus::{
    all_deterministic_agents, all_deterministic_envs, random_agents, random_envs,
};
use rl_translate::policies::{mixture_agent, Agent, Environment};
use rl_translate::report::to_json;
use rl_translate::translations::{
    check_condition1, check_strong, check_weak, frameworks_from_base, inclusion, parse_translation,
    Translation,
};
use rl_translate::valuation::{expected_value, sample, value};

use common::{brute_force_value, det_spec, random_instance, stoch_spec};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn c1_evaluator_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..200 {
        let (pi, mu, t) = random_instance(&mut rng);
        let got = expected_value(&pi, &mu, t).map_err(e)?.value;
        let want = brute_force_value(&pi, &mu, t);
        ensure(
            got == want,
            format!("instance {i}: evaluator {got} vs enumerator {want}"),
        )?;
    }
    let n = 100_000usize;
    let mut hits = 0;
    for i in 0..40u64 {
        let mut gen = ChaCha8Rng::seed_from_u64(1000 + i);
        let (pi, mu, t) = random_instance(&mut gen);
        let exact = expected_value(&pi, &mu, t).map_err(e)?.value.to_f64();
        let mut mc = ChaCha8Rng::seed_from_u64(2000 + i);
        let (mut s1, mut s2) = (0.0f64, 0.0f64);
        for _ in 0..n {
            let r = sample(&pi, &mu, t, &mut mc).total_reward.to_f64();
            s1 += r;
            s2 += r * r;
        }
        let mean = s1 / n as f64;
        let sd = (s2 / n as f64 - mean * mean).max(0.0).sqrt();
        if (mean - exact).abs() <= 4.0 * sd / (n as f64).sqrt() + 1e-12 {
            hits += 1;
        }
    }
    ensure(hits >= 38, format!("Monte Carlo within 4σ/√N on {hits}/40"))?;
    Ok(format!("200/200 exact; Monte Carlo {hits}/40 within 4σ/√N"))
}

fn c2_deterministic_law() -> Outcome {
    let mut checked = 0;
    for o in [Orientation::AgentFirst, Orientation::PerceptFirst] {
        let spec = det_spec(o);
        let agents = all_deterministic_agents(&spec, 2).map_err(e)?;
        let envs = all_deterministic_envs(&spec, 2).map_err(e)?;
        let len = 2 * spec.reward_horizon + 2;
        for pi in &agents {
            for mu in &envs {
                let mut h = Vec::new();
                let mut total = Rational::zero();
                while h.len() < len {
                    let s = if o.is_agent_turn(h.len()) {
                        pi.action(&h)
                    } else {
                        mu.percept(&h)
                    }
                    .map_err(e)?;
                    total += spec.universe.reward(s);
                    h.push(s);
                }
                ensure(
                    value(pi, mu).map_err(e)? == total,
                    "value differs from path reward sum",
                )?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} deterministic pairs"))
}

fn source_and_dest_corpora(
    t: &Translation,
) -> Result<(Vec<Agent>, Vec<Environment>, Vec<Agent>), String> {
    Ok((
        all_deterministic_agents(&t.source, 2).map_err(e)?,
        all_deterministic_envs(&t.dest, 2).map_err(e)?,
        all_deterministic_agents(&t.dest, 2).map_err(e)?,
    ))
}

/// Seeded stochastic corpora on the same alphabet, as extra evidence for
/// the value laws beyond the deterministic corpora.
fn stochastic_corpora(
    id: &str,
    o: Orientation,
) -> Result<(Translation, Vec<Agent>, Vec<Environment>), String> {
    let t = parse_translation(id, stoch_spec(o)).map_err(e)?;
    let agents = random_agents(&t.source, 3, 10, 31).map_err(e)?;
    let envs = random_envs(&t.dest, 3, 10, 32).map_err(e)?;
    Ok((t, agents, envs))
}

fn value_law(
    t: &Translation,
    agents: &[Agent],
    envs: &[Environment],
    shift: &Rational,
) -> Result<usize, String> {
    for s in agents {
        let s_star = t.apply_agent_map(s).map_err(e)?;
        for mu in envs {
            let lhs = value(s, &t.apply_env_map(mu).map_err(e)?).map_err(e)?;
            let rhs = value(&s_star, mu).map_err(e)? + shift.clone();
            ensure(
                lhs == rhs,
                format!("{}: V^σ_μ* = {lhs} but expected {rhs}", t.id),
            )?;
        }
    }
    Ok(agents.len() * envs.len())
}

fn c3_prepend_percept() -> Outcome {
    let spec = det_spec(Orientation::PerceptFirst);
    let t = parse_translation("prepend-percept:y1", spec.clone()).map_err(e)?;
    let r0 = spec
        .universe
        .reward(spec.universe.percept("y1").map_err(e)?);
    let (agents, envs, dest_agents) = source_and_dest_corpora(&t)?;
    value_law(&t, &agents, &envs, &r0)?;
    let (ts, sa, se) = stochastic_corpora("prepend-percept:y1", Orientation::PerceptFirst)?;
    let extra = value_law(&ts, &sa, &se, &r0)?;
    ensure(
        check_condition1(&t, &agents, &envs).map_err(e)?.passed(),
        "condition 1 failed",
    )?;
    ensure(
        check_weak(&t, &agents, &envs).map_err(e)?.passed(),
        "check_weak failed",
    )?;
    let strong = check_strong(&t, &envs, &dest_agents, &agents).map_err(e)?;
    ensure(strong.passed(), "check_strong failed")?;
    Ok(format!(
        "{}x{} pairs exact (+{extra} stochastic); weak and strong pass ({} distinguished pairs)",
        agents.len(),
        envs.len(),
        strong.instances_checked
    ))
}

fn c4_local_reverse() -> Outcome {
    let spec = det_spec(Orientation::AgentFirst);
    let t = parse_translation("local-reverse", spec).map_err(e)?;
    let (agents, envs, _) = source_and_dest_corpora(&t)?;
    value_law(&t, &agents, &envs, &Rational::zero())?;
    let (ts, sa, se) = stochastic_corpora("local-reverse", Orientation::AgentFirst)?;
    let extra = value_law(&ts, &sa, &se, &Rational::zero())?;
    let weak = check_weak(&t, &agents, &envs).map_err(e)?;
    ensure(
        weak.passed() && weak.parts.iter().all(|p| p.passed()),
        "check_weak failed",
    )?;
    Ok(format!(
        "{}x{} pairs exact (+{extra} stochastic); weak passes with injectivity",
        agents.len(),
        envs.len()
    ))
}

fn c5_mixture_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..50u64 {
        let (pi, mu, _) = random_instance(&mut rng);
        let rho = random_agents(pi.spec(), pi.spec().table_depth, 1, 500 + i)
            .map_err(e)?
            .remove(0);
        let d: i64 = rng.gen_range(1..=12);
        let w = Rational::new(rng.gen_range(0..=d), d);
        let sigma = mixture_agent(&pi, &rho, &w).map_err(e)?;
        let lhs = value(&sigma, &mu).map_err(e)?;
        let rhs = &w * &value(&pi, &mu).map_err(e)?
            + &(Rational::one() - w.clone()) * &value(&rho, &mu).map_err(e)?;
        ensure(lhs == rhs, format!("instance {i}: {lhs} vs {rhs}"))?;
    }
    Ok("50/50 exact".into())
}

fn c6_nonstrong() -> Outcome {
    let r = demo_nonstrong_prepend_action(det_spec(Orientation::PerceptFirst), 2).map_err(e)?;
    let AuditWitness::PrependActionDemo(w) = &r.witness else {
        return Err("wrong witness".into());
    };
    ensure(r.contradiction(), "prepend-action demo did not reproduce")?;
    ensure(
        w.mu_values == [Rational::zero(), Rational::zero()],
        "μ values not (0, 0)",
    )?;
    ensure(
        w.nu_values[0].is_zero() && !w.nu_values[1].is_zero(),
        "ν values not (0, ≠0)",
    )?;
    let r2 = demo_nonstrong_times_map().map_err(e)?;
    let AuditWitness::NonstrongDemo(w2) = &r2.witness else {
        return Err("wrong witness".into());
    };
    ensure(
        r2.contradiction() && w2.v_pi == w2.v_rho && w2.v_pi_dagger != w2.v_rho_dagger,
        "times-map demo",
    )?;
    Ok(format!(
        "prepend-action: μ ({}, {}), ν ({}, {}), images undistinguished by {} agents; times-map: {} = {}, {} ≠ {}",
        w.mu_values[0], w.mu_values[1], w.nu_values[0], w.nu_values[1], w.corpus_size, w2.v_pi, w2.v_rho,
        w2.v_pi_dagger, w2.v_rho_dagger
    ))
}

fn c7_mixture_falsifier() -> Outcome {
    let src = mixture_demo_spec();
    let maps = depth1_env_maps(&src, 4).map_err(e)?;
    let mut out = Vec::new();
    for id in ["drop-first-action:x0", "sum-map"] {
        let t = parse_translation(id, src.clone()).map_err(e)?;
        let r = falsify_mixture(&t, &maps).map_err(e)?;
        let AuditWitness::Mixture(w) = &r.witness else {
            return Err("wrong witness".into());
        };
        ensure(
            r.contradiction() && w.contradicted == maps.len() && w.candidates_checked == maps.len(),
            format!(
                "{id}: {} of {} contradicted, survivors {:?}",
                w.contradicted,
                maps.len(),
                w.survivors
            ),
        )?;
        out.push(format!("{id} {}/{}", w.contradicted, maps.len()));
    }
    Ok(out.join(", "))
}

fn c8_chain() -> Outcome {
    let fw = frameworks_from_base(diamond_base_spec()).map_err(e)?;
    let cands = chain_candidates(&fw.f, &fw.fae).map_err(e)?;
    ensure(cands.len() == 3, "expected 3 planted candidates")?;
    for t in &cands {
        let (plan, r) = build_descending_chain(t, 6).map_err(|x| format!("{}: {x}", t.id))?;
        ensure(r.contradiction(), format!("{}: no contradiction", t.id))?;
        ensure(
            plan.len() == 6,
            format!("{}: chain length {}", t.id, plan.len()),
        )?;
        ensure(
            plan.margins.iter().all(Rational::is_positive),
            format!("{}: Δ not positive", t.id),
        )?;
        plan.verify().map_err(|x| format!("{}: {x}", t.id))?;
        ensure(
            recheck_chain(t, &plan).map_err(e)?,
            format!("{}: recheck failed", t.id),
        )?;
    }
    Ok(format!(
        "{} candidates, K = 6, margins verified",
        cands.len()
    ))
}

fn c9_cardinality() -> Outcome {
    let fw = frameworks_from_base(diamond_base_spec()).map_err(e)?;
    let cands = cardinality_candidates(&fw.fae, &fw.f).map_err(e)?;
    for t in &cands {
        let r = cardinality_audit(t, 6).map_err(|x| format!("{}: {x}", t.id))?;
        let AuditWitness::Cardinality(w) = &r.witness else {
            return Err("wrong witness".into());
        };
        ensure(r.contradiction(), format!("{}: no contradiction", t.id))?;
        ensure(
            w.violation.is_some(),
            format!("{}: missing violation", t.id),
        )?;
        if !w.weights.is_empty() {
            ensure(
                w.distinct_source_values == 7,
                format!("{}: {} distinct σ_w values", t.id, w.distinct_source_values),
            )?;
        }
        ensure(
            recheck_cardinality(t, w).map_err(e)?,
            format!("{}: recheck failed", t.id),
        )?;
    }
    // The primary candidate must go all the way to the pigeonhole step.
    let r = cardinality_audit(&cands[0], 6).map_err(e)?;
    let AuditWitness::Cardinality(w) = &r.witness else {
        return Err("wrong witness".into());
    };
    ensure(
        w.distinct_source_values == 7,
        format!("{} distinct σ_w values", w.distinct_source_values),
    )?;
    ensure(w.dest_range_size == 5, "destination range is not {0..4}")?;
    Ok(format!(
        "{} candidates; 7 distinct σ_w values into 5 integers",
        cands.len()
    ))
}

fn c10_diamond() -> Outcome {
    let r = diamond_report(diamond_base_spec()).map_err(e)?;
    let pos = r
        .cells
        .iter()
        .filter(|c| c.polarity == Polarity::Positive && c.passed)
        .count();
    let neg = r
        .cells
        .iter()
        .filter(|c| c.polarity == Polarity::Negative && c.passed)
        .count();
    let failed: Vec<String> = r
        .cells
        .iter()
        .filter(|c| !c.passed)
        .map(|c| {
            format!(
                "{}->{} {:?}",
                c.source.label(),
                c.dest.label(),
                c.candidates
            )
        })
        .collect();
    ensure(
        r.all_passed() && pos == 5 && neg == 7,
        format!("{pos}/5 positive, {neg}/7 negative; {failed:?}"),
    )?;
    Ok("5/5 positive edges weak, 7/7 negative pairs refuted".into())
}

fn c11_preservation() -> Outcome {
    let pa = det_spec(Orientation::PerceptFirst);
    let ap = det_spec(Orientation::AgentFirst);
    let fw = frameworks_from_base(diamond_base_spec()).map_err(e)?;
    let mut catalog: Vec<Translation> = vec![
        parse_translation("identity", ap.clone()).map_err(e)?,
        parse_translation("prepend-percept:y0", pa.clone()).map_err(e)?,
        parse_translation("prepend-percept:y1", pa.clone()).map_err(e)?,
        parse_translation("prepend-action:x0", pa).map_err(e)?,
        parse_translation("local-reverse", ap).map_err(e)?,
    ];
    for s in rl_translate::translations::Vertex::ALL {
        for d in rl_translate::translations::Vertex::ALL {
            if let Ok(t) = inclusion(&fw, (s, d)) {
                catalog.push(t);
            }
        }
    }
    let mut weak = Vec::new();
    for t in &catalog {
        let agents = corpus_agents(&t.source)?;
        let envs = corpus_envs(&t.dest)?;
        if check_weak(t, &agents, &envs).map_err(e)?.passed() {
            let pairs = all_pairs(agents.len());
            for mu in &envs {
                let dest = Comparator::principal(mu.clone());
                let src = induce_source_comparator(t, &dest, &envs).map_err(e)?;
                let r = check_preservation(t, &src, &dest, &agents, &pairs).map_err(e)?;
                ensure(r.passed(), format!("{}: preservation fails", t.id))?;
            }
            weak.push(t.id.clone());
        }
    }
    ensure(
        weak.len() >= 8,
        format!(
            "only {} catalog translations pass check_weak: {weak:?}",
            weak.len()
        ),
    )?;
    Ok(format!(
        "{} weak translations: {}",
        weak.len(),
        weak.join(", ")
    ))
}

fn corpus_agents(spec: &Arc<FrameworkSpec>) -> Result<Vec<Agent>, String> {
    let mut v = all_deterministic_agents(spec, 2).map_err(e)?;
    if !spec.deterministic_agents {
        v.extend(random_agents(spec, 2, 6, 11).map_err(e)?);
    }
    Ok(v)
}

fn corpus_envs(spec: &Arc<FrameworkSpec>) -> Result<Vec<Environment>, String> {
    let mut v = all_deterministic_envs(spec, 2).map_err(e)?;
    if !spec.deterministic_environments {
        v.extend(random_envs(spec, 2, 6, 12).map_err(e)?);
    }
    Ok(v)
}

fn suite_reports() -> Result<String, String> {
    let mut out = BTreeMap::new();
    out.insert(
        "diamond",
        serde_json::to_value(diamond_report(diamond_base_spec()).map_err(e)?).map_err(e)?,
    );
    let src = mixture_demo_spec();
    let maps = depth1_env_maps(&src, 4).map_err(e)?;
    let t = parse_translation("sum-map", src).map_err(e)?;
    out.insert(
        "mixture",
        serde_json::to_value(falsify_mixture(&t, &maps).map_err(e)?).map_err(e)?,
    );
    out.insert(
        "times_map",
        serde_json::to_value(demo_nonstrong_times_map().map_err(e)?).map_err(e)?,
    );
    to_json(&out).map_err(e)
}

fn c12_determinism() -> Outcome {
    let a = suite_reports()?;
    let b = suite_reports()?;
    ensure(a == b, "reports differ between runs")?;
    Ok(format!("{} bytes identical across two runs", a.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

// Runs without the libtest harness so the summary lines are never captured.
fn main() {
    let criteria: [Criterion; 12] = [
        (
            "evaluator matches enumerator and Monte Carlo",
            c1_evaluator_oracle,
        ),
        ("deterministic value law", c2_deterministic_law),
        (
            "prepend-percept value law, weak and strong",
            c3_prepend_percept,
        ),
        ("local-reverse value law and weak", c4_local_reverse),
        ("mixture law", c5_mixture_law),
        ("non-strongness witnesses", c6_nonstrong),
        (
            "mixture falsifier over depth-1 family",
            c7_mixture_falsifier,
        ),
        ("descending-chain audit", c8_chain),
        ("cardinality audit", c9_cardinality),
        ("diamond matrix", c10_diamond),
        ("preservation under principal comparators", c11_preservation),
        ("byte-identical reports", c12_determinism),
    ];
    let results: Vec<Outcome> = std::thread::scope(|s| {
        let hs: Vec<_> = criteria.iter().map(|(_, f)| s.spawn(*f)).collect();
        hs.into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err("panicked".into())))
            .collect()
    });
    let mut failed = 0;
    for (i, ((name, _), r)) in criteria.iter().zip(&results).enumerate() {
        match r {
            Ok(d) => println!("criterion {:>2} PASS  {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {d}", i + 1)
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
