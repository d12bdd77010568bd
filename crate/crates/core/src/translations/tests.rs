use std::collections::BTreeMap;

use proptest::prelude::*;

use super::*;
use crate::model::{Distribution, Orientation, Rational, Turn, Universe};
use crate::policies::corpus::{
    all_deterministic_agents, all_deterministic_envs, random_agents, random_envs,
};
use crate::policies::{enumerate_histories, EnvDefault};
use crate::valuation::value;

fn spec(o: Orientation, det: bool) -> Arc<FrameworkSpec> {
    let u = Universe::new(
        &["x0", "x1"],
        &[("y0", Rational::zero()), ("y1", Rational::one())],
    )
    .unwrap();
    let s = FrameworkSpec::new("T", Arc::new(u), o);
    Arc::new(if det { s.deterministic() } else { s })
}

fn pa() -> Arc<FrameworkSpec> {
    spec(Orientation::PerceptFirst, true)
}

fn ap() -> Arc<FrameworkSpec> {
    spec(Orientation::AgentFirst, true)
}

fn sym(s: &FrameworkSpec, name: &str) -> Symbol {
    s.universe.symbol(name).unwrap()
}

#[test]
fn prepend_percept_env_opens_with_y0() {
    let t = parse_translation("prepend-percept:y0", pa()).unwrap();
    let mu = Environment::zero(t.dest.clone()).unwrap();
    let mu_s = t.apply_env_map(&mu).unwrap();
    assert_eq!(mu_s.dist(&[]), Distribution::point(sym(&t.source, "y0")));
}

#[test]
fn prepend_percept_keeps_constant_agents() {
    let t = parse_translation("prepend-percept:y1", pa()).unwrap();
    let x0 = sym(&t.source, "x0");
    let img = t
        .apply_agent_map(&Agent::constant(t.source.clone(), x0).unwrap())
        .unwrap();
    for h in enumerate_histories(&t.dest, 5, Some(Turn::Agent)) {
        assert_eq!(img.dist(&h), Distribution::point(x0));
    }
}

#[test]
fn prepend_action_opens_with_x0() {
    let t = parse_translation("prepend-action:x1", pa()).unwrap();
    let pi = Agent::uniform(spec(Orientation::PerceptFirst, false)).unwrap();
    let pi = pi.rehome(t.source.clone());
    assert!(pi.is_err(), "uniform agents are not deterministic");
    let pi = Agent::constant(t.source.clone(), sym(&t.source, "x0")).unwrap();
    assert_eq!(
        t.apply_agent_map(&pi).unwrap().dist(&[]),
        Distribution::point(sym(&t.dest, "x1"))
    );
}

#[test]
fn local_reverse_first_move_is_the_empty_history() {
    let t = parse_translation("local-reverse", ap()).unwrap();
    for pi in all_deterministic_agents(&t.source, 2)
        .unwrap()
        .iter()
        .take(8)
    {
        let img = t.apply_agent_map(pi).unwrap();
        for y in t.dest.universe.percepts() {
            assert_eq!(img.dist(&[y]), pi.dist(&[]));
        }
    }
}

#[test]
fn times_map_ignores_the_first_percept() {
    let s = spec(Orientation::AgentFirst, false);
    let t = parse_translation("times-map", s.clone()).unwrap();
    assert!(!t.has_env_map());
    let pi = &random_agents(&s, 3, 1, 4).unwrap()[0];
    let img = t.apply_agent_map(pi).unwrap();
    let (y0, y1) = (sym(&s, "y0"), sym(&s, "y1"));
    for h in enumerate_histories(&s, 3, Some(Turn::Agent)) {
        let mut a = vec![y0];
        a.extend_from_slice(&h);
        let mut b = vec![y1];
        b.extend_from_slice(&h);
        assert_eq!(img.dist(&a), img.dist(&b));
    }
    let mu = Environment::zero(t.dest.clone()).unwrap();
    assert_eq!(t.apply_env_map(&mu).unwrap_err(), Error::MissingEnvMap);
}

#[test]
fn inclusion_is_identity_on_tables() {
    let fw = frameworks_from_base(ap()).unwrap();
    let t = inclusion(&fw, (Vertex::Fe, Vertex::F)).unwrap();
    for pi in all_deterministic_agents(&fw.fe, 2).unwrap().iter().take(6) {
        assert_eq!(t.apply_agent_map(pi).unwrap().table(), pi.table());
    }
    for mu in all_deterministic_envs(&fw.f, 2).unwrap() {
        assert_eq!(t.apply_env_map(&mu).unwrap().table(), mu.table());
    }
    assert!(inclusion(&fw, (Vertex::Fa, Vertex::F)).is_err());
    assert!(parse_translation("inclusion:Fe->F", fw.fe.clone()).is_ok());
    assert!(matches!(
        parse_translation("inclusion:Fe->F", fw.f.clone()),
        Err(Error::SpecMismatch(_))
    ));
}

#[test]
fn orientation_is_checked() {
    assert_eq!(
        parse_translation("local-reverse", pa()).unwrap_err(),
        Error::OrientationMismatch
    );
    assert_eq!(
        parse_translation("prepend-percept:y0", ap()).unwrap_err(),
        Error::OrientationMismatch
    );
    assert!(matches!(
        parse_translation("warp", ap()),
        Err(Error::UnknownTranslation(_))
    ));
    assert!(matches!(
        parse_translation("prepend-action:y0", pa()),
        Err(Error::UnknownSymbol(_))
    ));
}

#[test]
fn identity_composes_neutrally() {
    let t = parse_translation("local-reverse", ap()).unwrap();
    let c = compose(&identity(ap()), &t).unwrap();
    let agents = all_deterministic_agents(&t.source, 2).unwrap();
    let envs = all_deterministic_envs(&t.dest, 2).unwrap();
    for (pi, mu) in agents.iter().zip(envs.iter().cycle()).take(40) {
        assert_eq!(
            value(&c.apply_agent_map(pi).unwrap(), mu).unwrap(),
            value(&t.apply_agent_map(pi).unwrap(), mu).unwrap()
        );
        assert_eq!(
            value(pi, &c.apply_env_map(mu).unwrap()).unwrap(),
            value(pi, &t.apply_env_map(mu).unwrap()).unwrap()
        );
    }
}

#[test]
fn prepend_then_times_map() {
    let s = spec(Orientation::PerceptFirst, false);
    let t = parse_translation("prepend-percept:y0 . times-map", s.clone()).unwrap();
    assert_eq!(t.claimed, Claim::None);
    let pi = &random_agents(&s, 3, 1, 5).unwrap()[0];
    let img = t.apply_agent_map(pi).unwrap();
    let y0 = sym(&s, "y0");
    for h in enumerate_histories(&s, 3, Some(Turn::Agent)) {
        // h starts with a percept y; π^†(y⌢rest) = π(y0⌢rest).
        let mut g = vec![y0];
        g.extend_from_slice(&h[1..]);
        assert_eq!(img.dist(&h), pi.dist(&g));
    }
}

#[test]
fn mismatched_composition_rejected() {
    let a = parse_translation("local-reverse", ap()).unwrap();
    assert!(matches!(compose(&a, &a), Err(Error::SpecMismatch(_))));
}

#[test]
fn condition1_identity_passes() {
    let s = spec(Orientation::AgentFirst, false);
    let r = check_condition1(
        &identity(s.clone()),
        &random_agents(&s, 2, 6, 1).unwrap(),
        &random_envs(&s, 2, 6, 2).unwrap(),
    )
    .unwrap();
    assert!(r.passed());
    assert_eq!(r.instances_checked, 6 * 36);
}

#[test]
fn condition1_fails_for_a_planted_bad_env_map() {
    // drop-first-action:x0 paired with the identity-shaped map that forgets x0.
    let s = spec(Orientation::AgentFirst, false);
    let t = parse_translation("drop-first-action:x0", s.clone()).unwrap();
    let zero_src = s.clone();
    let t = t.with_env_map(Arc::new(move |_mu: &Environment| {
        Environment::zero(zero_src.clone())
    }));
    let agents = all_deterministic_agents(&ap(), 2)
        .unwrap()
        .iter()
        .map(|a| a.rehome(s.clone()).unwrap())
        .collect::<Vec<_>>();
    let y1 = sym(&t.dest, "y1");
    let x1 = sym(&t.dest, "x1");
    let mu = Environment::new(
        t.dest.clone(),
        BTreeMap::from([(vec![sym(&t.dest, "y0"), x1], Distribution::point(y1))]),
        EnvDefault::Zero,
    )
    .unwrap();
    let r = check_condition1(&t, &agents, &[mu]).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    let Some(Witness::Condition1 {
        dest_values,
        source_values,
        ..
    }) = r.witness
    else {
        panic!()
    };
    assert_ne!(
        dest_values[0] <= dest_values[1],
        source_values[0] <= source_values[1]
    );
}

fn condition2_all(t: &Translation, family: &[Agent], depth: usize) -> Vec<LawReport> {
    let mut out = Vec::new();
    for pi in family.iter().step_by(5) {
        for h in enumerate_histories(&t.dest, depth, Some(Turn::Agent)) {
            out.push(check_condition2(t, pi, &h, family).unwrap());
        }
    }
    out
}

#[test]
fn condition2_passes_for_declared_dependencies() {
    for (id, s) in [
        ("prepend-percept:y0", pa()),
        ("sum-map", ap()),
        ("local-reverse", ap()),
        ("prepend-action:x0", pa()),
    ] {
        let t = parse_translation(id, s.clone()).unwrap();
        let family = all_deterministic_agents(&s, 2).unwrap();
        let reports = condition2_all(&t, &family, 3);
        assert!(reports.iter().all(|r| r.verdict != Verdict::Fail), "{id}");
        assert!(reports.iter().any(LawReport::passed), "{id}");
    }
}

#[test]
fn condition2_catches_an_underdeclared_dependency() {
    let s = ap();
    let t = sum_map(s.clone())
        .unwrap()
        .with_dependency(Arc::new(|h: &[Symbol]| {
            let mut g = vec![Symbol::Action(0)];
            g.extend_from_slice(h);
            vec![g]
        }));
    let family = all_deterministic_agents(&s, 2).unwrap();
    let reports = condition2_all(&t, &family, 1);
    let fail = reports
        .iter()
        .find(|r| r.verdict == Verdict::Fail)
        .expect("dropped ⟨⟩ must show");
    assert!(matches!(fail.witness, Some(Witness::Dependency { .. })));
}

#[test]
fn condition3_cases() {
    let s = ap();
    let family = all_deterministic_agents(&s, 2).unwrap();
    let all = enumerate_histories(&s, 2, Some(Turn::Agent));
    let r = check_condition3(&identity(s.clone()), &family[0], &[], &all, &family).unwrap();
    assert!(r.passed());
    let r = check_condition3(&identity(s.clone()), &family[0], &[], &all, &family[..1]).unwrap();
    assert_eq!(r.verdict, Verdict::Inconclusive);

    let t = parse_translation("prepend-percept:y0", pa()).unwrap();
    // π^*(⟨⟩) = π(y0) is pinned; later moves read source histories of length 3.
    let fam = random_agents(&t.source, 4, 20, 7).unwrap();
    let s1 = vec![vec![]];
    let s2 = enumerate_histories(&t.dest, 2, Some(Turn::Agent));
    assert!(check_condition3(&t, &fam[0], &s1, &s2, &fam)
        .unwrap()
        .passed());
}

#[test]
fn weak_checks() {
    let t = parse_translation("local-reverse", ap()).unwrap();
    let agents = all_deterministic_agents(&t.source, 2).unwrap();
    let envs = all_deterministic_envs(&t.dest, 2).unwrap();
    let r = check_weak(&t, &agents, &envs).unwrap();
    assert!(r.passed());
    assert_eq!(r.parts.len(), 2);

    let src = t.source.clone();
    let constant = t.clone().with_env_map(Arc::new(move |_e: &Environment| {
        Environment::zero(src.clone())
    }));
    let r = check_injectivity(&constant, &envs).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    assert!(matches!(
        r.witness,
        Some(Witness::Collision { mu: 0, nu: 1 })
    ));
    assert_eq!(
        check_weak(&t.clone().without_env_map(), &agents, &envs).unwrap_err(),
        Error::MissingEnvMap
    );
}

#[test]
fn strong_checks() {
    let t = parse_translation("prepend-percept:y0", pa()).unwrap();
    let src_agents = all_deterministic_agents(&t.source, 2).unwrap();
    let dst_agents = all_deterministic_agents(&t.dest, 2).unwrap();
    let envs = all_deterministic_envs(&t.dest, 2).unwrap();
    assert!(check_strong(&t, &envs, &dst_agents, &src_agents)
        .unwrap()
        .passed());

    let t = parse_translation("prepend-action:x0", pa()).unwrap();
    let envs = all_deterministic_envs(&t.dest, 2).unwrap();
    let r = check_strong(&t, &envs, &dst_agents, &src_agents).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    let Some(Witness::Strongness { dest, .. }) = r.witness else {
        panic!()
    };
    assert!(dest.values.iter().any(|v| !v.is_zero()));

    let r = check_strong(&t, &envs[..1], &dst_agents, &src_agents).unwrap();
    assert!(r.passed() && r.note.as_deref().unwrap().starts_with("vacuous"));
}

fn catalog_with_dependencies() -> Vec<Translation> {
    let s_pa = spec(Orientation::PerceptFirst, false);
    let s_ap = spec(Orientation::AgentFirst, false);
    [
        ("prepend-percept:y0", s_pa.clone()),
        ("prepend-action:x1", s_pa),
        ("local-reverse", s_ap.clone()),
        ("times-map", s_ap.clone()),
        ("sum-map", s_ap.clone()),
        ("drop-first-action:x0", s_ap.clone()),
        ("identity", s_ap),
    ]
    .into_iter()
    .map(|(id, s)| parse_translation(id, s).unwrap())
    .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn condition2_holds_under_random_perturbations(seed in any::<u64>(), k in 0usize..7) {
        let t = &catalog_with_dependencies()[k];
        let base = &random_agents(&t.source, 3, 1, seed).unwrap()[0];
        let sites = enumerate_histories(&t.source, 3, Some(Turn::Agent));
        let perturbed: Vec<Agent> = random_agents(&t.source, 3, 4, seed ^ 9)
            .unwrap()
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                let g = &sites[(seed as usize + i) % sites.len()];
                base.with_entry(g.clone(), r.dist(g)).unwrap()
            })
            .collect();
        for h in enumerate_histories(&t.dest, 3, Some(Turn::Agent)) {
            let r = check_condition2(t, base, &h, &perturbed).unwrap();
            prop_assert!(r.verdict != Verdict::Fail, "{}: {:?}", t.id, r.witness);
        }
    }

    #[test]
    fn identity_passes_everything(seed in any::<u64>()) {
        let s = spec(Orientation::PerceptFirst, false);
        let agents = random_agents(&s, 2, 5, seed).unwrap();
        let envs = random_envs(&s, 2, 5, seed ^ 1).unwrap();
        let t = identity(s.clone());
        prop_assert!(check_weak(&t, &agents, &envs).unwrap().passed());
        prop_assert!(check_strong(&t, &envs, &agents, &agents).unwrap().passed());
    }

    #[test]
    fn composed_condition1_passes(seed in any::<u64>()) {
        let s = spec(Orientation::PerceptFirst, false);
        let t = parse_translation("prepend-percept:y1 . local-reverse", s.clone()).unwrap();
        prop_assert_eq!(t.dest.orientation, Orientation::PerceptFirst);
        let agents = random_agents(&s, 3, 5, seed).unwrap();
        let envs = random_envs(&t.dest, 3, 4, seed ^ 2).unwrap();
        prop_assert!(check_condition1(&t, &agents, &envs).unwrap().passed());
    }

    #[test]
    fn prepend_percept_value_law(seed in any::<u64>()) {
        let s = spec(Orientation::PerceptFirst, false);
        let t = parse_translation("prepend-percept:y1", s.clone()).unwrap();
        let sigma = &random_agents(&s, 3, 1, seed).unwrap()[0];
        let mu = &random_envs(&t.dest, 3, 1, seed ^ 3).unwrap()[0];
        let lhs = value(sigma, &t.apply_env_map(mu).unwrap()).unwrap();
        let rhs = value(&t.apply_agent_map(sigma).unwrap(), mu).unwrap() + Rational::one();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn local_reverse_value_law(seed in any::<u64>()) {
        let s = spec(Orientation::AgentFirst, false);
        let t = parse_translation("local-reverse", s.clone()).unwrap();
        let sigma = &random_agents(&s, 3, 1, seed).unwrap()[0];
        let mu = &random_envs(&t.dest, 3, 1, seed ^ 4).unwrap()[0];
        prop_assert_eq!(
            value(sigma, &t.apply_env_map(mu).unwrap()).unwrap(),
            value(&t.apply_agent_map(sigma).unwrap(), mu).unwrap()
        );
    }
}
