mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rl_translate::elections::{
    all_pairs, check_preservation, compare, induce_source_comparator, Comparator, TieRule,
};
use rl_translate::model::{Distribution, FrameworkSpec, Orientation, Rational, Universe};
use rl_translate::policies::corpus::{
    all_deterministic_agents, all_deterministic_envs, random_agents, random_envs,
};
use rl_translate::policies::{build_indicator_environment, Agent, EnvDefault, Environment};
use rl_translate::translations::{parse_translation, Verdict, Witness};
use rl_translate::Error;

use common::{det_spec, stoch_spec};

fn pays(spec: &Arc<FrameworkSpec>, x: &str) -> Environment {
    build_indicator_environment(spec.clone(), &[spec.universe.action(x).unwrap()]).unwrap()
}

fn constants(spec: &Arc<FrameworkSpec>) -> (Agent, Agent) {
    let c = |x| Agent::constant(spec.clone(), spec.universe.action(x).unwrap()).unwrap();
    (c("x0"), c("x1"))
}

#[test]
fn two_to_one_majority() {
    let s = det_spec(Orientation::AgentFirst);
    let (pi, rho) = constants(&s);
    let c =
        Comparator::majority(vec![pays(&s, "x1"), pays(&s, "x1"), pays(&s, "x0")], None).unwrap();
    let r = compare(&c, &pi, &rho).unwrap();
    let t = r.tally.unwrap();
    assert_eq!((t.voters, t.pi_le_rho, t.rho_le_pi), (3, 2, 1));
    assert!(r.pi_le_rho && !r.rho_le_pi);
    assert!(r.values.is_none());
}

#[test]
fn even_split_follows_the_tie_rule() {
    let s = det_spec(Orientation::AgentFirst);
    let (pi, rho) = constants(&s);
    let envs = vec![pays(&s, "x0"), pays(&s, "x1")];
    let tie = Comparator::majority(envs.clone(), Some(TieRule::Tie)).unwrap();
    assert!(compare(&tie, &pi, &rho).unwrap().is_tie());
    let strict = Comparator::majority(envs.clone(), Some(TieRule::Strict)).unwrap();
    let r = compare(&strict, &pi, &rho).unwrap();
    assert!(!r.pi_le_rho && !r.rho_le_pi);
    assert!(matches!(
        Comparator::majority(envs, None),
        Err(Error::PolicyConstraint(_))
    ));
    assert_eq!(
        Comparator::majority(vec![], None).unwrap_err(),
        Error::EmptyCorpus
    );
}

#[test]
fn indifferent_voters_count_on_both_sides() {
    let s = det_spec(Orientation::AgentFirst);
    let (pi, rho) = constants(&s);
    let zero = Environment::zero(s.clone()).unwrap();
    let c = Comparator::majority(vec![zero.clone(), zero, pays(&s, "x0")], None).unwrap();
    let t = compare(&c, &pi, &rho).unwrap().tally.unwrap();
    assert_eq!((t.pi_le_rho, t.rho_le_pi), (2, 3));
}

#[test]
fn principal_reports_values() {
    let s = det_spec(Orientation::AgentFirst);
    let (pi, rho) = constants(&s);
    let r = compare(&Comparator::principal(pays(&s, "x1")), &pi, &rho).unwrap();
    assert_eq!(r.values, Some([Rational::zero(), Rational::one()]));
    assert!(r.pi_le_rho && !r.rho_le_pi);
    let other = Agent::uniform(stoch_spec(Orientation::PerceptFirst)).unwrap();
    assert_eq!(
        compare(&Comparator::principal(pays(&s, "x1")), &pi, &other).unwrap_err(),
        Error::FrameworkMismatch
    );
}

#[test]
fn majority_can_be_intransitive() {
    // Three voters with cyclic rankings of three constant agents.
    let u = Universe::new(
        &["x0", "x1", "x2"],
        &[
            ("y0", Rational::zero()),
            ("y1", Rational::one()),
            ("y2", Rational::from(2)),
        ],
    )
    .unwrap();
    let s = Arc::new(FrameworkSpec::new("C", Arc::new(u), Orientation::AgentFirst).with_horizon(1));
    let x = |i: usize| s.universe.action(&format!("x{i}")).unwrap();
    let y = |i: usize| s.universe.percept(&format!("y{i}")).unwrap();
    let voter = |pay: [usize; 3]| {
        let table = (0..3)
            .map(|i| (vec![x(i)], Distribution::point(y(pay[i]))))
            .collect();
        Environment::new(s.clone(), table, EnvDefault::Zero).unwrap()
    };
    let m = Comparator::majority(
        vec![voter([2, 1, 0]), voter([0, 2, 1]), voter([1, 0, 2])],
        None,
    )
    .unwrap();
    let agents: Vec<Agent> = (0..3)
        .map(|i| Agent::constant(s.clone(), x(i)).unwrap())
        .collect();
    let beats = |i: usize, j: usize| {
        let r = compare(&m, &agents[j], &agents[i]).unwrap();
        r.pi_le_rho && !r.rho_le_pi
    };
    assert!(beats(0, 1) && beats(1, 2) && beats(2, 0));
}

#[test]
fn missing_env_map_is_not_weak() {
    let s = stoch_spec(Orientation::AgentFirst);
    let t = parse_translation("times-map", s.clone()).unwrap();
    let dest = Comparator::principal(Environment::zero(t.dest.clone()).unwrap());
    assert_eq!(
        induce_source_comparator(&t, &dest, &[]).unwrap_err(),
        Error::NotWeak
    );
}

#[test]
fn colliding_env_map_is_not_weak() {
    let s = det_spec(Orientation::AgentFirst);
    let t = parse_translation("local-reverse", s.clone()).unwrap();
    let src = t.source.clone();
    let t = t.with_env_map(Arc::new(move |_e: &Environment| {
        Environment::zero(src.clone())
    }));
    let envs = all_deterministic_envs(&t.dest, 2).unwrap();
    let dest = Comparator::principal(envs[1].clone());
    assert_eq!(
        induce_source_comparator(&t, &dest, &envs[..1]).unwrap_err(),
        Error::NotWeak
    );
}

#[test]
fn majority_comparators_do_not_transfer() {
    let s = det_spec(Orientation::AgentFirst);
    let t = parse_translation("local-reverse", s.clone()).unwrap();
    let m = Comparator::majority(vec![Environment::zero(t.dest.clone()).unwrap()], None).unwrap();
    assert!(matches!(
        induce_source_comparator(&t, &m, &[]),
        Err(Error::PolicyConstraint(_))
    ));
}

#[test]
fn local_reverse_preserves_every_principal() {
    let s = det_spec(Orientation::AgentFirst);
    let t = parse_translation("local-reverse", s.clone()).unwrap();
    let agents = all_deterministic_agents(&s, 2).unwrap();
    let envs = all_deterministic_envs(&t.dest, 2).unwrap();
    let pairs = all_pairs(agents.len());
    for mu in &envs {
        let dest = Comparator::principal(mu.clone());
        let src = induce_source_comparator(&t, &dest, &envs).unwrap();
        let r = check_preservation(&t, &src, &dest, &agents, &pairs).unwrap();
        assert!(r.passed(), "{:?}", r.witness);
        assert_eq!(r.instances_checked, 2 * pairs.len() as u64);
    }
}

#[test]
fn mismatched_source_comparator_is_caught() {
    let s = det_spec(Orientation::AgentFirst);
    let t = parse_translation("identity", s.clone()).unwrap();
    let (pi, rho) = constants(&s);
    let dest = Comparator::principal(pays(&s, "x1"));
    let wrong = Comparator::principal(pays(&s, "x0"));
    let r = check_preservation(&t, &wrong, &dest, &[pi, rho], &[(0, 1)]).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    let Some(Witness::Preservation {
        source_le,
        dest_le,
        source_values,
        dest_values,
        ..
    }) = r.witness
    else {
        panic!("expected a preservation witness")
    };
    assert_ne!(source_le, dest_le);
    assert!(source_values.is_some() && dest_values.is_some());
}

#[test]
fn all_pairs_counts() {
    assert!(all_pairs(0).is_empty() && all_pairs(1).is_empty());
    assert_eq!(all_pairs(4).len(), 6);
    assert!(all_pairs(5).iter().all(|(i, j)| i < j));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn principal_comparison_is_total(seed in any::<u64>()) {
        let s = stoch_spec(Orientation::PerceptFirst);
        let a = random_agents(&s, 3, 2, seed).unwrap();
        let mu = random_envs(&s, 3, 1, seed ^ 1).unwrap().remove(0);
        let r = compare(&Comparator::principal(mu), &a[0], &a[1]).unwrap();
        prop_assert!(r.pi_le_rho || r.rho_le_pi);
        let [v, w] = r.values.clone().unwrap();
        prop_assert_eq!(r.is_tie(), v == w);
    }

    #[test]
    fn odd_majorities_are_total(seed in any::<u64>(), n in 0usize..3) {
        let s = stoch_spec(Orientation::AgentFirst);
        let a = random_agents(&s, 3, 2, seed).unwrap();
        let envs = random_envs(&s, 3, 2 * n + 1, seed ^ 2).unwrap();
        let r = compare(&Comparator::majority(envs, None).unwrap(), &a[0], &a[1]).unwrap();
        prop_assert!(r.pi_le_rho || r.rho_le_pi);
        let t = r.tally.unwrap();
        prop_assert!(t.pi_le_rho + t.rho_le_pi >= t.voters);
    }

    #[test]
    fn prepend_percept_preserves_random_principals(seed in any::<u64>()) {
        let s = stoch_spec(Orientation::PerceptFirst);
        let t = parse_translation("prepend-percept:y0", s.clone()).unwrap();
        let agents = random_agents(&s, 3, 4, seed).unwrap();
        let envs = random_envs(&t.dest, 3, 3, seed ^ 3).unwrap();
        let dest = Comparator::principal(envs[0].clone());
        let src = induce_source_comparator(&t, &dest, &envs[1..]).unwrap();
        prop_assert!(check_preservation(&t, &src, &dest, &agents, &all_pairs(4)).unwrap().passed());
    }
}
