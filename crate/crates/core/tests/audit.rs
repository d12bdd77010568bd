mod common;

use rl_translate::audit::candidates::{cardinality_candidates, chain_candidates, depth1_env_maps};
use rl_translate::audit::{
    build_descending_chain, cardinality_audit, demo_nonstrong_prepend_action,
    demo_nonstrong_times_map, diamond_base_spec, diamond_report, diamond_report_with,
    falsify_mixture, mixture_demo_spec, recheck_cardinality, recheck_chain, AuditReport,
    AuditWitness, Outcome, Polarity, POSITIVE_EDGES,
};
use rl_translate::model::{Orientation, Rational};
use rl_translate::translations::{frameworks_from_base, inclusion, parse_translation, Vertex};
use rl_translate::Error;

use common::{det_spec, stoch_spec};

fn no_floats(v: &serde_json::Value) -> bool {
    match v {
        serde_json::Value::Number(n) => n.is_u64() || n.is_i64(),
        serde_json::Value::Array(a) => a.iter().all(no_floats),
        serde_json::Value::Object(o) => o.values().all(no_floats),
        _ => true,
    }
}

fn round_trip(r: &AuditReport) {
    let json = serde_json::to_string(r).unwrap();
    assert!(
        no_floats(&serde_json::from_str(&json).unwrap()),
        "rationals must be strings: {json}"
    );
    let back: AuditReport = serde_json::from_str(&json).unwrap();
    assert_eq!(&back, r);
}

#[test]
fn chain_plan_round_trips_and_tampering_is_caught() {
    let fw = frameworks_from_base(diamond_base_spec()).unwrap();
    let t = &chain_candidates(&fw.f, &fw.fae).unwrap()[0];
    let (plan, r) = build_descending_chain(t, 6).unwrap();
    round_trip(&r);
    assert_eq!(plan.len(), 6);
    // Destination order π_1 > π_2 > … > π_K > π_0.
    let order: Vec<usize> = (1..=6).chain([0]).collect();
    assert!(order
        .windows(2)
        .all(|w| plan.dest_values[w[0]] > plan.dest_values[w[1]]));
    assert!(plan.verify().is_ok());
    assert!(recheck_chain(t, &plan).unwrap());

    let mut bad = plan.clone();
    bad.source_values[2] = bad.source_values[1].clone();
    assert!(!recheck_chain(t, &bad).unwrap());
    let mut bad = plan.clone();
    bad.path.push_str(" x0");
    assert!(!recheck_chain(t, &bad).unwrap_or(false));
}

#[test]
fn chain_must_outrun_the_value_range() {
    // Integer values in [0, 4] give five slots; K + 1 agents must overflow them.
    let fw = frameworks_from_base(diamond_base_spec()).unwrap();
    let t = &chain_candidates(&fw.f, &fw.fae).unwrap()[0];
    assert_eq!(
        build_descending_chain(t, 5).unwrap_err(),
        Error::RangeTooSmall { k: 5, range: 5 }
    );
    assert!(build_descending_chain(t, 6).unwrap().1.contradiction());
}

#[test]
fn cardinality_witness_round_trips_and_tampering_is_caught() {
    let fw = frameworks_from_base(diamond_base_spec()).unwrap();
    let t = &cardinality_candidates(&fw.fae, &fw.f).unwrap()[0];
    let r = cardinality_audit(t, 6).unwrap();
    round_trip(&r);
    let AuditWitness::Cardinality(w) = &r.witness else {
        panic!("wrong witness")
    };
    assert_eq!(w.weights.len(), 7);
    assert!(recheck_cardinality(t, w).unwrap());
    let mut bad = w.clone();
    bad.dest_values.swap(0, 1);
    assert!(!recheck_cardinality(t, &bad).unwrap());
}

#[test]
fn inclusions_survive_the_audits_they_should() {
    // A genuine weak translation never yields a contradiction.
    let fw = frameworks_from_base(diamond_base_spec()).unwrap();
    for (s, d) in POSITIVE_EDGES {
        let t = inclusion(&fw, (s, d)).unwrap();
        if let Ok(r) = cardinality_audit(&t, 4) {
            assert_eq!(r.outcome, Outcome::NoContradictionFound, "{}", t.id);
        }
        if let Ok((_, r)) = build_descending_chain(&t, 3) {
            assert_eq!(r.outcome, Outcome::NoContradictionFound, "{}", t.id);
        }
    }
}

#[test]
fn mixture_falsifier_needs_a_mixture_map() {
    let src = mixture_demo_spec();
    let maps = depth1_env_maps(&src, 2).unwrap();
    let t = parse_translation("identity", src.clone()).unwrap();
    assert!(falsify_mixture(&t, &maps).is_err());
    let t = parse_translation("sum-map", src).unwrap();
    let r = falsify_mixture(&t, &maps).unwrap();
    round_trip(&r);
    let AuditWitness::Mixture(w) = &r.witness else {
        panic!("wrong witness")
    };
    assert_eq!(w.candidates_checked, maps.len());
    assert_eq!(w.contradicted, maps.len());
}

#[test]
fn depth1_map_grid_size() {
    // Grain 2 over three percepts gives 6 distributions per action.
    let maps = depth1_env_maps(&mixture_demo_spec(), 2).unwrap();
    assert_eq!(maps.len(), 36);
    let names: std::collections::BTreeSet<&String> = maps.iter().map(|(n, _)| n).collect();
    assert_eq!(names.len(), maps.len());
}

#[test]
fn times_map_demo_values() {
    let r = demo_nonstrong_times_map().unwrap();
    round_trip(&r);
    let AuditWitness::NonstrongDemo(w) = &r.witness else {
        panic!("wrong witness")
    };
    assert!(r.contradiction());
    assert_eq!(w.v_pi, w.v_rho);
    assert_ne!(w.v_pi_dagger, w.v_rho_dagger);
}

#[test]
fn prepend_action_demo() {
    let r = demo_nonstrong_prepend_action(det_spec(Orientation::PerceptFirst), 2).unwrap();
    round_trip(&r);
    let AuditWitness::PrependActionDemo(w) = &r.witness else {
        panic!("wrong witness")
    };
    assert!(r.contradiction());
    assert_eq!(w.mu_values, [Rational::zero(), Rational::zero()]);
    assert_ne!(w.nu_values[0], w.nu_values[1]);
    assert!(!w.images_distinguished);
    assert_eq!(
        demo_nonstrong_prepend_action(stoch_spec(Orientation::AgentFirst), 2).unwrap_err(),
        Error::OrientationMismatch
    );
}

#[test]
fn diamond_matrix_shape() {
    let r = diamond_report(diamond_base_spec()).unwrap();
    assert!(r.all_passed());
    assert_eq!(r.cells.len(), 12);
    assert_eq!(
        r.cells
            .iter()
            .filter(|c| c.polarity == Polarity::Positive)
            .count(),
        POSITIVE_EDGES.len()
    );
    for v in Vertex::ALL {
        assert!(r.cell(v, v).is_none());
    }
    let (fae_f, f_fae) = (
        r.cell(Vertex::Fae, Vertex::F).unwrap(),
        r.cell(Vertex::F, Vertex::Fae).unwrap(),
    );
    assert_eq!(fae_f.argument, "cardinality");
    assert_eq!(f_fae.argument, "descending_chain");
    let table = r.render();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows.len(), 5);
    assert_eq!(table.matches("weak").count(), 5);
    assert_eq!(table.matches("none").count(), 7);
    assert!(!table.contains("FAIL"));
}

#[test]
fn diamond_is_reproducible_per_seed() {
    let a = diamond_report_with(diamond_base_spec(), 6, 6, 11).unwrap();
    let b = diamond_report_with(diamond_base_spec(), 6, 6, 11).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    assert!(a.all_passed());
}

#[test]
fn diamond_rejects_bases_without_prerequisites() {
    let r = diamond_report(stoch_spec(Orientation::PerceptFirst));
    assert!(r.is_err());
}
