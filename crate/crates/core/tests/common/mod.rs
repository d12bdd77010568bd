#![allow(dead_code)]

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rl_translate::model::{FrameworkSpec, Orientation, Rational, Symbol, Universe};
use rl_translate::policies::corpus::{random_agents, random_envs};
use rl_translate::policies::{Agent, Environment};

/// Deterministic x0, x1 / y0:0, y1:1 framework with horizon 2.
pub fn det_spec(o: Orientation) -> Arc<FrameworkSpec> {
    let u = Universe::new(
        &["x0", "x1"],
        &[("y0", Rational::zero()), ("y1", Rational::one())],
    )
    .unwrap();
    Arc::new(
        FrameworkSpec::new("D", Arc::new(u), o)
            .deterministic()
            .with_horizon(2),
    )
}

/// Stochastic x0, x1 / y0:0, y1:1 framework with horizon 2.
pub fn stoch_spec(o: Orientation) -> Arc<FrameworkSpec> {
    let u = Universe::new(
        &["x0", "x1"],
        &[("y0", Rational::zero()), ("y1", Rational::one())],
    )
    .unwrap();
    Arc::new(FrameworkSpec::new("S", Arc::new(u), o).with_horizon(2))
}

/// A random stochastic agent/environment pair with two or three actions and
/// percepts, arbitrary small rational rewards and a horizon t ≤ 6.
pub fn random_instance(rng: &mut ChaCha8Rng) -> (Agent, Environment, usize) {
    let na = rng.gen_range(2..=3);
    let np = rng.gen_range(2..=3);
    let actions: Vec<String> = (0..na).map(|i| format!("x{i}")).collect();
    let mut percepts: Vec<(String, Rational)> = vec![("y0".into(), Rational::zero())];
    for i in 1..np {
        percepts.push((
            format!("y{i}"),
            Rational::new(rng.gen_range(-4..=6), rng.gen_range(1..=3)),
        ));
    }
    let a: Vec<&str> = actions.iter().map(String::as_str).collect();
    let p: Vec<(&str, Rational)> = percepts
        .iter()
        .map(|(n, r)| (n.as_str(), r.clone()))
        .collect();
    let u = Universe::new(&a, &p).unwrap();
    let o = if rng.gen_bool(0.5) {
        Orientation::AgentFirst
    } else {
        Orientation::PerceptFirst
    };
    let t = rng.gen_range(1..=6);
    let spec = Arc::new(
        FrameworkSpec::new("R", Arc::new(u), o)
            .with_horizon(3)
            .with_depth(t),
    );
    let seed = rng.gen();
    let pi = random_agents(&spec, t, 1, seed).unwrap().remove(0);
    let mu = random_envs(&spec, t, 1, seed ^ 0x5a5a).unwrap().remove(0);
    (pi, mu, t)
}

/// Sums probability × reward over every sequence of length `t` in the full
/// alphabet, zero-probability ones included.
pub fn brute_force_value(pi: &Agent, mu: &Environment, t: usize) -> Rational {
    let spec = mu.spec();
    let u = &spec.universe;
    let mut total = Rational::zero();
    let mut stack: Vec<(Vec<Symbol>, Rational, Rational)> =
        vec![(vec![], Rational::one(), Rational::zero())];
    while let Some((h, p, r)) = stack.pop() {
        if h.len() == t {
            total += &p * &r;
            continue;
        }
        let agent_turn = spec.orientation.is_agent_turn(h.len());
        let alphabet: Vec<Symbol> = if agent_turn {
            u.actions().collect()
        } else {
            u.percepts().collect()
        };
        for s in alphabet {
            let q = if agent_turn {
                pi.prob(s, &h)
            } else {
                mu.dist(&h).prob(s)
            };
            let mut g = h.clone();
            g.push(s);
            stack.push((g, &p * &q, &r + &u.reward(s)));
        }
    }
    total
}
