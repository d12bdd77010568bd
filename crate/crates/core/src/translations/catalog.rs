use std::collections::BTreeMap;
use std::sync::Arc;

use super::{compose, AgentMap, Claim, EnvMap, Translation};
use crate::error::{Error, Result};
use crate::model::{
    local_reverse, randomize, Distribution, FrameworkSpec, Orientation, RandomizeMode, Rational,
    Symbol,
};
use crate::policies::{Agent, AgentFormula, EnvFormula, Environment};

fn require(spec: &FrameworkSpec, orientation: Orientation) -> Result<()> {
    if spec.orientation == orientation {
        Ok(())
    } else {
        Err(Error::OrientationMismatch)
    }
}

fn flipped(spec: &FrameworkSpec, name: &str) -> Arc<FrameworkSpec> {
    let mut d = spec.clone().with_name(name);
    d.orientation = spec.orientation.flipped();
    d.availability = None;
    Arc::new(d)
}

fn formula_agent_map(
    dest: Arc<FrameworkSpec>,
    build: fn(&Agent, &[Symbol], &[Symbol]) -> Distribution,
    params: Vec<Symbol>,
) -> AgentMap {
    Arc::new(move |pi: &Agent| {
        let pi = pi.clone();
        let params = params.clone();
        let f: AgentFormula = Arc::new(move |h: &[Symbol]| build(&pi, &params, h));
        Agent::from_formula(dest.clone(), f)
    })
}

fn formula_env_map(
    source: Arc<FrameworkSpec>,
    build: fn(&Environment, &[Symbol], &[Symbol]) -> Distribution,
    params: Vec<Symbol>,
    depth_shift: isize,
) -> EnvMap {
    Arc::new(move |mu: &Environment| {
        let m = mu.clone();
        let params = params.clone();
        let f: EnvFormula = Arc::new(move |h: &[Symbol]| build(&m, &params, h));
        let depth = (mu.value_depth() as isize + depth_shift).max(0) as usize;
        Environment::from_formula(source.clone(), f, depth, mu.is_deterministic())
    })
}

/// The identity translation of a framework onto itself.
pub fn identity(spec: Arc<FrameworkSpec>) -> Translation {
    let lift: AgentMap = Arc::new(|pi: &Agent| Ok(pi.clone()));
    Translation::new("identity", spec.clone(), spec, lift.clone(), Claim::Strong)
        .with_env_map(Arc::new(|mu: &Environment| Ok(mu.clone())))
        .with_dependency(Arc::new(|h: &[Symbol]| vec![h.to_vec()]))
        .with_witness_lift(lift)
}

/// Percept-first to agent-first: π^*(h) = π(y0⌢h); μ_* emits `y0` first and
/// then mirrors μ. Off the `y0` branch μ_* emits the zero-reward percept.
pub fn prepend_percept(source: Arc<FrameworkSpec>, y0: Symbol) -> Result<Translation> {
    require(&source, Orientation::PerceptFirst)?;
    if !y0.is_percept() || !source.universe.contains(y0) {
        return Err(Error::UnknownSymbol(y0.to_string()));
    }
    let name = source.universe.name(y0).to_string();
    let dest = flipped(&source, &format!("{}→AP", source.name));
    let agent_map = formula_agent_map(
        dest.clone(),
        |pi, p, h| {
            let mut g = Vec::with_capacity(h.len() + 1);
            g.push(p[0]);
            g.extend_from_slice(h);
            pi.dist(&g)
        },
        vec![y0],
    );
    let env_map = formula_env_map(
        source.clone(),
        |mu, p, h| match h.first() {
            None => Distribution::point(p[0]),
            Some(y) if *y == p[0] => mu.dist(&h[1..]),
            Some(_) => Distribution::point(mu.zero_percept()),
        },
        vec![y0],
        1,
    );
    let lift = formula_agent_map(source.clone(), |pi, _, h| pi.dist(&h[1..]), vec![]);
    Ok(Translation::new(
        format!("prepend-percept:{name}"),
        source,
        dest,
        agent_map,
        Claim::Strong,
    )
    .with_env_map(env_map)
    .with_dependency(Arc::new(move |h: &[Symbol]| {
        let mut g = vec![y0];
        g.extend_from_slice(h);
        vec![g]
    }))
    .with_witness_lift(lift))
}

/// Percept-first to agent-first: π^* plays `x0` and then mirrors π;
/// μ_*(h) = μ(x0⌢h).
pub fn prepend_action(source: Arc<FrameworkSpec>, x0: Symbol) -> Result<Translation> {
    require(&source, Orientation::PerceptFirst)?;
    if !x0.is_action() || !source.universe.contains(x0) {
        return Err(Error::UnknownSymbol(x0.to_string()));
    }
    let name = source.universe.name(x0).to_string();
    let dest = flipped(&source, &format!("{}→AP", source.name));
    let agent_map = formula_agent_map(
        dest.clone(),
        |pi, p, h| {
            if h.is_empty() {
                Distribution::point(p[0])
            } else {
                pi.dist(&h[1..])
            }
        },
        vec![x0],
    );
    let env_map = formula_env_map(
        source.clone(),
        |mu, p, h| {
            let mut g = Vec::with_capacity(h.len() + 1);
            g.push(p[0]);
            g.extend_from_slice(h);
            mu.dist(&g)
        },
        vec![x0],
        -1,
    );
    Ok(Translation::new(
        format!("prepend-action:{name}"),
        source,
        dest,
        agent_map,
        Claim::Pre,
    )
    .with_env_map(env_map)
    .with_dependency(Arc::new(|h: &[Symbol]| {
        if h.is_empty() {
            vec![]
        } else {
            vec![h[1..].to_vec()]
        }
    })))
}

fn reverse_prefix(h: &[Symbol]) -> Vec<Symbol> {
    local_reverse(&h[..h.len() - 1]).expect("prefix has even length")
}

/// Agent-first to percept-first: π^*(h⌢y) = π(ȟ); μ_*(h⌢x) = μ(ȟ).
pub fn local_reverse_translation(source: Arc<FrameworkSpec>) -> Result<Translation> {
    require(&source, Orientation::AgentFirst)?;
    let dest = flipped(&source, &format!("{}→PA", source.name));
    let agent_map = formula_agent_map(dest.clone(), |pi, _, h| pi.dist(&reverse_prefix(h)), vec![]);
    let env_map = formula_env_map(
        source.clone(),
        |mu, _, h| mu.dist(&reverse_prefix(h)),
        vec![],
        1,
    );
    Ok(
        Translation::new("local-reverse", source, dest, agent_map, Claim::Weak)
            .with_env_map(env_map)
            .with_dependency(Arc::new(|h: &[Symbol]| vec![reverse_prefix(h)])),
    )
}

/// Agent-first to percept-first, agent map only: π^×(y⌢h) = π(h).
pub fn times_map(source: Arc<FrameworkSpec>) -> Result<Translation> {
    require(&source, Orientation::AgentFirst)?;
    let dest = flipped(&source, &format!("{}→PA", source.name));
    let agent_map = formula_agent_map(dest.clone(), |pi, _, h| pi.dist(&h[1..]), vec![]);
    Ok(
        Translation::new("times-map", source, dest, agent_map, Claim::None)
            .with_dependency(Arc::new(|h: &[Symbol]| vec![h[1..].to_vec()])),
    )
}

/// Agent-first to percept-first, agent map only:
/// π^*(x|h) = Σ_{x0} π(x0|⟨⟩)·π(x|x0⌢h).
pub fn sum_map(source: Arc<FrameworkSpec>) -> Result<Translation> {
    require(&source, Orientation::AgentFirst)?;
    let dest = flipped(&source, &format!("{}→PA", source.name));
    let agent_map = formula_agent_map(
        dest.clone(),
        |pi, _, h| {
            let mut acc: BTreeMap<Symbol, Rational> = BTreeMap::new();
            for (x0, w) in pi.dist(&[]).iter() {
                let mut g = Vec::with_capacity(h.len() + 1);
                g.push(x0);
                g.extend_from_slice(h);
                for (x, p) in pi.dist(&g).iter() {
                    *acc.entry(x).or_insert_with(Rational::zero) += w * p;
                }
            }
            Distribution::new(acc).expect("convex combination of distributions")
        },
        vec![],
    );
    let actions: Vec<Symbol> = source.universe.actions().collect();
    Ok(
        Translation::new("sum-map", source, dest, agent_map, Claim::None).with_dependency(
            Arc::new(move |h: &[Symbol]| {
                let mut deps = vec![vec![]];
                for x0 in &actions {
                    let mut g = vec![*x0];
                    g.extend_from_slice(h);
                    deps.push(g);
                }
                deps
            }),
        ),
    )
}

/// Agent-first to percept-first, agent map only: π^*(h) = π(x0⌢h).
pub fn drop_first_action(source: Arc<FrameworkSpec>, x0: Symbol) -> Result<Translation> {
    require(&source, Orientation::AgentFirst)?;
    if !x0.is_action() || !source.universe.contains(x0) {
        return Err(Error::UnknownSymbol(x0.to_string()));
    }
    let name = source.universe.name(x0).to_string();
    let dest = flipped(&source, &format!("{}→PA", source.name));
    let agent_map = formula_agent_map(
        dest.clone(),
        |pi, p, h| {
            let mut g = Vec::with_capacity(h.len() + 1);
            g.push(p[0]);
            g.extend_from_slice(h);
            pi.dist(&g)
        },
        vec![x0],
    );
    Ok(Translation::new(
        format!("drop-first-action:{name}"),
        source,
        dest,
        agent_map,
        Claim::None,
    )
    .with_dependency(Arc::new(move |h: &[Symbol]| {
        let mut g = vec![x0];
        g.extend_from_slice(h);
        vec![g]
    })))
}

/// The four frameworks obtained from a deterministic base.
#[derive(Debug, Clone)]
pub struct DiamondFrameworks {
    pub f: Arc<FrameworkSpec>,
    pub fa: Arc<FrameworkSpec>,
    pub fe: Arc<FrameworkSpec>,
    pub fae: Arc<FrameworkSpec>,
}

impl DiamondFrameworks {
    pub fn get(&self, v: Vertex) -> &Arc<FrameworkSpec> {
        match v {
            Vertex::F => &self.f,
            Vertex::Fa => &self.fa,
            Vertex::Fe => &self.fe,
            Vertex::Fae => &self.fae,
        }
    }
}

pub fn frameworks_from_base(base: Arc<FrameworkSpec>) -> Result<DiamondFrameworks> {
    if !base.deterministic_agents || !base.deterministic_environments {
        return Err(Error::InvalidFramework(
            "base framework must be deterministic".into(),
        ));
    }
    Ok(DiamondFrameworks {
        fa: Arc::new(randomize(&base, RandomizeMode::Agents)?),
        fe: Arc::new(randomize(&base, RandomizeMode::Environments)?),
        fae: Arc::new(randomize(&base, RandomizeMode::Both)?),
        f: base,
    })
}

/// One of the four diamond frameworks.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize,
)]
pub enum Vertex {
    F,
    Fa,
    Fe,
    Fae,
}

impl Vertex {
    pub const ALL: [Vertex; 4] = [Vertex::F, Vertex::Fa, Vertex::Fe, Vertex::Fae];

    pub fn label(self) -> &'static str {
        match self {
            Vertex::F => "F",
            Vertex::Fa => "Fa",
            Vertex::Fe => "Fe",
            Vertex::Fae => "Fae",
        }
    }

    pub fn parse(s: &str) -> Option<Vertex> {
        Vertex::ALL.into_iter().find(|v| v.label() == s)
    }

    fn random_agents(self) -> bool {
        matches!(self, Vertex::Fa | Vertex::Fae)
    }

    fn random_envs(self) -> bool {
        matches!(self, Vertex::Fe | Vertex::Fae)
    }
}

/// A directed pair of diamond frameworks.
pub type Edge = (Vertex, Vertex);

/// Identity-on-agents, identity-on-environments translation between two
/// diamond frameworks. Requires source agents to be destination agents and
/// destination environments to be source environments.
pub fn inclusion(frameworks: &DiamondFrameworks, edge: Edge) -> Result<Translation> {
    let (s, d) = edge;
    if s == d || (s.random_agents() && !d.random_agents()) || (d.random_envs() && !s.random_envs())
    {
        return Err(Error::SpecMismatch(format!(
            "no inclusion from {} to {}",
            s.label(),
            d.label()
        )));
    }
    let source = frameworks.get(s).clone();
    let dest = frameworks.get(d).clone();
    let (ds, ss) = (dest.clone(), source.clone());
    let agent_map: AgentMap = Arc::new(move |pi: &Agent| pi.rehome(ds.clone()));
    let env_map: EnvMap = Arc::new(move |mu: &Environment| mu.rehome(ss.clone()));
    let ss = source.clone();
    let lift: AgentMap = Arc::new(move |pi: &Agent| pi.rehome(ss.clone()));
    let mut t = Translation::new(
        format!("inclusion:{}->{}", s.label(), d.label()),
        source,
        dest,
        agent_map,
        Claim::Weak,
    )
    .with_env_map(env_map)
    .with_dependency(Arc::new(|h: &[Symbol]| vec![h.to_vec()]));
    if !d.random_agents() || s.random_agents() {
        t = t.with_witness_lift(lift);
    }
    Ok(t)
}

fn base_of(spec: &FrameworkSpec) -> FrameworkSpec {
    let mut b = spec.clone();
    b.deterministic_agents = true;
    b.deterministic_environments = true;
    b.randomized_agents = false;
    b.randomized_environments = false;
    if let Some(i) = b.name.find('^') {
        b.name.truncate(i);
    }
    b
}

fn vertex_of(spec: &FrameworkSpec) -> Vertex {
    match (spec.randomized_agents, spec.randomized_environments) {
        (false, false) => Vertex::F,
        (true, false) => Vertex::Fa,
        (false, true) => Vertex::Fe,
        (true, true) => Vertex::Fae,
    }
}

fn parse_one(id: &str, source: Arc<FrameworkSpec>) -> Result<Translation> {
    let unknown = || Error::UnknownTranslation(id.to_string());
    let (kind, arg) = match id.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (id, None),
    };
    let u = source.universe.clone();
    match (kind, arg) {
        ("identity", None) => Ok(identity(source)),
        ("prepend-percept", Some(y)) => prepend_percept(source, u.percept(y)?),
        ("prepend-action", Some(x)) => prepend_action(source, u.action(x)?),
        ("local-reverse", None) => local_reverse_translation(source),
        ("times-map", None) => times_map(source),
        ("sum-map", None) => sum_map(source),
        ("drop-first-action", Some(x)) => drop_first_action(source, u.action(x)?),
        ("inclusion", Some(edge)) => {
            let (s, d) = edge.split_once("->").ok_or_else(unknown)?;
            let (s, d) = (
                Vertex::parse(s).ok_or_else(unknown)?,
                Vertex::parse(d).ok_or_else(unknown)?,
            );
            if vertex_of(&source) != s {
                return Err(Error::SpecMismatch(format!(
                    "`{id}` needs source {} but got {}",
                    s.label(),
                    source.name
                )));
            }
            let frameworks = frameworks_from_base(Arc::new(base_of(&source)))?;
            let mut t = inclusion(&frameworks, (s, d))?;
            t.source = source;
            Ok(t)
        }
        _ => Err(unknown()),
    }
}

/// Parses `"T1 . T2 . …"`, applying `T1` first, starting from `source`.
pub fn parse_translation(id: &str, source: Arc<FrameworkSpec>) -> Result<Translation> {
    let mut parts = id.split('.').map(str::trim);
    let first = parts
        .next()
        .filter(|p| !p.is_empty())
        .ok_or_else(|| Error::UnknownTranslation(id.into()))?;
    let mut t = parse_one(first, source)?;
    for p in parts {
        let next = parse_one(p, t.dest.clone())?;
        t = compose(&t, &next)?;
    }
    Ok(t)
}
