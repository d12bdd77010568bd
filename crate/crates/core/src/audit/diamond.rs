use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::candidates::{cardinality_candidates, chain_candidates};
use super::{build_descending_chain, cardinality_audit, AuditReport, Outcome};
use crate::error::{Error, Result};
use crate::model::{FrameworkSpec, Orientation, Rational, Universe};
use crate::policies::corpus::{
    all_deterministic_agents, all_deterministic_envs, random_agents, random_envs,
};
use crate::policies::{build_cutoff_environment, build_indicator_environment, Agent, Environment};
use crate::translations::{
    check_weak, compose, frameworks_from_base, inclusion, DiamondFrameworks, LawReport,
    Translation, Vertex,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateOutcome {
    pub candidate: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<Outcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiamondCell {
    pub source: Vertex,
    pub dest: Vertex,
    pub polarity: Polarity,
    /// `check_weak`, `descending_chain` or `cardinality`.
    pub argument: String,
    /// How candidates for this cell are turned into ones the audit accepts.
    pub route: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub law: Option<LawReport>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub candidates: Vec<CandidateOutcome>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub reports: Vec<AuditReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiamondReport {
    pub base: String,
    pub chain_length: usize,
    pub mixture_count: usize,
    pub corpus_seed: u64,
    pub cells: Vec<DiamondCell>,
}

impl DiamondReport {
    pub fn all_passed(&self) -> bool {
        self.cells.len() == 12 && self.cells.iter().all(|c| c.passed)
    }

    pub fn cell(&self, source: Vertex, dest: Vertex) -> Option<&DiamondCell> {
        self.cells
            .iter()
            .find(|c| c.source == source && c.dest == dest)
    }

    /// Rows are sources, columns destinations. `weak` marks a verified
    /// weak inclusion, `none` a refuted pair, `FAIL` a cell whose check
    /// did not come out as expected.
    pub fn render(&self) -> String {
        let mut out = String::from("src\\dst");
        for d in Vertex::ALL {
            out.push_str(&format!("\t{}", d.label()));
        }
        out.push('\n');
        for s in Vertex::ALL {
            out.push_str(s.label());
            for d in Vertex::ALL {
                let mark = match self.cell(s, d) {
                    None => "-",
                    Some(c) if !c.passed => "FAIL",
                    Some(c) if c.polarity == Polarity::Positive => "weak",
                    Some(_) => "none",
                };
                out.push('\t');
                out.push_str(mark);
            }
            out.push('\n');
        }
        out
    }
}

/// Deterministic agent-first base over x0, x1, y0:0, y1:1 with integer
/// rewards, reward horizon 8 and declared value range [0, 4].
pub fn diamond_base_spec() -> Arc<FrameworkSpec> {
    let u = Universe::new(
        &["x0", "x1"],
        &[("y0", Rational::zero()), ("y1", Rational::one())],
    )
    .expect("static universe");
    Arc::new(
        FrameworkSpec::new("F", Arc::new(u), Orientation::AgentFirst)
            .deterministic()
            .with_integer_rewards()
            .with_horizon(8)
            .with_value_range(Rational::zero(), Rational::from_integer(4)),
    )
}

pub const POSITIVE_EDGES: [(Vertex, Vertex); 5] = [
    (Vertex::Fe, Vertex::F),
    (Vertex::Fe, Vertex::Fa),
    (Vertex::Fe, Vertex::Fae),
    (Vertex::F, Vertex::Fa),
    (Vertex::Fae, Vertex::Fa),
];

fn agent_corpus(spec: &Arc<FrameworkSpec>, seed: u64) -> Result<Vec<Agent>> {
    let mut out = all_deterministic_agents(spec, 2)?;
    if !spec.deterministic_agents {
        out.extend(random_agents(spec, 2, 8, seed)?);
    }
    Ok(out)
}

fn env_corpus(spec: &Arc<FrameworkSpec>, seed: u64) -> Result<Vec<Environment>> {
    let mut out = all_deterministic_envs(spec, 2)?;
    if !spec.deterministic_environments {
        out.extend(random_envs(spec, 2, 8, seed)?);
    }
    Ok(out)
}

fn check_prerequisites(base: &Arc<FrameworkSpec>) -> Result<()> {
    let fail = |e: Error| Error::PropertyPrerequisiteFailed(e.to_string());
    if !base.deterministic_agents || !base.deterministic_environments || !base.integer_rewards {
        return Err(Error::PropertyPrerequisiteFailed(
            "base must be deterministic with integer rewards".into(),
        ));
    }
    let x = base
        .universe
        .actions()
        .next()
        .ok_or(Error::ActionUnavailable)?;
    let first_env_turn: Vec<_> = match base.orientation {
        Orientation::AgentFirst => vec![x],
        Orientation::PerceptFirst => vec![],
    };
    build_indicator_environment(base.clone(), &first_env_turn).map_err(fail)?;
    let zero = Environment::zero(base.clone())?;
    let agent_turn: Vec<_> = match base.orientation {
        Orientation::AgentFirst => vec![],
        Orientation::PerceptFirst => vec![zero.percept(&[])?],
    };
    build_cutoff_environment(base.clone(), &zero, &agent_turn, x).map_err(fail)?;
    Ok(())
}

type Route = fn(&DiamondFrameworks, Translation) -> Result<Translation>;

/// The audit and the composition that carries a candidate for a negative
/// cell to a translation into F^ae (chain) or out of F^ae into F
/// (cardinality).
fn negative_route(s: Vertex, d: Vertex) -> (&'static str, &'static str, Route) {
    use Vertex::*;
    match (s, d) {
        (F, Fae) => ("descending_chain", "T", |_, t| Ok(t)),
        (F, Fe) => ("descending_chain", "T . inclusion:Fe->Fae", |fw, t| {
            compose(&t, &inclusion(fw, (Fe, Fae))?)
        }),
        (Fa, Fae) => ("descending_chain", "inclusion:F->Fa . T", |fw, t| {
            compose(&inclusion(fw, (F, Fa))?, &t)
        }),
        (Fae, F) => ("cardinality", "T", |_, t| Ok(t)),
        (Fa, F) => ("cardinality", "inclusion:Fae->Fa . T", |fw, t| {
            compose(&inclusion(fw, (Fae, Fa))?, &t)
        }),
        (Fa, Fe) => (
            "cardinality",
            "inclusion:Fae->Fa . T . inclusion:Fe->F",
            |fw, t| {
                compose(
                    &compose(&inclusion(fw, (Fae, Fa))?, &t)?,
                    &inclusion(fw, (Fe, F))?,
                )
            },
        ),
        (Fae, Fe) => ("cardinality", "T . inclusion:Fe->F", |fw, t| {
            compose(&t, &inclusion(fw, (Fe, F))?)
        }),
        _ => unreachable!("positive or diagonal cell"),
    }
}

#[derive(Debug, Clone, Copy)]
struct Options {
    k: usize,
    n: usize,
    seed: u64,
}

fn positive_cell(fw: &DiamondFrameworks, s: Vertex, d: Vertex, o: Options) -> Result<DiamondCell> {
    let t = inclusion(fw, (s, d))?;
    let agents = agent_corpus(fw.get(s), o.seed)?;
    let envs = env_corpus(fw.get(d), o.seed)?;
    let law = check_weak(&t, &agents, &envs)?;
    Ok(DiamondCell {
        source: s,
        dest: d,
        polarity: Polarity::Positive,
        argument: "check_weak".into(),
        route: t.id.clone(),
        passed: law.passed(),
        law: Some(law),
        candidates: Vec::new(),
        reports: Vec::new(),
    })
}

fn negative_cell(fw: &DiamondFrameworks, s: Vertex, d: Vertex, o: Options) -> Result<DiamondCell> {
    let (argument, route, carry) = negative_route(s, d);
    let family = if argument == "descending_chain" {
        chain_candidates(fw.get(s), fw.get(d))?
    } else {
        cardinality_candidates(fw.get(s), fw.get(d))?
    };
    let mut candidates = Vec::new();
    let mut reports = Vec::new();
    for t in family {
        let id = t.id.clone();
        let run = carry(fw, t).and_then(|c| {
            if argument == "descending_chain" {
                build_descending_chain(&c, o.k).map(|(_, r)| r)
            } else {
                cardinality_audit(&c, o.n)
            }
        });
        match run {
            Ok(r) => {
                candidates.push(CandidateOutcome {
                    candidate: id,
                    outcome: Some(r.outcome),
                    error: None,
                });
                reports.push(r);
            }
            Err(e) => candidates.push(CandidateOutcome {
                candidate: id,
                outcome: None,
                error: Some(e.to_string()),
            }),
        }
    }
    let passed = !candidates.is_empty()
        && candidates
            .iter()
            .all(|c| c.outcome == Some(Outcome::ContradictionExhibited));
    Ok(DiamondCell {
        source: s,
        dest: d,
        polarity: Polarity::Negative,
        argument: argument.into(),
        route: route.into(),
        passed,
        law: None,
        candidates,
        reports,
    })
}

/// The twelve-cell verdict matrix with default sizes: chains of length 6,
/// seven mixtures, corpus seed 0.
pub fn diamond_report(base: Arc<FrameworkSpec>) -> Result<DiamondReport> {
    diamond_report_with(base, 6, 6, 0)
}

/// Runs the twelve cells in parallel; cells are reported in a fixed order.
pub fn diamond_report_with(
    base: Arc<FrameworkSpec>,
    k: usize,
    n: usize,
    seed: u64,
) -> Result<DiamondReport> {
    check_prerequisites(&base)?;
    let fw = frameworks_from_base(base.clone())?;
    let o = Options { k, n, seed };
    let pairs: Vec<(Vertex, Vertex)> = Vertex::ALL
        .iter()
        .flat_map(|&s| {
            Vertex::ALL
                .iter()
                .filter(move |&&d| d != s)
                .map(move |&d| (s, d))
        })
        .collect();
    let cell = |(s, d): (Vertex, Vertex)| {
        if POSITIVE_EDGES.contains(&(s, d)) {
            positive_cell(&fw, s, d, o)
        } else {
            negative_cell(&fw, s, d, o)
        }
    };
    // wasm32-unknown-unknown has no threads.
    #[cfg(target_arch = "wasm32")]
    let cells = pairs.into_iter().map(cell).collect::<Result<Vec<_>>>()?;
    #[cfg(not(target_arch = "wasm32"))]
    let cells = std::thread::scope(|scope| {
        let handles: Vec<_> = pairs
            .iter()
            .map(|&pair| scope.spawn(move || cell(pair)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("diamond cell panicked"))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(DiamondReport {
        base: base.name.clone(),
        chain_length: k,
        mixture_count: n + 1,
        corpus_seed: seed,
        cells,
    })
}
