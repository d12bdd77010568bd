//! Constructive replays of the impossibility arguments, run as falsifiers
//! against candidate translations, and the diamond verdict matrix.
//!
//! A `ContradictionExhibited` outcome always carries the exact values it
//! rests on; the `recheck_*` functions rebuild the policies from the
//! witness and recompute those values independently.

pub mod candidates;
mod cardinality;
mod chain;
mod diamond;
mod mixture;

use serde::{Deserialize, Serialize};

pub use cardinality::{cardinality_audit, recheck_cardinality, CardinalityWitness};
pub use chain::{build_descending_chain, recheck_chain, ChainAgent, DescendingChainPlan};
pub use diamond::{
    diamond_base_spec, diamond_report, diamond_report_with, CandidateOutcome, DiamondCell,
    DiamondReport, Polarity, POSITIVE_EDGES,
};
pub use mixture::{
    demo_nonstrong_prepend_action, demo_nonstrong_times_map, demo_nonstrong_times_map_in,
    falsify_mixture, mixture_demo_spec, CandidateVerdict, MixtureWitness, NonStrongWitness,
    PrependActionWitness,
};

use crate::model::{Rational, Symbol};
use crate::policies::Agent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Argument {
    Mixture,
    DescendingChain,
    Cardinality,
    NonstrongDemo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    ContradictionExhibited,
    NoContradictionFound,
}

/// Four values witnessing a Condition-1 violation: the destination orders
/// the pair one way, the source the other.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderViolation {
    pub pi: String,
    pub rho: String,
    /// (V^{π*}_μ, V^{ρ*}_μ)
    pub dest_values: [Rational; 2],
    /// (V^π_{μ*}, V^ρ_{μ*})
    pub source_values: [Rational; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AuditWitness {
    Mixture(MixtureWitness),
    NonstrongDemo(NonStrongWitness),
    PrependActionDemo(PrependActionWitness),
    DescendingChain(DescendingChainPlan),
    Cardinality(CardinalityWitness),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub target: String,
    pub argument: Argument,
    pub outcome: Outcome,
    pub witness: AuditWitness,
}

impl AuditReport {
    pub fn contradiction(&self) -> bool {
        self.outcome == Outcome::ContradictionExhibited
    }
}

/// First position along `q` at which the two agents act differently,
/// scanning agent turns of length at least `from`.
pub(crate) fn first_difference(a: &Agent, b: &Agent, q: &[Symbol], from: usize) -> Option<usize> {
    let o = a.spec().orientation;
    (from..q.len())
        .filter(|&n| o.is_agent_turn(n))
        .find(|&n| a.dist(&q[..n]) != b.dist(&q[..n]))
}
