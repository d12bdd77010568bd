//! Exact evaluation of reinforcement-learning framework translations.
//!
//! Agents and environments are finite policy tables over alternating
//! histories with exact rational probabilities. On top of that the crate
//! computes expected total reward exactly, checks the laws a translation
//! between frameworks must satisfy, compares agents by principal and
//! majority elections, and replays the constructive halves of the known
//! impossibility arguments as falsifiers against candidate translations.
//!
//! ```
//! use std::sync::Arc;
//! use rl_translate::model::{FrameworkSpec, Orientation, Rational, Universe};
//! use rl_translate::policies::corpus::{all_deterministic_agents, all_deterministic_envs};
//! use rl_translate::translations::{check_strong, check_weak, parse_translation};
//!
//! let u = Universe::new(&["x0", "x1"], &[("y0", Rational::zero()), ("y1", Rational::one())])?;
//! let pa = Arc::new(
//!     FrameworkSpec::new("PA", Arc::new(u), Orientation::PerceptFirst)
//!         .deterministic()
//!         .with_depth(2)
//!         .with_horizon(2),
//! );
//! let t = parse_translation("prepend-percept:y0", pa.clone())?;
//! let agents = all_deterministic_agents(&pa, 2)?;
//! let envs = all_deterministic_envs(&t.dest, 2)?;
//! let dest_agents = all_deterministic_agents(&t.dest, 2)?;
//! assert!(check_weak(&t, &agents, &envs)?.passed());
//! assert!(check_strong(&t, &envs, &dest_agents, &agents)?.passed());
//! # Ok::<(), rl_translate::Error>(())
//! ```

pub mod audit;
pub mod elections;
pub mod error;
pub mod model;
pub mod policies;
pub mod report;
pub mod translations;
pub mod valuation;

pub use error::{Error, Result};

/// Toolkit version embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
