//! wasm-bindgen front for the browser page in `www/`.
//!
//! Every export takes and returns JSON text. The `*_json` functions hold the
//! logic and stay callable from native code.

use std::sync::Arc;

use rl_translate::audit::{diamond_base_spec, diamond_report_with};
use rl_translate::model::{FrameworkSpec, Orientation, Universe};
use rl_translate::policies::corpus::{all_deterministic_agents, all_deterministic_envs};
use rl_translate::policies::json::{agent_from_doc, env_from_doc, PolicyDoc};
use rl_translate::translations::{
    check_strong, check_weak, parse_translation, Law, LawReport, Verdict,
};
use rl_translate::valuation::{expected_value, total_value};
use rl_translate::Error;
use serde::Deserialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Framework settings accepted from the page.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameworkOpts {
    pub orientation: Orientation,
    #[serde(default)]
    pub deterministic: bool,
    #[serde(default = "two")]
    pub depth: usize,
    #[serde(default = "two")]
    pub horizon: usize,
}

fn two() -> usize {
    2
}

fn parse<T: for<'de> Deserialize<'de>>(what: &str, text: &str) -> Result<T, String> {
    serde_json::from_str(text).map_err(|e| format!("{what}: {e}"))
}

fn framework(universe: &str, opts: &str) -> Result<Arc<FrameworkSpec>, String> {
    let u: Universe = parse("universe", universe)?;
    let o: FrameworkOpts = parse("framework", opts)?;
    let mut s = FrameworkSpec::new("demo", Arc::new(u), o.orientation)
        .with_depth(o.depth)
        .with_horizon(o.horizon);
    if o.deterministic {
        s = s.deterministic();
    }
    s.validate().map_err(|e| e.to_string())?;
    Ok(Arc::new(s))
}

/// Exact value of an agent in an environment, over `steps` rewards or the
/// full horizon when `steps` is `None`.
pub fn evaluate_json(
    universe: &str,
    opts: &str,
    agent: &str,
    env: &str,
    steps: Option<usize>,
) -> Result<String, String> {
    let spec = framework(universe, opts)?;
    let pi = agent_from_doc(&parse::<PolicyDoc>("agent", agent)?, spec.clone())
        .map_err(|e| format!("agent: {e}"))?;
    let mu = env_from_doc(&parse::<PolicyDoc>("environment", env)?, spec)
        .map_err(|e| format!("environment: {e}"))?;
    let r = match steps {
        Some(t) => expected_value(&pi, &mu, t),
        None => total_value(&pi, &mu),
    }
    .map_err(|e| e.to_string())?;
    serde_json::to_string_pretty(&r).map_err(|e| e.to_string())
}

/// Weak and strong laws for a catalog translation, checked over every
/// deterministic policy of the table depth: source agents, destination
/// agents and destination environments.
pub fn check_translation_json(universe: &str, opts: &str, id: &str) -> Result<String, String> {
    let spec = framework(universe, opts)?;
    let t = parse_translation(id, spec.clone()).map_err(|e| e.to_string())?;
    let d = spec.table_depth;
    let agents = all_deterministic_agents(&spec, d).map_err(|e| e.to_string())?;
    let envs = all_deterministic_envs(&t.dest, d).map_err(|e| e.to_string())?;
    let dest_agents = all_deterministic_agents(&t.dest, d).map_err(|e| e.to_string())?;
    let settle = |law: Law, r: rl_translate::Result<LawReport>| match r {
        Err(e @ Error::MissingEnvMap) => {
            Ok(LawReport::new(law, Verdict::Fail, None, 0).with_note(e.to_string()))
        }
        other => other.map_err(|e| e.to_string()),
    };
    let weak = settle(Law::Weak, check_weak(&t, &agents, &envs))?;
    let strong = settle(
        Law::Strongness,
        check_strong(&t, &envs, &dest_agents, &agents),
    )?;
    let out = json!({
        "translation": t.id,
        "source": t.source.name,
        "dest": t.dest.name,
        "agents": agents.len(),
        "envs": envs.len(),
        "laws": [weak, strong],
    });
    serde_json::to_string_pretty(&out).map_err(|e| e.to_string())
}

/// The twelve-cell table over the built-in diamond base.
pub fn diamond_json(chain_length: usize, mixtures: usize, seed: u64) -> Result<String, String> {
    let r = diamond_report_with(diamond_base_spec(), chain_length, mixtures, seed)
        .map_err(|e| e.to_string())?;
    let out = json!({ "table": r.render(), "all_passed": r.all_passed(), "report": r });
    serde_json::to_string_pretty(&out).map_err(|e| e.to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn evaluate(
    universe: &str,
    framework: &str,
    agent: &str,
    env: &str,
    steps: Option<u32>,
) -> Result<String, JsError> {
    js(evaluate_json(
        universe,
        framework,
        agent,
        env,
        steps.map(|s| s as usize),
    ))
}

#[wasm_bindgen(js_name = checkTranslation)]
pub fn check_translation(universe: &str, framework: &str, id: &str) -> Result<String, JsError> {
    js(check_translation_json(universe, framework, id))
}

#[wasm_bindgen]
pub fn diamond(chain_length: u32, mixtures: u32, seed: u32) -> Result<String, JsError> {
    js(diamond_json(
        chain_length as usize,
        mixtures as usize,
        u64::from(seed),
    ))
}
