//! Experiment configuration files.
//!
//! A config names frameworks and policy corpora once and refers to them by
//! id from a list of tasks. Relative file paths resolve against the
//! directory holding the config.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rl_translate::audit::{diamond_base_spec, mixture_demo_spec};
use rl_translate::model::{FrameworkSpec, Orientation, Rational, Universe};
use rl_translate::policies::json::PolicyDoc;
use rl_translate::report::config_hash;
use rl_translate::translations::parse_translation;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// A file that failed to parse or validate. `path` names the offending
/// file and, when known, the JSON location inside it.
#[derive(Debug, thiserror::Error)]
#[error("config error in {path}: {message}")]
pub struct ConfigParseError {
    pub path: String,
    pub message: String,
}

impl ConfigParseError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigParseError {
            path: path.into(),
            message: message.into(),
        }
    }
}

type Result<T> = std::result::Result<T, ConfigParseError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UniverseRef {
    File(String),
    Inline(Universe),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builtin {
    DiamondBase,
    MixtureDemo,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameworkDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<Builtin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub universe: Option<UniverseRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<Orientation>,
    /// Sets both components; the specific flags below take precedence.
    #[serde(default)]
    pub deterministic: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deterministic_agents: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deterministic_environments: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default)]
    pub integer_rewards: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_range: Option<[Rational; 2]>,
}

/// Where a corpus comes from. Members are named: generated ones by their
/// index, file ones by file stem, inline ones by key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CorpusDoc {
    AllDeterministic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        depth: Option<usize>,
    },
    Random {
        count: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        depth: Option<usize>,
        /// Defaults to the config seed.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Files(Vec<String>),
    Inline(BTreeMap<String, PolicyDoc>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawName {
    Condition1,
    Condition2,
    Injectivity,
    Weak,
    Strong,
    Preservation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditKind {
    Mixture,
    DescendingChain,
    Cardinality,
    NonstrongTimesMap,
    NonstrongPrependAction,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    #[default]
    Contradiction,
    NoContradiction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PairsDoc {
    /// `"all"` or a CSV file with a `pi,rho` header.
    Named(String),
    List(Vec<[String; 2]>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalTask {
    pub framework: String,
    pub agents: String,
    pub envs: String,
    /// Finite horizon t; the total value when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
}

fn default_laws() -> Vec<LawName> {
    vec![LawName::Weak]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckTask {
    pub translation: String,
    /// The source framework.
    pub framework: String,
    pub agents: String,
    pub envs: String,
    /// Destination agents for the strongness check; defaults to `agents`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dest_agents: Option<String>,
    #[serde(default = "default_laws")]
    pub laws: Vec<LawName>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditTask {
    pub argument: AuditKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub framework: Option<String>,
    /// Diamond edge such as `"F->Fae"` for the chain and cardinality audits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain_length: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grain: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_depth: Option<usize>,
    #[serde(default)]
    pub expect: Expect,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiamondTask {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub framework: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain_length: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectTask {
    pub framework: String,
    pub agents: String,
    pub envs: String,
    /// `principal:<env-id>`, `majority`, `majority:tie` or `majority:strict`.
    pub comparator: String,
    pub pairs: PairsDoc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Task {
    Eval(EvalTask),
    CheckTranslation(CheckTask),
    Audit(AuditTask),
    Diamond(DiamondTask),
    Elect(ElectTask),
}

impl Task {
    pub fn kind(&self) -> &'static str {
        match self {
            Task::Eval(_) => "eval",
            Task::CheckTranslation(_) => "check-translation",
            Task::Audit(_) => "audit",
            Task::Diamond(_) => "diamond",
            Task::Elect(_) => "elect",
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default = "yes")]
    pub required: bool,
    #[serde(flatten)]
    pub task: Task,
}

fn default_dir() -> String {
    "reports".into()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputDoc {
    #[serde(default = "default_dir")]
    pub dir: String,
}

impl Default for OutputDoc {
    fn default() -> Self {
        OutputDoc { dir: default_dir() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub universe: Option<UniverseRef>,
    #[serde(default)]
    pub frameworks: BTreeMap<String, FrameworkDoc>,
    #[serde(default)]
    pub corpora: BTreeMap<String, CorpusDoc>,
    #[serde(default)]
    pub tasks: Vec<TaskDoc>,
    #[serde(default)]
    pub output: OutputDoc,
}

/// A corpus with its files read and its seed fixed.
#[derive(Debug, Clone)]
pub enum Corpus {
    AllDeterministic {
        depth: Option<usize>,
    },
    Random {
        count: usize,
        depth: Option<usize>,
        seed: u64,
    },
    Docs(Vec<(String, PolicyDoc)>),
}

impl Corpus {
    /// Member names, when they are known without a framework.
    pub fn names(&self) -> Option<Vec<String>> {
        match self {
            Corpus::AllDeterministic { .. } => None,
            Corpus::Random { count, .. } => Some((0..*count).map(|i| i.to_string()).collect()),
            Corpus::Docs(d) => Some(d.iter().map(|(n, _)| n.clone()).collect()),
        }
    }
}

/// A config with every id resolved and every referenced file loaded.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: ExperimentConfig,
    pub base_dir: PathBuf,
    pub hash: String,
    pub frameworks: BTreeMap<String, Arc<FrameworkSpec>>,
    pub corpora: BTreeMap<String, Corpus>,
    /// Pairs files by task index.
    pub pairs: BTreeMap<usize, Vec<[String; 2]>>,
}

/// Parses JSON, reporting the JSON path of the first offending value.
pub fn parse_json<T: DeserializeOwned>(text: &str, file: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        let loc = if at == "." {
            file.to_string()
        } else {
            format!("{file} at {at}")
        };
        ConfigParseError::new(loc, e.into_inner().to_string())
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let shown = path.display().to_string();
    let text =
        fs::read_to_string(path).map_err(|e| ConfigParseError::new(&shown, e.to_string()))?;
    parse_json(&text, &shown)
}

fn load_universe(r: &UniverseRef, base: &Path, at: &str) -> Result<Universe> {
    match r {
        UniverseRef::Inline(u) => Ok(u.clone()),
        UniverseRef::File(f) => read_json(&base.join(f)).map_err(|e| {
            ConfigParseError::new(e.path, format!("{} (referenced from {at})", e.message))
        }),
    }
}

pub fn build_framework(
    name: &str,
    doc: &FrameworkDoc,
    fallback: Option<&Universe>,
    base: &Path,
    at: &str,
) -> Result<Arc<FrameworkSpec>> {
    let err = |m: String| ConfigParseError::new(at, m);
    let mut spec = match doc.builtin {
        Some(Builtin::DiamondBase) => (*diamond_base_spec()).clone(),
        Some(Builtin::MixtureDemo) => (*mixture_demo_spec()).clone(),
        None => {
            let u = match &doc.universe {
                Some(r) => load_universe(r, base, at)?,
                None => fallback
                    .cloned()
                    .ok_or_else(|| err("no universe given".into()))?,
            };
            let o = doc
                .orientation
                .ok_or_else(|| err("missing `orientation`".into()))?;
            let mut s = FrameworkSpec::new(name, Arc::new(u), o);
            s.deterministic_agents = doc.deterministic_agents.unwrap_or(doc.deterministic);
            s.deterministic_environments =
                doc.deterministic_environments.unwrap_or(doc.deterministic);
            s.integer_rewards = doc.integer_rewards;
            if let Some([lo, hi]) = &doc.value_range {
                s.value_range = Some((lo.clone(), hi.clone()));
            }
            s
        }
    };
    spec.name = name.to_string();
    if let Some(d) = doc.depth {
        spec.table_depth = d;
    }
    if let Some(h) = doc.horizon {
        spec.reward_horizon = h;
    }
    spec.validate().map_err(|e| err(e.to_string()))?;
    Ok(Arc::new(spec))
}

pub fn load_corpus(doc: &CorpusDoc, seed: u64, base: &Path, at: &str) -> Result<Corpus> {
    Ok(match doc {
        CorpusDoc::AllDeterministic { depth } => Corpus::AllDeterministic { depth: *depth },
        CorpusDoc::Random {
            count,
            depth,
            seed: s,
        } => Corpus::Random {
            count: *count,
            depth: *depth,
            seed: s.unwrap_or(seed),
        },
        CorpusDoc::Files(files) => {
            let mut out = Vec::with_capacity(files.len());
            for f in files {
                let p = base.join(f);
                let stem = p
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .ok_or_else(|| ConfigParseError::new(at, format!("bad file name `{f}`")))?;
                if out.iter().any(|(n, _)| *n == stem) {
                    return Err(ConfigParseError::new(
                        at,
                        format!("two members named `{stem}`"),
                    ));
                }
                out.push((stem, read_json::<PolicyDoc>(&p)?));
            }
            Corpus::Docs(out)
        }
        CorpusDoc::Inline(m) => {
            Corpus::Docs(m.iter().map(|(k, v)| (k.clone(), v.clone())).collect())
        }
    })
}

pub fn read_pairs(path: &Path) -> Result<Vec<[String; 2]>> {
    #[derive(Deserialize)]
    struct Row {
        pi: String,
        rho: String,
    }
    let shown = path.display().to_string();
    let mut r =
        csv::Reader::from_path(path).map_err(|e| ConfigParseError::new(&shown, e.to_string()))?;
    r.deserialize::<Row>()
        .enumerate()
        .map(|(i, row)| {
            row.map(|x| [x.pi, x.rho]).map_err(|e| {
                ConfigParseError::new(format!("{shown} line {}", i + 2), e.to_string())
            })
        })
        .collect()
}

pub fn parse_edge(
    s: &str,
) -> Option<(
    rl_translate::translations::Vertex,
    rl_translate::translations::Vertex,
)> {
    use rl_translate::translations::Vertex;
    let (a, b) = s.split_once("->")?;
    Some((Vertex::parse(a.trim())?, Vertex::parse(b.trim())?))
}

impl Loaded {
    pub fn from_file(path: &Path, seed: Option<u64>) -> Result<Loaded> {
        let shown = path.display().to_string();
        let text =
            fs::read_to_string(path).map_err(|e| ConfigParseError::new(&shown, e.to_string()))?;
        let config: ExperimentConfig = parse_json(&text, &shown)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Loaded::new(config, base, seed, &shown)
    }

    /// `seed` overrides the config's own seed.
    pub fn new(
        mut config: ExperimentConfig,
        base_dir: PathBuf,
        seed: Option<u64>,
        file: &str,
    ) -> Result<Loaded> {
        if let Some(s) = seed {
            config.seed = s;
        }
        let at = |p: String| format!("{file} at {p}");
        let hash = config_hash(&config).map_err(|e| ConfigParseError::new(file, e.to_string()))?;
        let fallback = config
            .universe
            .as_ref()
            .map(|u| load_universe(u, &base_dir, &at("universe".into())))
            .transpose()?;
        let mut frameworks = BTreeMap::new();
        for (name, doc) in &config.frameworks {
            let spec = build_framework(
                name,
                doc,
                fallback.as_ref(),
                &base_dir,
                &at(format!("frameworks.{name}")),
            )?;
            frameworks.insert(name.clone(), spec);
        }
        let mut corpora = BTreeMap::new();
        for (name, doc) in &config.corpora {
            corpora.insert(
                name.clone(),
                load_corpus(doc, config.seed, &base_dir, &at(format!("corpora.{name}")))?,
            );
        }
        let mut loaded = Loaded {
            config,
            base_dir,
            hash,
            frameworks,
            corpora,
            pairs: BTreeMap::new(),
        };
        for i in 0..loaded.config.tasks.len() {
            loaded.check_task(i, &|p| at(format!("tasks[{i}].{p}")))?;
        }
        Ok(loaded)
    }

    fn framework_ref(&self, id: &str, at: &str) -> Result<&Arc<FrameworkSpec>> {
        self.frameworks
            .get(id)
            .ok_or_else(|| ConfigParseError::new(at, format!("unknown framework `{id}`")))
    }

    fn corpus_ref(&self, id: &str, at: &str) -> Result<&Corpus> {
        self.corpora
            .get(id)
            .ok_or_else(|| ConfigParseError::new(at, format!("unknown corpus `{id}`")))
    }

    fn check_task(&mut self, i: usize, at: &dyn Fn(&str) -> String) -> Result<()> {
        let task = self.config.tasks[i].task.clone();
        match &task {
            Task::Eval(t) => {
                self.framework_ref(&t.framework, &at("framework"))?;
                self.corpus_ref(&t.agents, &at("agents"))?;
                self.corpus_ref(&t.envs, &at("envs"))?;
            }
            Task::CheckTranslation(t) => {
                let spec = self.framework_ref(&t.framework, &at("framework"))?.clone();
                parse_translation(&t.translation, spec)
                    .map_err(|e| ConfigParseError::new(at("translation"), e.to_string()))?;
                self.corpus_ref(&t.agents, &at("agents"))?;
                self.corpus_ref(&t.envs, &at("envs"))?;
                if let Some(d) = &t.dest_agents {
                    self.corpus_ref(d, &at("dest_agents"))?;
                }
            }
            Task::Audit(t) => {
                if let Some(f) = &t.framework {
                    self.framework_ref(f, &at("framework"))?;
                }
                if let Some(e) = &t.edge {
                    parse_edge(e).ok_or_else(|| {
                        ConfigParseError::new(at("edge"), format!("bad edge `{e}`"))
                    })?;
                }
                if t.argument == AuditKind::Mixture && t.translation.is_none() {
                    return Err(ConfigParseError::new(
                        at("translation"),
                        "the mixture audit needs a translation",
                    ));
                }
            }
            Task::Diamond(t) => {
                if let Some(f) = &t.framework {
                    self.framework_ref(f, &at("framework"))?;
                }
            }
            Task::Elect(t) => {
                self.framework_ref(&t.framework, &at("framework"))?;
                let agents = self.corpus_ref(&t.agents, &at("agents"))?.names();
                let envs = self.corpus_ref(&t.envs, &at("envs"))?.names();
                match t.comparator.split_once(':') {
                    Some(("principal", id)) => {
                        if let Some(names) = &envs {
                            if !names.iter().any(|n| n == id) {
                                return Err(ConfigParseError::new(
                                    at("comparator"),
                                    format!("unknown environment `{id}`"),
                                ));
                            }
                        }
                    }
                    Some(("majority", "tie" | "strict")) => {}
                    None if t.comparator == "majority" => {}
                    _ => {
                        return Err(ConfigParseError::new(
                            at("comparator"),
                            format!("bad comparator `{}`", t.comparator),
                        ));
                    }
                }
                let pairs = match &t.pairs {
                    PairsDoc::Named(s) if s == "all" => None,
                    PairsDoc::Named(f) => Some(read_pairs(&self.base_dir.join(f))?),
                    PairsDoc::List(l) => Some(l.clone()),
                };
                if let (Some(pairs), Some(names)) = (&pairs, &agents) {
                    for p in pairs.iter().flatten() {
                        if !names.contains(p) {
                            return Err(ConfigParseError::new(
                                at("pairs"),
                                format!("unknown agent `{p}`"),
                            ));
                        }
                    }
                }
                if let Some(p) = pairs {
                    self.pairs.insert(i, p);
                }
            }
        }
        Ok(())
    }
}
