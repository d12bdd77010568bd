use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rlt::config::{
    parse_json, read_json, AuditKind, AuditTask, Builtin, CheckTask, CorpusDoc, DiamondTask,
    ElectTask, EvalTask, Expect, ExperimentConfig, FrameworkDoc, LawName, PairsDoc, Task, TaskDoc,
};
use rlt::{execute, exit_code, write_reports, ConfigParseError, Loaded};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(
    name = "rlt",
    version,
    about = "Exact checks of reinforcement-learning framework translations"
)]
struct Cli {
    /// Seed for generated corpora; overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Table depth for frameworks and generated corpora.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Reward horizon of the framework.
    #[arg(long, global = true)]
    horizon: Option<usize>,
    /// Output file, or the report directory for `run`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Setup {
    /// Framework JSON file, or `diamond-base` / `mixture-demo`.
    #[arg(long, default_value = "diamond-base")]
    framework: String,
    /// Agent corpus: `all`, `random:N`, a corpus JSON or a policy JSON.
    #[arg(long, default_value = "all")]
    agents: String,
    /// Environment corpus, same forms as `--agents`.
    #[arg(long, default_value = "all")]
    envs: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact values of every agent against every environment.
    Eval {
        #[command(flatten)]
        setup: Setup,
        /// Finite horizon t instead of the total value.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Check translation laws on corpora.
    CheckTranslation {
        /// Translation id, e.g. `prepend-percept:y0` or `local-reverse . identity`.
        translation: String,
        #[command(flatten)]
        setup: Setup,
        #[arg(long)]
        dest_agents: Option<String>,
        #[arg(long, value_delimiter = ',', default_value = "weak")]
        laws: Vec<String>,
    },
    /// Replay an impossibility argument against candidate translations.
    Audit {
        /// mixture, descending-chain, cardinality, nonstrong-times-map or nonstrong-prepend-action.
        argument: String,
        /// Catalog id to audit instead of the planted candidates.
        #[arg(long)]
        translation: Option<String>,
        /// Framework JSON file, or `diamond-base` / `mixture-demo`.
        #[arg(long)]
        framework: Option<String>,
        /// Diamond edge such as `F->Fae`.
        #[arg(long)]
        edge: Option<String>,
        /// Chain length K for descending-chain [default: 6].
        #[arg(long)]
        chain_length: Option<usize>,
        /// Mixture count n for cardinality [default: 6].
        #[arg(long)]
        samples: Option<usize>,
        /// Probability grain of the depth-1 environment maps tried by mixture [default: 4].
        #[arg(long)]
        grain: Option<i64>,
        /// Expect no contradiction instead.
        #[arg(long)]
        expect_none: bool,
    },
    /// The twelve-cell verdict matrix over the four diamond frameworks.
    Diamond {
        /// Base framework [default: diamond-base].
        #[arg(long)]
        framework: Option<String>,
        /// Chain length K for the negative cells [default: 6].
        #[arg(long)]
        chain_length: Option<usize>,
        /// Mixture count n for the negative cells [default: 6].
        #[arg(long)]
        samples: Option<usize>,
        /// Print the JSON report instead of the table.
        #[arg(long)]
        json: bool,
    },
    /// Compare agent pairs and emit tallies as CSV.
    Elect {
        #[command(flatten)]
        setup: Setup,
        /// `principal:<env-id>`, `majority`, `majority:tie` or `majority:strict`.
        #[arg(long)]
        comparator: String,
        /// CSV file with a `pi,rho` header; all pairs when absent.
        #[arg(long)]
        pairs: Option<String>,
        /// Print the JSON report instead of CSV.
        #[arg(long)]
        json: bool,
    },
    /// Parse and validate a config, framework, universe or policy file.
    Validate {
        file: PathBuf,
        /// Framework to bind a policy file against.
        #[arg(long)]
        framework: Option<String>,
    },
    /// Run every task of an experiment config.
    Run { config: PathBuf },
}

enum Failure {
    Config(ConfigParseError),
    Other(anyhow::Error),
}

impl From<ConfigParseError> for Failure {
    fn from(e: ConfigParseError) -> Self {
        Failure::Config(e)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn framework_doc(cli: &Cli, arg: &str) -> Result<FrameworkDoc, ConfigParseError> {
    let mut doc = match arg {
        "diamond-base" => FrameworkDoc {
            builtin: Some(Builtin::DiamondBase),
            ..Default::default()
        },
        "mixture-demo" => FrameworkDoc {
            builtin: Some(Builtin::MixtureDemo),
            ..Default::default()
        },
        path => {
            let mut d: FrameworkDoc = read_json(Path::new(path))?;
            // Universe files are relative to the framework file.
            if let Some(rlt::config::UniverseRef::File(f)) = &d.universe {
                let base = Path::new(path).parent().unwrap_or(Path::new(""));
                d.universe = Some(rlt::config::UniverseRef::File(
                    base.join(f).display().to_string(),
                ));
            }
            d
        }
    };
    if cli.depth.is_some() {
        doc.depth = cli.depth;
    }
    if cli.horizon.is_some() {
        doc.horizon = cli.horizon;
    }
    Ok(doc)
}

fn corpus_doc(cli: &Cli, arg: &str) -> Result<CorpusDoc, ConfigParseError> {
    if arg == "all" {
        return Ok(CorpusDoc::AllDeterministic { depth: cli.depth });
    }
    if let Some(n) = arg.strip_prefix("random:") {
        let count = n
            .parse()
            .map_err(|_| ConfigParseError::new(arg, "expected `random:<count>`"))?;
        return Ok(CorpusDoc::Random {
            count,
            depth: cli.depth,
            seed: cli.seed,
        });
    }
    let text = fs::read_to_string(arg).map_err(|e| ConfigParseError::new(arg, e.to_string()))?;
    let v: Value = parse_json(&text, arg)?;
    if v.get("kind").is_some() {
        Ok(CorpusDoc::Files(vec![arg.to_string()]))
    } else {
        parse_json(&text, arg)
    }
}

/// A one-task config for the direct subcommands.
fn single(
    cli: &Cli,
    task: Task,
    frameworks: &[(&str, &str)],
    corpora: &[(&str, &str)],
) -> Result<Loaded, Failure> {
    let mut config = ExperimentConfig {
        seed: cli.seed.unwrap_or(0),
        ..Default::default()
    };
    for (id, arg) in frameworks {
        config
            .frameworks
            .insert(id.to_string(), framework_doc(cli, arg)?);
    }
    for (id, arg) in corpora {
        config.corpora.insert(id.to_string(), corpus_doc(cli, arg)?);
    }
    config.tasks.push(TaskDoc {
        name: None,
        required: true,
        task,
    });
    Ok(Loaded::new(
        config,
        PathBuf::new(),
        cli.seed,
        "command line",
    )?)
}

fn emit(cli: &Cli, body: &str) -> std::io::Result<()> {
    match &cli.out {
        Some(p) => fs::write(p, body),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

/// Runs the single task and prints its report, or one of its side files.
fn run_single(cli: &Cli, ctx: &Loaded, side: Option<&str>) -> Result<u8, Failure> {
    let results = execute(ctx);
    let r = &results[0];
    if let Some(e) = &r.error {
        eprintln!("error: {e}");
    }
    let body = side
        .and_then(|ext| r.extra.iter().find(|(x, _)| *x == ext))
        .map_or(r.report.as_str(), |(_, b)| b.as_str());
    emit(cli, body)?;
    Ok(exit_code(&results) as u8)
}

fn parse_laws(names: &[String]) -> Result<Vec<LawName>, ConfigParseError> {
    names
        .iter()
        .map(|n| {
            serde_json::from_value(Value::String(n.clone()))
                .map_err(|_| ConfigParseError::new("--laws", format!("unknown law `{n}`")))
        })
        .collect()
}

fn dispatch(cli: &Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Eval { setup, steps } => {
            let task = Task::Eval(EvalTask {
                framework: "F".into(),
                agents: "A".into(),
                envs: "E".into(),
                horizon: *steps,
            });
            let ctx = single(
                cli,
                task,
                &[("F", &setup.framework)],
                &[("A", &setup.agents), ("E", &setup.envs)],
            )?;
            run_single(cli, &ctx, None)
        }
        Command::CheckTranslation {
            translation,
            setup,
            dest_agents,
            laws,
        } => {
            let task = Task::CheckTranslation(CheckTask {
                translation: translation.clone(),
                framework: "F".into(),
                agents: "A".into(),
                envs: "E".into(),
                dest_agents: dest_agents.as_ref().map(|_| "D".into()),
                laws: parse_laws(laws)?,
            });
            let mut corpora = vec![("A", setup.agents.as_str()), ("E", setup.envs.as_str())];
            if let Some(d) = dest_agents {
                corpora.push(("D", d));
            }
            let ctx = single(cli, task, &[("F", &setup.framework)], &corpora)?;
            run_single(cli, &ctx, None)
        }
        Command::Audit {
            argument,
            translation,
            framework,
            edge,
            chain_length,
            samples,
            grain,
            expect_none,
        } => {
            let kind: AuditKind =
                serde_json::from_value(Value::String(argument.clone())).map_err(|_| {
                    ConfigParseError::new("argument", format!("unknown audit `{argument}`"))
                })?;
            let task = Task::Audit(AuditTask {
                argument: kind,
                translation: translation.clone(),
                framework: framework.as_ref().map(|_| "F".into()),
                edge: edge.clone(),
                chain_length: *chain_length,
                samples: *samples,
                grain: *grain,
                corpus_depth: cli.depth,
                expect: if *expect_none {
                    Expect::NoContradiction
                } else {
                    Expect::Contradiction
                },
            });
            let fws: Vec<(&str, &str)> = framework.iter().map(|f| ("F", f.as_str())).collect();
            let ctx = single(cli, task, &fws, &[])?;
            run_single(cli, &ctx, None)
        }
        Command::Diamond {
            framework,
            chain_length,
            samples,
            json,
        } => {
            let task = Task::Diamond(DiamondTask {
                framework: framework.as_ref().map(|_| "F".into()),
                chain_length: *chain_length,
                samples: *samples,
                seed: cli.seed,
            });
            let fws: Vec<(&str, &str)> = framework.iter().map(|f| ("F", f.as_str())).collect();
            let ctx = single(cli, task, &fws, &[])?;
            run_single(cli, &ctx, (!json).then_some("tsv"))
        }
        Command::Elect {
            setup,
            comparator,
            pairs,
            json,
        } => {
            let task = Task::Elect(ElectTask {
                framework: "F".into(),
                agents: "A".into(),
                envs: "E".into(),
                comparator: comparator.clone(),
                pairs: PairsDoc::Named(pairs.clone().unwrap_or_else(|| "all".into())),
            });
            let ctx = single(
                cli,
                task,
                &[("F", &setup.framework)],
                &[("A", &setup.agents), ("E", &setup.envs)],
            )?;
            run_single(cli, &ctx, (!json).then_some("csv"))
        }
        Command::Validate { file, framework } => validate(cli, file, framework.as_deref()),
        Command::Run { config } => {
            let ctx = Loaded::from_file(config, cli.seed)?;
            let dir = cli
                .out
                .clone()
                .unwrap_or_else(|| ctx.base_dir.join(&ctx.config.output.dir));
            let results = execute(&ctx);
            write_reports(&results, &dir)?;
            for r in &results {
                let mark = if r.passed {
                    "PASS"
                } else if r.required {
                    "FAIL"
                } else {
                    "fail (optional)"
                };
                println!("{} {mark}", r.file_stem());
                if let Some(e) = &r.error {
                    eprintln!("{}: {e}", r.file_stem());
                }
            }
            Ok(exit_code(&results) as u8)
        }
    }
}

fn validate(cli: &Cli, file: &Path, framework: Option<&str>) -> Result<u8, Failure> {
    let shown = file.display().to_string();
    let text =
        fs::read_to_string(file).map_err(|e| ConfigParseError::new(&shown, e.to_string()))?;
    let v: Value = parse_json(&text, &shown)?;
    let has = |k: &str| v.get(k).is_some();
    let summary = if has("kind") && has("table") {
        let doc: rl_translate::policies::json::PolicyDoc = parse_json(&text, &shown)?;
        if let Some(f) = framework {
            let loaded = single_framework(cli, f)?;
            let spec = loaded.frameworks["F"].clone();
            let bound = match doc.kind {
                rl_translate::policies::json::PolicyKind::Agent => {
                    rl_translate::policies::json::agent_from_doc(&doc, spec).map(|_| ())
                }
                rl_translate::policies::json::PolicyKind::Environment => {
                    rl_translate::policies::json::env_from_doc(&doc, spec).map(|_| ())
                }
            };
            bound.map_err(|e| ConfigParseError::new(&shown, e.to_string()))?;
        }
        json!({ "file": shown, "kind": "policy", "entries": doc.table.len() })
    } else if has("actions") && has("percepts") {
        let u: rl_translate::model::Universe = parse_json(&text, &shown)?;
        json!({ "file": shown, "kind": "universe", "actions": u.actions().count(), "percepts": u.percepts().count() })
    } else if has("orientation") || has("builtin") {
        let loaded = single_framework(cli, &shown)?;
        let warnings = loaded.frameworks["F"].validate().unwrap_or_default();
        json!({ "file": shown, "kind": "framework", "warnings": warnings })
    } else {
        let ctx = Loaded::from_file(file, cli.seed)?;
        let warnings: Vec<String> = ctx
            .frameworks
            .iter()
            .flat_map(|(n, s)| {
                s.validate()
                    .unwrap_or_default()
                    .into_iter()
                    .map(move |w| format!("{n}: {w}"))
            })
            .collect();
        json!({
            "file": shown,
            "kind": "config",
            "config_hash": ctx.hash,
            "tasks": ctx.config.tasks.len(),
            "warnings": warnings,
        })
    };
    emit(
        cli,
        &rl_translate::report::to_json(&summary).map_err(anyhow::Error::from)?,
    )?;
    Ok(0)
}

fn single_framework(cli: &Cli, arg: &str) -> Result<Loaded, Failure> {
    let mut config = ExperimentConfig::default();
    config
        .frameworks
        .insert("F".into(), framework_doc(cli, arg)?);
    Ok(Loaded::new(config, PathBuf::new(), cli.seed, arg)?)
}
