//! `planminer`: batch front end. Every pipeline step goes through the HTTP service, either the
//! one named by `--server` or an in-process instance on an ephemeral port.

mod render;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use planminer_client::{ChoiceRequest, Client};
use planminer_core::event_log::write_event_log;
use planminer_core::planner::{Estimator, VariantChoice};
use planminer_core::synthetic::{generate_synthetic_log, GeneratorSpec};
use planminer_core::tree::ProjectTree;
use planminer_core::Fraction;
use planminer_service::{bind, serve, AppState, DEFAULT_PORT, DEFAULT_VARIANT_LIMIT};
use serde_json::{json, Value};

#[derive(Debug, Parser)]
#[command(name = "planminer", version, about = "Mine project networks from event logs and plan project variants")]
struct Cli {
    /// Base URL of a running service; without it an in-process service is used
    #[arg(long, global = true, env = "PLANMINER_SERVER")]
    server: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mine a project tree from a log
    Mine(Common),
    /// Filter the mined net by flow frequency
    Filter {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        threshold: Threshold,
        /// Annotate exclusive choices with learned decision rules
        #[arg(long)]
        rules: bool,
    },
    /// Learn decision rules at the exclusive choices
    Rules {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        threshold: Threshold,
    },
    /// List project variants by frequency
    Variants {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        threshold: Threshold,
        #[arg(long, default_value_t = DEFAULT_VARIANT_LIMIT as u64, value_parser = clap::value_parser!(u64).range(1..))]
        limit: u64,
    },
    /// Decode a variant and schedule it
    Plan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        threshold: Threshold,
        #[command(flatten)]
        planning: Planning,
    },
    /// Everything above in one document
    Report {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        threshold: Threshold,
        #[command(flatten)]
        planning: Planning,
    },
    /// Run the HTTP service
    Serve {
        #[arg(long, env = "PLANMINER_PORT", default_value_t = DEFAULT_PORT)]
        port: u16,
        /// Keep JSON snapshots of sessions here and restore them on start
        #[arg(long)]
        snapshots: Option<PathBuf>,
    },
    /// Generate a synthetic log as CSV
    Gen {
        /// Generator specification (JSON)
        #[arg(long, conflicts_with = "tree", required_unless_present = "tree")]
        spec: Option<PathBuf>,
        /// Project tree (JSON) to play out
        #[arg(long)]
        tree: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        cases: u64,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Event log (CSV)
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Tree to use instead of mining: `mine` output, or `filter` output whose threshold also applies
    #[arg(long, value_name = "FILE")]
    tree: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Args)]
struct Threshold {
    /// Flow-frequency threshold in [0, 1]
    #[arg(long, value_parser = parse_gamma)]
    gamma: Option<String>,
}

#[derive(Debug, Args)]
struct Planning {
    /// Branch selections such as `xor1=0,loop1=2`
    #[arg(long, value_delimiter = ',', value_parser = parse_selector)]
    choose: Vec<String>,
    /// Duration estimator: mean, median, p90 or fixed:<project>
    #[arg(long, default_value = "mean", value_parser = parse_estimator)]
    durations: String,
    /// Serial order to compare against, comma separated
    #[arg(long, value_delimiter = ',')]
    baseline: Option<Vec<String>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn parse_gamma(text: &str) -> Result<String, String> {
    Fraction::parse(text).map(|_| text.trim().to_string()).ok_or_else(|| "expected a number in [0, 1]".to_string())
}

fn parse_selector(text: &str) -> Result<String, String> {
    VariantChoice::from_selectors([text]).map(|_| text.trim().to_string()).map_err(|e| e.to_string())
}

fn parse_estimator(text: &str) -> Result<String, String> {
    text.parse::<Estimator>().map(|_| text.trim().to_string()).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build().expect("tokio runtime");
    match runtime.block_on(run(cli)) {
        Ok(output) => {
            print!("{output}");
            ExitCode::SUCCESS
        }
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

async fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Serve { port, snapshots } => {
            tracing_subscriber::fmt()
                .with_writer(std::io::stderr)
                .with_max_level(tracing_subscriber::filter::LevelFilter::INFO)
                .init();
            let state = match snapshots {
                Some(dir) => {
                    AppState::with_snapshots(&dir).await.with_context(|| format!("reading {}", dir.display()))?
                }
                None => AppState::new(),
            };
            let listener = bind(port).await.with_context(|| format!("binding port {port}"))?;
            eprintln!("listening on http://{}", listener.local_addr()?);
            serve(listener, Arc::new(state)).await?;
            Ok(String::new())
        }
        Command::Gen { spec, tree, cases, seed } => generate(spec.as_deref(), tree.as_deref(), cases, seed),
        command => {
            let client = connect(cli.server).await?;
            pipeline(&client, command).await
        }
    }
}

async fn connect(server: Option<String>) -> Result<Client> {
    if let Some(url) = server {
        return Ok(Client::new(url));
    }
    let listener = bind(0).await.context("starting the in-process service")?;
    let addr = listener.local_addr()?;
    tokio::spawn(serve(listener, Arc::new(AppState::new())));
    Ok(Client::new(format!("http://{addr}")))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Tree JSON from `--tree`, plus the threshold when the file is `filter` output.
fn tree_file(path: &Path) -> Result<(Value, Option<String>)> {
    let value: Value = serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    let (tree, gamma) = match value.get("tree_json") {
        Some(tree) => (tree.clone(), value.get("gamma").map(|g| g.to_string())),
        None => (value, None),
    };
    ProjectTree::from_json(&tree.to_string()).with_context(|| format!("tree in {}", path.display()))?;
    Ok((tree, gamma))
}

struct Opened {
    id: String,
    gamma: String,
}

async fn open(client: &Client, common: &Common, threshold: Option<&Threshold>) -> Result<Opened> {
    let csv = read(&common.input)?;
    let (created, file_gamma) = match &common.tree {
        Some(path) => {
            let (tree, gamma) = tree_file(path)?;
            (client.create_session_with_tree(csv, &tree).await?, gamma)
        }
        None => (client.create_session(csv).await?, None),
    };
    let id = created["session"].as_str().context("service returned no session id")?.to_string();
    let gamma = threshold.and_then(|t| t.gamma.clone()).or(file_gamma).unwrap_or_else(|| "0".into());
    Ok(Opened { id, gamma })
}

fn unsupported(format: Format, what: &str) -> anyhow::Error {
    UsageError(format!("{what} has no {format:?} output").to_lowercase()).into()
}

fn pretty(value: &Value) -> String {
    format!("{}\n", serde_json::to_string_pretty(value).expect("JSON value serializes"))
}

fn choice_request(planning: &Planning) -> Result<ChoiceRequest> {
    let choice = VariantChoice::from_selectors(planning.choose.iter().map(String::as_str))
        .map_err(|e| UsageError(e.to_string()))?;
    Ok(ChoiceRequest {
        xor: choice.xor,
        loops: choice.loops,
        durations: Some(planning.durations.clone()),
        baseline: planning.baseline.clone(),
    })
}

async fn pipeline(client: &Client, command: Command) -> Result<String> {
    match command {
        Command::Mine(common) => {
            let session = open(client, &common, None).await?;
            let tree = client.tree(&session.id).await?;
            Ok(match common.format {
                Format::Json => pretty(&tree["json"]),
                Format::Text => format!("{}\n", tree["tree"].as_str().unwrap_or_default()),
                Format::Dot => client.export_dot(&session.id, "0", false).await?,
            })
        }
        Command::Filter { common, threshold, rules } => {
            let session = open(client, &common, Some(&threshold)).await?;
            Ok(match common.format {
                Format::Json => pretty(&client.model(&session.id, &session.gamma, rules).await?),
                Format::Dot => client.export_dot(&session.id, &session.gamma, rules).await?,
                Format::Text => render::model_text(&client.model(&session.id, &session.gamma, rules).await?),
            })
        }
        Command::Rules { common, threshold } => {
            let session = open(client, &common, Some(&threshold)).await?;
            Ok(match common.format {
                Format::Json => pretty(&client.rules(&session.id, &session.gamma).await?),
                Format::Text => {
                    client.rules(&session.id, &session.gamma).await?["text"].as_str().unwrap_or_default().to_string()
                }
                Format::Dot => client.export_dot(&session.id, &session.gamma, true).await?,
            })
        }
        Command::Variants { common, threshold, limit } => {
            if common.format == Format::Dot {
                return Err(unsupported(common.format, "variants"));
            }
            let session = open(client, &common, Some(&threshold)).await?;
            let variants = client.variants(&session.id, &session.gamma, limit as usize).await?;
            Ok(match common.format {
                Format::Text => render::variants_text(&variants),
                _ => pretty(&variants),
            })
        }
        Command::Plan { common, threshold, planning } => {
            let request = choice_request(&planning)?;
            let session = open(client, &common, Some(&threshold)).await?;
            client.model(&session.id, &session.gamma, false).await?;
            let outcome = client.choose(&session.id, &request).await?;
            Ok(match common.format {
                Format::Json => pretty(&outcome),
                Format::Text => render::plan_text(&outcome)?,
                Format::Dot => render::plan_dot(&outcome),
            })
        }
        Command::Report { common, threshold, planning } => {
            if common.format == Format::Dot {
                return Err(unsupported(common.format, "report"));
            }
            let request = (!planning.choose.is_empty()).then(|| choice_request(&planning)).transpose()?;
            let session = open(client, &common, Some(&threshold)).await?;
            let mut summary = client.session(&session.id).await?;
            let model = client.model(&session.id, &session.gamma, true).await?;
            let variants = client.variants(&session.id, &session.gamma, DEFAULT_VARIANT_LIMIT).await?;
            let plan = match &request {
                Some(request) => client.choose(&session.id, request).await?,
                None => Value::Null,
            };
            let report = json!({
                "stats": summary["stats"].take(),
                "tree": model["tree"],
                "gamma": model["gamma"],
                "structure": model["structure"],
                "rules": model["rules"],
                "variants": variants["variants"],
                "plan": plan,
            });
            Ok(match common.format {
                Format::Text => render::report_text(&report)?,
                _ => pretty(&report),
            })
        }
        Command::Serve { .. } | Command::Gen { .. } => unreachable!("handled without a service"),
    }
}

fn generate(spec: Option<&Path>, tree: Option<&Path>, cases: u64, seed: u64) -> Result<String> {
    let spec = match (spec, tree) {
        (Some(path), _) => {
            let mut spec: GeneratorSpec =
                serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
            spec.seed = seed;
            spec
        }
        (None, Some(path)) => {
            let (tree, _) = tree_file(path)?;
            GeneratorSpec::tree(&ProjectTree::from_json(&tree.to_string())?, cases, seed)
        }
        (None, None) => return Err(UsageError("gen needs --spec or --tree".into()).into()),
    };
    Ok(write_event_log(&generate_synthetic_log(&spec)?))
}
