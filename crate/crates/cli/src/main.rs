//! `recipegraph` — annotate, validate and adapt recipe graphs from the shell.
//!
//! Exit codes: 0 success (or a clean graph for `validate`), 1 validation
//! violations, 2 usage errors, 3 unreadable or invalid input.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use recipegraph::adaptation::{adapt, AdaptationRequest};
use recipegraph::annotator::annotate;
use recipegraph::graph::{export_dot, validate};
use recipegraph::textproc::{analyze, debug_dump};
use recipegraph::{Ontology, Recipe, RecipeGraph};
use tracing_subscriber::EnvFilter;

#[derive(Debug, Parser)]
#[command(name = "recipegraph", version, about = "Recipe text to semantic action graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Annotate a recipe into a graph document.
    Annotate {
        #[arg(long)]
        ontology: PathBuf,
        #[arg(long)]
        recipe: PathBuf,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a graph; prints the report, exits 1 on violations.
    Validate {
        #[arg(long)]
        ontology: PathBuf,
        #[arg(long)]
        graph: PathBuf,
    },
    /// Substitute ingredient ALPHA with BETA using a donor recipe.
    Adapt {
        #[arg(long)]
        ontology: PathBuf,
        #[arg(long)]
        recipe: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
        #[arg(long)]
        donor_recipe: PathBuf,
        #[arg(long)]
        donor_graph: PathBuf,
    },
    /// Render a graph as Graphviz DOT.
    ExportDot {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Dump tokens, tags, chunks and clauses of a text file.
    DebugNlp {
        #[arg(long)]
        ontology: PathBuf,
        #[arg(long)]
        text: PathBuf,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, env = "RECIPEGRAPH_ONTOLOGY")]
        ontology: PathBuf,
        #[arg(long, env = "RECIPEGRAPH_STORE")]
        store: PathBuf,
        #[arg(long, env = "RECIPEGRAPH_LISTEN", default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
        /// Static assets (the editor UI) served at `/`.
        #[arg(long = "static", env = "RECIPEGRAPH_STATIC")]
        static_dir: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_ontology(path: &Path) -> Result<Ontology> {
    Ontology::from_json(&read(path)?).with_context(|| format!("invalid ontology {}", path.display()))
}

fn load_recipe(path: &Path) -> Result<Recipe> {
    Recipe::from_json(&read(path)?).with_context(|| format!("invalid recipe {}", path.display()))
}

/// A blank file counts as an empty graph.
fn load_graph(path: &Path) -> Result<RecipeGraph> {
    let text = read(path)?;
    if text.trim().is_empty() {
        return Ok(RecipeGraph::new(""));
    }
    RecipeGraph::from_json(&text).with_context(|| format!("invalid graph {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Annotate { ontology, recipe, out } => {
            let o = load_ontology(&ontology)?;
            let r = load_recipe(&recipe)?;
            let g = annotate(&r, &o)?;
            let report = validate(&g, &o);
            for v in &report.violations {
                eprintln!("{}: {} {:?}", v.rule, v.message, v.ids);
            }
            emit(out.as_deref(), &g.to_json())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { ontology, graph } => {
            let o = load_ontology(&ontology)?;
            let g = load_graph(&graph)?;
            let report = validate(&g, &o);
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(if report.is_clean() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Adapt {
            ontology,
            recipe,
            graph,
            alpha,
            beta,
            donor_recipe,
            donor_graph,
        } => {
            let o = load_ontology(&ontology)?;
            let r = load_recipe(&recipe)?;
            let g = load_graph(&graph)?;
            let d = load_recipe(&donor_recipe)?;
            let dg = load_graph(&donor_graph)?;
            let request = AdaptationRequest {
                alpha,
                beta,
                donor_recipe_id: d.id.clone(),
            };
            let out = adapt(&r, &g, &request, &d, &dg, &o)?;
            for f in &out.flags {
                eprintln!("note: {f}");
            }
            println!("{}", serde_json::to_string_pretty(&out.to_doc())?);
            Ok(ExitCode::SUCCESS)
        }
        Command::ExportDot { graph } => {
            print!("{}", export_dot(&load_graph(&graph)?));
            Ok(ExitCode::SUCCESS)
        }
        Command::DebugNlp { ontology, text } => {
            let o = load_ontology(&ontology)?;
            let text = read(&text)?;
            print!("{}", debug_dump(&text, &analyze(&text, &o)));
            Ok(ExitCode::SUCCESS)
        }
        Command::Serve {
            ontology,
            store,
            listen,
            static_dir,
        } => {
            let config = recipegraph_service::Config {
                listen,
                store_root: store,
                ontology,
                static_dir,
            };
            tokio::runtime::Runtime::new()
                .context("cannot start runtime")?
                .block_on(recipegraph_service::serve(config))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
