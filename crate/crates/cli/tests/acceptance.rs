//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs without a test harness so the lines reach the console.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::{BTreeMap, BTreeSet};
use std::net::SocketAddr;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, ExitCode, Stdio};
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, ensure, Context, Result};
use recipegraph::adaptation::{adapt, graft, AdaptationRequest};
use recipegraph::annotator::annotate;
use recipegraph::correction::{apply_edits, repropagate, Edit, EditOperation, Session};
use recipegraph::graph::{isomorphic, validate, IsoOptions};
use recipegraph::textproc::tokenize;
use recipegraph::{ArcLabel, Ontology, Recipe, RecipeGraph};
use recipegraph_service::Store;
use serde_json::{json, Value};
use support::{branch_mismatches, corpus_failures, fixtures, frontier_mismatches, ontology, scoring_mismatches};

const PIPELINE_BUDGET: Duration = Duration::from_secs(1);
const CORPUS_BUDGET: Duration = Duration::from_secs(10);

fn recipe(name: &str) -> Recipe {
    let path = fixtures().join(format!("recipes/{name}.json"));
    Recipe::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn has_token(text: &str, word: &str) -> bool {
    tokenize(text).iter().any(|t| t.lower.starts_with(word))
}

fn within(budget: Duration, elapsed: Duration) -> Result<()> {
    ensure!(elapsed < budget, "took {elapsed:?}, budget {budget:?}");
    Ok(())
}

/// The single output of the action typed `concept`.
fn output_of(g: &RecipeGraph, concept: &str) -> Result<String> {
    let a = g
        .actions()
        .find(|a| a.concept.as_deref() == Some(concept))
        .ok_or_else(|| anyhow!("no {concept} action"))?;
    match g.outputs(&a.id).as_slice() {
        [one] => Ok(one.to_string()),
        other => bail!("{concept} has outputs {other:?}"),
    }
}

fn input_of(g: &RecipeGraph, concept: &str, label: ArcLabel) -> Result<Vec<String>> {
    let a = g
        .actions()
        .find(|a| a.concept.as_deref() == Some(concept))
        .ok_or_else(|| anyhow!("no {concept} action"))?;
    Ok(g.inputs(&a.id).filter(|i| i.label == label).map(|i| i.to.clone()).collect())
}

fn mango_pipeline(o: &Ontology) -> Result<String> {
    let r = recipe("mango");
    let start = Instant::now();
    let g = annotate(&r, o)?;
    let report = validate(&g, o);
    let elapsed = start.elapsed();
    ensure!(g.actions().count() == 3, "{} actions", g.actions().count());
    ensure!(input_of(&g, "Slice", ArcLabel::HasDOInput)? == [output_of(&g, "Peel")?], "slice DO");
    ensure!(input_of(&g, "Remove", ArcLabel::HasPCInput)? == [output_of(&g, "Slice")?], "remove PC");
    ensure!(report.component_count == 1, "{} components", report.component_count);
    ensure!(g.vertex_count() == 10, "{} vertices", g.vertex_count());
    within(PIPELINE_BUDGET, elapsed)?;
    Ok(format!("3 actions, 10 vertices, 1 component in {elapsed:?}"))
}

fn melt_edits() -> Vec<EditOperation> {
    vec![
        EditOperation::new(
            Edit::AddAction {
                concept: "Melt".into(),
                id: Some("Action:melt_30".into()),
            },
            "c_3",
        ),
        EditOperation::new(
            Edit::AddArc {
                from: "Action:melt_30".into(),
                to: "Food:butter_1".into(),
                label: ArcLabel::HasDOInput,
            },
            "c_3",
        ),
        EditOperation::new(
            Edit::AddArc {
                from: "Action:melt_30".into(),
                to: "Clause:c_3".into(),
                label: ArcLabel::IsRelatedToClause,
            },
            "c_3",
        ),
    ]
}

fn butter_correction(o: &Ontology) -> Result<String> {
    let broken = o.without_variants("Melt");
    let r = recipe("cookies");
    let start = Instant::now();
    let g = annotate(&r, &broken)?;
    let before = validate(&g, &broken);
    ensure!(before.component_count >= 2, "{} components before", before.component_count);
    for id in ["Food:butter_1", "Clause:c_3"] {
        ensure!(g.contains(id), "{id} missing");
        ensure!(g.incoming(id).count() + g.outgoing(id).count() == 0, "{id} not isolated");
    }
    let mut session = Session::new(&g);
    let edited = apply_edits(&g, &melt_edits(), &mut session, &broken)?;
    let (repaired, _) = repropagate(&r, &edited, &session, &broken)?;
    let after = validate(&repaired, &broken);
    let elapsed = start.elapsed();
    ensure!(after.component_count == 1, "{} components after", after.component_count);
    ensure!(after.violations.is_empty(), "{:?}", after.violations);
    ensure!(
        isomorphic(&repaired, &annotate(&r, o)?, IsoOptions::default()),
        "differs from annotation with melt known"
    );
    within(PIPELINE_BUDGET, elapsed)?;
    Ok(format!("{} -> 1 component, clean, isomorphic in {elapsed:?}", before.component_count))
}

fn substitution(o: &Ontology) -> Result<String> {
    let out = o.substitution_candidates("Strawberry", &BTreeSet::from(["Strawberry".to_string()]))?;
    let cheapest: Vec<(&str, u32)> = out.iter().take_while(|(_, c)| *c <= 1).map(|(id, c)| (id.as_str(), *c)).collect();
    ensure!(
        cheapest == [("Blackberry", 1), ("Blueberry", 1), ("Raspberry", 1)],
        "cost-1 candidates {cheapest:?}"
    );
    ensure!(out.iter().skip(3).all(|(_, c)| *c > 1), "unsorted costs {out:?}");
    Ok("Blackberry, Blueberry, Raspberry at cost 1".into())
}

fn prune_graft(o: &Ontology) -> Result<String> {
    let r = recipe("glutinous-rice");
    let d = recipe("roasted-figs");
    let (g, dg) = (annotate(&r, o)?, annotate(&d, o)?);
    let forward = AdaptationRequest {
        alpha: "Mango".into(),
        beta: "Fig".into(),
        donor_recipe_id: d.id.clone(),
    };
    let out = adapt(&r, &g, &forward, &d, &dg, o)?;
    let h = &out.graph;
    let report = validate(h, o);
    ensure!(report.component_count == 1, "{} components", report.component_count);
    ensure!(
        !h.foods().any(|f| f.concept.as_deref().is_some_and(|c| o.subsumes("Mango", c))),
        "mango food left"
    );
    ensure!(
        h.vertices().any(|v| v.concept.as_deref().is_some_and(|c| o.subsumes("Fig", c))),
        "no fig vertex"
    );
    ensure!(!has_token(&out.recipe.preparation, "mango"), "text still mentions mango");

    let back_request = AdaptationRequest {
        alpha: "Fig".into(),
        beta: "Mango".into(),
        donor_recipe_id: r.id.clone(),
    };
    let back = adapt(&out.recipe, h, &back_request, &r, &g, o)?;
    ensure!(isomorphic(&back.graph, &g, IsoOptions::default()), "round trip differs");
    let saved = graft(&out.recipe, h, &back.removed, &r, &g, &out.removed, o)?;
    ensure!(isomorphic(&saved.graph, &g, IsoOptions::default()), "graft with saved branches differs");
    Ok(format!("\"{}\"; round trip isomorphic", out.recipe.preparation))
}

fn corpus_suite(o: &Ontology) -> Result<String> {
    let start = Instant::now();
    let (count, failures) = corpus_failures(o);
    let elapsed = start.elapsed();
    ensure!(count >= 20, "only {count} recipes");
    ensure!(failures.is_empty(), "{} failures, first: {}", failures.len(), failures[0]);
    within(CORPUS_BUDGET, elapsed)?;
    Ok(format!("{count}/{count} recipes in {elapsed:?}"))
}

fn oracles(o: &Ontology) -> Result<String> {
    let (frontier, f_bad) = frontier_mismatches(7, 100);
    let (scores, s_bad) = scoring_mismatches(o, 11, 100);
    let (branches, b_bad) = branch_mismatches(o, 3, 300);
    let bad = f_bad.len() + s_bad.len() + b_bad.len();
    ensure!(
        bad == 0,
        "mismatches: frontier {}, scoring {}, branch {}",
        f_bad.len(),
        s_bad.len(),
        b_bad.len()
    );
    ensure!(branches >= 50, "only {branches} branches compared");
    Ok(format!(
        "0 mismatches ({frontier} frontier points, {scores} scores, {branches} branches)"
    ))
}

/// A `recipegraph serve` child process on a free local port.
struct Served {
    child: Child,
    base: String,
}

impl Served {
    fn start(ontology: &Path, store: &Path) -> Result<Served> {
        let addr: SocketAddr = std::net::TcpListener::bind("127.0.0.1:0")?.local_addr()?;
        let child = Command::new(env!("CARGO_BIN_EXE_recipegraph"))
            .arg("serve")
            .arg("--ontology")
            .arg(ontology)
            .arg("--store")
            .arg(store)
            .arg("--listen")
            .arg(addr.to_string())
            .env("RUST_LOG", "warn")
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .spawn()
            .context("cannot spawn server")?;
        Ok(Served {
            child,
            base: format!("http://{addr}"),
        })
    }

    async fn ready(&self, client: &reqwest::Client) -> Result<()> {
        for _ in 0..200 {
            if client.get(format!("{}/ontology", self.base)).send().await.is_ok() {
                return Ok(());
            }
            tokio::time::sleep(Duration::from_millis(25)).await;
        }
        bail!("server at {} never answered", self.base)
    }

    fn kill(&mut self) {
        // SIGKILL: no graceful shutdown, writes in flight are cut short.
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Drop for Served {
    fn drop(&mut self) {
        self.kill();
    }
}

async fn call(client: &reqwest::Client, base: &str, method: &str, path: &str, body: Value) -> Result<(u16, Value)> {
    let url = format!("{base}{path}");
    let req = match method {
        "GET" => client.get(url),
        _ => client.post(url).json(&body),
    };
    let r = req.send().await?;
    let status = r.status().as_u16();
    Ok((status, r.json().await.unwrap_or(Value::Null)))
}

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.clone(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn melt_batch(base_version: u64) -> Value {
    json!({
        "base_version": base_version,
        "edits": [
            {"kind": "AddAction", "payload": {"concept": "Melt", "id": "Action:melt_30"}, "anchor_clause": "c_3"},
            {"kind": "AddArc", "payload": {"from": "Action:melt_30", "to": "Food:butter_1", "label": "hasDOInput"}, "anchor_clause": "c_3"},
            {"kind": "AddArc", "payload": {"from": "Action:melt_30", "to": "Clause:c_3", "label": "isRelatedToClause"}, "anchor_clause": "c_3"}
        ]
    })
}

async fn service_contract(o: &Ontology) -> Result<String> {
    let dir = tempfile::tempdir()?;
    let ontology_path = dir.path().join("ontology.json");
    std::fs::write(&ontology_path, o.without_variants("Melt").to_json())?;
    let store = dir.path().join("store");
    let client = reqwest::Client::new();
    let mut server = Served::start(&ontology_path, &store)?;
    server.ready(&client).await?;
    let base = server.base.clone();

    let cookies: Value = serde_json::from_str(&std::fs::read_to_string(fixtures().join("recipes/cookies.json"))?)?;
    ensure!(call(&client, &base, "POST", "/recipes", cookies).await?.0 == 201, "recipe not created");
    let (status, g) = call(&client, &base, "POST", "/recipes/cookies/annotate", Value::Null).await?;
    ensure!(status == 200 && g["version"] == 1, "annotate: {status} {g}");
    let (_, report) = call(&client, &base, "GET", "/recipes/cookies/graph/validate", Value::Null).await?;
    ensure!(report["component_count"].as_u64() >= Some(2), "before: {report}");
    let (status, g) = call(&client, &base, "POST", "/recipes/cookies/edits", melt_batch(1)).await?;
    ensure!(status == 200 && g["version"] == 2, "edits: {status} {g}");
    let (status, rp) = call(&client, &base, "POST", "/recipes/cookies/repropagate", Value::Null).await?;
    ensure!(status == 200 && rp["graph"]["version"] == 3, "repropagate: {status}");
    let (_, report) = call(&client, &base, "GET", "/recipes/cookies/graph/validate", Value::Null).await?;
    ensure!(report["component_count"] == 1 && report["violations"] == json!([]), "after: {report}");
    let (_, doc) = call(&client, &base, "GET", "/recipes/cookies/graph", Value::Null).await?;
    let served = RecipeGraph::from_json(&doc.to_string())?;
    ensure!(
        isomorphic(&served, &annotate(&recipe("cookies"), o)?, IsoOptions::default()),
        "served graph differs from annotation with melt known"
    );

    // Stale base version: refused, nothing on disk changes.
    let before = snapshot(&store);
    let (status, body) = call(&client, &base, "POST", "/recipes/cookies/edits", melt_batch(1)).await?;
    ensure!(status == 409 && body["reason"] == "version-mismatch", "stale post: {status} {body}");
    ensure!(snapshot(&store) == before, "stale post touched the store");

    // Kill the server while annotations are being written.
    let writers: Vec<_> = (0..4)
        .map(|_| {
            let (client, base) = (client.clone(), base.clone());
            tokio::spawn(async move {
                let mut ok = 0u32;
                while let Ok((200, _)) = call(&client, &base, "POST", "/recipes/cookies/annotate", Value::Null).await {
                    ok += 1;
                }
                ok
            })
        })
        .collect();
    tokio::time::sleep(Duration::from_millis(300)).await;
    server.kill();
    let mut written = 0;
    for w in writers {
        written += w.await?;
    }
    ensure!(written > 0, "no write landed before the kill");

    let (graph, head) = Store::open(&store)?.latest("cookies")?;
    ensure!(head.version >= 3 && graph.version == head.version, "latest {} head {:?}", graph.version, head);

    // A torn version file and a torn HEAD on top: the last good version wins.
    let gdir = store.join("graphs/cookies");
    let full = std::fs::read(gdir.join(format!("v{}.json", head.version)))?;
    std::fs::write(gdir.join(format!("v{}.json", head.version + 1)), &full[..full.len() / 2])?;
    std::fs::write(gdir.join("HEAD"), b"{\"vers")?;
    let (recovered, _) = Store::open(&store)?.latest("cookies")?;
    ensure!(recovered.version == head.version, "recovered v{} not v{}", recovered.version, head.version);

    let restarted = Served::start(&ontology_path, &store)?;
    restarted.ready(&client).await?;
    let (status, doc) = call(&client, &restarted.base, "GET", "/recipes/cookies/graph", Value::Null).await?;
    ensure!(status == 200 && doc["version"] == head.version, "after restart: {status}");
    Ok(format!(
        "butter scenario over HTTP, stale POST 409 with store unchanged, v{} loadable after kill ({written} writes landed)",
        head.version
    ))
}

fn main() -> ExitCode {
    let o = ontology();
    let runtime = tokio::runtime::Runtime::new().expect("runtime");
    let criteria: Vec<(&str, Box<dyn Fn() -> Result<String>>)> = vec![
        ("mango pipeline", Box::new(|| mango_pipeline(&o))),
        ("butter correction", Box::new(|| butter_correction(&o))),
        ("substitution", Box::new(|| substitution(&o))),
        ("prune/graft", Box::new(|| prune_graft(&o))),
        ("corpus invariants", Box::new(|| corpus_suite(&o))),
        ("oracle equivalence", Box::new(|| oracles(&o))),
        ("service contract", Box::new(|| runtime.block_on(service_contract(&o)))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(anyhow!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {e:#}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
