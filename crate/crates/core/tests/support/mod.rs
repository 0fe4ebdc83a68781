//! Shared helpers for the oracle and corpus checks: random graph
//! generation, brute-force reference implementations and the corpus
//! invariant checker.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use recipegraph::adaptation::extract_branch;
use recipegraph::annotator::{annotate, resolve_target_set, weighted_jaccard, Candidate};
use recipegraph::graph::{availability_frontier, temporal_order, At};
use recipegraph::ontology::TargetSet;
use recipegraph::{Arc, ArcLabel, FoodOrigin, Ontology, Recipe, RecipeGraph, Vertex, VertexKind};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn ontology() -> Ontology {
    Ontology::from_json(&std::fs::read_to_string(fixtures().join("ontology.json")).unwrap()).unwrap()
}

const FOODS: [&str; 6] = ["Mango", "Fig", "Rice", "Sugar", "Salt", "Milk"];

/// Random well-formed graph: actions in creation order, each consuming
/// ingredients or earlier outputs, plus random temporal arcs that only
/// point forward (so the order is acyclic).
pub fn random_graph(rng: &mut StdRng, max_actions: usize) -> RecipeGraph {
    let mut g = RecipeGraph::new("r");
    let n_ing = rng.gen_range(1..=4);
    let mut pool: Vec<String> = Vec::new();
    for k in 0..n_ing {
        let c = FOODS[k];
        let id = g.fresh_id(VertexKind::Food, &c.to_lowercase());
        let origin = if rng.gen_bool(0.9) {
            FoodOrigin::IngredientList
        } else {
            FoodOrigin::UserAdded
        };
        g.add_vertex(Vertex::food(id.clone(), Some(c.into()), origin)).unwrap();
        pool.push(id);
    }
    let n = rng.gen_range(1..=max_actions);
    let mut actions = Vec::new();
    for i in 0..n {
        let a = g.fresh_id(VertexKind::Action, "mix");
        g.add_vertex(Vertex::action(a.clone(), "Mix".into())).unwrap();
        let k = rng.gen_range(0..=2.min(pool.len()));
        for f in pool.choose_multiple(rng, k).cloned().collect::<Vec<_>>() {
            let label = if rng.gen_bool(0.5) {
                ArcLabel::HasDOInput
            } else {
                ArcLabel::HasPCInput
            };
            g.add_arc(Arc::new(a.clone(), f, label)).unwrap();
        }
        for _ in 0..rng.gen_range(0..=2) {
            let o = g.fresh_id(VertexKind::Food, "mix_out");
            g.add_vertex(Vertex::food(o.clone(), None, FoodOrigin::ActionOutput)).unwrap();
            g.add_arc(Arc::new(a.clone(), o.clone(), ArcLabel::HasOutput)).unwrap();
            pool.push(o);
        }
        let clause = Vertex::clause(i + 1, (i * 10, i * 10 + 5));
        let cid = clause.id.clone();
        g.add_vertex(clause).unwrap();
        g.add_arc(Arc::new(a.clone(), cid, ArcLabel::IsRelatedToClause)).unwrap();
        actions.push(a);
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.3) {
                g.add_arc(Arc::new(actions[i].clone(), actions[j].clone(), ArcLabel::IsBefore)).unwrap();
            } else if rng.gen_bool(0.1) {
                g.add_arc(Arc::new(actions[i].clone(), actions[j].clone(), ArcLabel::IsDuring)).unwrap();
            }
        }
    }
    g
}

/// Every ordering of the actions that respects the isBefore arcs.
pub fn linearizations(g: &RecipeGraph) -> Vec<Vec<String>> {
    let actions: Vec<String> = g.actions().map(|a| a.id.clone()).collect();
    let before: Vec<(String, String)> = g
        .arcs()
        .filter(|a| a.label == ArcLabel::IsBefore)
        .map(|a| (a.from.clone(), a.to.clone()))
        .collect();
    let mut out = Vec::new();
    fn go(
        prefix: &mut Vec<String>,
        left: &mut BTreeSet<String>,
        before: &[(String, String)],
        out: &mut Vec<Vec<String>>,
    ) {
        if left.is_empty() {
            out.push(prefix.clone());
            return;
        }
        let ready: Vec<String> = left
            .iter()
            .filter(|x| !before.iter().any(|(p, s)| s == *x && left.contains(p)))
            .cloned()
            .collect();
        for x in ready {
            left.remove(&x);
            prefix.push(x.clone());
            go(prefix, left, before, out);
            prefix.pop();
            left.insert(x);
        }
    }
    go(&mut Vec::new(), &mut actions.into_iter().collect(), &before, &mut out);
    out
}

/// Foods present and not yet consumed when `at` starts, in every replay.
pub fn replay_frontier(g: &RecipeGraph, at: &str) -> BTreeSet<String> {
    let runs = linearizations(g);
    g.foods()
        .filter(|f| {
            let producers = g.producers(&f.id);
            let consumers = g.consumers(&f.id);
            runs.iter().all(|run| {
                let pos = run.iter().position(|x| x == at).unwrap();
                let done = &run[..pos];
                let exists = if producers.is_empty() {
                    matches!(f.origin, Some(FoodOrigin::IngredientList | FoodOrigin::UserAdded))
                } else {
                    producers.iter().any(|p| done.iter().any(|d| d == p))
                };
                exists && !consumers.iter().any(|c| done.iter().any(|d| d == c))
            })
        })
        .map(|f| f.id.clone())
        .collect()
}

pub fn brute_jaccard(p: &BTreeSet<String>, ts: &TargetSet) -> f64 {
    let universe: BTreeSet<&String> = p.iter().chain(ts.members.keys()).collect();
    let (mut num, mut den) = (0.0, 0.0);
    for x in universe {
        let in_p = p.contains(x);
        let w = ts.members.get(x).copied();
        // Each element contributes its target weight (or 1 when untargeted)
        // to the union, and to the intersection only when in both.
        let weight = w.unwrap_or(1.0);
        den += weight;
        if in_p && w.is_some() {
            num += weight;
        }
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Largest action set grown from the roots where every action has all of
/// its inputs inside; found by checking every subset.
pub fn brute_branch(g: &RecipeGraph, roots: &BTreeSet<String>) -> BTreeSet<String> {
    let actions: Vec<String> = g.actions().map(|a| a.id.clone()).collect();
    let mut best: BTreeSet<String> = BTreeSet::new();
    for mask in 0u32..(1 << actions.len()) {
        let set: BTreeSet<String> = (0..actions.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| actions[i].clone())
            .collect();
        let mut foods = roots.clone();
        for a in &set {
            foods.extend(g.outputs(a).into_iter().map(str::to_string));
        }
        let closed = set.iter().all(|a| {
            let inputs: Vec<&Arc> = g.inputs(a).collect();
            !inputs.is_empty() && inputs.iter().all(|i| foods.contains(&i.to))
        });
        // Connected to the roots through the data flow.
        let mut reached = roots.clone();
        let mut grew = true;
        let mut acts = BTreeSet::new();
        while grew {
            grew = false;
            for a in &set {
                if !acts.contains(a) && g.inputs(a).any(|i| reached.contains(&i.to)) {
                    acts.insert(a.clone());
                    reached.extend(g.outputs(a).into_iter().map(str::to_string));
                    grew = true;
                }
            }
        }
        if closed && acts == set && set.len() > best.len() {
            best = set;
        }
    }
    best
}


pub fn corpus() -> Vec<Recipe> {
    let mut paths: Vec<_> = std::fs::read_dir(fixtures().join("corpus"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| Recipe::from_json(&std::fs::read_to_string(p).unwrap()).unwrap())
        .collect()
}

/// Structural invariants every annotated graph must satisfy.
pub fn check(g: &RecipeGraph, o: &Ontology) -> Result<(), String> {
    for a in g.arcs() {
        g.check_arc(a).map_err(|e| e.to_string())?;
    }
    for x in g.actions() {
        let concept = x.concept.as_deref().unwrap();
        let schema = o.schema(concept).ok_or(format!("{concept} has no schema"))?;
        let outputs = g.outputs(&x.id).len();
        if outputs != schema.output_count {
            return Err(format!("{} has {outputs} outputs", x.id));
        }
        let clauses = g.outgoing(&x.id).filter(|a| a.label == ArcLabel::IsRelatedToClause).count();
        if clauses != 1 {
            return Err(format!("{} has {clauses} clause links", x.id));
        }
        let frontier = availability_frontier(g, At::Action(&x.id)).map_err(|e| e.to_string())?;
        for i in g.inputs(&x.id) {
            if !frontier.contains(&i.to) {
                return Err(format!("{} input {} not in its frontier", x.id, i.to));
            }
        }
    }
    temporal_order(g).map_err(|e| e.to_string())?;
    if g.vertices().filter(|v| v.kind == VertexKind::Clause).count() == 0 {
        return Err("no clauses".into());
    }
    Ok(())
}

/// Annotates every corpus recipe twice and returns the failures
/// (invariants or non-determinism), with the number of recipes checked.
pub fn corpus_failures(o: &Ontology) -> (usize, Vec<String>) {
    let recipes = corpus();
    let mut failures = Vec::new();
    for r in &recipes {
        if let Err(e) = r.check(o) {
            failures.push(format!("{}: {e}", r.id));
            continue;
        }
        match annotate(r, o) {
            Ok(g) => {
                if let Err(e) = check(&g, o) {
                    failures.push(format!("{}: {e}", r.id));
                }
                if annotate(r, o).map(|h| h.to_json()).ok() != Some(g.to_json()) {
                    failures.push(format!("{}: not deterministic", r.id));
                }
            }
            Err(e) => failures.push(format!("{}: {e}", r.id)),
        }
    }
    (recipes.len(), failures)
}

/// Foods available at the end: produced or listed, never consumed.
pub fn end_frontier(g: &RecipeGraph) -> BTreeSet<String> {
    g.foods()
        .filter(|f| !g.producers(&f.id).is_empty() || f.origin != Some(FoodOrigin::ActionOutput))
        .filter(|f| g.consumers(&f.id).is_empty())
        .map(|f| f.id.clone())
        .collect()
}

/// Frontier vs. replay over all linearizations: (points checked, mismatches).
pub fn frontier_mismatches(seed: u64, graphs: usize) -> (usize, Vec<String>) {
    let mut rng = StdRng::seed_from_u64(seed);
    let (mut checked, mut bad) = (0, Vec::new());
    for _ in 0..graphs {
        let g = random_graph(&mut rng, 8);
        for a in g.actions() {
            checked += 1;
            if availability_frontier(&g, At::Action(&a.id)).ok() != Some(replay_frontier(&g, &a.id)) {
                bad.push(format!("at {}\n{}", a.id, g.to_json()));
            }
        }
        checked += 1;
        if availability_frontier(&g, At::End).ok() != Some(end_frontier(&g)) {
            bad.push(format!("at end\n{}", g.to_json()));
        }
    }
    (checked, bad)
}

/// Weighted Jaccard and target-set resolution vs. brute force.
pub fn scoring_mismatches(o: &Ontology, seed: u64, rounds: usize) -> (usize, Vec<String>) {
    let names: Vec<String> = o.target_sets().keys().cloned().collect();
    let universe: Vec<String> = o.concepts().map(|c| c.id.clone()).take(40).collect();
    let mut rng = StdRng::seed_from_u64(seed);
    let (mut checked, mut bad) = (0, Vec::new());
    for _ in 0..rounds {
        let word = names.choose(&mut rng).unwrap();
        let ts = o.target_set(word).unwrap();
        let mut pool: Vec<String> = ts.members.keys().cloned().collect();
        pool.extend(universe.iter().cloned());
        let candidates: Vec<Candidate> = (0..rng.gen_range(1..6))
            .map(|i| {
                let k = rng.gen_range(0..5);
                Candidate {
                    id: format!("Food:f_{i}"),
                    serial: rng.gen_range(0..4) * 10 + i,
                    provenance: pool.choose_multiple(&mut rng, k).cloned().collect(),
                }
            })
            .collect();
        for c in &candidates {
            checked += 1;
            let (fast, slow) = (weighted_jaccard(&c.provenance, ts), brute_jaccard(&c.provenance, ts));
            if (fast - slow).abs() >= 1e-12 {
                bad.push(format!("{word}: {fast} vs {slow}"));
            }
        }
        // Reference choice: maximal score, then maximal serial.
        let best = candidates
            .iter()
            .map(|c| (brute_jaccard(&c.provenance, ts), c.serial, c.id.clone()))
            .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)))
            .filter(|b| b.0 > 0.0)
            .map(|b| b.2);
        let got = resolve_target_set(word, &candidates, o).ok().flatten().map(|(id, _)| id);
        checked += 1;
        if got != best {
            bad.push(format!("{word}: chose {got:?}, expected {best:?}"));
        }
    }
    (checked, bad)
}

/// Branch extraction vs. exhaustive subset search: (branches compared, mismatches).
pub fn branch_mismatches(o: &Ontology, seed: u64, graphs: usize) -> (usize, Vec<String>) {
    let mut rng = StdRng::seed_from_u64(seed);
    let (mut compared, mut bad) = (0, Vec::new());
    for _ in 0..graphs {
        let g = random_graph(&mut rng, 6);
        let roots: BTreeSet<String> = g
            .foods()
            .filter(|f| f.origin == Some(FoodOrigin::IngredientList) && f.concept.as_deref() == Some("Mango"))
            .map(|f| f.id.clone())
            .collect();
        let expected = brute_branch(&g, &roots);
        match extract_branch(&g, "Mango", o) {
            Ok(b) => {
                compared += 1;
                if b.actions != expected
                    || b.actions.contains(&b.cut_arc.from)
                    || !b.foods.contains(&b.cut_arc.to)
                {
                    bad.push(format!("got {:?}, expected {expected:?}\n{}", b.actions, g.to_json()));
                }
            }
            Err(e) => {
                // Either no listed mango, or nothing outside consumes the branch.
                let foods: BTreeSet<String> = roots
                    .iter()
                    .cloned()
                    .chain(expected.iter().flat_map(|a| g.outputs(a).into_iter().map(str::to_string)))
                    .collect();
                let exits = g
                    .arcs()
                    .any(|a| a.label.is_input() && foods.contains(&a.to) && !expected.contains(&a.from));
                if !roots.is_empty() && exits {
                    bad.push(format!("{e}\n{}", g.to_json()));
                }
            }
        }
    }
    (compared, bad)
}
