//! File-backed, versioned storage of recipes and their graphs.
//!
//! Layout under the root directory:
//!
//! ```text
//! recipes/<id>.json
//! graphs/<id>/v<N>.json
//! graphs/<id>/HEAD          {"version": N, "validated_cursor": c}
//! ```
//!
//! Every file is written to a temporary sibling, synced and renamed into
//! place. A new version file is complete before `HEAD` moves to it, so a
//! crash leaves either the old or the new version current.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use recipegraph::{Recipe, RecipeGraph};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("invalid recipe id `{0}`")]
    BadId(String),
    #[error("recipe `{0}` not found")]
    NoRecipe(String),
    #[error("recipe `{0}` has no graph yet")]
    NoGraph(String),
    #[error("recipe `{0}` already exists")]
    Exists(String),
    #[error("corrupt store file {path}: {message}")]
    Corrupt { path: PathBuf, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Pointer to the current graph version of a recipe, plus the editing
/// cursor that goes with it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Head {
    pub version: u64,
    #[serde(default)]
    pub validated_cursor: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecipeSummary {
    pub id: String,
    pub title: String,
}

#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

/// Recipe ids double as file names.
pub fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 128
        && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        && !id.starts_with('-')
}

fn check_id(id: &str) -> Result<(), StoreError> {
    if valid_id(id) {
        Ok(())
    } else {
        Err(StoreError::BadId(id.to_string()))
    }
}

/// Write `bytes` to `path` atomically (temp file, fsync, rename).
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let dir = path.parent().expect("store paths have a parent");
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("file");
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(bytes).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))?;
    if let Ok(d) = fs::File::open(dir) {
        let _ = d.sync_all();
    }
    Ok(())
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Store, StoreError> {
        let root = root.into();
        for sub in ["recipes", "graphs"] {
            let p = root.join(sub);
            fs::create_dir_all(&p).map_err(io_err(&p))?;
        }
        Ok(Store {
            root,
            locks: Mutex::new(HashMap::new()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Per-recipe writer lock; hold it for the whole mutation.
    pub fn writer_lock(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut locks = self.locks.lock().expect("lock table poisoned");
        locks.entry(id.to_string()).or_default().clone()
    }

    fn recipe_path(&self, id: &str) -> PathBuf {
        self.root.join("recipes").join(format!("{id}.json"))
    }

    fn graph_dir(&self, id: &str) -> PathBuf {
        self.root.join("graphs").join(id)
    }

    fn version_path(&self, id: &str, version: u64) -> PathBuf {
        self.graph_dir(id).join(format!("v{version}.json"))
    }

    pub fn list_recipes(&self) -> Result<Vec<RecipeSummary>, StoreError> {
        let dir = self.root.join("recipes");
        let mut out = Vec::new();
        for entry in fs::read_dir(&dir).map_err(io_err(&dir))? {
            let path = entry.map_err(io_err(&dir))?.path();
            let Some(id) = path
                .file_name()
                .and_then(|n| n.to_str())
                .and_then(|n| n.strip_suffix(".json"))
            else {
                continue;
            };
            if !valid_id(id) {
                continue;
            }
            let r = self.recipe(id)?;
            out.push(RecipeSummary { id: r.id, title: r.title });
        }
        out.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(out)
    }

    pub fn recipe(&self, id: &str) -> Result<Recipe, StoreError> {
        check_id(id)?;
        let path = self.recipe_path(id);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(StoreError::NoRecipe(id.into())),
            Err(e) => return Err(io_err(&path)(e)),
        };
        Recipe::from_json(&text).map_err(|e| StoreError::Corrupt {
            path,
            message: e.to_string(),
        })
    }

    pub fn has_recipe(&self, id: &str) -> bool {
        valid_id(id) && self.recipe_path(id).is_file()
    }

    /// Store a new recipe; existing ids are refused.
    pub fn insert_recipe(&self, recipe: &Recipe) -> Result<(), StoreError> {
        check_id(&recipe.id)?;
        if self.has_recipe(&recipe.id) {
            return Err(StoreError::Exists(recipe.id.clone()));
        }
        write_atomic(&self.recipe_path(&recipe.id), recipe.to_json().as_bytes())
    }

    fn read_version(&self, id: &str, version: u64) -> Result<RecipeGraph, StoreError> {
        let path = self.version_path(id, version);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        let g = RecipeGraph::from_json(&text).map_err(|e| StoreError::Corrupt {
            path: path.clone(),
            message: e.to_string(),
        })?;
        if g.version != version || g.recipe_id != id {
            return Err(StoreError::Corrupt {
                path,
                message: format!("holds {} v{}", g.recipe_id, g.version),
            });
        }
        Ok(g)
    }

    /// Current head, recovering from a missing or damaged pointer by taking
    /// the newest readable version file.
    pub fn head(&self, id: &str) -> Result<Option<Head>, StoreError> {
        check_id(id)?;
        let path = self.graph_dir(id).join("HEAD");
        if let Ok(text) = fs::read_to_string(&path) {
            if let Ok(head) = serde_json::from_str::<Head>(&text) {
                if self.read_version(id, head.version).is_ok() {
                    return Ok(Some(head));
                }
            }
        }
        let dir = self.graph_dir(id);
        let Ok(entries) = fs::read_dir(&dir) else {
            return Ok(None);
        };
        let mut versions: Vec<u64> = entries
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                name.strip_prefix('v')?.strip_suffix(".json")?.parse().ok()
            })
            .collect();
        versions.sort_unstable_by(|a, b| b.cmp(a));
        for v in versions {
            if self.read_version(id, v).is_ok() {
                tracing::warn!(recipe = id, version = v, "recovered graph head");
                return Ok(Some(Head {
                    version: v,
                    validated_cursor: 0,
                }));
            }
        }
        Ok(None)
    }

    /// Latest graph and its head.
    pub fn latest(&self, id: &str) -> Result<(RecipeGraph, Head), StoreError> {
        if !self.has_recipe(id) {
            check_id(id)?;
            return Err(StoreError::NoRecipe(id.into()));
        }
        let head = self.head(id)?.ok_or_else(|| StoreError::NoGraph(id.into()))?;
        Ok((self.read_version(id, head.version)?, head))
    }

    pub fn graph_version(&self, id: &str, version: u64) -> Result<RecipeGraph, StoreError> {
        check_id(id)?;
        self.read_version(id, version)
    }

    /// Persist `g` as the next version and move the head to it. The graph's
    /// own version field is overwritten so versions stay gap-free.
    pub fn commit(&self, g: &mut RecipeGraph, validated_cursor: usize) -> Result<Head, StoreError> {
        let id = g.recipe_id.clone();
        check_id(&id)?;
        let next = self.head(&id)?.map_or(1, |h| h.version + 1);
        g.version = next;
        write_atomic(&self.version_path(&id, next), g.to_json().as_bytes())?;
        let head = Head {
            version: next,
            validated_cursor,
        };
        let bytes = serde_json::to_vec(&head).expect("head serializes");
        write_atomic(&self.graph_dir(&id).join("HEAD"), &bytes)?;
        Ok(head)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use recipegraph::Ingredient;

    fn recipe(id: &str) -> Recipe {
        Recipe {
            id: id.into(),
            title: "T".into(),
            ingredients: vec![Ingredient {
                text: "1 mango".into(),
                concept: "Mango".into(),
            }],
            preparation: "Peel the mango.".into(),
        }
    }

    #[test]
    fn ids_are_file_safe() {
        assert!(valid_id("glutinous-rice_2"));
        for bad in ["", "../x", "a/b", "-x", "a b", "é"] {
            assert!(!valid_id(bad), "{bad}");
        }
    }

    #[test]
    fn versions_are_gap_free() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        store.insert_recipe(&recipe("m")).unwrap();
        assert!(matches!(store.insert_recipe(&recipe("m")), Err(StoreError::Exists(_))));
        assert!(matches!(store.latest("m"), Err(StoreError::NoGraph(_))));
        let mut g = RecipeGraph::new("m");
        g.version = 17;
        assert_eq!(store.commit(&mut g, 0).unwrap().version, 1);
        assert_eq!(store.commit(&mut g, 2).unwrap().version, 2);
        let (latest, head) = store.latest("m").unwrap();
        assert_eq!((latest.version, head.validated_cursor), (2, 2));
        assert_eq!(store.graph_version("m", 1).unwrap().version, 1);
        assert_eq!(store.list_recipes().unwrap().len(), 1);
    }

    #[test]
    fn recovers_from_damaged_head() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        store.insert_recipe(&recipe("m")).unwrap();
        let mut g = RecipeGraph::new("m");
        store.commit(&mut g, 0).unwrap();
        store.commit(&mut g, 0).unwrap();
        let gd = dir.path().join("graphs/m");
        // Torn write of a third version and a garbage pointer.
        fs::write(gd.join("v3.json"), "{\"recipe_id\": \"m\", \"vers").unwrap();
        fs::write(gd.join("HEAD"), "{\"vers").unwrap();
        let (latest, _) = store.latest("m").unwrap();
        assert_eq!(latest.version, 2);
        // The next commit reuses the number of the torn file.
        assert_eq!(store.commit(&mut g, 0).unwrap().version, 3);
        assert_eq!(store.latest("m").unwrap().0.version, 3);
    }

    #[test]
    fn unknown_recipe() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        assert!(matches!(store.recipe("x"), Err(StoreError::NoRecipe(_))));
        assert!(matches!(store.latest("x"), Err(StoreError::NoRecipe(_))));
        assert!(matches!(store.recipe("../x"), Err(StoreError::BadId(_))));
    }
}
