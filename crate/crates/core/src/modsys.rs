//! Named modules: sets of program clauses referenced by `mod(name)`.
//!
//! A registry is a value. Registering returns a new registry and leaves the
//! old one untouched; the clause lists themselves are shared.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::ast::{DFormula, GFormula, Sym};
use crate::parser::{parse_program, ModuleFile, ParseError};

/// Environment variable holding colon-separated module directories.
pub const PATH_ENV: &str = "MUTEXLOG_PATH";
pub const MODULE_EXTENSION: &str = "mw";

#[derive(Debug, Error)]
pub enum ModuleError {
    #[error("module file has no `mod(name).` header")]
    Headerless,
    #[error("module `{0}` is already registered")]
    Duplicate(Sym),
    #[error("unknown module `{0}`")]
    Unknown(Sym),
    #[error("cyclic module reference through `{0}`")]
    Cyclic(Sym),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{source}", path.display())]
    Parse {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
}

#[derive(Debug)]
struct Entry {
    clauses: Arc<[DFormula]>,
    /// Right-nested `,` fold of `clauses`, built once.
    folded: Option<DFormula>,
}

#[derive(Clone, Debug, Default)]
pub struct ModuleRegistry {
    entries: Arc<BTreeMap<Sym, Arc<Entry>>>,
    load_paths: Vec<PathBuf>,
}

impl ModuleRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_load_paths(mut self, paths: impl IntoIterator<Item = PathBuf>) -> Self {
        self.load_paths.extend(paths);
        self
    }

    /// Appends the directories listed in `MUTEXLOG_PATH`.
    pub fn with_env_load_paths(self) -> Self {
        let paths = std::env::var(PATH_ENV)
            .map(|v| split_path_list(&v))
            .unwrap_or_default();
        self.with_load_paths(paths)
    }

    pub fn load_paths(&self) -> &[PathBuf] {
        &self.load_paths
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &Sym> {
        self.entries.keys()
    }

    pub fn clauses(&self, name: &str) -> Option<&[DFormula]> {
        self.entries.get(name).map(|e| &*e.clauses)
    }

    pub fn register_module(&self, m: ModuleFile) -> Result<ModuleRegistry, ModuleError> {
        let name = m.name.ok_or(ModuleError::Headerless)?;
        if self.entries.contains_key(&name) {
            return Err(ModuleError::Duplicate(name));
        }
        let folded = DFormula::conj(m.clauses.iter().cloned());
        let mut entries = (*self.entries).clone();
        entries.insert(
            name,
            Arc::new(Entry {
                clauses: m.clauses.into(),
                folded,
            }),
        );
        Ok(ModuleRegistry {
            entries: Arc::new(entries),
            load_paths: self.load_paths.clone(),
        })
    }

    /// The module's clauses as one formula: `c1, (c2, (.. cn))`. A module
    /// with a single clause resolves to that clause. An empty module resolves
    /// to `None` and can never be used for backchaining.
    pub fn resolve(&self, name: &str) -> Result<Option<DFormula>, ModuleError> {
        self.entries
            .get(name)
            .map(|e| e.folded.clone())
            .ok_or_else(|| ModuleError::Unknown(name.into()))
    }

    /// Parses and registers the `.mw` file at `path`.
    pub fn load_path(&self, path: &Path) -> Result<(ModuleRegistry, Sym), ModuleError> {
        let m = read_module_file(path)?;
        let name = m.name.clone().ok_or(ModuleError::Headerless)?;
        Ok((self.register_module(m)?, name))
    }

    /// First `<dir>/<name>.mw` that exists among the load paths.
    pub fn find_module_file(&self, name: &str) -> Option<PathBuf> {
        self.load_paths
            .iter()
            .map(|dir| dir.join(format!("{name}.{MODULE_EXTENSION}")))
            .find(|p| p.is_file())
    }

    /// Loads every module transitively referenced from `roots` that is not
    /// registered yet and can be found on the load paths. Names that cannot
    /// be found are left for the engine to report.
    pub fn autoload<'a>(
        &self,
        roots: impl IntoIterator<Item = &'a DFormula>,
    ) -> Result<ModuleRegistry, ModuleError> {
        let mut reg = self.clone();
        let mut pending: Vec<Sym> = Vec::new();
        for d in roots {
            collect_modrefs(d, &mut pending);
        }
        for clauses in reg.entries.values() {
            for d in clauses.clauses.iter() {
                collect_modrefs(d, &mut pending);
            }
        }
        while let Some(name) = pending.pop() {
            if reg.contains(&name) {
                continue;
            }
            let Some(path) = reg.find_module_file(&name) else {
                continue;
            };
            let m = read_module_file(&path)?;
            if m.name.as_deref() != Some(&*name) {
                // The file does not declare the module we were looking for.
                continue;
            }
            m.clauses
                .iter()
                .for_each(|d| collect_modrefs(d, &mut pending));
            reg = reg.register_module(m)?;
        }
        Ok(reg)
    }
}

pub fn read_module_file(path: &Path) -> Result<ModuleFile, ModuleError> {
    let text = std::fs::read_to_string(path).map_err(|source| ModuleError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_program(&text).map_err(|source| ModuleError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

pub fn split_path_list(s: &str) -> Vec<PathBuf> {
    s.split(':')
        .filter(|p| !p.is_empty())
        .map(PathBuf::from)
        .collect()
}

/// Module names mentioned in D-positions of `d`, including antecedents of
/// implication goals inside clause bodies.
pub fn collect_modrefs(d: &DFormula, out: &mut Vec<Sym>) {
    match d {
        DFormula::ModRef(m) => {
            if !out.contains(m) {
                out.push(m.clone());
            }
        }
        DFormula::Atom(_) => {}
        DFormula::Imp(g, d) => {
            collect_goal_modrefs(g, out);
            collect_modrefs(d, out);
        }
        DFormula::All(_, d) => collect_modrefs(d, out),
        DFormula::Choice(l, r) | DFormula::And(l, r) => {
            collect_modrefs(l, out);
            collect_modrefs(r, out);
        }
    }
}

/// Module names referenced from a goal's implication antecedents.
pub fn collect_goal_modrefs(g: &GFormula, out: &mut Vec<Sym>) {
    match g {
        GFormula::Atom(_) => {}
        GFormula::And(l, r) => {
            collect_goal_modrefs(l, out);
            collect_goal_modrefs(r, out);
        }
        GFormula::Imp(d, g) => {
            collect_modrefs(d, out);
            collect_goal_modrefs(g, out);
        }
        GFormula::Exists(_, g) => collect_goal_modrefs(g, out),
    }
}
