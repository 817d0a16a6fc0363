//! Deduplicated store of initialized refinement patterns.
//!
//! Inserting a pattern also stores every side pattern it induces and every
//! distinct permuted variant, so that elements only ever hold a
//! [`PatternRef`] into the database.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::{OnceLock, RwLock};

use log::{debug, warn};
use thiserror::Error;

use crate::pattern::uniform::uniform_pattern;
use crate::pattern::{parse_pattern, PatternError, RefinementPattern};
use crate::topology::{self, ElementType};

/// Environment variable naming the default pattern directory.
pub const PATTERN_DIR_ENV: &str = "REFPAT_PATTERNS";

/// First id handed to generated patterns (side patterns, permutations).
const FIRST_AUTO_ID: i64 = 1000;

/// Index of a pattern inside its database.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatternRef(pub usize);

impl fmt::Display for PatternRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Error)]
pub enum DbError {
    #[error("a different pattern named `{0}` is already stored")]
    NameCollision(String),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<DbError>,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Key for [`PatternDb::lookup`].
#[derive(Debug, Clone, Copy)]
pub enum PatternKey<'a> {
    Id(i64),
    Name(&'a str),
}

impl From<i64> for PatternKey<'_> {
    fn from(id: i64) -> Self {
        PatternKey::Id(id)
    }
}

impl<'a> From<&'a str> for PatternKey<'a> {
    fn from(name: &'a str) -> Self {
        PatternKey::Name(name)
    }
}

/// Outcome of [`PatternDb::load_directory`].
#[derive(Debug, Default)]
pub struct LoadReport {
    /// Patterns newly stored, including generated side patterns and variants.
    pub inserted: usize,
    /// Files processed successfully.
    pub files: Vec<PathBuf>,
    /// Files that failed to parse or insert.
    pub errors: Vec<DbError>,
}

#[derive(Debug, Default, Clone)]
pub struct PatternDb {
    patterns: Vec<RefinementPattern>,
    by_id: BTreeMap<i64, PatternRef>,
    by_name: BTreeMap<String, PatternRef>,
    by_type: BTreeMap<ElementType, Vec<PatternRef>>,
    buckets: BTreeMap<(ElementType, usize, Vec<ElementType>), Vec<PatternRef>>,
    /// Patterns passed to [`PatternDb::insert`], as opposed to generated ones.
    inserted: Vec<PatternRef>,
    next_auto_id: i64,
}

impl PatternDb {
    /// An empty database.
    pub fn new() -> Self {
        PatternDb {
            next_auto_id: FIRST_AUTO_ID,
            ..Default::default()
        }
    }

    /// A database holding the uniform pattern of every refinable type.
    pub fn with_uniform() -> Self {
        let mut db = Self::new();
        for t in ElementType::ALL {
            if let Some(p) = uniform_pattern(t) {
                db.insert(p).expect("built-in patterns are consistent");
            }
        }
        db
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn get(&self, r: PatternRef) -> &RefinementPattern {
        &self.patterns[r.0]
    }

    /// Patterns inserted directly, in insertion order, without the side
    /// patterns and permuted variants generated from them.
    pub fn inserted(&self) -> &[PatternRef] {
        &self.inserted
    }

    pub fn iter(&self) -> impl Iterator<Item = (PatternRef, &RefinementPattern)> {
        self.patterns.iter().enumerate().map(|(i, p)| (PatternRef(i), p))
    }

    pub fn lookup<'a>(&self, key: impl Into<PatternKey<'a>>) -> Option<PatternRef> {
        match key.into() {
            PatternKey::Id(id) => self.by_id.get(&id).copied(),
            PatternKey::Name(name) => self.by_name.get(name).copied(),
        }
    }

    /// Stored patterns whose father has type `t`, in insertion order.
    pub fn patterns_for_type(&self, t: ElementType) -> &[PatternRef] {
        self.by_type.get(&t).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn uniform(&self, t: ElementType) -> Option<PatternRef> {
        crate::pattern::uniform::uniform_id(t)
            .and_then(|id| self.lookup(id))
            .filter(|&r| self.get(r).name() == crate::pattern::uniform::uniform_name(t))
            .or_else(|| uniform_pattern(t).and_then(|p| self.find_equal(&p)))
    }

    /// A stored pattern equal to `p`, if any.
    pub fn find_equal(&self, p: &RefinementPattern) -> Option<PatternRef> {
        self.buckets
            .get(&p.fingerprint())?
            .iter()
            .copied()
            .find(|&r| self.get(r).geometric_eq(p))
    }

    /// Stores `p` with its side patterns and permuted variants, or returns the
    /// equal pattern already stored.
    pub fn insert(&mut self, p: RefinementPattern) -> Result<PatternRef, DbError> {
        if let Some(existing) = self.find_equal(&p) {
            debug!("pattern {} equals stored {}", p.name(), self.get(existing).name());
            if !self.inserted.contains(&existing) {
                self.adopt_names(existing, &p);
                self.inserted.push(existing);
            }
            return Ok(existing);
        }
        if self.by_name.contains_key(p.name()) {
            return Err(DbError::NameCollision(p.name().to_string()));
        }
        let root = self.store(p, true)?;
        self.complete_orbit(root)?;
        self.inserted.push(root);
        Ok(root)
    }

    /// Adds one pattern and its side patterns. File ids that are already
    /// taken are replaced by a generated id.
    fn store(&mut self, mut p: RefinementPattern, keep_id: bool) -> Result<PatternRef, DbError> {
        if !keep_id || self.by_id.contains_key(&p.id()) {
            let id = self.fresh_id();
            if keep_id {
                warn!("pattern {}: id {} already in use, stored as {}", p.name(), p.id(), id);
            }
            p.set_id(id);
        }
        if self.by_name.contains_key(p.name()) {
            let name = format!("{}#{}", p.name(), p.id());
            p.set_name(name);
        }
        let r = PatternRef(self.patterns.len());
        self.by_id.insert(p.id(), r);
        self.by_name.insert(p.name().to_string(), r);
        self.by_type.entry(p.father_type()).or_default().push(r);
        self.buckets.entry(p.fingerprint()).or_default().push(r);
        let sides = p.father_type().side_count();
        self.patterns.push(p);

        for s in 0..sides {
            let Some(sp) = self.patterns[r.0].induced_side_pattern(s)? else {
                continue;
            };
            let sr = match self.find_equal(&sp) {
                Some(existing) => existing,
                None => {
                    let sr = self.store(sp, false)?;
                    self.complete_orbit(sr)?;
                    sr
                }
            };
            self.patterns[r.0].set_side_pattern(s, Some(sr));
        }
        Ok(r)
    }

    /// Stores the permuted variants of `root` and links every member of the
    /// orbit to its own variants: variant `k` permuted by `j` is variant
    /// `perm_k ∘ perm_j` of the root.
    fn complete_orbit(&mut self, root: PatternRef) -> Result<(), DbError> {
        let t = self.get(root).father_type();
        let perms = topology::permutations(t);
        let mut orbit = Vec::with_capacity(perms.len());
        for k in 0..perms.len() {
            if k == 0 {
                orbit.push(root);
                continue;
            }
            let v = self.get(root).permuted(k)?;
            let r = match self.find_equal(&v) {
                Some(existing) => existing,
                None => self.store(v, false)?,
            };
            orbit.push(r);
        }
        for (k, &member) in orbit.iter().enumerate() {
            if !self.get(member).permutations().is_empty() {
                continue;
            }
            let list = perms
                .iter()
                .map(|pj| {
                    let composed: Vec<usize> = pj.iter().map(|&i| perms[k][i]).collect();
                    orbit[topology::permutation_index(t, &composed).expect("permutations form a group")]
                })
                .collect();
            self.patterns[member.0].set_permutations(list);
        }
        Ok(())
    }

    /// Gives a generated pattern the id and name of an equal pattern being
    /// inserted, when both are still free.
    fn adopt_names(&mut self, r: PatternRef, from: &RefinementPattern) {
        if !self.by_id.contains_key(&from.id()) {
            self.by_id.remove(&self.patterns[r.0].id());
            self.by_id.insert(from.id(), r);
            self.patterns[r.0].set_id(from.id());
        }
        if !self.by_name.contains_key(from.name()) {
            self.by_name.remove(self.patterns[r.0].name());
            self.by_name.insert(from.name().to_string(), r);
            self.patterns[r.0].set_name(from.name().to_string());
        }
    }

    fn fresh_id(&mut self) -> i64 {
        while self.by_id.contains_key(&self.next_auto_id) {
            self.next_auto_id += 1;
        }
        let id = self.next_auto_id;
        self.next_auto_id += 1;
        id
    }

    /// Parses and inserts one pattern file; returns the number of newly
    /// stored patterns.
    pub fn load_file(&mut self, path: &Path) -> Result<usize, DbError> {
        let text = std::fs::read_to_string(path).map_err(|source| DbError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let before = self.len();
        let wrap = |e: DbError| DbError::File {
            path: path.to_path_buf(),
            source: Box::new(e),
        };
        let p = parse_pattern(&text).map_err(|e| wrap(e.into()))?;
        self.insert(p).map_err(wrap)?;
        Ok(self.len() - before)
    }

    /// Loads every `*.rpt` file of a directory in file-name order. Failing
    /// files are reported and skipped.
    pub fn load_directory(&mut self, dir: &Path) -> Result<LoadReport, DbError> {
        let io = |source| DbError::Io {
            path: dir.to_path_buf(),
            source,
        };
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(io)?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()
            .map_err(io)?;
        paths.retain(|p| p.is_file() && p.extension().is_some_and(|e| e == "rpt"));
        paths.sort();
        let mut report = LoadReport::default();
        for path in paths {
            match self.load_file(&path) {
                Ok(n) => {
                    report.inserted += n;
                    report.files.push(path);
                }
                Err(e) => {
                    warn!("{e}");
                    report.errors.push(e);
                }
            }
        }
        Ok(report)
    }

    /// Uniform patterns plus the patterns found in the directory named by
    /// [`PATTERN_DIR_ENV`], if set.
    pub fn from_env() -> Result<(Self, Option<LoadReport>), DbError> {
        let mut db = PatternDb::with_uniform();
        let report = match std::env::var_os(PATTERN_DIR_ENV) {
            Some(dir) => Some(db.load_directory(Path::new(&dir))?),
            None => None,
        };
        Ok((db, report))
    }
}

/// Process-wide database, filled on first use by [`PatternDb::from_env`].
/// Falls back to the uniform patterns alone when the directory is unreadable.
pub fn global() -> &'static RwLock<PatternDb> {
    static GLOBAL: OnceLock<RwLock<PatternDb>> = OnceLock::new();
    GLOBAL.get_or_init(|| {
        let db = PatternDb::from_env().map(|(db, _)| db).unwrap_or_else(|e| {
            warn!("{e}");
            PatternDb::with_uniform()
        });
        RwLock::new(db)
    })
}
