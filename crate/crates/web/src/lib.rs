//! Browser demo bindings. Every operation returns a JSON document that the
//! page in `www/` draws on a canvas; the `*_json` functions hold the logic
//! and are plain Rust so they can be tested natively.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use refpat::check::is_conforming;
use refpat::pattern::edge_sides;
use refpat::reftools::{refine_directional, refine_uniform_toward};
use refpat::samples::{corpus_db, kuhn_cube, triangle_square};
use refpat::{GeoMesh, PatternDb, SideRef};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Material of the refinement target in the demo meshes.
const TARGET: i32 = 2;

const MAX_LEVELS: u32 = 6;

fn db() -> &'static PatternDb {
    static DB: OnceLock<PatternDb> = OnceLock::new();
    DB.get_or_init(|| corpus_db().expect("bundled patterns load"))
}

#[derive(Debug, Serialize)]
pub struct Cell {
    pub kind: &'static str,
    pub material: i32,
    pub level: usize,
    pub nodes: Vec<usize>,
}

#[derive(Debug, Serialize)]
pub struct Drawing {
    pub nodes: Vec<[f64; 3]>,
    /// Distinct edges of the drawn cells.
    pub edges: Vec<[usize; 2]>,
    pub cells: Vec<Cell>,
    /// Leaf counts by element type name.
    pub counts: BTreeMap<&'static str, usize>,
    pub conforming: bool,
}

fn drawing(mesh: &GeoMesh, cells: impl Iterator<Item = usize>) -> Drawing {
    let mut edges = BTreeSet::new();
    let mut out = Vec::new();
    let mut counts = BTreeMap::new();
    for e in cells {
        let el = mesh.element(e);
        let t = el.element_type;
        for s in edge_sides(t) {
            let n = mesh.side_global_nodes(SideRef::new(e, s));
            edges.insert([n[0].min(n[1]), n[0].max(n[1])]);
        }
        *counts.entry(t.name()).or_insert(0) += 1;
        out.push(Cell {
            kind: t.name(),
            material: el.material,
            level: mesh.level(e),
            nodes: el.nodes.clone(),
        });
    }
    Drawing {
        nodes: mesh.nodes().to_vec(),
        edges: edges.into_iter().collect(),
        cells: out,
        counts,
        conforming: is_conforming(mesh),
    }
}

fn to_json(d: &impl Serialize) -> Result<String, String> {
    serde_json::to_string(d).map_err(|e| e.to_string())
}

fn check_levels(levels: u32) -> Result<(), String> {
    if levels > MAX_LEVELS {
        return Err(format!("at most {MAX_LEVELS} levels"));
    }
    Ok(())
}

/// Unit square of `2 n^2` triangles refined `levels` times toward its
/// bottom edge, `mode` being `"uniform"` or `"directional"`.
pub fn refine_square_json(mode: &str, levels: u32, n: u32) -> Result<String, String> {
    check_levels(levels)?;
    if !(1..=8).contains(&n) {
        return Err("the grid size must be between 1 and 8".into());
    }
    let mut mesh = triangle_square(n as usize, TARGET);
    for _ in 0..levels {
        match mode {
            "uniform" => refine_uniform_toward(&mut mesh, TARGET, db()),
            "directional" => {
                let leaves: Vec<usize> = mesh.leaves().collect();
                refine_directional(&mut mesh, &leaves, TARGET, db())
            }
            other => return Err(format!("unknown mode `{other}`")),
        }
        .map_err(|e| e.to_string())?;
    }
    to_json(&drawing(&mesh, mesh.leaves()))
}

/// Six-tetrahedron cube refined directionally toward its bottom face.
pub fn cube_directional_json(levels: u32) -> Result<String, String> {
    check_levels(levels)?;
    let mut mesh = kuhn_cube(Some(TARGET));
    for _ in 0..levels {
        let leaves: Vec<usize> = mesh.leaves().collect();
        refine_directional(&mut mesh, &leaves, TARGET, db()).map_err(|e| e.to_string())?;
    }
    to_json(&drawing(&mesh, mesh.leaves()))
}

/// Names of the patterns given in files or built in, without generated
/// variants.
pub fn pattern_names_json() -> Result<String, String> {
    let names: Vec<&str> = db().inserted().iter().map(|&r| db().get(r).name()).collect();
    to_json(&names)
}

/// The sons of a stored pattern in master coordinates.
pub fn pattern_json(name: &str) -> Result<String, String> {
    let r = db().lookup(name).ok_or_else(|| format!("no pattern named `{name}`"))?;
    let p = db().get(r);
    let mut d = drawing(p.mesh(), (0..p.son_count()).map(|j| j + 1));
    d.conforming = true;
    to_json(&d)
}

#[wasm_bindgen]
pub fn refine_square(mode: &str, levels: u32, n: u32) -> Result<String, JsError> {
    refine_square_json(mode, levels, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn cube_directional(levels: u32) -> Result<String, JsError> {
    cube_directional_json(levels).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn pattern_names() -> Result<String, JsError> {
    pattern_names_json().map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn pattern(name: &str) -> Result<String, JsError> {
    pattern_json(name).map_err(|e| JsError::new(&e))
}
