//! Pattern tools: equality, compatibility search, perfect matching against
//! marked edges, and directional and uniform refinement drivers.

use std::collections::BTreeSet;

use log::{debug, info};

use crate::mesh::{GeoMesh, MeshError, SideRef};
use crate::pattern::{edge_sides, RefinementPattern};
use crate::patterndb::{PatternDb, PatternRef};
use crate::topology::{self, ElementType};

pub fn pattern_equality(a: &RefinementPattern, b: &RefinementPattern) -> bool {
    a.geometric_eq(b)
}

/// Stored patterns of type `t` inducing every imposed side pattern.
pub(crate) fn compatible_with(db: &PatternDb, t: ElementType, imposed: &[Option<PatternRef>]) -> Vec<PatternRef> {
    db.patterns_for_type(t)
        .iter()
        .copied()
        .filter(|&r| GeoMesh::pattern_fits(db.get(r), r, imposed).is_none())
        .collect()
}

/// Patterns that can divide `element` without contradicting the side
/// refinements of its neighbors. With no refined neighbor this is every
/// stored pattern of the element's type.
pub fn get_compatible_ref_patterns(mesh: &GeoMesh, element: usize, db: &PatternDb) -> Result<Vec<PatternRef>, MeshError> {
    let imposed = mesh.imposed_side_patterns(db, element)?;
    Ok(compatible_with(db, mesh.get_element(element)?.element_type, &imposed))
}

/// Marked corners and edges, as `(element, side)` pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MarkSet {
    pub marked_vertices: BTreeSet<SideRef>,
    pub marked_edges: BTreeSet<SideRef>,
}

impl MarkSet {
    /// Marked edge sides of one element.
    pub fn edges_of(&self, element: usize) -> BTreeSet<usize> {
        self.marked_edges
            .range(SideRef::new(element, 0)..SideRef::new(element + 1, 0))
            .map(|r| r.side)
            .collect()
    }
}

/// The compatible pattern splitting exactly the marked edges of `element`,
/// with the fewest sons; ties go to the lowest pattern id.
pub fn perfect_match_ref_pattern(
    mesh: &GeoMesh,
    element: usize,
    marks: &MarkSet,
    db: &PatternDb,
) -> Result<Option<PatternRef>, MeshError> {
    let wanted = marks.edges_of(element);
    let candidates = get_compatible_ref_patterns(mesh, element, db)?;
    Ok(candidates
        .into_iter()
        .filter(|&r| db.get(r).split_edges().into_iter().collect::<BTreeSet<_>>() == wanted)
        .min_by_key(|&r| (db.get(r).son_count(), db.get(r).id())))
}

/// Whether the cycle through `start` holds an element of material `m`.
fn touches_material(mesh: &GeoMesh, start: SideRef, m: i32) -> bool {
    mesh.cycle(start).iter().any(|r| mesh.element(r.element).material == m)
}

/// Directional marks of one element: corners whose node
/// cycle reaches material `m`, and edges not touching `m` themselves with
/// exactly one marked endpoint.
pub fn directional_marks(mesh: &GeoMesh, element: usize, target_material: i32) -> MarkSet {
    let el = mesh.element(element);
    let t = el.element_type;
    let mut marks = MarkSet::default();
    for v in 0..t.node_count() {
        let r = SideRef::new(element, v);
        if touches_material(mesh, r, target_material) {
            marks.marked_vertices.insert(r);
        }
    }
    if marks.marked_vertices.is_empty() {
        return marks;
    }
    for e in edge_sides(t) {
        let r = SideRef::new(element, e);
        if touches_material(mesh, r, target_material) {
            continue;
        }
        let ends = topology::side_nodes(t, e).expect("valid side");
        let marked = ends
            .iter()
            .filter(|&&v| marks.marked_vertices.contains(&SideRef::new(element, v)))
            .count();
        if marked == 1 {
            marks.marked_edges.insert(r);
        }
    }
    marks
}

/// Result of a refinement pass.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RefineReport {
    /// Elements divided in this pass.
    pub refined: Vec<usize>,
    /// Elements with marked edges for which no compatible pattern splits
    /// exactly those edges.
    pub unmatched: Vec<usize>,
}

/// One directional refinement pass over `candidates`, in ascending order.
///
/// Elements of the target material are never divided; marks are computed
/// against the mesh as it stands when each element is visited.
pub fn refine_directional(
    mesh: &mut GeoMesh,
    candidates: &[usize],
    target_material: i32,
    db: &PatternDb,
) -> Result<RefineReport, MeshError> {
    let mut order = candidates.to_vec();
    order.sort_unstable();
    order.dedup();
    let mut report = RefineReport::default();
    for e in order {
        let el = mesh.get_element(e)?;
        if !el.is_leaf() || el.material == target_material {
            continue;
        }
        let marks = directional_marks(mesh, e, target_material);
        if marks.marked_edges.is_empty() {
            continue;
        }
        match perfect_match_ref_pattern(mesh, e, &marks, db)? {
            Some(r) => {
                mesh.divide(e, db, r)?;
                report.refined.push(e);
            }
            None => {
                debug!("no pattern splits exactly edges {:?} of element {e}", marks.edges_of(e));
                report.unmatched.push(e);
            }
        }
    }
    info!("directional pass: {} refined, {} unmatched", report.refined.len(), report.unmatched.len());
    Ok(report)
}

/// Divides each listed leaf with the uniform pattern of its type.
pub fn refine_uniform(mesh: &mut GeoMesh, elements: &[usize], db: &PatternDb) -> Result<usize, MeshError> {
    let mut order = elements.to_vec();
    order.sort_unstable();
    order.dedup();
    let mut count = 0;
    for e in order {
        let el = mesh.get_element(e)?;
        if !el.is_leaf() {
            continue;
        }
        let t = el.element_type;
        let Some(r) = db.uniform(t) else {
            continue;
        };
        mesh.divide(e, db, r)?;
        count += 1;
    }
    Ok(count)
}

/// Edges of `element` split by refined neighbors.
fn imposed_edges(mesh: &GeoMesh, element: usize, db: &PatternDb) -> Result<BTreeSet<usize>, MeshError> {
    let t = mesh.element(element).element_type;
    let imposed = mesh.imposed_side_patterns(db, element)?;
    Ok(edge_sides(t).filter(|&s| imposed[s].is_some()).collect())
}

/// Removes hanging nodes by dividing every leaf whose edges are split by a
/// neighbor with the pattern splitting exactly those edges. Transition
/// patterns never split further edges, so one sweep suffices; the sweep is
/// repeated until nothing changes in case the database lacks that property.
pub fn close_mesh(mesh: &mut GeoMesh, db: &PatternDb) -> Result<RefineReport, MeshError> {
    let mut report = RefineReport::default();
    loop {
        let mut changed = false;
        let leaves: Vec<usize> = mesh.leaves().collect();
        for e in leaves {
            if report.unmatched.contains(&e) {
                continue;
            }
            let edges = imposed_edges(mesh, e, db)?;
            if edges.is_empty() {
                continue;
            }
            let marks = MarkSet {
                marked_vertices: BTreeSet::new(),
                marked_edges: edges.iter().map(|&s| SideRef::new(e, s)).collect(),
            };
            match perfect_match_ref_pattern(mesh, e, &marks, db)? {
                Some(r) => {
                    mesh.divide(e, db, r)?;
                    report.refined.push(e);
                    changed = true;
                }
                None => report.unmatched.push(e),
            }
        }
        if !changed {
            return Ok(report);
        }
    }
}

/// Leaves, not of the target material, with a corner in a node cycle that
/// reaches the target material.
pub fn leaves_touching(mesh: &GeoMesh, target_material: i32) -> Vec<usize> {
    mesh.leaves()
        .filter(|&e| {
            let el = mesh.element(e);
            el.material != target_material
                && (0..el.element_type.node_count()).any(|v| touches_material(mesh, SideRef::new(e, v), target_material))
        })
        .collect()
}

/// One level of uniform refinement toward material `m`: the leaves touching
/// it are refined uniformly, then the mesh is closed with transition patterns.
pub fn refine_uniform_toward(mesh: &mut GeoMesh, target_material: i32, db: &PatternDb) -> Result<RefineReport, MeshError> {
    let mut refined = Vec::new();
    let mut skipped = Vec::new();
    for e in leaves_touching(mesh, target_material) {
        let t = mesh.element(e).element_type;
        let Some(r) = db.uniform(t) else {
            continue;
        };
        match mesh.divide(e, db, r) {
            Ok(_) => refined.push(e),
            // a neighbor already imposes a transition split on this element
            Err(MeshError::Incompatible { .. }) => skipped.push(e),
            Err(err) => return Err(err),
        }
    }
    let mut report = close_mesh(mesh, db)?;
    report.unmatched.append(&mut skipped);
    report.unmatched.sort_unstable();
    refined.append(&mut report.refined);
    refined.sort_unstable();
    report.refined = refined;
    Ok(report)
}
