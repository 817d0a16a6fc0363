//! Brute-force mesh diagnostics used by tests, the CLI and the demo.

use std::collections::BTreeMap;

use crate::mesh::{element_measure, GeoMesh, SideRef};
use crate::topology;

/// Leaf sides whose closure contains a node of another leaf that is not one
/// of the side's corners, as `(side, node)` pairs.
///
/// Sides are treated as straight segments and planar polygons.
pub fn hanging_nodes(mesh: &GeoMesh) -> Vec<(SideRef, usize)> {
    let mut used = vec![false; mesh.node_count()];
    for e in mesh.leaves() {
        for &n in &mesh.element(e).nodes {
            used[n] = true;
        }
    }
    let mut by_x: Vec<usize> = (0..mesh.node_count()).filter(|&n| used[n]).collect();
    by_x.sort_by(|&a, &b| mesh.node(a)[0].total_cmp(&mesh.node(b)[0]));
    let xs: Vec<f64> = by_x.iter().map(|&n| mesh.node(n)[0]).collect();

    let mut out = Vec::new();
    for e in mesh.leaves() {
        let t = mesh.element(e).element_type;
        for s in 0..t.side_count() {
            let desc = topology::side(t, s).expect("valid side");
            if desc.dimension == 0 || desc.dimension >= t.dimension() {
                continue;
            }
            let corners = mesh.side_global_nodes(SideRef::new(e, s));
            let pts: Vec<[f64; 3]> = corners.iter().map(|&n| mesh.node(n)).collect();
            let (lo, hi, size) = bounds(&pts);
            let tol = 1e-9 * size.max(1e-300);
            let start = xs.partition_point(|&x| x < lo[0] - tol);
            let end = xs.partition_point(|&x| x <= hi[0] + tol);
            for &n in &by_x[start..end] {
                if corners.contains(&n) {
                    continue;
                }
                let p = mesh.node(n);
                if (1..3).any(|k| p[k] < lo[k] - tol || p[k] > hi[k] + tol) {
                    continue;
                }
                let inside = match pts.len() {
                    2 => on_segment(p, pts[0], pts[1], tol),
                    3 => in_triangle(p, pts[0], pts[1], pts[2], tol),
                    _ => in_triangle(p, pts[0], pts[1], pts[2], tol) || in_triangle(p, pts[0], pts[2], pts[3], tol),
                };
                if inside {
                    out.push((SideRef::new(e, s), n));
                }
            }
        }
    }
    out
}

/// Node sets of faces (sides one dimension below the mesh) shared by more
/// than two leaf elements of full dimension.
pub fn overshared_faces(mesh: &GeoMesh) -> Vec<Vec<usize>> {
    let dim = mesh.dimension();
    if dim == 0 {
        return Vec::new();
    }
    let mut count: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for e in mesh.leaves() {
        let el = mesh.element(e);
        if el.dimension() != dim {
            continue;
        }
        for s in 0..el.element_type.side_count() {
            if topology::side(el.element_type, s).expect("valid").dimension + 1 != dim {
                continue;
            }
            let mut key = mesh.side_global_nodes(SideRef::new(e, s));
            key.sort_unstable();
            *count.entry(key).or_default() += 1;
        }
    }
    count.into_iter().filter(|(_, c)| *c > 2).map(|(k, _)| k).collect()
}

/// No hanging nodes and no face shared by more than two leaves.
pub fn is_conforming(mesh: &GeoMesh) -> bool {
    hanging_nodes(mesh).is_empty() && overshared_faces(mesh).is_empty()
}

/// Checks that every cycle closes, that each pair lies in exactly one cycle
/// and that two pairs share a cycle iff their sides have equal node sets.
pub fn connectivity_violations(mesh: &GeoMesh) -> Vec<String> {
    let mut groups: BTreeMap<(usize, Vec<usize>), Vec<SideRef>> = BTreeMap::new();
    for el in mesh.elements() {
        for s in 0..el.element_type.side_count() {
            let r = SideRef::new(el.index, s);
            let dim = topology::side(el.element_type, s).expect("valid").dimension;
            let mut key = mesh.side_global_nodes(r);
            key.sort_unstable();
            groups.entry((dim.min(1), key)).or_default().push(r);
        }
    }
    let mut issues = Vec::new();
    for members in groups.values() {
        let mut cycle = mesh.cycle(members[0]);
        if cycle.len() != members.len() {
            issues.push(format!("cycle through {:?} has {} pairs, expected {}", members[0], cycle.len(), members.len()));
        }
        cycle.sort();
        let before = cycle.len();
        cycle.dedup();
        if cycle.len() != before {
            issues.push(format!("cycle through {:?} repeats a pair", members[0]));
        }
        if cycle != *members {
            issues.push(format!("cycle through {:?} differs from its equal-node-set group", members[0]));
        }
    }
    issues
}

/// Divided elements whose sons' measures do not add up to the father's,
/// with the relative defect.
pub fn volume_defects(mesh: &GeoMesh, rel_tol: f64) -> Vec<(usize, f64)> {
    mesh.elements()
        .iter()
        .filter_map(|el| {
            let sons = el.sons()?;
            let father = element_measure(mesh, el.index);
            let sum: f64 = sons.iter().map(|&s| element_measure(mesh, s)).sum();
            let defect = ((sum - father) / father).abs();
            (defect > rel_tol).then_some((el.index, defect))
        })
        .collect()
}

fn bounds(pts: &[[f64; 3]]) -> ([f64; 3], [f64; 3], f64) {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in pts {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let size = (0..3).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
    (lo, hi, size)
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn on_segment(p: [f64; 3], a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
    let d = sub(b, a);
    let len2 = dot(d, d);
    let t = (dot(sub(p, a), d) / len2).clamp(0.0, 1.0);
    let q = [a[0] + t * d[0], a[1] + t * d[1], a[2] + t * d[2]];
    dot(sub(p, q), sub(p, q)).sqrt() <= tol
}

fn in_triangle(p: [f64; 3], a: [f64; 3], b: [f64; 3], c: [f64; 3], tol: f64) -> bool {
    let (u, v, w) = (sub(b, a), sub(c, a), sub(p, a));
    let n = cross(u, v);
    let area2 = dot(n, n).sqrt();
    if area2 == 0.0 || (dot(w, n) / area2).abs() > tol {
        return false;
    }
    // barycentric coordinates scaled by twice the area
    let l1 = dot(cross(w, v), n) / area2;
    let l2 = dot(cross(u, w), n) / area2;
    let scale = tol * (dot(u, u).sqrt() + dot(v, v).sqrt());
    l1 >= -scale && l2 >= -scale && l1 + l2 <= area2 + scale
}
