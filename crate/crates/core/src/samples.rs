//! Small meshes and the bundled pattern corpus, shared by tests, the CLI
//! and the browser demo.

use crate::mesh::GeoMesh;
use crate::pattern::{parse_pattern, PatternError};
use crate::patterndb::{DbError, PatternDb};
use crate::topology::ElementType;

/// Bundled pattern files as `(file name, text)`, in file-name order.
pub const CORPUS: &[(&str, &str)] = &[
    ("hex_dir_edge.rpt", include_str!("../../../patterns/hex_dir_edge.rpt")),
    ("hex_dir_face.rpt", include_str!("../../../patterns/hex_dir_face.rpt")),
    ("prism_dir_edge.rpt", include_str!("../../../patterns/prism_dir_edge.rpt")),
    ("prism_dir_face.rpt", include_str!("../../../patterns/prism_dir_face.rpt")),
    ("quad_dir_edge.rpt", include_str!("../../../patterns/quad_dir_edge.rpt")),
    ("quad_dir_vertex.rpt", include_str!("../../../patterns/quad_dir_vertex.rpt")),
    ("quad_trans1.rpt", include_str!("../../../patterns/quad_trans1.rpt")),
    ("quad_trans3.rpt", include_str!("../../../patterns/quad_trans3.rpt")),
    ("tetra_dir_1side.rpt", include_str!("../../../patterns/tetra_dir_1side.rpt")),
    ("tetra_dir_2wedges.rpt", include_str!("../../../patterns/tetra_dir_2wedges.rpt")),
    ("tetra_trans1.rpt", include_str!("../../../patterns/tetra_trans1.rpt")),
    ("tetra_trans3.rpt", include_str!("../../../patterns/tetra_trans3.rpt")),
    ("tri_dir.rpt", include_str!("../../../patterns/tri_dir.rpt")),
    ("tri_trans1.rpt", include_str!("../../../patterns/tri_trans1.rpt")),
];

/// Text of the tetrahedron pattern splitting off one facet layer.
pub fn tetra_dir_1side() -> &'static str {
    CORPUS.iter().find(|(f, _)| *f == "tetra_dir_1side.rpt").expect("bundled").1
}

/// Uniform patterns plus the bundled corpus.
pub fn corpus_db() -> Result<PatternDb, DbError> {
    let mut db = PatternDb::with_uniform();
    for (_, text) in CORPUS {
        db.insert(parse_pattern(text).map_err(DbError::from)?)?;
    }
    Ok(db)
}

pub fn parse_corpus() -> Result<Vec<crate::pattern::RefinementPattern>, PatternError> {
    CORPUS.iter().map(|(_, t)| parse_pattern(t)).collect()
}

fn build(nodes: &[[f64; 3]], elements: &[(ElementType, i32, Vec<usize>)]) -> GeoMesh {
    let mut mesh = GeoMesh::new();
    for &x in nodes {
        mesh.add_node(x);
    }
    for (t, m, n) in elements {
        mesh.add_element(*t, *m, n.clone()).expect("sample mesh is valid");
    }
    mesh.build_connectivity().expect("sample mesh is valid");
    mesh
}

const CUBE: [[f64; 3]; 8] = [
    [0.0, 0.0, 0.0],
    [1.0, 0.0, 0.0],
    [1.0, 1.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
    [1.0, 0.0, 1.0],
    [1.0, 1.0, 1.0],
    [0.0, 1.0, 1.0],
];

pub fn master_tetrahedron() -> GeoMesh {
    build(
        &[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        &[(ElementType::Tetrahedron, 1, vec![0, 1, 2, 3])],
    )
}

pub fn unit_hexahedron() -> GeoMesh {
    build(&CUBE, &[(ElementType::Hexahedron, 1, (0..8).collect())])
}

/// Unit cube split into six tetrahedra around the main diagonal 0-6, with
/// the two triangles of the bottom face `z = 0` carried as elements of
/// material `target` when given.
pub fn kuhn_cube(target: Option<i32>) -> GeoMesh {
    let t = ElementType::Tetrahedron;
    let mut elements = vec![
        (t, 1, vec![0, 1, 2, 6]),
        (t, 1, vec![0, 1, 5, 6]),
        (t, 1, vec![0, 3, 2, 6]),
        (t, 1, vec![0, 3, 7, 6]),
        (t, 1, vec![0, 4, 5, 6]),
        (t, 1, vec![0, 4, 7, 6]),
    ];
    if let Some(m) = target {
        elements.push((ElementType::Triangle, m, vec![0, 1, 2]));
        elements.push((ElementType::Triangle, m, vec![0, 2, 3]));
    }
    build(&CUBE, &elements)
}

/// The unit square cut into `n x n` cells, each split into two triangles,
/// with the edges on `y = 0` carried as line elements of material `target`.
pub fn triangle_square(n: usize, target: i32) -> GeoMesh {
    let h = 1.0 / n as f64;
    let idx = |i: usize, j: usize| i + (n + 1) * j;
    let nodes: Vec<[f64; 3]> = (0..=n)
        .flat_map(|j| (0..=n).map(move |i| [i as f64 * h, j as f64 * h, 0.0]))
        .collect();
    let mut elements = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            // alternate the diagonal so the mesh has no preferred direction
            if (i + j) % 2 == 0 {
                elements.push((ElementType::Triangle, 1, vec![a, b, c]));
                elements.push((ElementType::Triangle, 1, vec![a, c, d]));
            } else {
                elements.push((ElementType::Triangle, 1, vec![a, b, d]));
                elements.push((ElementType::Triangle, 1, vec![b, c, d]));
            }
        }
    }
    for i in 0..n {
        elements.push((ElementType::Line, target, vec![idx(i, 0), idx(i + 1, 0)]));
    }
    build(&nodes, &elements)
}

/// A `k x k x k` block of unit hexahedra.
pub fn hex_block(k: usize) -> GeoMesh {
    let idx = |i: usize, j: usize, l: usize| i + (k + 1) * (j + (k + 1) * l);
    let mut nodes = Vec::new();
    for l in 0..=k {
        for j in 0..=k {
            for i in 0..=k {
                nodes.push([i as f64, j as f64, l as f64]);
            }
        }
    }
    let mut elements = Vec::new();
    for l in 0..k {
        for j in 0..k {
            for i in 0..k {
                let n = CUBE
                    .iter()
                    .map(|c| idx(i + c[0] as usize, j + c[1] as usize, l + c[2] as usize))
                    .collect();
                elements.push((ElementType::Hexahedron, 1, n));
            }
        }
    }
    build(&nodes, &elements)
}
