//! Built-in uniform patterns, one per refinable element type.

use crate::topology::ElementType;

use super::{ElementSpec, PatternError, RefinementPattern};

/// Id of the built-in uniform pattern for `t` (1 for lines up to 7 for hexahedra).
pub fn uniform_id(t: ElementType) -> Option<i64> {
    (t != ElementType::Point).then_some(t.code() as i64)
}

pub fn uniform_name(t: ElementType) -> String {
    format!("Uniform{}", t.name())
}

pub fn uniform_pattern(t: ElementType) -> Option<RefinementPattern> {
    let (nodes, sons) = match t {
        ElementType::Point => return None,
        ElementType::Line => line(),
        ElementType::Triangle => triangle(),
        ElementType::Quadrilateral => quadrilateral(),
        ElementType::Tetrahedron => tetrahedron(),
        ElementType::Pyramid => pyramid(),
        ElementType::Prism => prism(),
        ElementType::Hexahedron => hexahedron(),
    };
    let (nodes, elements) = assemble(t, nodes, sons);
    let id = uniform_id(t).expect("refinable");
    Some(build(id, uniform_name(t), nodes, elements).expect("built-in pattern is valid"))
}

fn build(id: i64, name: String, nodes: Vec<[f64; 3]>, elements: Vec<ElementSpec>) -> Result<RefinementPattern, PatternError> {
    RefinementPattern::new(id, name, nodes, elements)
}

type Sons = Vec<(ElementType, Vec<usize>)>;

/// Father corners are nodes `0..n` unless the node list says otherwise.
fn assemble(t: ElementType, nodes: Vec<[f64; 3]>, sons: Sons) -> (Vec<[f64; 3]>, Vec<ElementSpec>) {
    let corners: Vec<usize> = (0..t.node_count())
        .map(|i| {
            let c = t.corner(i);
            nodes
                .iter()
                .position(|x| (0..c.len()).all(|k| (x[k] - c[k]).abs() < 1e-14))
                .expect("corner present")
        })
        .collect();
    let mut elements = vec![(t, 1, corners)];
    elements.extend(sons.into_iter().map(|(st, n)| (st, 1, n)));
    (nodes, elements)
}

fn line() -> (Vec<[f64; 3]>, Sons) {
    let nodes = vec![[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
    let l = ElementType::Line;
    (nodes, vec![(l, vec![0, 2]), (l, vec![2, 1])])
}

fn triangle() -> (Vec<[f64; 3]>, Sons) {
    let nodes = vec![
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.5, 0.0, 0.0],
        [0.5, 0.5, 0.0],
        [0.0, 0.5, 0.0],
    ];
    let t = ElementType::Triangle;
    let sons = [[0, 3, 5], [3, 1, 4], [5, 4, 2], [3, 4, 5]];
    (nodes, sons.iter().map(|s| (t, s.to_vec())).collect())
}

/// Tensor grid with `(i, j, k)` at index `i + 3j + 9k`, coordinates in {-1, 0, 1}.
fn grid(dim: usize) -> Vec<[f64; 3]> {
    let count = 3usize.pow(dim as u32);
    (0..count)
        .map(|n| {
            let mut x = [0.0; 3];
            for (k, v) in x.iter_mut().enumerate().take(dim) {
                *v = ((n / 3usize.pow(k as u32)) % 3) as f64 - 1.0;
            }
            x
        })
        .collect()
}

fn quadrilateral() -> (Vec<[f64; 3]>, Sons) {
    let g = |i: usize, j: usize| i + 3 * j;
    let sons = (0..2)
        .flat_map(|j| (0..2).map(move |i| (i, j)))
        .map(|(i, j)| (ElementType::Quadrilateral, vec![g(i, j), g(i + 1, j), g(i + 1, j + 1), g(i, j + 1)]))
        .collect();
    (grid(2), sons)
}

fn hexahedron() -> (Vec<[f64; 3]>, Sons) {
    let g = |i: usize, j: usize, k: usize| i + 3 * j + 9 * k;
    let mut sons = Vec::new();
    for k in 0..2 {
        for j in 0..2 {
            for i in 0..2 {
                sons.push((
                    ElementType::Hexahedron,
                    vec![
                        g(i, j, k),
                        g(i + 1, j, k),
                        g(i + 1, j + 1, k),
                        g(i, j + 1, k),
                        g(i, j, k + 1),
                        g(i + 1, j, k + 1),
                        g(i + 1, j + 1, k + 1),
                        g(i, j + 1, k + 1),
                    ],
                ));
            }
        }
    }
    (grid(3), sons)
}

/// Corner tetrahedra plus the inner octahedron cut along the m02-m13 diagonal.
fn tetrahedron() -> (Vec<[f64; 3]>, Sons) {
    let nodes = vec![
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.5, 0.0, 0.0], // 4 m01
        [0.5, 0.5, 0.0], // 5 m12
        [0.0, 0.5, 0.0], // 6 m02
        [0.0, 0.0, 0.5], // 7 m03
        [0.5, 0.0, 0.5], // 8 m13
        [0.0, 0.5, 0.5], // 9 m23
    ];
    let t = ElementType::Tetrahedron;
    let sons = [
        [0, 4, 6, 7],
        [4, 1, 5, 8],
        [6, 5, 2, 9],
        [7, 8, 9, 3],
        [6, 8, 4, 5],
        [6, 8, 5, 9],
        [6, 8, 9, 7],
        [6, 8, 7, 4],
    ];
    (nodes, sons.iter().map(|s| (t, s.to_vec())).collect())
}

/// Six pyramids (four at the base corners, one at the apex, one inverted in
/// the middle) and four tetrahedra filling the gaps.
fn pyramid() -> (Vec<[f64; 3]>, Sons) {
    let nodes = vec![
        [-1.0, -1.0, 0.0],
        [1.0, -1.0, 0.0],
        [1.0, 1.0, 0.0],
        [-1.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, -1.0, 0.0],  // 5 m01
        [1.0, 0.0, 0.0],   // 6 m12
        [0.0, 1.0, 0.0],   // 7 m23
        [-1.0, 0.0, 0.0],  // 8 m30
        [0.0, 0.0, 0.0],   // 9 base center
        [-0.5, -0.5, 0.5], // 10 m04
        [0.5, -0.5, 0.5],  // 11 m14
        [0.5, 0.5, 0.5],   // 12 m24
        [-0.5, 0.5, 0.5],  // 13 m34
    ];
    let p = ElementType::Pyramid;
    let t = ElementType::Tetrahedron;
    let sons = vec![
        (p, vec![0, 5, 9, 8, 10]),
        (p, vec![5, 1, 6, 9, 11]),
        (p, vec![9, 6, 2, 7, 12]),
        (p, vec![8, 9, 7, 3, 13]),
        (p, vec![10, 11, 12, 13, 4]),
        (p, vec![10, 11, 12, 13, 9]),
        (t, vec![5, 9, 10, 11]),
        (t, vec![6, 9, 11, 12]),
        (t, vec![7, 9, 12, 13]),
        (t, vec![8, 9, 13, 10]),
    ];
    (nodes, sons)
}

fn prism() -> (Vec<[f64; 3]>, Sons) {
    let tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.5, 0.0], [0.5, 0.5], [0.0, 0.5]];
    let mut nodes = Vec::new();
    for z in [-1.0, 0.0, 1.0] {
        for p in tri {
            nodes.push([p[0], p[1], z]);
        }
    }
    let layer = |z: usize, i: usize| 6 * z + i;
    let tri_sons = [[0, 3, 5], [3, 1, 4], [5, 4, 2], [3, 4, 5]];
    let mut sons = Vec::new();
    for z in 0..2 {
        for s in tri_sons {
            let mut n: Vec<usize> = s.iter().map(|&i| layer(z, i)).collect();
            n.extend(s.iter().map(|&i| layer(z + 1, i)));
            sons.push((ElementType::Prism, n));
        }
    }
    (nodes, sons)
}
