use crate::topology::ElementType;

use super::GeoMesh;

/// Vertex shape functions of the master element, in node order.
///
/// The pyramid uses the rational collapsed-quad functions; at the apex the
/// limit value (all weight on node 4) is returned.
pub fn shape_functions(t: ElementType, xi: &[f64]) -> Vec<f64> {
    match t {
        ElementType::Point => vec![1.0],
        ElementType::Line => vec![0.5 * (1.0 - xi[0]), 0.5 * (1.0 + xi[0])],
        ElementType::Triangle => vec![1.0 - xi[0] - xi[1], xi[0], xi[1]],
        ElementType::Quadrilateral => {
            let (x, y) = (xi[0], xi[1]);
            vec![
                0.25 * (1.0 - x) * (1.0 - y),
                0.25 * (1.0 + x) * (1.0 - y),
                0.25 * (1.0 + x) * (1.0 + y),
                0.25 * (1.0 - x) * (1.0 + y),
            ]
        }
        ElementType::Tetrahedron => vec![1.0 - xi[0] - xi[1] - xi[2], xi[0], xi[1], xi[2]],
        ElementType::Prism => {
            let tri = [1.0 - xi[0] - xi[1], xi[0], xi[1]];
            let (lo, hi) = (0.5 * (1.0 - xi[2]), 0.5 * (1.0 + xi[2]));
            tri.iter().map(|t| t * lo).chain(tri.iter().map(|t| t * hi)).collect()
        }
        ElementType::Hexahedron => {
            let signs = [
                [-1.0, -1.0, -1.0],
                [1.0, -1.0, -1.0],
                [1.0, 1.0, -1.0],
                [-1.0, 1.0, -1.0],
                [-1.0, -1.0, 1.0],
                [1.0, -1.0, 1.0],
                [1.0, 1.0, 1.0],
                [-1.0, 1.0, 1.0],
            ];
            signs
                .iter()
                .map(|s| 0.125 * (1.0 + s[0] * xi[0]) * (1.0 + s[1] * xi[1]) * (1.0 + s[2] * xi[2]))
                .collect()
        }
        ElementType::Pyramid => {
            let (x, y, z) = (xi[0], xi[1], xi[2]);
            let s = 1.0 - z;
            if s <= 1e-14 {
                return vec![0.0, 0.0, 0.0, 0.0, 1.0];
            }
            let q = |a: f64, b: f64| (s + a * x) * (s + b * y) / (4.0 * s);
            vec![q(-1.0, -1.0), q(1.0, -1.0), q(1.0, 1.0), q(-1.0, 1.0), z]
        }
    }
}

fn tet_volume(p: [[f64; 3]; 4]) -> f64 {
    let d = |i: usize| [p[i][0] - p[0][0], p[i][1] - p[0][1], p[i][2] - p[0][2]];
    let (a, b, c) = (d(1), d(2), d(3));
    (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0]))
        / 6.0
}

fn triangle_area(p: [[f64; 3]; 3]) -> f64 {
    let u = [p[1][0] - p[0][0], p[1][1] - p[0][1], p[1][2] - p[0][2]];
    let v = [p[2][0] - p[0][0], p[2][1] - p[0][1], p[2][2] - p[0][2]];
    let c = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
    0.5 * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
}

/// Simplices covering each element type, as local node indices.
pub(crate) fn simplex_decomposition(t: ElementType) -> &'static [&'static [usize]] {
    match t {
        ElementType::Point => &[&[0]],
        ElementType::Line => &[&[0, 1]],
        ElementType::Triangle => &[&[0, 1, 2]],
        ElementType::Quadrilateral => &[&[0, 1, 2], &[0, 2, 3]],
        ElementType::Tetrahedron => &[&[0, 1, 2, 3]],
        ElementType::Pyramid => &[&[0, 1, 2, 4], &[0, 2, 3, 4]],
        ElementType::Prism => &[&[0, 1, 2, 5], &[0, 1, 5, 4], &[0, 4, 5, 3]],
        ElementType::Hexahedron => &[
            &[0, 1, 2, 6],
            &[0, 2, 3, 6],
            &[0, 3, 7, 6],
            &[0, 7, 4, 6],
            &[0, 4, 5, 6],
            &[0, 5, 1, 6],
        ],
    }
}

/// Length, area or volume of an element with planar faces, by decomposition
/// into simplices.
pub fn element_measure(mesh: &GeoMesh, element: usize) -> f64 {
    let el = mesh.element(element);
    let x = |i: usize| mesh.node(el.nodes[i]);
    match el.element_type.dimension() {
        0 => 0.0,
        1 => {
            let (a, b) = (x(0), x(1));
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
        }
        2 => simplex_decomposition(el.element_type)
            .iter()
            .map(|s| triangle_area([x(s[0]), x(s[1]), x(s[2])]))
            .sum(),
        _ => simplex_decomposition(el.element_type)
            .iter()
            .map(|s| tet_volume([x(s[0]), x(s[1]), x(s[2]), x(s[3])]))
            .sum::<f64>()
            .abs(),
    }
}
