//! Master-element topologies.
//!
//! Each [`ElementType`] carries a static table of sides. Sides are enumerated
//! corners first (in node order), then edges, then faces, then the element
//! itself:
//!
//! | type          | corners | edges                                                 | faces                                         | self |
//! |---------------|---------|-------------------------------------------------------|-----------------------------------------------|------|
//! | Line          | 0-1     |                                                       |                                               | 2    |
//! | Triangle      | 0-2     | 3:(0,1) 4:(1,2) 5:(2,0)                               |                                               | 6    |
//! | Quadrilateral | 0-3     | 4:(0,1) 5:(1,2) 6:(2,3) 7:(3,0)                       |                                               | 8    |
//! | Tetrahedron   | 0-3     | 4:(0,1) 5:(1,2) 6:(2,0) 7:(0,3) 8:(1,3) 9:(2,3)       | 10:(0,1,2) 11:(0,1,3) 12:(1,2,3) 13:(0,2,3)   | 14   |
//! | Pyramid       | 0-4     | 5:(0,1) 6:(1,2) 7:(2,3) 8:(3,0) 9..12:(i,4)           | 13:(0,1,2,3) 14:(0,1,4) 15:(1,2,4) 16:(2,3,4) 17:(3,0,4) | 18 |
//! | Prism         | 0-5     | 6:(0,1) 7:(1,2) 8:(2,0) 9:(0,3) 10:(1,4) 11:(2,5) 12:(3,4) 13:(4,5) 14:(5,3) | 15:(0,1,2) 16:(0,1,4,3) 17:(1,2,5,4) 18:(0,2,5,3) 19:(3,4,5) | 20 |
//! | Hexahedron    | 0-7     | 8:(0,1) 9:(1,2) 10:(2,3) 11:(3,0) 12..15:(i,i+4) 16:(4,5) 17:(5,6) 18:(6,7) 19:(7,4) | 20:(0,1,2,3) 21:(0,1,5,4) 22:(1,2,6,5) 23:(2,3,7,6) 24:(0,3,7,4) 25:(4,5,6,7) | 26 |
//!
//! The parametrization of a side maps the side's own master corner `j` onto the
//! element corner `side_nodes[j]`.

use std::fmt;
use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::affine::{fit_l2, AffineTransform};

/// Tolerance of the master-domain inequalities.
pub const MASTER_TOL: f64 = 1e-10;

/// Tolerance for deciding whether a point lies on a side.
pub const ON_SIDE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementType {
    Point,
    Line,
    Triangle,
    Quadrilateral,
    Tetrahedron,
    Pyramid,
    Prism,
    Hexahedron,
}

impl ElementType {
    pub const ALL: [ElementType; 8] = [
        ElementType::Point,
        ElementType::Line,
        ElementType::Triangle,
        ElementType::Quadrilateral,
        ElementType::Tetrahedron,
        ElementType::Pyramid,
        ElementType::Prism,
        ElementType::Hexahedron,
    ];

    /// Numeric code used by the text formats.
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: i64) -> Option<ElementType> {
        usize::try_from(code).ok().and_then(|c| Self::ALL.get(c).copied())
    }

    pub fn dimension(self) -> usize {
        match self {
            ElementType::Point => 0,
            ElementType::Line => 1,
            ElementType::Triangle | ElementType::Quadrilateral => 2,
            _ => 3,
        }
    }

    pub fn node_count(self) -> usize {
        match self {
            ElementType::Point => 1,
            ElementType::Line => 2,
            ElementType::Triangle => 3,
            ElementType::Quadrilateral | ElementType::Tetrahedron => 4,
            ElementType::Pyramid => 5,
            ElementType::Prism => 6,
            ElementType::Hexahedron => 8,
        }
    }

    pub fn side_count(self) -> usize {
        tables(self).sides.len()
    }

    /// Index of the side representing the element itself.
    pub fn element_side(self) -> usize {
        self.side_count() - 1
    }

    pub fn name(self) -> &'static str {
        match self {
            ElementType::Point => "Point",
            ElementType::Line => "Line",
            ElementType::Triangle => "Triangle",
            ElementType::Quadrilateral => "Quadrilateral",
            ElementType::Tetrahedron => "Tetrahedron",
            ElementType::Pyramid => "Pyramid",
            ElementType::Prism => "Prism",
            ElementType::Hexahedron => "Hexahedron",
        }
    }

    /// Master coordinates of corner `node`, `dimension()` components.
    pub fn corner(self, node: usize) -> &'static [f64] {
        let dim = self.dimension();
        &master_corners(self)[node * dim..(node + 1) * dim]
    }

    /// Measure (length, area or volume) of the master element.
    pub fn master_measure(self) -> f64 {
        match self {
            ElementType::Point => 1.0,
            ElementType::Line => 2.0,
            ElementType::Triangle => 0.5,
            ElementType::Quadrilateral => 4.0,
            ElementType::Tetrahedron => 1.0 / 6.0,
            ElementType::Pyramid => 4.0 / 3.0,
            ElementType::Prism => 1.0,
            ElementType::Hexahedron => 8.0,
        }
    }

    /// An interior reference point of the master element.
    pub fn center(self) -> Vec<f64> {
        match self {
            ElementType::Point => vec![],
            ElementType::Line => vec![0.0],
            ElementType::Triangle => vec![1.0 / 3.0, 1.0 / 3.0],
            ElementType::Quadrilateral => vec![0.0, 0.0],
            ElementType::Tetrahedron => vec![0.25, 0.25, 0.25],
            ElementType::Pyramid => vec![0.0, 0.0, 0.25],
            ElementType::Prism => vec![1.0 / 3.0, 1.0 / 3.0, 0.0],
            ElementType::Hexahedron => vec![0.0, 0.0, 0.0],
        }
    }
}

impl fmt::Display for ElementType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn master_corners(t: ElementType) -> &'static [f64] {
    match t {
        ElementType::Point => &[],
        ElementType::Line => &[-1.0, 1.0],
        ElementType::Triangle => &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0],
        ElementType::Quadrilateral => &[-1.0, -1.0, 1.0, -1.0, 1.0, 1.0, -1.0, 1.0],
        ElementType::Tetrahedron => &[
            0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0,
        ],
        ElementType::Pyramid => &[
            -1.0, -1.0, 0.0, 1.0, -1.0, 0.0, 1.0, 1.0, 0.0, -1.0, 1.0, 0.0, 0.0, 0.0, 1.0,
        ],
        ElementType::Prism => &[
            0.0, 0.0, -1.0, 1.0, 0.0, -1.0, 0.0, 1.0, -1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0,
            1.0, 1.0,
        ],
        ElementType::Hexahedron => &[
            -1.0, -1.0, -1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0, -1.0, 1.0,
            1.0, -1.0, 1.0, 1.0, 1.0, 1.0, -1.0, 1.0, 1.0,
        ],
    }
}

fn edge_list(t: ElementType) -> &'static [[usize; 2]] {
    match t {
        ElementType::Point | ElementType::Line => &[],
        ElementType::Triangle => &[[0, 1], [1, 2], [2, 0]],
        ElementType::Quadrilateral => &[[0, 1], [1, 2], [2, 3], [3, 0]],
        ElementType::Tetrahedron => &[[0, 1], [1, 2], [2, 0], [0, 3], [1, 3], [2, 3]],
        ElementType::Pyramid => &[
            [0, 1],
            [1, 2],
            [2, 3],
            [3, 0],
            [0, 4],
            [1, 4],
            [2, 4],
            [3, 4],
        ],
        ElementType::Prism => &[
            [0, 1],
            [1, 2],
            [2, 0],
            [0, 3],
            [1, 4],
            [2, 5],
            [3, 4],
            [4, 5],
            [5, 3],
        ],
        ElementType::Hexahedron => &[
            [0, 1],
            [1, 2],
            [2, 3],
            [3, 0],
            [0, 4],
            [1, 5],
            [2, 6],
            [3, 7],
            [4, 5],
            [5, 6],
            [6, 7],
            [7, 4],
        ],
    }
}

fn face_list(t: ElementType) -> &'static [&'static [usize]] {
    match t {
        ElementType::Tetrahedron => &[&[0, 1, 2], &[0, 1, 3], &[1, 2, 3], &[0, 2, 3]],
        ElementType::Pyramid => &[
            &[0, 1, 2, 3],
            &[0, 1, 4],
            &[1, 2, 4],
            &[2, 3, 4],
            &[3, 0, 4],
        ],
        ElementType::Prism => &[
            &[0, 1, 2],
            &[0, 1, 4, 3],
            &[1, 2, 5, 4],
            &[0, 2, 5, 3],
            &[3, 4, 5],
        ],
        ElementType::Hexahedron => &[
            &[0, 1, 2, 3],
            &[0, 1, 5, 4],
            &[1, 2, 6, 5],
            &[2, 3, 7, 6],
            &[0, 3, 7, 4],
            &[4, 5, 6, 7],
        ],
        _ => &[],
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SideDescriptor {
    pub side_index: usize,
    pub dimension: usize,
    pub side_type: ElementType,
    pub node_local_indices: Vec<usize>,
}

#[derive(Debug)]
pub struct TopologyTables {
    pub element_type: ElementType,
    pub sides: Vec<SideDescriptor>,
    pub side_to_element: Vec<AffineTransform>,
    pub element_to_side: Vec<AffineTransform>,
    pub permutations: Vec<Vec<usize>>,
}

pub fn tables(t: ElementType) -> &'static TopologyTables {
    static TABLES: OnceLock<Vec<TopologyTables>> = OnceLock::new();
    &TABLES.get_or_init(|| ElementType::ALL.iter().map(|&t| build_tables(t)).collect())[t as usize]
}

fn build_tables(t: ElementType) -> TopologyTables {
    let mut node_sets: Vec<(Vec<usize>, ElementType)> =
        (0..t.node_count()).map(|i| (vec![i], ElementType::Point)).collect();
    node_sets.extend(edge_list(t).iter().map(|e| (e.to_vec(), ElementType::Line)));
    node_sets.extend(face_list(t).iter().map(|f| {
        let ty = if f.len() == 3 { ElementType::Triangle } else { ElementType::Quadrilateral };
        (f.to_vec(), ty)
    }));
    if t != ElementType::Point {
        node_sets.push(((0..t.node_count()).collect(), t));
    }
    let sides: Vec<SideDescriptor> = node_sets
        .into_iter()
        .enumerate()
        .map(|(side_index, (nodes, side_type))| SideDescriptor {
            side_index,
            dimension: side_type.dimension(),
            side_type,
            node_local_indices: nodes,
        })
        .collect();

    let side_to_element: Vec<AffineTransform> = sides
        .iter()
        .map(|s| {
            let dim = s.dimension;
            if dim == 0 {
                return AffineTransform::constant(0, t.corner(s.node_local_indices[0]));
            }
            let samples: Vec<_> = s
                .node_local_indices
                .iter()
                .enumerate()
                .map(|(j, &n)| (s.side_type.corner(j).to_vec(), t.corner(n).to_vec()))
                .collect();
            fit_l2(&samples).expect("corner samples are consistent")
        })
        .collect();

    let element_to_side = side_to_element.iter().map(orthogonal_left_inverse).collect();

    TopologyTables {
        element_type: t,
        permutations: enumerate_permutations(t, &sides),
        sides,
        side_to_element,
        element_to_side,
    }
}

/// For `x -> A xi + B` with full column rank, returns `x -> A^+ (x - B)`, the
/// map sending each point to the parameter of its orthogonal projection.
fn orthogonal_left_inverse(t: &AffineTransform) -> AffineTransform {
    let (m, n) = (t.rows(), t.cols());
    if n == 0 {
        return AffineTransform::new(0, m, Vec::new(), Vec::new());
    }
    let a = DMatrix::from_row_slice(m, n, t.matrix());
    let pinv = a.pseudo_inverse(1e-14).expect("non-negative epsilon");
    let matrix: Vec<f64> = (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| pinv[(i, j)]).collect();
    let linear = AffineTransform::new(n, m, matrix.clone(), vec![0.0; n]);
    let shift = linear.apply_unchecked(t.translation());
    AffineTransform::new(n, m, matrix, shift.iter().map(|v| -v).collect())
}

fn enumerate_permutations(t: ElementType, sides: &[SideDescriptor]) -> Vec<Vec<usize>> {
    let n = t.node_count();
    let sorted: Vec<(usize, ElementType, Vec<usize>)> = sides
        .iter()
        .map(|s| {
            let mut v = s.node_local_indices.clone();
            v.sort_unstable();
            (s.dimension, s.side_type, v)
        })
        .collect();
    let mut out = Vec::new();
    let mut used = vec![false; n];
    let mut current = Vec::with_capacity(n);
    permute(n, &mut current, &mut used, &mut |p| {
        let preserves = sorted.iter().all(|(dim, ty, nodes)| {
            let mut mapped: Vec<usize> = nodes.iter().map(|&i| p[i]).collect();
            mapped.sort_unstable();
            sorted.iter().any(|(d2, t2, n2)| d2 == dim && t2 == ty && *n2 == mapped)
        });
        if preserves {
            out.push(p.to_vec());
        }
    });
    out
}

fn permute(n: usize, current: &mut Vec<usize>, used: &mut [bool], visit: &mut dyn FnMut(&[usize])) {
    if current.len() == n {
        visit(current);
        return;
    }
    for i in 0..n {
        if !used[i] {
            used[i] = true;
            current.push(i);
            permute(n, current, used, visit);
            current.pop();
            used[i] = false;
        }
    }
}

pub fn side_count(t: ElementType) -> usize {
    t.side_count()
}

pub fn side(t: ElementType, side: usize) -> Option<&'static SideDescriptor> {
    tables(t).sides.get(side)
}

pub fn side_nodes(t: ElementType, side: usize) -> Option<&'static [usize]> {
    tables(t).sides.get(side).map(|s| s.node_local_indices.as_slice())
}

pub fn side_to_element_transform(t: ElementType, side: usize) -> Option<&'static AffineTransform> {
    tables(t).side_to_element.get(side)
}

pub fn element_to_side_transform(t: ElementType, side: usize) -> Option<&'static AffineTransform> {
    tables(t).element_to_side.get(side)
}

/// `T_se ∘ T_es`: projection of element coordinates onto the side, in element
/// coordinates.
pub fn projection_to_side(t: ElementType, side: usize) -> Option<AffineTransform> {
    let tse = side_to_element_transform(t, side)?;
    let tes = element_to_side_transform(t, side)?;
    Some(tse.compose(tes).expect("side tables are conformable"))
}

/// Node orderings mapping the topology onto itself. Entry `p[i]` is the old
/// local node placed at new position `i`; the identity comes first.
pub fn permutations(t: ElementType) -> &'static [Vec<usize>] {
    &tables(t).permutations
}

pub fn permutation_index(t: ElementType, perm: &[usize]) -> Option<usize> {
    permutations(t).iter().position(|p| p == perm)
}

/// Master domain inequalities, relaxed by `MASTER_TOL`.
pub fn is_in_master(t: ElementType, x: &[f64]) -> bool {
    is_in_master_tol(t, x, MASTER_TOL)
}

pub fn is_in_master_tol(t: ElementType, x: &[f64], tol: f64) -> bool {
    if x.len() != t.dimension() {
        return false;
    }
    let within = |v: f64, lo: f64, hi: f64| v >= lo - tol && v <= hi + tol;
    match t {
        ElementType::Point => true,
        ElementType::Line => within(x[0], -1.0, 1.0),
        ElementType::Quadrilateral => within(x[0], -1.0, 1.0) && within(x[1], -1.0, 1.0),
        ElementType::Triangle => x[0] >= -tol && x[1] >= -tol && x[0] + x[1] <= 1.0 + tol,
        ElementType::Hexahedron => x.iter().all(|&v| within(v, -1.0, 1.0)),
        ElementType::Tetrahedron => {
            x.iter().all(|&v| v >= -tol) && x[0] + x[1] + x[2] <= 1.0 + tol
        }
        ElementType::Prism => {
            x[0] >= -tol && x[1] >= -tol && x[0] + x[1] <= 1.0 + tol && within(x[2], -1.0, 1.0)
        }
        ElementType::Pyramid => {
            let z = x[2];
            within(z, 0.0, 1.0) && within(x[0], -1.0 + z, 1.0 - z) && within(x[1], -1.0 + z, 1.0 - z)
        }
    }
}

/// Whether element coordinates `x` lie in the closure of `side`.
pub fn is_on_side(t: ElementType, side: usize, x: &[f64]) -> bool {
    let Some(desc) = self::side(t, side) else {
        return false;
    };
    if desc.dimension == t.dimension() {
        return is_in_master_tol(t, x, ON_SIDE_TOL);
    }
    let tes = &tables(t).element_to_side[side];
    let tse = &tables(t).side_to_element[side];
    let xs = tes.apply_unchecked(x);
    let back = tse.apply_unchecked(&xs);
    let dist = back.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    dist <= ON_SIDE_TOL && is_in_master_tol(desc.side_type, &xs, ON_SIDE_TOL)
}

/// Lowest-dimensional side whose closure contains `x` (the open side holding it).
pub fn containing_side(t: ElementType, x: &[f64]) -> Option<usize> {
    let sides = &tables(t).sides;
    let mut order: Vec<usize> = (0..sides.len()).collect();
    order.sort_by_key(|&s| (sides[s].dimension, s));
    order.into_iter().find(|&s| is_on_side(t, s, x))
}

/// Sides whose closure lies inside the closure of `side` (including itself).
pub fn sides_in_closure(t: ElementType, side: usize) -> Vec<usize> {
    let sides = &tables(t).sides;
    let outer = &sides[side].node_local_indices;
    sides
        .iter()
        .filter(|s| s.node_local_indices.iter().all(|n| outer.contains(n)))
        .map(|s| s.side_index)
        .collect()
}

/// Documentation dump: one side per line, `side_index dimension type node_list`.
pub fn dump_tables() -> String {
    let mut out = String::new();
    for t in ElementType::ALL {
        out.push_str(&format!("% {}\n", t.name()));
        for s in &tables(t).sides {
            let nodes: Vec<String> = s.node_local_indices.iter().map(|n| n.to_string()).collect();
            out.push_str(&format!(
                "{} {} {} {}\n",
                s.side_index,
                s.dimension,
                s.side_type.name(),
                nodes.join(" ")
            ));
        }
    }
    out
}
