use super::*;
use crate::check::{connectivity_violations, is_conforming, volume_defects};
use crate::pattern::parse_pattern;
use crate::patterndb::PatternDb;
use crate::samples::{kuhn_cube, master_tetrahedron, tetra_dir_1side, unit_hexahedron};

fn mesh_of(nodes: &[[f64; 3]], elements: &[(ElementType, Vec<usize>)]) -> GeoMesh {
    let mut m = GeoMesh::new();
    for &x in nodes {
        m.add_node(x);
    }
    for (t, n) in elements {
        m.add_element(*t, 1, n.clone()).unwrap();
    }
    m.build_connectivity().unwrap();
    m
}

fn two_triangles() -> GeoMesh {
    mesh_of(
        &[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]],
        &[(ElementType::Triangle, vec![0, 1, 2]), (ElementType::Triangle, vec![1, 3, 2])],
    )
}

#[test]
fn single_element_cycles_to_itself() {
    let m = master_tetrahedron();
    for s in 0..15 {
        let r = SideRef::new(0, s);
        assert_eq!(m.cycle(r), vec![r]);
    }
}

#[test]
fn two_triangles_share_an_edge() {
    let m = two_triangles();
    // nodes 1 and 2 are shared, nodes 0 and 3 are not
    assert_eq!(m.cycle(SideRef::new(0, 1)).len(), 2);
    assert_eq!(m.cycle(SideRef::new(0, 2)).len(), 2);
    assert_eq!(m.cycle(SideRef::new(0, 0)).len(), 1);
    assert_eq!(m.cycle(SideRef::new(1, 1)).len(), 1);
    // edge (1,2) is side 4 of the first and side 5 of the second
    assert_eq!(m.neighbor(SideRef::new(0, 4)), SideRef::new(1, 5));
    assert_eq!(m.neighbor(SideRef::new(1, 5)), SideRef::new(0, 4));
    assert!(connectivity_violations(&m).is_empty());
}

#[test]
fn quad_pair_edge_cycles() {
    let m = mesh_of(
        &[
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [2.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [1.0, 1.0, 0.0],
            [2.0, 1.0, 0.0],
        ],
        &[
            (ElementType::Quadrilateral, vec![0, 1, 4, 3]),
            (ElementType::Quadrilateral, vec![1, 2, 5, 4]),
        ],
    );
    for e in 0..2 {
        for s in 4..8 {
            let shared = (e, s) == (0, 5) || (e, s) == (1, 7);
            assert_eq!(m.cycle(SideRef::new(e, s)).len(), if shared { 2 } else { 1 });
        }
    }
}

#[test]
fn fan_of_four_triangles_around_a_node() {
    let c = [0.0, 0.0, 0.0];
    let ring = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]];
    let mut nodes = vec![c];
    nodes.extend(ring);
    let elements: Vec<_> = (0..4).map(|i| (ElementType::Triangle, vec![0, 1 + i, 1 + (i + 1) % 4])).collect();
    let m = mesh_of(&nodes, &elements);
    let cycle = m.cycle(SideRef::new(0, 0));
    assert_eq!(cycle.len(), 4);
    let mut elements: Vec<usize> = cycle.iter().map(|r| r.element).collect();
    elements.sort();
    assert_eq!(elements, [0, 1, 2, 3]);
}

#[test]
fn kuhn_cube_faces() {
    let m = kuhn_cube(Some(2));
    assert!(connectivity_violations(&m).is_empty());
    let mut interior = 0;
    for e in 0..6 {
        for s in 10..14 {
            let n = m.cycle(SideRef::new(e, s)).len();
            assert!(n <= 2);
            if n == 2 {
                interior += 1;
            }
        }
    }
    // 6 interior faces counted from both sides, plus the 2 target triangles
    assert_eq!(interior, 14);
}

#[test]
fn opposite_edges_transform() {
    let m = mesh_of(
        &[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0], [2.0, 0.0, 0.0], [2.0, 1.0, 0.0]],
        &[
            (ElementType::Quadrilateral, vec![0, 1, 2, 3]),
            (ElementType::Quadrilateral, vec![1, 4, 5, 2]),
        ],
    );
    let a = SideRef::new(0, 5);
    let b = SideRef::new(1, 7);
    let t = m.neighbor_transform(a, b).unwrap();
    assert!((t.coeff(0, 0) + 1.0).abs() < 1e-12);
    assert!(t.translation()[0].abs() < 1e-12);
    let back = m.neighbor_transform(b, a).unwrap();
    assert!(back.compose(&t).unwrap().is_identity(1e-12));
    assert!(m.neighbor_transform(a, a).unwrap().is_identity(1e-12));
    assert!(matches!(
        m.neighbor_transform(a, SideRef::new(1, 4)),
        Err(MeshError::NotNeighbors { .. })
    ));
}

#[test]
fn rotated_tet_faces_agree_in_space() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    let nodes = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]];
    // second tetra lists the shared face (1,2,3) rotated
    let m = mesh_of(
        &nodes,
        &[(ElementType::Tetrahedron, vec![0, 1, 2, 3]), (ElementType::Tetrahedron, vec![2, 3, 4, 1])],
    );
    let a = SideRef::new(0, 12);
    let b = *m.cycle(a).iter().find(|r| r.element == 1).unwrap();
    let t = m.neighbor_transform(a, b).unwrap();
    let tri = ElementType::Triangle;
    for _ in 0..10 {
        let (u, v): (f64, f64) = (rng.gen(), rng.gen());
        let xs = if u + v <= 1.0 { vec![u, v] } else { vec![1.0 - u, 1.0 - v] };
        let xa = topology::side_to_element_transform(ElementType::Tetrahedron, a.side).unwrap().apply_unchecked(&xs);
        let xb = topology::side_to_element_transform(ElementType::Tetrahedron, b.side)
            .unwrap()
            .apply_unchecked(&t.apply_unchecked(&xs));
        let (pa, pb) = (m.element_map(0, &xa).unwrap(), m.element_map(1, &xb).unwrap());
        for k in 0..3 {
            assert!((pa[k] - pb[k]).abs() < 1e-10);
        }
    }
    assert!(topology::permutations(tri).len() == 6);
    let back = m.neighbor_transform(b, a).unwrap();
    assert!(back.compose(&t).unwrap().is_identity(1e-12));
}

#[test]
fn element_map_examples() {
    let line = mesh_of(&[[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]], &[(ElementType::Line, vec![0, 1])]);
    assert_eq!(line.element_map(0, &[0.0]).unwrap(), [1.0, 0.0, 0.0]);
    let tet = master_tetrahedron();
    assert_eq!(tet.element_map(0, &[0.2, 0.3, 0.1]).unwrap(), [0.2, 0.3, 0.1]);
    assert!(matches!(tet.element_map(0, &[0.5, 0.5, 0.5]), Err(MeshError::OutsideMaster { .. })));
    let hex = unit_hexahedron();
    for i in 0..8 {
        let x = hex.element_map(0, ElementType::Hexahedron.corner(i)).unwrap();
        assert_eq!(x, hex.node(hex.element(0).nodes[i]));
    }
}

#[test]
fn add_element_validates() {
    let mut m = GeoMesh::new();
    m.add_node([0.0; 3]);
    assert!(matches!(
        m.add_element(ElementType::Line, 1, vec![0]),
        Err(MeshError::WrongNodeCount { .. })
    ));
    assert!(matches!(
        m.add_element(ElementType::Line, 1, vec![0, 4]),
        Err(MeshError::NodeOutOfRange { .. })
    ));
}

#[test]
fn one_side_pattern_on_master_tetra() {
    let mut db = PatternDb::new();
    let r = db.insert(parse_pattern(tetra_dir_1side()).unwrap()).unwrap();
    let mut m = master_tetrahedron();
    let sons = m.divide(0, &db, r).unwrap();
    let mut types: Vec<_> = sons.iter().map(|&s| m.element(s).element_type).collect();
    types.sort();
    assert_eq!(types, [ElementType::Tetrahedron, ElementType::Prism]);
    assert_eq!(m.node_count(), 7);
    assert!(volume_defects(&m, 1e-12).is_empty());
    assert!(connectivity_violations(&m).is_empty());
    assert!(matches!(m.divide(0, &db, r), Err(MeshError::AlreadyDivided { .. })));
    for (k, &s) in sons.iter().enumerate() {
        let f = m.element(s).father.as_ref().unwrap();
        assert_eq!((f.element, f.pattern, f.ordinal), (0, r, k));
    }
}

#[test]
fn uniform_line_division() {
    let db = PatternDb::with_uniform();
    let mut m = mesh_of(&[[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]], &[(ElementType::Line, vec![0, 1])]);
    let sons = m.divide(0, &db, db.uniform(ElementType::Line).unwrap()).unwrap();
    assert_eq!(sons.len(), 2);
    assert_eq!(m.node(2), [1.0, 0.0, 0.0]);
    assert!(m.element(sons[0]).nodes.contains(&2) && m.element(sons[1]).nodes.contains(&2));
}

#[test]
fn shared_midpoint_is_reused() {
    let db = PatternDb::with_uniform();
    let uni = db.uniform(ElementType::Triangle).unwrap();
    let mut m = two_triangles();
    m.divide(0, &db, uni).unwrap();
    assert_eq!(m.node_count(), 4 + 3);
    m.divide(1, &db, uni).unwrap();
    // only two of the second triangle's three midpoints are new
    assert_eq!(m.node_count(), 4 + 3 + 2);
    assert!(is_conforming(&m));
    assert!(connectivity_violations(&m).is_empty());
}

#[test]
fn incompatible_division_leaves_mesh_unchanged() {
    let mut db = PatternDb::with_uniform();
    db.insert(parse_pattern(crate::samples::CORPUS.iter().find(|(f, _)| *f == "tri_dir.rpt").unwrap().1).unwrap())
        .unwrap();
    let mut m = two_triangles();
    m.divide(0, &db, db.uniform(ElementType::Triangle).unwrap()).unwrap();
    let before = m.clone();
    // a TriDir variant that leaves edge (1,2) of the second triangle whole
    let bad = db
        .patterns_for_type(ElementType::Triangle)
        .iter()
        .copied()
        .find(|&r| db.get(r).son_count() == 2 && !db.get(r).is_side_refined(5))
        .unwrap();
    match m.divide(1, &db, bad) {
        Err(MeshError::Incompatible { element: 1, side: 5, compatible }) => {
            assert!(compatible.contains(&db.uniform(ElementType::Triangle).unwrap()));
            assert!(compatible.iter().all(|&c| db.get(c).is_side_refined(5)));
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(m, before);
}

#[test]
fn mismatched_type_is_rejected() {
    let db = PatternDb::with_uniform();
    let mut m = master_tetrahedron();
    assert!(matches!(
        m.divide(0, &db, db.uniform(ElementType::Hexahedron).unwrap()),
        Err(MeshError::TypeMismatch { .. })
    ));
}

#[test]
fn uniform_hex_levels() {
    let db = PatternDb::with_uniform();
    let uni = db.uniform(ElementType::Hexahedron).unwrap();
    let mut m = unit_hexahedron();
    for _ in 0..2 {
        for e in m.leaves().collect::<Vec<_>>() {
            m.divide(e, &db, uni).unwrap();
        }
    }
    assert_eq!(m.leaves().count(), 64);
    assert_eq!(m.node_count(), 125);
    assert!(connectivity_violations(&m).is_empty());
    assert!(is_conforming(&m));
    assert!(volume_defects(&m, 1e-10).is_empty());
}

#[test]
fn rebuilding_connectivity_matches_local_updates() {
    let db = PatternDb::with_uniform();
    let mut m = kuhn_cube(None);
    let uni = db.uniform(ElementType::Tetrahedron).unwrap();
    for e in [0, 3, 5] {
        m.divide(e, &db, uni).unwrap();
    }
    let mut rebuilt = m.clone();
    rebuilt.build_connectivity().unwrap();
    for el in m.elements() {
        for s in 0..el.element_type.side_count() {
            let r = SideRef::new(el.index, s);
            let mut a = m.cycle(r);
            let mut b = rebuilt.cycle(r);
            a.sort();
            b.sort();
            assert_eq!(a, b);
        }
    }
}
