//! Mesh text format and legacy VTK export.
//!
//! The mesh format is the pattern grammar without the id/name record:
//!
//! ```text
//! <#nodes> <#elements>
//! <x> <y> <z>                      (one line per node)
//! <type> <material> <nodes...>     (one line per element)
//! ```

pub mod grammar;

use std::fmt::Write as _;

use thiserror::Error;

use crate::mesh::{GeoMesh, MeshError};
use crate::topology::ElementType;
pub use grammar::{format_real, ParseError};
use grammar::{parse_counts, parse_element, parse_node, Records};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IoError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Parses a mesh and builds its connectivity.
pub fn read_mesh(text: &str) -> Result<GeoMesh, IoError> {
    let mut recs = Records::new(text);
    let (node_count, element_count) = parse_counts(&recs.next_record("node and element counts")?)?;
    let mut mesh = GeoMesh::new();
    for _ in 0..node_count {
        mesh.add_node(parse_node(&recs.next_record("node coordinates")?)?);
    }
    for _ in 0..element_count {
        let rec = parse_element(&recs.next_record("element")?, node_count)?;
        mesh.add_element(rec.element_type, rec.material, rec.nodes)
            .map_err(|e| ParseError::new(rec.line, e.to_string()))?;
    }
    recs.expect_end()?;
    mesh.build_connectivity()?;
    Ok(mesh)
}

/// Writes all nodes and the leaf elements in ascending index order.
pub fn write_mesh(mesh: &GeoMesh) -> String {
    let leaves: Vec<usize> = mesh.leaves().collect();
    let mut out = String::new();
    writeln!(out, "{} {}", mesh.node_count(), leaves.len()).unwrap();
    for x in mesh.nodes() {
        writeln!(out, "{} {} {}", format_real(x[0]), format_real(x[1]), format_real(x[2])).unwrap();
    }
    for e in leaves {
        let el = mesh.element(e);
        write!(out, "{} {}", el.element_type.code(), el.material).unwrap();
        for n in &el.nodes {
            write!(out, " {n}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn vtk_cell_type(t: ElementType) -> u8 {
    match t {
        ElementType::Point => 1,
        ElementType::Line => 3,
        ElementType::Triangle => 5,
        ElementType::Quadrilateral => 9,
        ElementType::Tetrahedron => 10,
        ElementType::Hexahedron => 12,
        ElementType::Prism => 13,
        ElementType::Pyramid => 14,
    }
}

/// Legacy ASCII unstructured grid with material and level cell data.
pub fn export_vtk(mesh: &GeoMesh, leaf_only: bool) -> String {
    let cells: Vec<usize> = if leaf_only {
        mesh.leaves().collect()
    } else {
        (0..mesh.element_count()).collect()
    };
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\nrefpat mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    writeln!(out, "POINTS {} double", mesh.node_count()).unwrap();
    for x in mesh.nodes() {
        writeln!(out, "{} {} {}", format_real(x[0]), format_real(x[1]), format_real(x[2])).unwrap();
    }
    let size: usize = cells.iter().map(|&e| 1 + mesh.element(e).nodes.len()).sum();
    writeln!(out, "CELLS {} {}", cells.len(), size).unwrap();
    for &e in &cells {
        let nodes = &mesh.element(e).nodes;
        write!(out, "{}", nodes.len()).unwrap();
        for n in nodes {
            write!(out, " {n}").unwrap();
        }
        out.push('\n');
    }
    writeln!(out, "CELL_TYPES {}", cells.len()).unwrap();
    for &e in &cells {
        writeln!(out, "{}", vtk_cell_type(mesh.element(e).element_type)).unwrap();
    }
    writeln!(out, "CELL_DATA {}", cells.len()).unwrap();
    out.push_str("SCALARS material int 1\nLOOKUP_TABLE default\n");
    for &e in &cells {
        writeln!(out, "{}", mesh.element(e).material).unwrap();
    }
    out.push_str("SCALARS level int 1\nLOOKUP_TABLE default\n");
    for &e in &cells {
        writeln!(out, "{}", mesh.level(e)).unwrap();
    }
    out
}
