//! Geometric mesh with circular neighbor connectivity and father/son links.
//!
//! Every `(element, side)` pair stores one link to the next pair sharing the
//! same point set. Following links from any pair walks a closed cycle; a pair
//! with no neighbors links to itself.

mod connectivity;
mod divide;
mod geometry;

use thiserror::Error;

use crate::affine::{fit_l2, AffineTransform};
use crate::patterndb::PatternRef;
use crate::topology::{self, ElementType, MASTER_TOL};

pub use geometry::{element_measure, shape_functions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SideRef {
    pub element: usize,
    pub side: usize,
}

impl SideRef {
    pub fn new(element: usize, side: usize) -> Self {
        SideRef { element, side }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("node {node} out of range (mesh has {count} nodes)")]
    NodeOutOfRange { node: usize, count: usize },
    #[error("element {element} out of range")]
    ElementOutOfRange { element: usize },
    #[error("side {side} out of range for {element_type}")]
    SideOutOfRange { element_type: ElementType, side: usize },
    #[error("{element_type} needs {expected} nodes, got {found}")]
    WrongNodeCount {
        element_type: ElementType,
        expected: usize,
        found: usize,
    },
    #[error("element sides {a:?} and {b:?} are not neighbors")]
    NotNeighbors { a: SideRef, b: SideRef },
    #[error("parametric point {xi:?} is outside the master {element_type}")]
    OutsideMaster { element_type: ElementType, xi: Vec<f64> },
    #[error("element {element} is already divided")]
    AlreadyDivided { element: usize },
    #[error("pattern for {pattern_type} cannot divide a {element_type}")]
    TypeMismatch {
        element_type: ElementType,
        pattern_type: ElementType,
    },
    #[error(
        "pattern is incompatible with a refined neighbor of element {element} on side {side}; \
         {} compatible pattern(s) available", compatible.len()
    )]
    Incompatible {
        element: usize,
        side: usize,
        compatible: Vec<PatternRef>,
    },
    #[error("conflicting side patterns imposed on element {element} side {side}")]
    ConflictingNeighbors { element: usize, side: usize },
    #[error("structural error: {0}")]
    Structural(String),
}

/// Link from a son to the element it refines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FatherLink {
    pub element: usize,
    pub pattern: PatternRef,
    pub ordinal: usize,
}

/// Refinement state of a divided element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Refinement {
    pub pattern: PatternRef,
    pub sons: Vec<usize>,
    /// Global node index for each node of the pattern's internal mesh.
    pub nodes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeoElement {
    pub index: usize,
    pub element_type: ElementType,
    pub material: i32,
    pub nodes: Vec<usize>,
    neighbors: Vec<SideRef>,
    pub father: Option<FatherLink>,
    pub refinement: Option<Refinement>,
}

impl GeoElement {
    pub fn sons(&self) -> Option<&[usize]> {
        self.refinement.as_ref().map(|r| r.sons.as_slice())
    }

    pub fn is_leaf(&self) -> bool {
        self.refinement.is_none()
    }

    pub fn dimension(&self) -> usize {
        self.element_type.dimension()
    }

    pub fn neighbor(&self, side: usize) -> SideRef {
        self.neighbors[side]
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GeoMesh {
    nodes: Vec<[f64; 3]>,
    elements: Vec<GeoElement>,
    /// One corner pair per node, the persistent form of the node incidence vector.
    node_anchor: Vec<Option<SideRef>>,
}

impl GeoMesh {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, x: [f64; 3]) -> usize {
        self.nodes.push(x);
        self.node_anchor.push(None);
        self.nodes.len() - 1
    }

    /// Adds an element with self-referencing neighbors. Call
    /// [`build_connectivity`](Self::build_connectivity) once all elements exist.
    pub fn add_element(
        &mut self,
        element_type: ElementType,
        material: i32,
        nodes: Vec<usize>,
    ) -> Result<usize, MeshError> {
        if nodes.len() != element_type.node_count() {
            return Err(MeshError::WrongNodeCount {
                element_type,
                expected: element_type.node_count(),
                found: nodes.len(),
            });
        }
        if let Some(&node) = nodes.iter().find(|&&n| n >= self.nodes.len()) {
            return Err(MeshError::NodeOutOfRange {
                node,
                count: self.nodes.len(),
            });
        }
        let index = self.elements.len();
        self.elements.push(GeoElement {
            index,
            element_type,
            material,
            nodes,
            neighbors: (0..element_type.side_count()).map(|s| SideRef::new(index, s)).collect(),
            father: None,
            refinement: None,
        });
        Ok(index)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn node(&self, index: usize) -> [f64; 3] {
        self.nodes[index]
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn element(&self, index: usize) -> &GeoElement {
        &self.elements[index]
    }

    pub fn elements(&self) -> &[GeoElement] {
        &self.elements
    }

    pub fn get_element(&self, index: usize) -> Result<&GeoElement, MeshError> {
        self.elements
            .get(index)
            .ok_or(MeshError::ElementOutOfRange { element: index })
    }

    /// Indices of elements without sons, ascending.
    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        self.elements.iter().filter(|e| e.is_leaf()).map(|e| e.index)
    }

    /// Number of ancestors of `element`.
    pub fn level(&self, element: usize) -> usize {
        let mut level = 0;
        let mut current = &self.elements[element];
        while let Some(f) = &current.father {
            level += 1;
            current = &self.elements[f.element];
        }
        level
    }

    pub fn dimension(&self) -> usize {
        self.elements.iter().map(|e| e.dimension()).max().unwrap_or(0)
    }

    pub fn neighbor(&self, of: SideRef) -> SideRef {
        self.elements[of.element].neighbors[of.side]
    }

    /// All pairs of the neighbor cycle through `start`, beginning with `start`.
    pub fn cycle(&self, start: SideRef) -> Vec<SideRef> {
        let mut out = vec![start];
        let mut current = self.neighbor(start);
        while current != start {
            out.push(current);
            current = self.neighbor(current);
            assert!(out.len() <= 4 * self.elements.len() + 4, "open neighbor cycle at {start:?}");
        }
        out
    }

    pub fn side_global_nodes(&self, of: SideRef) -> Vec<usize> {
        let el = &self.elements[of.element];
        topology::side_nodes(el.element_type, of.side)
            .expect("valid side")
            .iter()
            .map(|&i| el.nodes[i])
            .collect()
    }

    /// Parametric map from side `a` to side `b` such that both elements place
    /// corresponding points at the same cartesian location.
    pub fn neighbor_transform(&self, a: SideRef, b: SideRef) -> Result<AffineTransform, MeshError> {
        for r in [a, b] {
            let el = self.get_element(r.element)?;
            if r.side >= el.element_type.side_count() {
                return Err(MeshError::SideOutOfRange {
                    element_type: el.element_type,
                    side: r.side,
                });
            }
        }
        if !self.cycle(a).contains(&b) {
            return Err(MeshError::NotNeighbors { a, b });
        }
        let side_type = topology::side(self.elements[a.element].element_type, a.side)
            .expect("checked")
            .side_type;
        let ga = self.side_global_nodes(a);
        let gb = self.side_global_nodes(b);
        let samples: Vec<_> = ga
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let j = gb.iter().position(|h| h == g).expect("cycle members share nodes");
                (side_type.corner(i).to_vec(), side_type.corner(j).to_vec())
            })
            .collect();
        fit_l2(&samples).map_err(|e| MeshError::Structural(e.to_string()))
    }

    /// Cartesian image of master coordinates `xi` under the element's
    /// vertex-interpolating map.
    pub fn element_map(&self, element: usize, xi: &[f64]) -> Result<[f64; 3], MeshError> {
        let el = self.get_element(element)?;
        let t = el.element_type;
        if xi.len() != t.dimension() || !topology::is_in_master_tol(t, xi, 1e3 * MASTER_TOL) {
            return Err(MeshError::OutsideMaster {
                element_type: t,
                xi: xi.to_vec(),
            });
        }
        Ok(self.element_map_unchecked(element, xi))
    }

    pub fn element_map_unchecked(&self, element: usize, xi: &[f64]) -> [f64; 3] {
        let el = &self.elements[element];
        let phi = shape_functions(el.element_type, xi);
        let mut x = [0.0; 3];
        for (w, &n) in phi.iter().zip(&el.nodes) {
            for (xk, nk) in x.iter_mut().zip(self.nodes[n]) {
                *xk += w * nk;
            }
        }
        x
    }

    pub(crate) fn set_node(&mut self, index: usize, x: [f64; 3]) {
        self.nodes[index] = x;
    }

    pub(crate) fn element_mut(&mut self, index: usize) -> &mut GeoElement {
        &mut self.elements[index]
    }

    pub(crate) fn set_neighbor(&mut self, of: SideRef, to: SideRef) {
        self.elements[of.element].neighbors[of.side] = to;
    }
}

#[cfg(test)]
mod tests;
