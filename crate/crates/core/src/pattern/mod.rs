//! Refinement patterns: a master element partitioned into sons.
//!
//! A pattern owns an internal [`GeoMesh`] whose element 0 is the father and
//! whose remaining elements are the sons, with every node expressed in the
//! father's master coordinates (padded to three components).

mod parse;
pub mod uniform;

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::affine::{fit_l2, fit_l2_weighted, AffineTransform};
use crate::io::grammar::{format_real, ParseError};
use crate::mesh::{element_measure, GeoElement, GeoMesh, MeshError, SideRef};
use crate::patterndb::PatternRef;
use crate::quadrature;
use crate::topology::{self, ElementType, ON_SIDE_TOL};

pub use parse::parse_pattern;

/// Coordinate tolerance used to match pattern nodes.
pub const NODE_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PatternError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid pattern: {0}")]
    Invalid(String),
    #[error("father element is degenerate")]
    DegenerateFather,
    #[error("father element is not an affine image of the master element (residual {residual:.3e})")]
    NonAffineFather { residual: f64 },
    #[error("node {node} lies outside the father element")]
    NodeOutsideFather { node: usize },
    #[error("side {side} of son {son} is not contained in any father side")]
    SonSideNotContained { son: usize, side: usize },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Father side holding a son side, and the parametric map between them.
#[derive(Debug, Clone, PartialEq)]
pub struct SubSide {
    pub father_side: usize,
    pub transform: AffineTransform,
}

/// What a father side contains: internal nodes lying in its open interior and
/// the son sides of any dimension whose center lies there.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SidePartition {
    pub nodes: Vec<usize>,
    /// `(son ordinal, son side)` pairs.
    pub sub_sides: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct RefinementPattern {
    id: i64,
    name: String,
    mesh: GeoMesh,
    node_side: Vec<usize>,
    sub_sides: Vec<Vec<SubSide>>,
    partitions: Vec<SidePartition>,
    side_patterns: Vec<Option<PatternRef>>,
    permutations: Vec<PatternRef>,
}

/// Raw element record `(type, material, nodes)`.
pub type ElementSpec = (ElementType, i32, Vec<usize>);

impl RefinementPattern {
    /// Builds and initializes a pattern from nodes in any affine placement.
    ///
    /// The first element is the father. Side patterns and permutations stay
    /// empty until the pattern is inserted into a database.
    pub fn new(
        id: i64,
        name: impl Into<String>,
        nodes: Vec<[f64; 3]>,
        elements: Vec<ElementSpec>,
    ) -> Result<Self, PatternError> {
        let raw = Self::uninitialized(id, name, nodes, elements)?;
        raw.initialized()
    }

    pub(crate) fn uninitialized(
        id: i64,
        name: impl Into<String>,
        nodes: Vec<[f64; 3]>,
        elements: Vec<ElementSpec>,
    ) -> Result<Self, PatternError> {
        let name = name.into();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(PatternError::Invalid(format!("bad pattern name `{name}`")));
        }
        let Some((father_type, _, _)) = elements.first() else {
            return Err(PatternError::Invalid("no father element".into()));
        };
        if *father_type == ElementType::Point {
            return Err(PatternError::Invalid("points cannot be refined".into()));
        }
        if elements.len() < 2 {
            return Err(PatternError::Invalid("pattern has no sons".into()));
        }
        let dim = father_type.dimension();
        if let Some(i) = elements.iter().position(|(t, _, _)| t.dimension() != dim) {
            return Err(PatternError::Invalid(format!(
                "element {i} has dimension {} but the father has dimension {dim}",
                elements[i].0.dimension()
            )));
        }
        let mut mesh = GeoMesh::new();
        for x in nodes {
            mesh.add_node(x);
        }
        for (t, mat, n) in elements {
            mesh.add_element(t, mat, n)?;
        }
        Ok(RefinementPattern {
            id,
            name,
            mesh,
            node_side: Vec::new(),
            sub_sides: Vec::new(),
            partitions: Vec::new(),
            side_patterns: Vec::new(),
            permutations: Vec::new(),
        })
    }

    fn initialized(mut self) -> Result<Self, PatternError> {
        self.normalize_to_master()?;
        self.mesh.build_connectivity()?;
        self.compute_subside_transforms()?;
        self.compute_side_partitions();
        self.side_patterns = vec![None; self.father_type().side_count()];
        Ok(self)
    }

    pub fn id(&self) -> i64 {
        self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn father_type(&self) -> ElementType {
        self.mesh.element(0).element_type
    }

    /// The internal mesh: element 0 is the father, element `j + 1` is son `j`.
    pub fn mesh(&self) -> &GeoMesh {
        &self.mesh
    }

    pub fn father(&self) -> &GeoElement {
        self.mesh.element(0)
    }

    pub fn son_count(&self) -> usize {
        self.mesh.element_count() - 1
    }

    pub fn son(&self, ordinal: usize) -> &GeoElement {
        self.mesh.element(ordinal + 1)
    }

    pub fn sons(&self) -> impl Iterator<Item = &GeoElement> {
        self.mesh.elements()[1..].iter()
    }

    pub fn node_count(&self) -> usize {
        self.mesh.node_count()
    }

    /// Master coordinates of a node, `dimension` components.
    pub fn node_coords(&self, node: usize) -> Vec<f64> {
        self.mesh.node(node)[..self.father_type().dimension()].to_vec()
    }

    pub fn is_father_corner(&self, node: usize) -> bool {
        self.father().nodes.contains(&node)
    }

    /// Nodes that are not father corners, ascending.
    pub fn internal_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.node_count()).filter(|&n| !self.is_father_corner(n))
    }

    /// Lowest-dimensional father side containing the node.
    pub fn node_side(&self, node: usize) -> usize {
        self.node_side[node]
    }

    pub fn sub_side(&self, son: usize, side: usize) -> &SubSide {
        &self.sub_sides[son][side]
    }

    pub fn partition(&self, father_side: usize) -> &SidePartition {
        &self.partitions[father_side]
    }

    /// Pattern induced on a father side; `None` for unrefined sides, corner
    /// sides and the element side itself.
    pub fn side_pattern(&self, side: usize) -> Option<PatternRef> {
        self.side_patterns.get(side).copied().flatten()
    }

    /// Permuted variants, indexed like [`topology::permutations`].
    pub fn permutations(&self) -> &[PatternRef] {
        &self.permutations
    }

    /// Whether the pattern subdivides father side `side`.
    ///
    /// A side is unrefined when exactly one son side of the same dimension by
    /// node set covers it, equal to the father side's, and no internal node
    /// lies in its closure.
    pub fn is_side_refined(&self, side: usize) -> bool {
        let t = self.father_type();
        let desc = topology::side(t, side).expect("valid side");
        if desc.dimension == 0 {
            return false;
        }
        let closure = topology::sides_in_closure(t, side);
        if self.internal_nodes().any(|n| closure.contains(&self.node_side[n])) {
            return true;
        }
        // several sons may share the same side, so compare node sets
        let covering: BTreeSet<Vec<usize>> = self.partitions[side]
            .sub_sides
            .iter()
            .filter(|&&(j, s)| topology::side(self.son(j).element_type, s).expect("valid").dimension == desc.dimension)
            .map(|&(j, s)| {
                let mut nodes = self.mesh.side_global_nodes(SideRef::new(j + 1, s));
                nodes.sort_unstable();
                nodes
            })
            .collect();
        let mut father_nodes = self.mesh.side_global_nodes(SideRef::new(0, side));
        father_nodes.sort_unstable();
        covering.len() != 1 || !covering.contains(&father_nodes)
    }

    /// Father edge sides (sides of dimension 1, including the element side
    /// of a line) that the pattern splits.
    pub fn split_edges(&self) -> Vec<usize> {
        edge_sides(self.father_type())
            .filter(|&s| self.is_side_refined(s))
            .collect()
    }

    pub(crate) fn set_id(&mut self, id: i64) {
        self.id = id;
    }

    pub(crate) fn set_name(&mut self, name: String) {
        self.name = name;
    }

    pub(crate) fn set_side_pattern(&mut self, side: usize, r: Option<PatternRef>) {
        self.side_patterns[side] = r;
    }

    pub(crate) fn set_permutations(&mut self, perms: Vec<PatternRef>) {
        self.permutations = perms;
    }

    /// Re-expresses every node in the father's master coordinates.
    ///
    /// The father must be an affine image of its master element; the inverse
    /// map is the pseudo-inverse of the fitted corner map.
    pub fn normalize_to_master(&mut self) -> Result<(), PatternError> {
        let t = self.father_type();
        let dim = t.dimension();
        let corners = self.father().nodes.clone();
        let samples: Vec<_> = corners
            .iter()
            .enumerate()
            .map(|(i, &n)| (t.corner(i).to_vec(), self.mesh.node(n).to_vec()))
            .collect();
        let map = fit_l2(&samples).map_err(|e| PatternError::Invalid(e.to_string()))?;
        let scale = samples
            .iter()
            .flat_map(|(_, x)| samples.iter().map(move |(_, y)| dist(x, y)))
            .fold(0.0, f64::max);
        if scale == 0.0 {
            return Err(PatternError::DegenerateFather);
        }
        let residual = samples
            .iter()
            .map(|(xi, x)| dist(&map.apply_unchecked(xi), x))
            .fold(0.0, f64::max);
        if residual > ON_SIDE_TOL * scale {
            return Err(PatternError::NonAffineFather { residual });
        }

        let a = DMatrix::from_row_slice(3, dim, map.matrix());
        let sv = a.clone().svd(false, false).singular_values;
        if sv.min() <= 1e-10 * scale {
            return Err(PatternError::DegenerateFather);
        }
        let pinv = a.pseudo_inverse(0.0).expect("non-negative epsilon");
        let b = map.translation();

        for n in 0..self.node_count() {
            let x = self.mesh.node(n);
            let padded = if let Some(i) = corners.iter().position(|&c| c == n) {
                pad(t.corner(i))
            } else {
                let d: Vec<f64> = (0..3).map(|k| x[k] - b[k]).collect();
                let xi: Vec<f64> = (0..dim)
                    .map(|r| snap((0..3).map(|k| pinv[(r, k)] * d[k]).sum()))
                    .collect();
                if dist(&map.apply_unchecked(&xi), &x) > ON_SIDE_TOL * scale
                    || !topology::is_in_master_tol(t, &xi, ON_SIDE_TOL)
                {
                    return Err(PatternError::NodeOutsideFather { node: n });
                }
                pad(&xi)
            };
            self.mesh.set_node(n, padded);
        }
        Ok(())
    }

    /// Fits the map from each son side into the father side holding it.
    pub fn compute_subside_transforms(&mut self) -> Result<(), PatternError> {
        let ft = self.father_type();
        let dim = ft.dimension();
        let mut all = Vec::with_capacity(self.son_count());
        for j in 0..self.son_count() {
            let st = self.son(j).element_type;
            let mut per_son = Vec::with_capacity(st.side_count());
            for s in 0..st.side_count() {
                let desc = topology::side(st, s).expect("valid side");
                let tse = topology::side_to_element_transform(st, s).expect("valid side");
                let to_father = |xs: &[f64]| -> Vec<f64> {
                    let xi = tse.apply_unchecked(xs);
                    self.mesh.element_map_unchecked(j + 1, &xi)[..dim].to_vec()
                };
                let center = to_father(&desc.side_type.center());
                let fs = topology::containing_side(ft, &center)
                    .ok_or(PatternError::SonSideNotContained { son: j, side: s })?;
                let tes = topology::element_to_side_transform(ft, fs).expect("valid side");
                let rule = quadrature::rule(desc.side_type);
                let mut samples = Vec::with_capacity(rule.len());
                let mut weights = Vec::with_capacity(rule.len());
                for (xs, w) in rule {
                    let x = to_father(&xs);
                    if !topology::is_on_side(ft, fs, &x) {
                        return Err(PatternError::SonSideNotContained { son: j, side: s });
                    }
                    samples.push((xs, tes.apply_unchecked(&x)));
                    weights.push(w);
                }
                let transform = fit_l2_weighted(&samples, &weights)
                    .map_err(|e| PatternError::Invalid(e.to_string()))?;
                per_son.push(SubSide {
                    father_side: fs,
                    transform,
                });
            }
            all.push(per_son);
        }
        self.sub_sides = all;
        Ok(())
    }

    pub fn compute_side_partitions(&mut self) {
        let ft = self.father_type();
        self.node_side = (0..self.node_count())
            .map(|n| {
                if let Some(i) = self.father().nodes.iter().position(|&c| c == n) {
                    return i;
                }
                topology::containing_side(ft, &self.node_coords(n)).expect("normalized node inside father")
            })
            .collect();
        let mut partitions = vec![SidePartition::default(); ft.side_count()];
        for n in self.internal_nodes().collect::<Vec<_>>() {
            partitions[self.node_side[n]].nodes.push(n);
        }
        for (j, sides) in self.sub_sides.iter().enumerate() {
            for (s, sub) in sides.iter().enumerate() {
                partitions[sub.father_side].sub_sides.push((j, s));
            }
        }
        self.partitions = partitions;
    }

    /// The pattern this one induces on father side `side`, if that side is a
    /// refined edge or face. The result is initialized but not yet stored.
    pub fn induced_side_pattern(&self, side: usize) -> Result<Option<RefinementPattern>, PatternError> {
        let ft = self.father_type();
        let desc = topology::side(ft, side).expect("valid side");
        if desc.dimension == 0 || side == ft.element_side() || !self.is_side_refined(side) {
            return Ok(None);
        }
        let closure = topology::sides_in_closure(ft, side);
        let mut local: Vec<usize> = desc
            .node_local_indices
            .iter()
            .map(|&i| self.father().nodes[i])
            .collect();
        local.extend(self.internal_nodes().filter(|&n| closure.contains(&self.node_side[n])));
        let tes = topology::element_to_side_transform(ft, side).expect("valid side");
        let nodes: Vec<[f64; 3]> = local
            .iter()
            .map(|&n| pad(&tes.apply_unchecked(&self.node_coords(n))))
            .collect();

        let mut elements = vec![(desc.side_type, self.father().material, (0..desc.node_local_indices.len()).collect())];
        let mut seen = BTreeSet::new();
        for &(j, s) in &self.partitions[side].sub_sides {
            let st = topology::side(self.son(j).element_type, s).expect("valid side");
            if st.dimension != desc.dimension {
                continue;
            }
            let mapped = self
                .mesh
                .side_global_nodes(SideRef::new(j + 1, s))
                .iter()
                .map(|g| local.iter().position(|l| l == g))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| PatternError::Invalid(format!("son {j} side {s} uses a node outside father side {side}")))?;
            let mut key = mapped.clone();
            key.sort_unstable();
            // sons sharing this side contribute it once
            if seen.insert(key) {
                elements.push((st.side_type, self.son(j).material, mapped));
            }
        }
        RefinementPattern::new(0, format!("{}.s{}", self.name, side), nodes, elements).map(Some)
    }

    /// The pattern re-expressed under permutation `index` of the father type:
    /// father corner `i` of the result is corner `perm[i]` of this pattern.
    pub fn permuted(&self, index: usize) -> Result<RefinementPattern, PatternError> {
        let ft = self.father_type();
        let perm = &topology::permutations(ft)[index];
        let samples: Vec<_> = perm
            .iter()
            .enumerate()
            .map(|(i, &p)| (ft.corner(p).to_vec(), ft.corner(i).to_vec()))
            .collect();
        let map = fit_l2(&samples).map_err(|e| PatternError::Invalid(e.to_string()))?;
        let nodes: Vec<[f64; 3]> = (0..self.node_count())
            .map(|n| {
                let y = map.apply_unchecked(&self.node_coords(n));
                pad(&y.into_iter().map(snap).collect::<Vec<_>>())
            })
            .collect();
        let mut elements: Vec<ElementSpec> = self
            .mesh
            .elements()
            .iter()
            .map(|e| (e.element_type, e.material, e.nodes.clone()))
            .collect();
        let father_nodes = &self.father().nodes;
        elements[0].2 = perm.iter().map(|&p| father_nodes[p]).collect();
        RefinementPattern::new(self.id, format!("{}.p{}", self.name, index), nodes, elements)
    }

    /// Cheap invariant used to bucket candidates before a full equality test.
    pub fn fingerprint(&self) -> (ElementType, usize, Vec<ElementType>) {
        let mut sons: Vec<ElementType> = self.sons().map(|s| s.element_type).collect();
        sons.sort();
        (self.father_type(), self.node_count(), sons)
    }

    /// Geometric equality: same father type and per-type son counts, a node
    /// bijection by coordinates, equal father corners and equal son node sets.
    pub fn geometric_eq(&self, other: &RefinementPattern) -> bool {
        if self.fingerprint() != other.fingerprint() {
            return false;
        }
        let mut map = vec![usize::MAX; self.node_count()];
        let mut used = vec![false; other.node_count()];
        for (n, slot) in map.iter_mut().enumerate() {
            let x = self.mesh.node(n);
            let Some(m) = (0..other.node_count()).find(|&m| !used[m] && dist(&x, &other.mesh.node(m)) <= NODE_TOL)
            else {
                return false;
            };
            used[m] = true;
            *slot = m;
        }
        let father_ok = self
            .father()
            .nodes
            .iter()
            .zip(&other.father().nodes)
            .all(|(&a, &b)| map[a] == b);
        if !father_ok {
            return false;
        }
        let key = |e: &GeoElement, f: &dyn Fn(usize) -> usize| {
            let mut nodes: Vec<usize> = e.nodes.iter().map(|&n| f(n)).collect();
            nodes.sort_unstable();
            (e.element_type, nodes)
        };
        let mut a: Vec<_> = self.sons().map(|e| key(e, &|n| map[n])).collect();
        let mut b: Vec<_> = other.sons().map(|e| key(e, &|n| n)).collect();
        a.sort();
        b.sort();
        a == b
    }

    /// Serializes in the pattern text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{} {}\n", self.node_count(), self.mesh.element_count()));
        out.push_str(&format!("{} {}\n", self.id, self.name));
        for x in self.mesh.nodes() {
            let line: Vec<String> = x.iter().map(|&v| format_real(v)).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        for e in self.mesh.elements() {
            out.push_str(&format!("{} {}", e.element_type.code(), e.material));
            for n in &e.nodes {
                out.push_str(&format!(" {n}"));
            }
            out.push('\n');
        }
        out
    }

    /// Checks the partition invariants and returns the problems found.
    pub fn validate(&self) -> Vec<String> {
        let mut issues = Vec::new();
        let ft = self.father_type();
        let total: f64 = (1..self.mesh.element_count()).map(|e| element_measure(&self.mesh, e)).sum();
        let expected = ft.master_measure();
        if ((total - expected) / expected).abs() > 1e-10 {
            issues.push(format!("son measures sum to {total}, father measure is {expected}"));
        }
        for n in 0..self.node_count() {
            if !topology::is_in_master(ft, &self.node_coords(n)) {
                issues.push(format!("node {n} lies outside the father"));
            }
        }
        for j in 0..self.son_count() {
            if element_measure(&self.mesh, j + 1) <= 1e-12 {
                issues.push(format!("son {j} is degenerate"));
            }
        }
        issues.extend(self.overlapping_sons());
        issues
    }

    /// Samples the interior of each son and reports points that fall strictly
    /// inside another son.
    fn overlapping_sons(&self) -> Vec<String> {
        let ft = self.father_type();
        let dim = ft.dimension();
        let mut issues = Vec::new();
        let inverse: Vec<Option<AffineTransform>> = self.sons().map(|s| self.affine_inverse(s.index)).collect();
        for j in 0..self.son_count() {
            let st = self.son(j).element_type;
            let center = st.center();
            for (p, _) in quadrature::rule(st) {
                // pull the sample slightly toward the center to stay interior
                let q: Vec<f64> = p.iter().zip(&center).map(|(a, c)| 0.9 * a + 0.1 * c).collect();
                let x = &self.mesh.element_map_unchecked(j + 1, &q)[..dim];
                for (k, inv) in inverse.iter().enumerate() {
                    let Some(inv) = inv else { continue };
                    if k == j {
                        continue;
                    }
                    let xi = inv.apply_unchecked(x);
                    let kt = self.son(k).element_type;
                    if topology::is_in_master_tol(kt, &xi, -1e-6) {
                        issues.push(format!("sons {j} and {k} overlap"));
                        break;
                    }
                }
            }
        }
        issues.sort();
        issues.dedup();
        issues
    }

    /// Inverse of a son's element map when that map is affine.
    fn affine_inverse(&self, element: usize) -> Option<AffineTransform> {
        let t = self.mesh.element(element).element_type;
        let dim = t.dimension();
        let samples: Vec<_> = (0..t.node_count())
            .map(|i| {
                let x = self.mesh.node(self.mesh.element(element).nodes[i])[..dim].to_vec();
                (x, t.corner(i).to_vec())
            })
            .collect();
        let inv = fit_l2(&samples).ok()?;
        let exact = samples.iter().all(|(x, xi)| dist(&inv.apply_unchecked(x), xi) < 1e-9);
        exact.then_some(inv)
    }
}

/// Sides of dimension one: the edges, or the element itself for a line.
pub fn edge_sides(t: ElementType) -> impl Iterator<Item = usize> {
    (0..t.side_count()).filter(move |&s| topology::side(t, s).expect("valid").dimension == 1)
}

fn pad(x: &[f64]) -> [f64; 3] {
    let mut out = [0.0; 3];
    out[..x.len()].copy_from_slice(x);
    out
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Removes round-off from values that are close to short decimals, so that
/// normalized coordinates like 0.5 come out exact.
fn snap(v: f64) -> f64 {
    let r = (v * 1e12).round() / 1e12;
    if (v - r).abs() < 1e-14 {
        r
    } else {
        v
    }
}
