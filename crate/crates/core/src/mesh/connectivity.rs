use crate::topology;

use super::{GeoMesh, MeshError, SideRef};

impl GeoMesh {
    /// Resets every neighbor link to itself and rebuilds node and side cycles.
    pub fn build_connectivity(&mut self) -> Result<(), MeshError> {
        for el in &mut self.elements {
            let index = el.index;
            for (s, n) in el.neighbors.iter_mut().enumerate() {
                *n = SideRef::new(index, s);
            }
        }
        self.build_node_neighbors()?;
        self.build_side_neighbors()
    }

    /// Links the corner sides incident to each node into one cycle per node,
    /// using one `(element, corner)` slot per node.
    pub fn build_node_neighbors(&mut self) -> Result<(), MeshError> {
        let count = self.nodes.len();
        let mut info: Vec<Option<SideRef>> = vec![None; count];
        for e in 0..self.elements.len() {
            for j in 0..self.elements[e].nodes.len() {
                let k = self.elements[e].nodes[j];
                if k >= count {
                    return Err(MeshError::NodeOutOfRange { node: k, count });
                }
                let here = SideRef::new(e, j);
                match info[k] {
                    None => info[k] = Some(here),
                    Some(first) => self.insert_after(first, here),
                }
            }
        }
        self.node_anchor = info;
        Ok(())
    }

    /// Links sides of dimension above zero whose closures have equal global
    /// node sets, intersecting the per-node element incidence lists.
    pub fn build_side_neighbors(&mut self) -> Result<(), MeshError> {
        for e in 0..self.elements.len() {
            let t = self.elements[e].element_type;
            for s in 0..t.side_count() {
                let desc = topology::side(t, s).expect("valid side");
                if desc.dimension == 0 {
                    continue;
                }
                let here = SideRef::new(e, s);
                if self.neighbor(here) != here {
                    continue;
                }
                let group = self.matching_sides(here);
                let mut prev = here;
                for &m in &group {
                    if self.neighbor(m) != m {
                        return Err(MeshError::Structural(format!(
                            "{m:?} already linked but {here:?} is not"
                        )));
                    }
                    self.set_neighbor(prev, m);
                    prev = m;
                }
                self.set_neighbor(prev, here);
            }
        }
        Ok(())
    }

    /// Elements incident to `node`, ascending, found by walking its corner cycle.
    pub fn node_elements(&self, node: usize) -> Vec<usize> {
        let Some(anchor) = self.node_anchor.get(node).copied().flatten() else {
            return Vec::new();
        };
        let mut out: Vec<usize> = self.cycle(anchor).iter().map(|r| r.element).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Other `(element, side)` pairs whose global node set equals that of `of`.
    ///
    /// Elements holding all the nodes but no side with exactly that node set
    /// (an ancestor whose face diagonal is a son edge, say) are not neighbors.
    pub(crate) fn matching_sides(&self, of: SideRef) -> Vec<SideRef> {
        let t = self.elements[of.element].element_type;
        let dim = topology::side(t, of.side).expect("valid side").dimension;
        let mut key = self.side_global_nodes(of);
        key.sort_unstable();

        let mut candidates = self.node_elements(key[0]);
        for &n in &key[1..] {
            let other = self.node_elements(n);
            candidates.retain(|c| other.binary_search(c).is_ok());
        }

        let mut out = Vec::new();
        for c in candidates {
            let ct = self.elements[c].element_type;
            for cs in 0..ct.side_count() {
                let cand = SideRef::new(c, cs);
                if cand == of || topology::side(ct, cs).expect("valid").dimension != dim {
                    continue;
                }
                let mut nodes = self.side_global_nodes(cand);
                if nodes.len() != key.len() {
                    continue;
                }
                nodes.sort_unstable();
                if nodes == key {
                    out.push(cand);
                }
            }
        }
        out
    }

    fn insert_after(&mut self, at: SideRef, new: SideRef) {
        let next = self.neighbor(at);
        self.set_neighbor(new, next);
        self.set_neighbor(at, new);
    }

    /// Inserts the sides of a freshly added element into the existing cycles.
    pub(crate) fn connect_element(&mut self, e: usize) {
        let t = self.elements[e].element_type;
        for j in 0..t.node_count() {
            let k = self.elements[e].nodes[j];
            let here = SideRef::new(e, j);
            match self.node_anchor[k] {
                None => self.node_anchor[k] = Some(here),
                Some(first) => self.insert_after(first, here),
            }
        }
        for s in t.node_count()..t.side_count() {
            let here = SideRef::new(e, s);
            if let Some(&m) = self.matching_sides(here).first() {
                self.insert_after(m, here);
            }
        }
    }
}
