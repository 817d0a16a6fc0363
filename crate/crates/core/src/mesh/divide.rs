use log::trace;

use crate::pattern::{RefinementPattern, NODE_TOL};
use crate::patterndb::{PatternDb, PatternRef};
use crate::topology;

use super::{FatherLink, GeoMesh, MeshError, Refinement, SideRef};

impl GeoMesh {
    /// Side pattern that the divided element `of.element` induces on side
    /// `of.side`, expressed in that element's own node ordering.
    fn own_side_pattern(&self, db: &PatternDb, of: SideRef) -> Option<PatternRef> {
        let el = &self.elements[of.element];
        let r = el.refinement.as_ref()?.pattern;
        if of.side == el.element_type.element_side() {
            Some(r)
        } else {
            db.get(r).side_pattern(of.side)
        }
    }

    /// For every side of `element`, the side pattern imposed by refined
    /// neighbors, permuted into the element's node ordering.
    ///
    /// Only neighbors that refine the shared side impose a pattern; a divided
    /// neighbor leaving the side whole has a son in the same cycle instead.
    pub fn imposed_side_patterns(&self, db: &PatternDb, element: usize) -> Result<Vec<Option<PatternRef>>, MeshError> {
        let el = self.get_element(element)?;
        let t = el.element_type;
        let mut imposed = vec![None; t.side_count()];
        for (s, slot) in imposed.iter_mut().enumerate() {
            let desc = topology::side(t, s).expect("valid side");
            if desc.dimension == 0 {
                continue;
            }
            let here = SideRef::new(element, s);
            let g = self.side_global_nodes(here);
            for n in self.cycle(here).into_iter().skip(1) {
                let Some(q) = self.own_side_pattern(db, n) else {
                    continue;
                };
                let h = self.side_global_nodes(n);
                let sigma: Vec<usize> = g
                    .iter()
                    .map(|x| h.iter().position(|y| y == x).expect("cycle members share nodes"))
                    .collect();
                let k = topology::permutation_index(desc.side_type, &sigma).ok_or_else(|| {
                    MeshError::Structural(format!("side node orders of {here:?} and {n:?} are not related by a symmetry"))
                })?;
                let permuted = db.get(q).permutations()[k];
                match *slot {
                    None => *slot = Some(permuted),
                    Some(prev) if prev == permuted => {}
                    Some(_) => return Err(MeshError::ConflictingNeighbors { element, side: s }),
                }
            }
        }
        Ok(imposed)
    }

    /// Whether `pattern` induces exactly the imposed side patterns.
    pub(crate) fn pattern_fits(pattern: &RefinementPattern, self_ref: PatternRef, imposed: &[Option<PatternRef>]) -> Option<usize> {
        let es = pattern.father_type().element_side();
        imposed.iter().enumerate().find_map(|(s, want)| {
            let want = (*want)?;
            let have = if s == es { Some(self_ref) } else { pattern.side_pattern(s) };
            (have != Some(want)).then_some(s)
        })
    }

    /// Divides a leaf element with a stored pattern.
    ///
    /// Nodes on sides shared with already refined neighbors are reused;
    /// sons inherit the element's material. On error the mesh is unchanged.
    pub fn divide(&mut self, element: usize, db: &PatternDb, pattern: PatternRef) -> Result<Vec<usize>, MeshError> {
        let el = self.get_element(element)?;
        if !el.is_leaf() {
            return Err(MeshError::AlreadyDivided { element });
        }
        let p = db.get(pattern);
        if p.father_type() != el.element_type {
            return Err(MeshError::TypeMismatch {
                element_type: el.element_type,
                pattern_type: p.father_type(),
            });
        }
        let imposed = self.imposed_side_patterns(db, element)?;
        if let Some(side) = Self::pattern_fits(p, pattern, &imposed) {
            let compatible = crate::reftools::compatible_with(db, el.element_type, &imposed);
            return Err(MeshError::Incompatible {
                element,
                side,
                compatible,
            });
        }

        let mut global = Vec::with_capacity(p.node_count());
        let mut fresh = Vec::new();
        for q in 0..p.node_count() {
            if let Some(i) = p.father().nodes.iter().position(|&c| c == q) {
                global.push(el.nodes[i]);
                continue;
            }
            match self.shared_node(db, element, p, q)? {
                Some(n) => global.push(n),
                None => {
                    let x = self.element_map(element, &p.node_coords(q))?;
                    global.push(self.nodes.len() + fresh.len());
                    fresh.push(x);
                }
            }
        }

        let material = el.material;
        for x in fresh {
            self.add_node(x);
        }
        let first = self.elements.len();
        for (ordinal, son) in p.sons().enumerate() {
            let nodes = son.nodes.iter().map(|&n| global[n]).collect();
            let s = self.add_element(son.element_type, material, nodes)?;
            self.elements[s].father = Some(FatherLink {
                element,
                pattern,
                ordinal,
            });
        }
        let sons: Vec<usize> = (first..self.elements.len()).collect();
        self.element_mut(element).refinement = Some(Refinement {
            pattern,
            sons: sons.clone(),
            nodes: global,
        });
        for &s in &sons {
            self.connect_element(s);
        }
        trace!("divided element {element} into {} sons with {}", sons.len(), p.name());
        Ok(sons)
    }

    /// Global index of pattern node `q` if a refined neighbor already created it.
    fn shared_node(&self, db: &PatternDb, element: usize, p: &RefinementPattern, q: usize) -> Result<Option<usize>, MeshError> {
        let t = p.father_type();
        let fs = p.node_side(q);
        let here = SideRef::new(element, fs);
        let xs = topology::element_to_side_transform(t, fs)
            .expect("valid side")
            .apply_unchecked(&p.node_coords(q));
        for n in self.cycle(here).into_iter().skip(1) {
            let Some(refinement) = &self.elements[n.element].refinement else {
                continue;
            };
            if self.own_side_pattern(db, n).is_none() {
                continue;
            }
            let np = db.get(refinement.pattern);
            let nt = np.father_type();
            let xn = self.neighbor_transform(here, n)?.apply_unchecked(&xs);
            let xn = topology::side_to_element_transform(nt, n.side)
                .expect("valid side")
                .apply_unchecked(&xn);
            let found = np.partition(n.side).nodes.iter().find(|&&r| {
                let c = np.node_coords(r);
                c.iter().zip(&xn).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() <= NODE_TOL
            });
            if let Some(&r) = found {
                return Ok(Some(refinement.nodes[r]));
            }
        }
        Ok(None)
    }
}
