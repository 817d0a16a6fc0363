//! Small sampling rules over master elements, used to discretise L2 fits.
//!
//! Rules are tensor Gauss-Legendre products (collapsed for simplices and the
//! pyramid). Three points per direction integrate the products of bilinear
//! maps that appear when fitting affine maps to multilinear geometry.

use crate::topology::ElementType;

const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

/// `(point, weight)` pairs on the master element of `t`; weights sum to its measure.
pub fn rule(t: ElementType) -> Vec<(Vec<f64>, f64)> {
    let g = GAUSS3;
    // maps a [-1,1] node to [0,1]
    let unit = |x: f64| 0.5 * (1.0 + x);
    let mut out = Vec::new();
    match t {
        ElementType::Point => out.push((vec![], 1.0)),
        ElementType::Line => out.extend(g.iter().map(|&(x, w)| (vec![x], w))),
        ElementType::Quadrilateral => {
            for &(x, wx) in &g {
                for &(y, wy) in &g {
                    out.push((vec![x, y], wx * wy));
                }
            }
        }
        ElementType::Hexahedron => {
            for &(x, wx) in &g {
                for &(y, wy) in &g {
                    for &(z, wz) in &g {
                        out.push((vec![x, y, z], wx * wy * wz));
                    }
                }
            }
        }
        ElementType::Triangle => {
            for &(a, wa) in &g {
                for &(b, wb) in &g {
                    let (u, v) = (unit(a), unit(b));
                    out.push((vec![u * (1.0 - v), v], 0.25 * wa * wb * (1.0 - v)));
                }
            }
        }
        ElementType::Tetrahedron => {
            for &(a, wa) in &g {
                for &(b, wb) in &g {
                    for &(c, wc) in &g {
                        let (u, v, w) = (unit(a), unit(b), unit(c));
                        let x = u * (1.0 - v) * (1.0 - w);
                        let y = v * (1.0 - w);
                        let jac = (1.0 - v) * (1.0 - w).powi(2);
                        out.push((vec![x, y, w], 0.125 * wa * wb * wc * jac));
                    }
                }
            }
        }
        ElementType::Prism => {
            for (p, w) in rule(ElementType::Triangle) {
                for &(z, wz) in &g {
                    out.push((vec![p[0], p[1], z], w * wz));
                }
            }
        }
        ElementType::Pyramid => {
            for &(a, wa) in &g {
                for &(b, wb) in &g {
                    for &(c, wc) in &g {
                        let z = unit(c);
                        let s = 1.0 - z;
                        out.push((vec![a * s, b * s, z], 0.5 * wa * wb * wc * s * s));
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::is_in_master;

    #[test]
    fn weights_sum_to_measure_and_points_are_inside() {
        for t in ElementType::ALL {
            let r = rule(t);
            let total: f64 = r.iter().map(|(_, w)| w).sum();
            assert!((total - t.master_measure()).abs() < 1e-13, "{t}: {total}");
            assert!(r.iter().all(|(p, _)| is_in_master(t, p)));
        }
    }

    #[test]
    fn integrates_linear_functions() {
        // Exact first moments of each master element.
        let cases = [
            (ElementType::Triangle, vec![1.0 / 6.0, 1.0 / 6.0]),
            (ElementType::Tetrahedron, vec![1.0 / 24.0; 3]),
            (ElementType::Pyramid, vec![0.0, 0.0, 1.0 / 3.0]),
            (ElementType::Prism, vec![1.0 / 3.0, 1.0 / 3.0, 0.0]),
        ];
        for (t, moments) in cases {
            for (k, m) in moments.iter().enumerate() {
                let got: f64 = rule(t).iter().map(|(p, w)| w * p[k]).sum();
                assert!((got - m).abs() < 1e-13, "{t} moment {k}: {got}");
            }
        }
    }
}
