//! Affine maps between parametric spaces.
//!
//! An [`AffineTransform`] maps `R^n -> R^m` as `x -> A x + B`. Dimensions range
//! over `0..=3`; a transform with `cols == 0` is a constant map and one with
//! `rows == 0` maps everything onto the (empty) parametric space of a point.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Tolerance used for comparisons of parametric coordinates.
pub const PARAM_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AffineError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("no samples to fit an affine map")]
    NoSamples,
    #[error("sample {index} has inconsistent dimensions")]
    InconsistentSample { index: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffineTransform {
    rows: usize,
    cols: usize,
    /// Row-major `rows x cols` coefficients.
    matrix: Vec<f64>,
    translation: Vec<f64>,
}

impl AffineTransform {
    pub fn new(rows: usize, cols: usize, matrix: Vec<f64>, translation: Vec<f64>) -> Self {
        assert_eq!(matrix.len(), rows * cols, "matrix must hold rows*cols entries");
        assert_eq!(translation.len(), rows, "translation must hold rows entries");
        AffineTransform {
            rows,
            cols,
            matrix,
            translation,
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut matrix = vec![0.0; dim * dim];
        for i in 0..dim {
            matrix[i * dim + i] = 1.0;
        }
        AffineTransform::new(dim, dim, matrix, vec![0.0; dim])
    }

    /// Constant map from `R^cols` to the point `value`.
    pub fn constant(cols: usize, value: &[f64]) -> Self {
        AffineTransform::new(value.len(), cols, vec![0.0; value.len() * cols], value.to_vec())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn translation(&self) -> &[f64] {
        &self.translation
    }

    #[inline]
    pub fn coeff(&self, row: usize, col: usize) -> f64 {
        self.matrix[row * self.cols + col]
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, AffineError> {
        if x.len() != self.cols {
            return Err(AffineError::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        Ok(self.apply_unchecked(x))
    }

    /// Same as [`apply`](Self::apply) but panics on a dimension mismatch.
    pub fn apply_unchecked(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let row = &self.matrix[i * self.cols..(i + 1) * self.cols];
                self.translation[i] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect()
    }

    /// Composition applying `inner` first, then `self`.
    pub fn compose(&self, inner: &AffineTransform) -> Result<AffineTransform, AffineError> {
        if self.cols != inner.rows {
            return Err(AffineError::DimensionMismatch {
                expected: self.cols,
                found: inner.rows,
            });
        }
        let (m, k, n) = (self.rows, self.cols, inner.cols);
        let mut matrix = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                matrix[i * n + j] = (0..k).map(|l| self.coeff(i, l) * inner.coeff(l, j)).sum();
            }
        }
        let translation = self.apply_unchecked(&inner.translation);
        Ok(AffineTransform::new(m, n, matrix, translation))
    }

    /// Largest absolute coefficient difference; `None` if the shapes differ.
    pub fn max_abs_diff(&self, other: &AffineTransform) -> Option<f64> {
        if self.rows != other.rows || self.cols != other.cols {
            return None;
        }
        Some(
            self.matrix
                .iter()
                .zip(&other.matrix)
                .chain(self.translation.iter().zip(&other.translation))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }

    pub fn approx_eq(&self, other: &AffineTransform, tol: f64) -> bool {
        self.max_abs_diff(other).is_some_and(|d| d <= tol)
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.rows == self.cols && self.approx_eq(&AffineTransform::identity(self.rows), tol)
    }
}

/// Least-squares affine fit with unit weights. See [`fit_l2_weighted`].
pub fn fit_l2(samples: &[(Vec<f64>, Vec<f64>)]) -> Result<AffineTransform, AffineError> {
    let weights = vec![1.0; samples.len()];
    fit_l2_weighted(samples, &weights)
}

/// Finds `A`, `B` minimising `sum_i w_i |y_i - (A x_i + B)|^2` over samples `(x_i, y_i)`.
///
/// Weighted samples taken from a quadrature rule make this the discrete form of
/// the continuous L2 projection over the source domain. Rank-deficient systems
/// get the minimum-norm solution.
pub fn fit_l2_weighted(
    samples: &[(Vec<f64>, Vec<f64>)],
    weights: &[f64],
) -> Result<AffineTransform, AffineError> {
    let Some((x0, y0)) = samples.first() else {
        return Err(AffineError::NoSamples);
    };
    if weights.len() != samples.len() {
        return Err(AffineError::DimensionMismatch {
            expected: samples.len(),
            found: weights.len(),
        });
    }
    let (n, m) = (x0.len(), y0.len());
    for (index, (x, y)) in samples.iter().enumerate() {
        if x.len() != n || y.len() != m {
            return Err(AffineError::InconsistentSample { index });
        }
    }
    if m == 0 {
        return Ok(AffineTransform::new(0, n, Vec::new(), Vec::new()));
    }

    // Center the sources so the translation is decoupled from the linear part;
    // this keeps the minimum-norm solution independent of the source origin.
    let wsum: f64 = weights.iter().sum();
    let mean = |k: usize, src: bool| -> f64 {
        samples
            .iter()
            .zip(weights)
            .map(|((x, y), w)| w * if src { x[k] } else { y[k] })
            .sum::<f64>()
            / wsum
    };
    let xbar: Vec<f64> = (0..n).map(|k| mean(k, true)).collect();
    let ybar: Vec<f64> = (0..m).map(|k| mean(k, false)).collect();

    let mut matrix = vec![0.0; m * n];
    if n > 0 {
        let rows = samples.len();
        let design = DMatrix::from_fn(rows, n, |i, j| weights[i].sqrt() * (samples[i].0[j] - xbar[j]));
        let svd = design.svd(true, true);
        for k in 0..m {
            let rhs = DVector::from_fn(rows, |i, _| weights[i].sqrt() * (samples[i].1[k] - ybar[k]));
            let eps = 1e-12 * svd.singular_values.max().max(1.0);
            let sol = svd.solve(&rhs, eps).expect("svd computed with u and v");
            for j in 0..n {
                matrix[k * n + j] = sol[j];
            }
        }
    }
    let linear = AffineTransform::new(m, n, matrix.clone(), vec![0.0; m]);
    let offset = linear.apply_unchecked(&xbar);
    let translation = ybar.iter().zip(&offset).map(|(y, o)| y - o).collect();
    Ok(AffineTransform::new(m, n, matrix, translation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn apply_identity_and_constant() {
        let id = AffineTransform::identity(2);
        assert_eq!(id.apply(&[0.3, 0.7]).unwrap(), vec![0.3, 0.7]);

        let half = AffineTransform::new(1, 1, vec![0.5], vec![-0.5]);
        assert_abs_diff_eq!(half.apply(&[1.0]).unwrap()[0], 0.0);

        let c = AffineTransform::new(1, 2, vec![0.0, 0.0], vec![0.5]);
        assert_eq!(c.apply(&[0.1, -0.9]).unwrap(), vec![0.5]);
    }

    #[test]
    fn apply_rejects_wrong_length() {
        let id = AffineTransform::identity(2);
        assert_eq!(
            id.apply(&[1.0]),
            Err(AffineError::DimensionMismatch { expected: 2, found: 1 })
        );
    }

    #[test]
    fn compose_checks_dimensions() {
        let a = AffineTransform::identity(2);
        let b = AffineTransform::identity(3);
        assert!(a.compose(&b).is_err());
        let t = AffineTransform::new(2, 1, vec![1.0, 2.0], vec![0.5, -1.0]);
        assert!(a.compose(&t).unwrap().approx_eq(&t, 0.0));
    }

    #[test]
    fn fit_line_half() {
        // (-1 -> -1), (1 -> 0): A = 0.5, B = -0.5 by solving the 2x2 system.
        let samples = vec![(vec![-1.0], vec![-1.0]), (vec![1.0], vec![0.0])];
        let t = fit_l2(&samples).unwrap();
        assert_abs_diff_eq!(t.coeff(0, 0), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(t.translation()[0], -0.5, epsilon = 1e-14);
    }

    #[test]
    fn fit_identity_on_triangle_vertices() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let samples: Vec<_> = pts.iter().map(|p| (p.to_vec(), p.to_vec())).collect();
        assert!(fit_l2(&samples).unwrap().is_identity(1e-12));
    }

    #[test]
    fn fit_degenerate_target_and_source() {
        let samples = vec![(vec![0.2, 0.3], vec![]), (vec![0.9, 0.1], vec![])];
        let t = fit_l2(&samples).unwrap();
        assert_eq!((t.rows(), t.cols()), (0, 2));

        // Collinear sources in 2D: minimum-norm solution along the spanned line.
        let samples = vec![(vec![0.0, 0.0], vec![0.0]), (vec![1.0, 1.0], vec![2.0])];
        let t = fit_l2(&samples).unwrap();
        assert_abs_diff_eq!(t.coeff(0, 0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.coeff(0, 1), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.translation()[0], 0.0, epsilon = 1e-12);

        assert_eq!(fit_l2(&[]), Err(AffineError::NoSamples));
    }

    #[test]
    fn fit_point_to_edge_parameter() {
        // Independent oracle: discretize the edge from (0,0,0) to (0,0,1) with the
        // [-1,1] parametrization and pick the parameter closest to (0,0,0.5).
        let target = [0.0, 0.0, 0.5];
        let best = (0..=2000)
            .map(|i| -1.0 + i as f64 * 1e-3)
            .min_by(|a, b| {
                let d = |t: f64| (0.5 * (1.0 + t) - target[2]).abs();
                d(*a).partial_cmp(&d(*b)).unwrap()
            })
            .unwrap();
        assert_abs_diff_eq!(best, 0.0, epsilon = 1e-9);

        // Same parameter from the fitted edge projection.
        let samples = vec![
            (vec![0.0, 0.0, 0.0], vec![-1.0]),
            (vec![0.0, 0.0, 1.0], vec![1.0]),
        ];
        let proj = fit_l2(&samples).unwrap();
        assert_abs_diff_eq!(proj.apply(&target).unwrap()[0], best, epsilon = 1e-9);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn transform(rows: usize, cols: usize) -> impl Strategy<Value = AffineTransform> {
            (
                prop::collection::vec(-2.0..2.0f64, rows * cols),
                prop::collection::vec(-2.0..2.0f64, rows),
            )
                .prop_map(move |(m, b)| AffineTransform::new(rows, cols, m, b))
        }

        proptest! {
            #[test]
            fn compose_matches_sequential_apply(
                f in transform(2, 3),
                g in transform(3, 2),
                x in prop::collection::vec(-1.0..1.0f64, 2),
            ) {
                let fg = f.compose(&g).unwrap();
                let direct = fg.apply(&x).unwrap();
                let seq = f.apply(&g.apply(&x).unwrap()).unwrap();
                for (a, b) in direct.iter().zip(&seq) {
                    prop_assert!((a - b).abs() <= 1e-13);
                }
            }

            #[test]
            fn fit_recovers_known_map(t in transform(3, 3)) {
                let pts = [
                    [0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0],
                    [0.0, 0.0, 1.0], [0.3, 0.4, 0.2],
                ];
                let samples: Vec<_> = pts
                    .iter()
                    .map(|p| (p.to_vec(), t.apply(p).unwrap()))
                    .collect();
                let fitted = fit_l2(&samples).unwrap();
                prop_assert!(fitted.max_abs_diff(&t).unwrap() <= 1e-10);
            }
        }
    }
}
