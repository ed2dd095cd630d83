//! Combinatorial Hodge operators on rating vectors and skew-symmetric
//! matrices.
//!
//! The objects here are the linear-algebra backbone of the rest of the
//! crate. A skew-symmetric matrix `A` splits uniquely into an additively
//! transitive part `grad(div(A))` (every triple satisfies
//! `A_ij + A_jk + A_ki = 0`) and a cyclic remainder with zero row means.
//! The two parts are orthogonal under the element-wise inner product, so
//! `‖A‖² = ‖transitive‖² + ‖cyclic‖²`.

use crate::matrix::{MatrixError, SquareMatrix};
use serde::{Serialize, Serializer};
use thiserror::Error;

/// Absolute tolerance for skew-symmetry checks at construction.
pub const SKEW_TOL: f64 = 1e-12;
/// Absolute tolerance for the sum-zero check on rating vectors.
pub const SUM_ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum HodgeError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(
        "entries ({i},{j}) and ({j},{i}) break skew symmetry: \
         {a} + {b} = {defect:e} exceeds {tol:e}"
    )]
    NotSkew {
        i: usize,
        j: usize,
        a: f64,
        b: f64,
        defect: f64,
        tol: f64,
    },
    #[error("vector entries must be finite")]
    NonFiniteVector,
    #[error("vector must not be empty")]
    EmptyVector,
    #[error("entries must sum to zero: |sum| = {defect:e} exceeds {tol:e}")]
    NotSumZero { defect: f64, tol: f64 },
}

/// An m×m real matrix with `A[i][j] == -A[j][i]`, validated on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix {
    inner: SquareMatrix,
}

impl SkewMatrix {
    /// Validates finiteness and skew symmetry within [`SKEW_TOL`]
    /// (absolute, per entry).
    pub fn new(inner: SquareMatrix) -> Result<Self, HodgeError> {
        for i in 0..inner.dim() {
            for j in i..inner.dim() {
                let a = inner.get(i, j);
                let b = inner.get(j, i);
                if !a.is_finite() || !b.is_finite() {
                    let (bi, bj) = if a.is_finite() { (j, i) } else { (i, j) };
                    return Err(HodgeError::Matrix(MatrixError::NonFinite { i: bi, j: bj }));
                }
                let defect = (a + b).abs();
                if defect > SKEW_TOL {
                    return Err(HodgeError::NotSkew {
                        i,
                        j,
                        a,
                        b,
                        defect,
                        tol: SKEW_TOL,
                    });
                }
            }
        }
        Ok(Self { inner })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, HodgeError> {
        Self::new(SquareMatrix::from_rows(rows)?)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            inner: SquareMatrix::zeros(dim),
        }
    }

    /// Wraps a matrix that is skew by construction (e.g. the output of
    /// [`grad`]). Checked in debug builds only.
    pub(crate) fn new_unchecked(inner: SquareMatrix) -> Self {
        debug_assert!(
            {
                let mut ok = true;
                for i in 0..inner.dim() {
                    for j in i..inner.dim() {
                        ok &= (inner.get(i, j) + inner.get(j, i)).abs() <= SKEW_TOL;
                    }
                }
                ok
            },
            "internal construction produced a non-skew matrix"
        );
        Self { inner }
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner.get(i, j)
    }

    pub fn as_matrix(&self) -> &SquareMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> SquareMatrix {
        self.inner
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.frobenius_norm()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            inner: self.inner.map(|v| factor * v),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "add: dimension mismatch");
        Self {
            inner: SquareMatrix::from_fn(self.dim(), |i, j| self.get(i, j) + other.get(i, j)),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "sub: dimension mismatch");
        Self {
            inner: self.inner.sub(other.as_matrix()),
        }
    }
}

/// A length-m rating vector constrained to the sum-zero subspace, the
/// normalized representative of the translation symmetry class.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingVector {
    values: Vec<f64>,
}

impl RatingVector {
    /// Validates the sum-zero constraint within [`SUM_ZERO_TOL`].
    pub fn new(values: Vec<f64>) -> Result<Self, HodgeError> {
        Self::with_tolerance(values, SUM_ZERO_TOL)
    }

    /// Same as [`RatingVector::new`] with a caller-chosen tolerance. Long
    /// simulation runs accumulate rounding drift and use a looser bound.
    pub fn with_tolerance(values: Vec<f64>, tol: f64) -> Result<Self, HodgeError> {
        if values.is_empty() {
            return Err(HodgeError::EmptyVector);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(HodgeError::NonFiniteVector);
        }
        let sum: f64 = values.iter().sum();
        if sum.abs() > tol {
            return Err(HodgeError::NotSumZero {
                defect: sum.abs(),
                tol,
            });
        }
        Ok(Self { values })
    }

    /// Projects an arbitrary finite vector onto the sum-zero subspace by
    /// subtracting its mean.
    pub fn centered(values: Vec<f64>) -> Result<Self, HodgeError> {
        if values.is_empty() {
            return Err(HodgeError::EmptyVector);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(HodgeError::NonFiniteVector);
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        Ok(Self {
            values: values.into_iter().map(|v| v - mean).collect(),
        })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            values: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn euclidean_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "distance: dimension mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl Serialize for RatingVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.values.serialize(serializer)
    }
}

/// Combinatorial gradient: `grad(v)[i][j] = v[i] - v[j]`.
///
/// The image of `grad` is exactly the set of additively transitive
/// comparison matrices.
pub fn grad(v: &[f64]) -> SkewMatrix {
    assert!(!v.is_empty(), "grad: empty vector");
    SkewMatrix::new_unchecked(SquareMatrix::from_fn(v.len(), |i, j| v[i] - v[j]))
}

/// Combinatorial divergence: the arithmetic mean of each row.
pub fn div(a: &SquareMatrix) -> Vec<f64> {
    let m = a.dim();
    (0..m)
        .map(|i| (0..m).map(|j| a.get(i, j)).sum::<f64>() / m as f64)
        .collect()
}

/// Rotation operator, evaluated by its defining triple sum
/// `rot(A)[i][j] = (1/m) Σ_k (A[i][j] + A[j][k] + A[k][i])`.
///
/// On skew matrices this agrees with `A - grad(div(A))`, the projector onto
/// the cyclic subspace; the two routes are cross-checked in tests rather
/// than collapsed here.
pub fn rot(a: &SkewMatrix) -> SkewMatrix {
    let m = a.dim();
    let inner = SquareMatrix::from_fn(m, |i, j| {
        let mut sum = 0.0;
        for k in 0..m {
            sum += a.get(i, j) + a.get(j, k) + a.get(k, i);
        }
        sum / m as f64
    });
    SkewMatrix::new_unchecked(inner)
}

/// Splits a skew matrix into `(transitive, cyclic)` with
/// `transitive = grad(div(A))` and `cyclic = A - transitive`.
///
/// The parts reconstruct `A` to rounding and are orthogonal under the
/// element-wise inner product.
pub fn hodge_decompose(a: &SkewMatrix) -> (SkewMatrix, SkewMatrix) {
    let transitive = grad(&div(a.as_matrix()));
    let cyclic = a.sub(&transitive);
    (transitive, cyclic)
}

/// True iff the Frobenius norm of the cyclic component is at most `tol`.
pub fn is_stacm(a: &SkewMatrix, tol: f64) -> bool {
    let (_, cyclic) = hodge_decompose(a);
    cyclic.frobenius_norm() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn cyclic3() -> SkewMatrix {
        SkewMatrix::from_rows(&[
            vec![0.0, 1.0, -1.0],
            vec![-1.0, 0.0, 1.0],
            vec![1.0, -1.0, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn grad_of_123() {
        let g = grad(&[1.0, 2.0, 3.0]);
        let expected = [[0.0, -1.0, -2.0], [1.0, 0.0, -1.0], [2.0, 1.0, 0.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(g.get(i, j), expected[i][j]);
            }
        }
    }

    #[test]
    fn grad_of_constant_is_zero() {
        for c in [0.0, 3.5, -7.25] {
            let g = grad(&[c, c, c]);
            assert_eq!(g.frobenius_norm(), 0.0);
        }
    }

    #[test]
    fn div_of_grad_recovers_centered_vector() {
        let d = div(grad(&[1.0, 2.0, 3.0]).as_matrix());
        assert_eq!(d, vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn div_of_zero_is_zero() {
        assert_eq!(div(&SquareMatrix::zeros(3)), vec![0.0; 3]);
    }

    #[test]
    fn div_of_cyclic_is_zero() {
        assert_eq!(div(cyclic3().as_matrix()), vec![0.0; 3]);
    }

    #[test]
    fn rot_annihilates_gradients() {
        for v in [vec![1.0, 2.0, 3.0], vec![-0.5, 2.0, 0.25, 4.0]] {
            let r = rot(&grad(&v));
            assert!(r.frobenius_norm() < 1e-12, "rot(grad(v)) should vanish");
        }
    }

    #[test]
    fn rot_fixes_cyclic_matrices() {
        let c = cyclic3();
        let r = rot(&c);
        assert!(r.as_matrix().max_abs_diff(c.as_matrix()) < 1e-12);
    }

    #[test]
    fn rot_of_zero_is_zero() {
        assert_eq!(rot(&SkewMatrix::zeros(4)).frobenius_norm(), 0.0);
    }

    #[test]
    fn decompose_pure_gradient() {
        let a = grad(&[1.0, 2.0, 3.0]);
        let (s, c) = hodge_decompose(&a);
        assert!(s.as_matrix().max_abs_diff(a.as_matrix()) < 1e-12);
        assert!(c.frobenius_norm() < 1e-12);
    }

    #[test]
    fn decompose_pure_cyclic() {
        let a = cyclic3();
        let (s, c) = hodge_decompose(&a);
        assert!(s.frobenius_norm() < 1e-12);
        assert!(c.as_matrix().max_abs_diff(a.as_matrix()) < 1e-12);
    }

    #[test]
    fn decompose_recovers_known_mix() {
        let s_true = grad(&[1.0, 0.0, -1.0]);
        let c_true = cyclic3();
        let a = s_true.add(&c_true);
        let (s, c) = hodge_decompose(&a);
        assert!(s.as_matrix().max_abs_diff(s_true.as_matrix()) < 1e-10);
        assert!(c.as_matrix().max_abs_diff(c_true.as_matrix()) < 1e-10);
    }

    #[test]
    fn is_stacm_classifies_parts() {
        let g = grad(&[0.3, -1.2, 0.9]);
        assert!(is_stacm(&g, 1e-9));
        assert!(!is_stacm(&cyclic3(), 1e-9));
        // Perturbation below tolerance stays classified as transitive.
        let perturbed = g.add(&cyclic3().scale(1e-12));
        assert!(is_stacm(&perturbed, 1e-9));
    }

    #[test]
    fn frobenius_of_cyclic_is_sqrt6() {
        assert_abs_diff_eq!(cyclic3().frobenius_norm(), 6.0_f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn skew_validation_rejects_asymmetry() {
        let err = SkewMatrix::from_rows(&[vec![0.0, 1.0], vec![-0.9, 0.0]]).unwrap_err();
        assert!(matches!(err, HodgeError::NotSkew { i: 0, j: 1, .. }));
    }

    #[test]
    fn rating_vector_enforces_sum_zero() {
        assert!(RatingVector::new(vec![1.0, -1.0]).is_ok());
        assert!(matches!(
            RatingVector::new(vec![1.0, -0.5]),
            Err(HodgeError::NotSumZero { .. })
        ));
        let centered = RatingVector::centered(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(centered.values(), &[-1.0, 0.0, 1.0]);
    }

    /// Rank of a set of vectors via Gram-Schmidt, for the dimension checks.
    fn rank(vectors: &[Vec<f64>]) -> usize {
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for v in vectors {
            let mut w = v.clone();
            for b in &basis {
                let proj: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= proj * bi;
                }
            }
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-9 {
                for wi in w.iter_mut() {
                    *wi /= norm;
                }
                basis.push(w);
            }
        }
        basis.len()
    }

    fn vectorize(a: &SkewMatrix) -> Vec<f64> {
        a.rows().into_iter().flatten().collect()
    }

    #[test]
    fn subspace_dimensions_at_m3() {
        // Transitive subspace: spanned by grad(e_i), dimension m - 1 = 2.
        let basis: Vec<Vec<f64>> = (0..3)
            .map(|i| {
                let mut e = vec![0.0; 3];
                e[i] = 1.0;
                vectorize(&grad(&e))
            })
            .collect();
        assert_eq!(rank(&basis), 2);

        // Cyclic subspace: projections of a skew basis, dimension
        // (m-1)(m-2)/2 = 1.
        let mut cyclic_images = Vec::new();
        for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let mut m = SquareMatrix::zeros(3);
            m.set(i, j, 1.0);
            m.set(j, i, -1.0);
            let (_, c) = hodge_decompose(&SkewMatrix::new(m).unwrap());
            cyclic_images.push(vectorize(&c));
        }
        assert_eq!(rank(&cyclic_images), 1);
    }

    fn arb_skew(max_dim: usize) -> impl Strategy<Value = SkewMatrix> {
        (2..=max_dim)
            .prop_flat_map(|m| {
                proptest::collection::vec(-10.0..10.0f64, m * (m - 1) / 2)
                    .prop_map(move |upper| (m, upper))
            })
            .prop_map(|(m, upper)| {
                let mut mat = SquareMatrix::zeros(m);
                let mut it = upper.into_iter();
                for i in 0..m {
                    for j in (i + 1)..m {
                        let v = it.next().unwrap();
                        mat.set(i, j, v);
                        mat.set(j, i, -v);
                    }
                }
                SkewMatrix::new(mat).unwrap()
            })
    }

    proptest! {
        #[test]
        fn div_grad_centers(v in proptest::collection::vec(-100.0..100.0f64, 1..8)) {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let d = div(grad(&v).as_matrix());
            for (di, vi) in d.iter().zip(&v) {
                prop_assert!((di - (vi - mean)).abs() < 1e-12);
            }
        }

        #[test]
        fn decomposition_reconstructs_and_is_orthogonal(a in arb_skew(8)) {
            let (s, c) = hodge_decompose(&a);
            let sum = s.add(&c);
            prop_assert!(sum.as_matrix().max_abs_diff(a.as_matrix()) < 1e-12);
            let ip = s.as_matrix().inner_product(c.as_matrix());
            let scale = a.frobenius_norm().powi(2).max(1.0);
            prop_assert!(ip.abs() <= 1e-10 * scale);
            // Pythagorean identity from orthogonality.
            let lhs = a.frobenius_norm().powi(2);
            let rhs = s.frobenius_norm().powi(2) + c.frobenius_norm().powi(2);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * scale);
        }

        #[test]
        fn rot_matches_cyclic_projector(a in arb_skew(8)) {
            let direct = rot(&a);
            let (_, c) = hodge_decompose(&a);
            prop_assert!(direct.as_matrix().max_abs_diff(c.as_matrix()) < 1e-12);
        }

        #[test]
        fn grad_is_linear(
            u in proptest::collection::vec(-10.0..10.0f64, 4),
            v in proptest::collection::vec(-10.0..10.0f64, 4),
            alpha in -3.0..3.0f64,
            beta in -3.0..3.0f64,
        ) {
            let combo: Vec<f64> = u.iter().zip(&v).map(|(a, b)| alpha * a + beta * b).collect();
            let lhs = grad(&combo);
            let rhs = grad(&u).scale(alpha).add(&grad(&v).scale(beta));
            prop_assert!(lhs.as_matrix().max_abs_diff(rhs.as_matrix()) < 1e-12);
        }
    }
}
