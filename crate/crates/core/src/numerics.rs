//! Dense linear algebra shared by the estimators and surrogates.
//!
//! Everything here is a thin, strict layer over `nalgebra`: the decompositions
//! come from there, while this module fixes the conventions the rest of the
//! crate relies on (eigenvalue order, eigenvector signs, what counts as
//! singular) and turns silent numerical failure into [`Error`] values.

use std::f64::consts::PI;
use std::ops::{Add, Mul};

use nalgebra::{DMatrix, DVector, Dyn, SymmetricEigen, LU, QR, SVD};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reciprocal condition number below which a square system is treated as
/// singular.
pub const RCOND_SINGULAR: f64 = 1e-12;

/// Relative tolerance on the diagonal of `R` (or the singular values) below
/// which a least-squares problem is reported as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// A dense real symmetric matrix.
///
/// The upper and lower triangles are bit-for-bit identical; every constructor
/// either mirrors one triangle or averages the two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DMatrix<f64>", into = "DMatrix<f64>")]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Builds a matrix from `f(i, j)` evaluated on the lower triangle (`i >= j`).
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            for i in j..dim {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMatrix(m)
    }

    pub fn zeros(dim: usize) -> Self {
        SymMatrix(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        SymMatrix(DMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        SymMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    /// Accepts a square matrix whose triangles agree to within `1e-10` relative
    /// to its largest entry, then copies the lower triangle over the upper one.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("symmetric matrix"));
        }
        let scale = m.amax().max(f64::MIN_POSITIVE);
        let asym = (&m - m.transpose()).amax();
        if asym > 1e-10 * scale {
            return Err(Error::NotSymmetric(asym));
        }
        let n = m.nrows();
        Ok(Self::from_fn(n, |i, j| m[(i, j)]))
    }

    /// `(m + mᵀ) / 2`.
    pub fn symmetrize(m: &DMatrix<f64>) -> Self {
        assert!(m.is_square(), "symmetrize needs a square matrix");
        Self::from_fn(m.nrows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// `t · self · tᵀ`, symmetrized.
    pub fn congruence(&self, t: &DMatrix<f64>) -> SymMatrix {
        SymMatrix::symmetrize(&(t * &self.0 * t.transpose()))
    }

    /// Quadratic form `xᵀ · self · x`.
    pub fn quadratic_form(&self, x: &DVector<f64>) -> f64 {
        x.dot(&(&self.0 * x))
    }

    pub fn mul_vector(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.0 * x
    }
}

impl TryFrom<DMatrix<f64>> for SymMatrix {
    type Error = Error;

    fn try_from(m: DMatrix<f64>) -> Result<Self> {
        SymMatrix::new(m)
    }
}

impl From<SymMatrix> for DMatrix<f64> {
    fn from(m: SymMatrix) -> Self {
        m.0
    }
}

impl Add for &SymMatrix {
    type Output = SymMatrix;

    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 + &rhs.0)
    }
}

impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;

    fn mul(self, rhs: f64) -> SymMatrix {
        SymMatrix(&self.0 * rhs)
    }
}

/// Eigenvalues sorted in descending order with their unit eigenvectors as
/// the columns of an orthogonal matrix.
///
/// Each eigenvector is signed so that its largest-magnitude component is
/// non-negative (the lowest row index wins a tie), which makes the
/// decomposition reproducible across runs and platforms.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V Σ Vᵀ`.
    pub fn reconstruct(&self) -> SymMatrix {
        self.map_eigenvalues(|l| l)
    }

    /// `V f(Σ) Vᵀ`.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let mapped = self.eigenvalues.map(f);
        let scaled = &self.eigenvectors * DMatrix::from_diagonal(&mapped);
        SymMatrix::symmetrize(&(scaled * self.eigenvectors.transpose()))
    }
}

/// Symmetric eigendecomposition.
///
/// Works for indefinite matrices. Fails with [`Error::EigenNoConvergence`]
/// when the implicit QL iteration does not converge.
pub fn sym_eig(m: &SymMatrix) -> Result<EigenDecomposition> {
    if !m.is_finite() {
        return Err(Error::NonFinite("eigen input"));
    }
    let n = m.dim();
    let eig = SymmetricEigen::try_new(m.as_matrix().clone(), f64::EPSILON, 1000 * n.max(1))
        .ok_or(Error::EigenNoConvergence)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(k).clone_owned();
        if v[dominant_index(&v)] < 0.0 {
            v.neg_mut();
        }
        eigenvectors.set_column(col, &v);
    }
    if eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenNoConvergence);
    }
    Ok(EigenDecomposition { eigenvalues, eigenvectors })
}

// Lowest index whose magnitude ties the largest one.
fn dominant_index(v: &DVector<f64>) -> usize {
    let max = v.amax();
    let tol = 1e-12 * max;
    v.iter().position(|x| x.abs() >= max - tol).unwrap_or(0)
}

/// LU factorization of a square matrix together with a reciprocal
/// 1-norm condition estimate.
pub struct LuFactor {
    lu: LU<f64, Dyn, Dyn>,
    rcond: f64,
}

impl LuFactor {
    /// Factors `a`, failing with [`Error::IllConditioned`] if its reciprocal
    /// condition estimate is below [`RCOND_SINGULAR`].
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        let factor = Self::new_unchecked(a)?;
        if factor.rcond < RCOND_SINGULAR {
            return Err(Error::IllConditioned { rcond: factor.rcond });
        }
        Ok(factor)
    }

    /// Factors `a` without rejecting ill-conditioned input.
    pub fn new_unchecked(a: &DMatrix<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("linear system"));
        }
        let lu = LU::new(a.clone());
        let mut factor = LuFactor { lu, rcond: 0.0 };
        factor.rcond = factor.estimate_rcond(a);
        Ok(factor)
    }

    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    /// `ln |det a|`.
    pub fn log_abs_determinant(&self) -> f64 {
        self.lu.u().diagonal().iter().map(|d| d.abs().ln()).sum()
    }

    pub fn solve(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        self.lu
            .solve(b)
            .filter(|x| x.iter().all(|v| v.is_finite()))
            .ok_or(Error::IllConditioned { rcond: self.rcond })
    }

    pub fn solve_matrix(&self, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.lu
            .solve(b)
            .filter(|x| x.iter().all(|v| v.is_finite()))
            .ok_or(Error::IllConditioned { rcond: self.rcond })
    }

    /// Solves `aᵀ x = b` with the same factors.
    pub fn solve_transpose(&self, b: &DVector<f64>) -> Option<DVector<f64>> {
        // P a = L U, so aᵀ = Uᵀ Lᵀ P and aᵀ x = b becomes Uᵀ Lᵀ (P x) = b.
        let u = self.lu.u();
        let l = self.lu.l();
        let z = u.transpose().solve_lower_triangular(b)?;
        let mut y = l.transpose().solve_upper_triangular(&z)?;
        self.lu.p().inv_permute_rows(&mut y);
        Some(y)
    }

    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        self.lu
            .try_inverse()
            .filter(|x| x.iter().all(|v| v.is_finite()))
            .ok_or(Error::IllConditioned { rcond: self.rcond })
    }

    // Hager's estimator for ‖a⁻¹‖₁ with Higham's alternative test vector.
    fn estimate_rcond(&self, a: &DMatrix<f64>) -> f64 {
        let n = a.nrows();
        let norm_a = one_norm(a);
        if norm_a == 0.0 {
            return 0.0;
        }
        let mut x = DVector::from_element(n, 1.0 / n as f64);
        let mut est = 0.0_f64;
        for _ in 0..5 {
            let Some(y) = self.lu.solve(&x) else { return 0.0 };
            est = y.lp_norm(1);
            let xi = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
            let Some(z) = self.solve_transpose(&xi) else { return 0.0 };
            let j = z.iamax();
            if z[j].abs() <= z.dot(&x) {
                break;
            }
            x = DVector::zeros(n);
            x[j] = 1.0;
        }
        let alt = DVector::from_fn(n, |i, _| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * (1.0 + i as f64 / (n.max(2) - 1) as f64)
        });
        if let Some(y) = self.lu.solve(&alt) {
            est = est.max(2.0 * y.lp_norm(1) / (3.0 * n as f64));
        }
        if !est.is_finite() || est == 0.0 {
            return 0.0;
        }
        1.0 / (norm_a * est)
    }
}

fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter().map(|c| c.lp_norm(1)).fold(0.0, f64::max)
}

/// Solves the square system `a x = b`.
pub fn solve_linear(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: b.len() });
    }
    LuFactor::new(a)?.solve(b)
}

/// Result of [`solve_least_squares`].
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub solution: DVector<f64>,
    pub rank: usize,
    /// Set when the columns of `a` were numerically dependent; `solution` is
    /// then the minimum-norm minimizer.
    pub rank_deficient: bool,
}

/// Minimizes `‖a x − b‖₂` for `a` with at least as many rows as columns.
///
/// Householder QR is tried first. If `R` has a diagonal entry below
/// [`RANK_TOLERANCE`] relative to the largest one, the problem is re-solved
/// with a truncated SVD and flagged as rank deficient.
pub fn solve_least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<LeastSquares> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::InvalidArgument(format!(
            "least squares needs rows >= cols, got {m}x{n}"
        )));
    }
    if b.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: b.len() });
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("least-squares system"));
    }

    let qr = QR::new(a.clone());
    let r = qr.r();
    let diag_max = r.diagonal().amax();
    let diag_min = r.diagonal().amin();
    if diag_max > 0.0 && diag_min > RANK_TOLERANCE * diag_max {
        let mut qtb = b.clone();
        qr.q_tr_mul(&mut qtb);
        let top = qtb.rows(0, n).clone_owned();
        if let Some(x) = r.solve_upper_triangular(&top) {
            if x.iter().all(|v| v.is_finite()) {
                return Ok(LeastSquares { solution: x, rank: n, rank_deficient: false });
            }
        }
    }

    let svd = SVD::try_new(a.clone(), true, true, f64::EPSILON, 0)
        .ok_or(Error::EigenNoConvergence)?;
    let smax = svd.singular_values.max();
    let cutoff = RANK_TOLERANCE * smax;
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    let solution = svd
        .solve(b, cutoff.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(LeastSquares { solution, rank, rank_deficient: rank < n })
}

/// `expm(π (g − gᵀ))`: the rotation generated by the skew part of `g`.
pub fn rotation_from_generator(g: &DMatrix<f64>) -> DMatrix<f64> {
    assert!(g.is_square(), "rotation generator must be square");
    let skew = (g - g.transpose()) * PI;
    skew.exp()
}

/// A random rotation `expm(π (A − Aᵀ))` with the entries of `A` drawn
/// uniformly from `[−0.5, 0.5]`.
pub fn random_rotation<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<f64> {
    assert!(dim >= 1, "rotation dimension must be at least 1");
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-0.5..=0.5));
    rotation_from_generator(&g)
}

/// Largest entrywise deviation of `qᵀq` from the identity.
pub fn orthogonality_error(q: &DMatrix<f64>) -> f64 {
    let n = q.ncols();
    (q.transpose() * q - DMatrix::<f64>::identity(n, n)).amax()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_sym(n: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
        SymMatrix::from_fn(n, |_, _| rng.random_range(-3.0..3.0))
    }

    #[test]
    fn eig_identity() {
        let e = sym_eig(&SymMatrix::identity(2)).unwrap();
        assert_eq!(e.eigenvalues.as_slice(), &[1.0, 1.0]);
        assert!(orthogonality_error(&e.eigenvectors) < 1e-12);
    }

    #[test]
    fn eig_two_by_two() {
        let m = SymMatrix::new(DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 1.0])).unwrap();
        let e = sym_eig(&m).unwrap();
        let s = 2f64.sqrt();
        assert_abs_diff_eq!(e.eigenvalues[0], 2.0 + s, epsilon = 1e-12);
        assert_abs_diff_eq!(e.eigenvalues[1], 2.0 - s, epsilon = 1e-12);
    }

    #[test]
    fn eig_diagonal_indefinite() {
        let e = sym_eig(&SymMatrix::from_diagonal(&[1.0, -2.0])).unwrap();
        assert_eq!(e.eigenvalues.as_slice(), &[1.0, -2.0]);
        assert_abs_diff_eq!(e.eigenvectors, DMatrix::identity(2, 2), epsilon = 1e-15);
    }

    #[test]
    fn eig_sign_convention() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let e = sym_eig(&random_sym(5, &mut rng)).unwrap();
            for col in e.eigenvectors.column_iter() {
                let v = col.clone_owned();
                assert!(v[dominant_index(&v)] >= 0.0);
            }
            for w in e.eigenvalues.as_slice().windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn eig_rejects_non_finite() {
        let mut m = DMatrix::identity(2, 2);
        m[(0, 0)] = f64::NAN;
        assert!(SymMatrix::new(m).is_err());
    }

    #[test]
    fn sym_matrix_rejects_asymmetry() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 1.0]);
        assert!(matches!(SymMatrix::new(m), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn solve_identity_and_diagonal() {
        let b = DVector::from_vec(vec![1.0, -2.0, 3.5]);
        assert_eq!(solve_linear(&DMatrix::identity(3, 3), &b).unwrap(), b);
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 4.0]);
        let x = solve_linear(&a, &DVector::from_vec(vec![2.0, 8.0])).unwrap();
        assert_abs_diff_eq!(x, DVector::from_vec(vec![1.0, 2.0]), epsilon = 1e-15);
    }

    #[test]
    fn solve_random_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = DMatrix::from_fn(10, 10, |i, j| {
            rng.random_range(-1.0..1.0) + if i == j { 5.0 } else { 0.0 }
        });
        let b = DVector::from_fn(10, |_, _| rng.random_range(-1.0..1.0));
        let x = solve_linear(&a, &b).unwrap();
        assert!((&a * &x - &b).norm() <= 1e-8 * b.norm());
    }

    #[test]
    fn solve_singular_reports_condition() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let err = solve_linear(&a, &DVector::from_vec(vec![1.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::IllConditioned { rcond } if rcond < RCOND_SINGULAR));
    }

    #[test]
    fn rcond_tracks_true_condition() {
        // diag(1, 1e-6) has 1-norm condition exactly 1e6
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1e-6]));
        let f = LuFactor::new(&a).unwrap();
        assert_abs_diff_eq!(f.rcond(), 1e-6, epsilon = 1e-12);
    }

    #[test]
    fn transpose_solve_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = DMatrix::from_fn(6, 6, |_, _| rng.random_range(-1.0..1.0));
        let b = DVector::from_fn(6, |_, _| rng.random_range(-1.0..1.0));
        let f = LuFactor::new(&a).unwrap();
        let x = f.solve_transpose(&b).unwrap();
        assert!((a.transpose() * x - b).norm() < 1e-10);
    }

    #[test]
    fn log_determinant_matches_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b = DMatrix::from_fn(5, 5, |_, _| rng.random_range(-1.0..1.0));
        let a = &b * b.transpose() + DMatrix::identity(5, 5);
        // SPD, so ln det is the sum of the log eigenvalues
        let oracle: f64 = a.clone().symmetric_eigenvalues().iter().map(|l: &f64| l.ln()).sum();
        assert_abs_diff_eq!(LuFactor::new(&a).unwrap().log_abs_determinant(), oracle, epsilon = 1e-10);
        let neg = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 3.0, 0.0]);
        assert_abs_diff_eq!(LuFactor::new(&neg).unwrap().log_abs_determinant(), 6f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn least_squares_consistent_square() {
        let a = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0]);
        let b = DVector::from_vec(vec![5.0, 5.0]);
        let ls = solve_least_squares(&a, &b).unwrap();
        assert_abs_diff_eq!(ls.solution, solve_linear(&a, &b).unwrap(), epsilon = 1e-12);
        assert!(!ls.rank_deficient);
    }

    #[test]
    fn least_squares_mean_of_two() {
        let a = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        let ls = solve_least_squares(&a, &DVector::from_vec(vec![0.0, 2.0])).unwrap();
        assert_abs_diff_eq!(ls.solution[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn least_squares_matches_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = DMatrix::from_fn(20, 5, |_, _| rng.random_range(-1.0..1.0));
        let b = DVector::from_fn(20, |_, _| rng.random_range(-1.0..1.0));
        let ls = solve_least_squares(&a, &b).unwrap();
        // Independent route: explicit (aᵀa)⁻¹ aᵀ b.
        let ata = a.transpose() * &a;
        let oracle = ata.try_inverse().unwrap() * a.transpose() * &b;
        assert_abs_diff_eq!(ls.solution, oracle, epsilon = 1e-10);
        let atb = a.transpose() * &b;
        assert!((a.transpose() * (&a * &ls.solution - &b)).norm() <= 1e-8 * atb.norm());
    }

    #[test]
    fn least_squares_rank_deficient_is_min_norm() {
        // Duplicate column: any x with x0 + x1 = 1 fits, the min-norm one is (½, ½).
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let ls = solve_least_squares(&a, &DVector::from_vec(vec![1.0, 1.0, 1.0])).unwrap();
        assert!(ls.rank_deficient);
        assert_eq!(ls.rank, 1);
        assert_abs_diff_eq!(ls.solution, DVector::from_vec(vec![0.5, 0.5]), epsilon = 1e-12);
    }

    #[test]
    fn least_squares_rejects_wide() {
        let a = DMatrix::zeros(1, 2);
        assert!(solve_least_squares(&a, &DVector::zeros(1)).is_err());
    }

    #[test]
    fn rotation_dim_one_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = random_rotation(1, &mut rng);
        assert_abs_diff_eq!(r[(0, 0)], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rotation_from_symmetric_generator_is_identity() {
        let g = DMatrix::from_row_slice(3, 3, &[0.1, 0.2, -0.3, 0.2, 0.4, 0.1, -0.3, 0.1, -0.2]);
        assert_abs_diff_eq!(rotation_from_generator(&g), DMatrix::identity(3, 3), epsilon = 1e-14);
    }

    #[test]
    fn rotation_is_proper_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let r = random_rotation(4, &mut rng);
        assert!(orthogonality_error(&r) < 1e-10);
        assert_abs_diff_eq!(r.determinant(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn rotations_across_dims_and_seeds() {
        for dim in 1..=16 {
            for seed in 0..100 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let r = random_rotation(dim, &mut rng);
                assert!(orthogonality_error(&r) < 1e-10, "dim {dim} seed {seed}");
                assert!((r.determinant() - 1.0).abs() < 1e-10, "dim {dim} seed {seed}");
            }
        }
    }

    proptest! {
        #[test]
        fn eig_reconstructs_and_preserves_trace(seed in any::<u64>(), n in 1usize..9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_sym(n, &mut rng);
            let e = sym_eig(&m).unwrap();
            let rel = (e.reconstruct().as_matrix() - m.as_matrix()).norm()
                / m.frobenius_norm().max(1e-300);
            prop_assert!(rel < 1e-8);
            prop_assert!(orthogonality_error(&e.eigenvectors) < 1e-10);
            let tr = m.trace();
            prop_assert!((e.eigenvalues.sum() - tr).abs() <= 1e-8 * tr.abs().max(m.frobenius_norm()));
        }

        #[test]
        fn least_squares_exact_on_consistent(seed in any::<u64>(), extra in 0usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 4;
            let a = DMatrix::from_fn(n + extra, n, |i, j| {
                rng.random_range(-1.0..1.0) + if i == j { 3.0 } else { 0.0 }
            });
            let x = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
            let ls = solve_least_squares(&a, &(&a * &x)).unwrap();
            prop_assert!((ls.solution - x).amax() < 1e-8);
        }
    }
}
