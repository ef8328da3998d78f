//! Analytic test functions with exact gradients and Hessians.
//!
//! Gradients are returned as plain column vectors. Where a frame change is
//! involved the row-vector form `∇f · S⁻¹Rᵀ` is the transpose of what is
//! returned here.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{orthogonality_error, SymMatrix};
use crate::sampling::Bounds;

/// A smooth function of `dim` variables with exact derivatives.
///
/// Evaluators panic on a dimension mismatch; use the checked free functions
/// (e.g. [`eval_sinusoid`]) at API boundaries where the input is untrusted.
pub trait TestFunction: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    fn hessian(&self, x: &DVector<f64>) -> SymMatrix;
    /// The region the function is meant to be sampled on.
    fn bounds(&self) -> Bounds;
}

impl<T: TestFunction + ?Sized> TestFunction for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (**self).gradient(x)
    }
    fn hessian(&self, x: &DVector<f64>) -> SymMatrix {
        (**self).hessian(x)
    }
    fn bounds(&self) -> Bounds {
        (**self).bounds()
    }
}

impl<T: TestFunction + ?Sized> TestFunction for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (**self).gradient(x)
    }
    fn hessian(&self, x: &DVector<f64>) -> SymMatrix {
        (**self).hessian(x)
    }
    fn bounds(&self) -> Bounds {
        (**self).bounds()
    }
}

/// Amplitudes and frequencies of `f(x) = (1/N) Σ A_i sin(F_i x_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinusoidSpec {
    pub amplitudes: Vec<f64>,
    pub frequencies: Vec<f64>,
}

impl SinusoidSpec {
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }
}

/// The sinusoid family member for dimension `n`:
///
/// `A_i = 3 − 2 exp(−(2i − N)² / N)`,
/// `F_i = 3π / (2 + 2 exp((N − 20i) / 2)) + π/2`, with `i = 1..=N`.
pub fn make_sinusoid(n: usize) -> SinusoidSpec {
    assert!(n >= 1, "sinusoid dimension must be at least 1");
    let nf = n as f64;
    let (amplitudes, frequencies) = (1..=n)
        .map(|i| {
            let i = i as f64;
            let a = -2.0 * (-(2.0 * i - nf).powi(2) / nf).exp() + 3.0;
            let f = 3.0 * PI / (2.0 + 2.0 * ((-20.0 * i + nf) / 2.0).exp()) + PI / 2.0;
            (a, f)
        })
        .unzip();
    SinusoidSpec { amplitudes, frequencies }
}

/// Value and gradient of the sinusoid at `x`.
pub fn eval_sinusoid(spec: &SinusoidSpec, x: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
    if x.len() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), found: x.len() });
    }
    let f = Sinusoid::new(spec.clone());
    Ok((f.value(x), f.gradient(x)))
}

/// `f(x) = (1/N) Σ A_i sin(F_i x_i)` on `[0, 1]^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinusoid {
    spec: SinusoidSpec,
}

impl Sinusoid {
    pub fn new(spec: SinusoidSpec) -> Self {
        assert_eq!(spec.amplitudes.len(), spec.frequencies.len());
        assert!(!spec.amplitudes.is_empty());
        Sinusoid { spec }
    }

    pub fn spec(&self) -> &SinusoidSpec {
        &self.spec
    }

    fn terms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.spec.amplitudes.iter().copied().zip(self.spec.frequencies.iter().copied())
    }
}

impl TestFunction for Sinusoid {
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        assert_eq!(x.len(), self.dim());
        let n = self.dim() as f64;
        self.terms().zip(x.iter()).map(|((a, f), &xi)| a * (f * xi).sin()).sum::<f64>() / n
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        assert_eq!(x.len(), self.dim());
        let n = self.dim() as f64;
        DVector::from_iterator(
            self.dim(),
            self.terms().zip(x.iter()).map(|((a, f), &xi)| a * f * (f * xi).cos() / n),
        )
    }

    fn hessian(&self, x: &DVector<f64>) -> SymMatrix {
        assert_eq!(x.len(), self.dim());
        let n = self.dim() as f64;
        let diag: Vec<f64> =
            self.terms().zip(x.iter()).map(|((a, f), &xi)| -a * f * f * (f * xi).sin() / n).collect();
        SymMatrix::from_diagonal(&diag)
    }

    fn bounds(&self) -> Bounds {
        Bounds::unit(self.dim())
    }
}

/// `sin(2π x₁) + sin(2π x₂)` on `[0, 1]²`.
pub fn example_2d() -> Sinusoid {
    // (1/2)·(2 sin(2πx₁) + 2 sin(2πx₂))
    Sinusoid::new(SinusoidSpec { amplitudes: vec![2.0, 2.0], frequencies: vec![2.0 * PI, 2.0 * PI] })
}

/// `f(x) = ½ xᵀ A x` on `[−1, 1]^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    a: SymMatrix,
}

impl QuadraticForm {
    pub fn matrix(&self) -> &SymMatrix {
        &self.a
    }
}

pub fn quadratic_form(a: SymMatrix) -> QuadraticForm {
    QuadraticForm { a }
}

impl TestFunction for QuadraticForm {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * self.a.quadratic_form(x)
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.a.mul_vector(x)
    }

    fn hessian(&self, _x: &DVector<f64>) -> SymMatrix {
        self.a.clone()
    }

    fn bounds(&self) -> Bounds {
        Bounds::new(vec![(-1.0, 1.0); self.dim()]).expect("non-empty")
    }
}

/// `inner` seen through the linear change of variables `x̂ = M x`.
///
/// `g(x̂) = f(M⁻¹ x̂)`, `∇g = M⁻ᵀ ∇f` and `∇²g = M⁻ᵀ ∇²f M⁻¹`. The sampling
/// box is the bounding box of the image of the inner box.
#[derive(Debug, Clone)]
pub struct Framed<F> {
    inner: F,
    map: DMatrix<f64>,
    inverse: DMatrix<f64>,
}

/// Wraps `f` in the frame `x̂ = R S x`, `R` orthogonal and `S = diag(scales)`
/// positive.
pub fn wrap_frame<F: TestFunction>(f: F, rotation: &DMatrix<f64>, scales: &[f64]) -> Result<Framed<F>> {
    let n = f.dim();
    if rotation.shape() != (n, n) {
        return Err(Error::DimensionMismatch { expected: n, found: rotation.nrows() });
    }
    if scales.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: scales.len() });
    }
    let dev = orthogonality_error(rotation);
    if dev > 1e-8 {
        return Err(Error::NotOrthogonal(dev));
    }
    if scales.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::InvalidArgument("frame scales must be positive".into()));
    }
    let s = DVector::from_column_slice(scales);
    let map = rotation * DMatrix::from_diagonal(&s);
    let inverse = DMatrix::from_diagonal(&s.map(|v| 1.0 / v)) * rotation.transpose();
    Ok(Framed { inner: f, map, inverse })
}

/// Wraps `f` in the frame `x̂ = M x` for any invertible `M`.
pub fn wrap_linear<F: TestFunction>(f: F, map: DMatrix<f64>) -> Result<Framed<F>> {
    let n = f.dim();
    if map.shape() != (n, n) {
        return Err(Error::DimensionMismatch { expected: n, found: map.nrows() });
    }
    let inverse = map.clone().try_inverse().ok_or(Error::IllConditioned { rcond: 0.0 })?;
    Ok(Framed { inner: f, map, inverse })
}

impl<F: TestFunction> Framed<F> {
    pub fn inner(&self) -> &F {
        &self.inner
    }

    /// `M` in `x̂ = M x`.
    pub fn map(&self) -> &DMatrix<f64> {
        &self.map
    }

    pub fn to_inner(&self, x_hat: &DVector<f64>) -> DVector<f64> {
        &self.inverse * x_hat
    }

    pub fn from_inner(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.map * x
    }
}

impl<F: TestFunction> TestFunction for Framed<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        self.inner.value(&self.to_inner(x))
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.inverse.tr_mul(&self.inner.gradient(&self.to_inner(x)))
    }

    fn hessian(&self, x: &DVector<f64>) -> SymMatrix {
        let h = self.inner.hessian(&self.to_inner(x));
        h.congruence(&self.inverse.transpose())
    }

    fn bounds(&self) -> Bounds {
        let inner = self.inner.bounds();
        let intervals = self
            .map
            .row_iter()
            .map(|row| {
                row.iter().zip(inner.intervals()).fold((0.0, 0.0), |(lo, hi), (&m, &(a, b))| {
                    let (p, q) = (m * a, m * b);
                    (lo + p.min(q), hi + p.max(q))
                })
            })
            .collect();
        Bounds::new(intervals).expect("image of a box under an invertible map is a box")
    }
}

/// Rotation by `degrees` in the plane.
pub fn rotation_2d(degrees: f64) -> DMatrix<f64> {
    let (s, c) = degrees.to_radians().sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::random_rotation;
    use crate::sampling::{seeded_rng, uniform_cloud};
    use approx::assert_abs_diff_eq;

    fn fd_gradient(f: &dyn TestFunction, x: &DVector<f64>) -> DVector<f64> {
        let h = 1e-6;
        DVector::from_fn(x.len(), |i, _| {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            (f.value(&xp) - f.value(&xm)) / (2.0 * h)
        })
    }

    fn fd_hessian(f: &dyn TestFunction, x: &DVector<f64>) -> DMatrix<f64> {
        let h = 1e-5;
        let n = x.len();
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            m.set_column(j, &((f.gradient(&xp) - f.gradient(&xm)) / (2.0 * h)));
        }
        m
    }

    fn audit(f: &dyn TestFunction, seed: u64) {
        let pts = uniform_cloud(20, &f.bounds(), &mut seeded_rng(seed, 0)).unwrap();
        for x in &pts.points {
            let g = f.gradient(x);
            let scale = g.amax().max(1.0);
            assert!((fd_gradient(f, x) - &g).amax() < 1e-5 * scale);
            let h = f.hessian(x);
            let hscale = h.as_matrix().amax().max(1.0);
            assert!((fd_hessian(f, x) - h.as_matrix()).amax() < 1e-4 * hscale);
        }
    }

    #[test]
    fn example_values() {
        let f = example_2d();
        assert_abs_diff_eq!(f.value(&DVector::from_vec(vec![0.25, 0.25])), 2.0, epsilon = 1e-14);
        assert_eq!(f.value(&DVector::zeros(2)), 0.0);
        let g = f.gradient(&DVector::zeros(2));
        assert_abs_diff_eq!(g, DVector::from_vec(vec![2.0 * PI, 2.0 * PI]), epsilon = 1e-14);
    }

    #[test]
    fn sinusoid_coefficients_n2() {
        let s = make_sinusoid(2);
        assert_abs_diff_eq!(s.amplitudes[0], 1.0, epsilon = 1e-15);
        let expected = 3.0 * PI / (2.0 + 2.0 * (-9.0f64).exp()) + PI / 2.0;
        assert_abs_diff_eq!(s.frequencies[0], expected, epsilon = 1e-15);
        assert_abs_diff_eq!(s.frequencies[0], 6.28260, epsilon = 1e-5);
    }

    #[test]
    fn sinusoid_coefficients_in_range() {
        for n in [2, 4, 8, 16] {
            let s = make_sinusoid(n);
            assert!(s.amplitudes.iter().all(|&a| (1.0..=3.0).contains(&a)));
            assert!(s.frequencies.iter().all(|&f| (0.5 * PI..=2.0 * PI).contains(&f)));
        }
    }

    #[test]
    fn sinusoid_at_origin() {
        let s = make_sinusoid(4);
        let (v, g) = eval_sinusoid(&s, &DVector::zeros(4)).unwrap();
        assert_eq!(v, 0.0);
        for i in 0..4 {
            assert_abs_diff_eq!(g[i], s.amplitudes[i] * s.frequencies[i] / 4.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn sinusoid_single_term() {
        let s = make_sinusoid(1);
        let x = DVector::from_vec(vec![0.3]);
        let (v, _) = eval_sinusoid(&s, &x).unwrap();
        assert_abs_diff_eq!(v, s.amplitudes[0] * (s.frequencies[0] * 0.3).sin(), epsilon = 1e-15);
    }

    #[test]
    fn sinusoid_dimension_mismatch() {
        let s = make_sinusoid(3);
        assert!(matches!(
            eval_sinusoid(&s, &DVector::zeros(2)),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn sinusoid_gradient_matches_differences() {
        let s = Sinusoid::new(make_sinusoid(4));
        let pts = uniform_cloud(10, &s.bounds(), &mut seeded_rng(8, 0)).unwrap();
        for x in &pts.points {
            let g = s.gradient(x);
            let fd = fd_gradient(&s, x);
            assert!((fd - &g).norm() < 1e-6 * g.norm().max(1.0));
        }
    }

    #[test]
    fn sinusoid_is_bounded() {
        for n in [1, 2, 4, 8, 16] {
            let spec = make_sinusoid(n);
            let bound = spec.amplitudes.iter().sum::<f64>() / n as f64;
            assert!(bound <= 3.0);
            let f = Sinusoid::new(spec);
            let pts = uniform_cloud(200, &f.bounds(), &mut seeded_rng(n as u64, 0)).unwrap();
            assert!(pts.points.iter().all(|x| f.value(x).abs() <= bound));
        }
    }

    #[test]
    fn derivative_audits() {
        audit(&example_2d(), 1);
        audit(&Sinusoid::new(make_sinusoid(8)), 2);
        let a = SymMatrix::new(DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 1.0])).unwrap();
        audit(&quadratic_form(a), 3);
        let r = random_rotation(4, &mut seeded_rng(4, 0));
        let framed = wrap_frame(Sinusoid::new(make_sinusoid(4)), &r, &[2.0, 0.5, 1.0, 3.0]).unwrap();
        audit(&framed, 4);
    }

    #[test]
    fn quadratic_examples() {
        let f1 = quadratic_form(SymMatrix::identity(2));
        assert_abs_diff_eq!(f1.value(&DVector::from_vec(vec![1.0, 1.0])), 1.0);
        let a2 = SymMatrix::new(DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 1.0])).unwrap();
        let f2 = quadratic_form(a2);
        assert_eq!(f2.gradient(&DVector::from_vec(vec![1.0, 0.0])).as_slice(), &[3.0, 1.0]);
        assert_eq!(f2.value(&DVector::zeros(2)), 0.0);
        assert_eq!(f2.gradient(&DVector::zeros(2)), DVector::zeros(2));
    }

    #[test]
    fn identity_frame_is_transparent() {
        let f = example_2d();
        let g = wrap_frame(f.clone(), &DMatrix::identity(2, 2), &[1.0, 1.0]).unwrap();
        let x = DVector::from_vec(vec![0.3, 0.8]);
        assert_eq!(g.value(&x), f.value(&x));
        assert_eq!(g.gradient(&x), f.gradient(&x));
        assert_eq!(g.bounds(), f.bounds());
    }

    #[test]
    fn scaled_rotated_example_frame() {
        let r = rotation_2d(30.0);
        let g = wrap_frame(example_2d(), &r, &[2.0, 1.0]).unwrap();
        // a point of the unit square lands at R S x and keeps its value there
        let x = DVector::from_vec(vec![0.25, 0.1]);
        let x_hat = &r * DVector::from_vec(vec![0.5, 0.1]);
        assert_abs_diff_eq!(g.value(&x_hat), example_2d().value(&x), epsilon = 1e-14);
        let b = g.bounds();
        let c = 30f64.to_radians().cos();
        let s = 30f64.to_radians().sin();
        assert_abs_diff_eq!(b.intervals()[0].0, -s, epsilon = 1e-14);
        assert_abs_diff_eq!(b.intervals()[0].1, 2.0 * c, epsilon = 1e-14);
        assert_abs_diff_eq!(b.intervals()[1].1, 2.0 * s + c, epsilon = 1e-14);
    }

    #[test]
    fn frame_rejects_non_orthogonal() {
        let r = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(matches!(wrap_frame(example_2d(), &r, &[1.0, 1.0]), Err(Error::NotOrthogonal(_))));
    }

    #[test]
    fn inverse_frame_recovers_function() {
        let mut rng = seeded_rng(10, 0);
        let f = Sinusoid::new(make_sinusoid(5));
        let r = random_rotation(5, &mut rng);
        let s = [1.5, 0.7, 2.0, 1.0, 0.3];
        let framed = wrap_frame(f.clone(), &r, &s).unwrap();
        let undo = framed.map().clone().try_inverse().unwrap();
        let back = wrap_linear(framed, undo).unwrap();
        let pts = uniform_cloud(50, &f.bounds(), &mut rng).unwrap();
        for x in &pts.points {
            assert!((back.value(x) - f.value(x)).abs() < 1e-10);
        }
    }
}
