//! Curvature-based domain transformation.
//!
//! A local Hessian is estimated at every sample: from gradients with a short
//! chain of symmetric rank-one (SR1) updates over the nearest neighbours, or
//! from function values with an interpolating quadratic over the nearest
//! cluster. Each local Hessian is rectified (eigenvalues replaced by their
//! magnitudes), the rectified matrices are averaged, and the eigenvectors
//! and square-rooted eigenvalues of that average give a rotation and a set of
//! scales. In the resulting frame `x̂ = diag(s) Vᵀ x` the averaged curvature
//! is the identity.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{orthogonality_error, solve_linear, sym_eig, SymMatrix};
use crate::testbed::SinusoidSpec;

/// Where a [`DomainTransform`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    GradientSr1,
    FunctionQuadratic,
    KrigingScale,
    Minmax,
    Ideal,
    Identity,
}

/// Linear change of variables `x̂ = diag(s) Vᵀ x` with `V` orthogonal and
/// every `s_i > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TransformDoc", into = "TransformDoc")]
pub struct DomainTransform {
    rotation: DMatrix<f64>,
    scales: DVector<f64>,
    provenance: Provenance,
}

/// JSON layout of a [`DomainTransform`]; the rotation is stored row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransformDoc {
    dim: usize,
    rotation: Vec<f64>,
    scales: Vec<f64>,
    provenance: Provenance,
}

impl From<DomainTransform> for TransformDoc {
    fn from(t: DomainTransform) -> Self {
        let dim = t.dim();
        TransformDoc {
            dim,
            rotation: t.rotation.transpose().iter().copied().collect(),
            scales: t.scales.iter().copied().collect(),
            provenance: t.provenance,
        }
    }
}

impl TryFrom<TransformDoc> for DomainTransform {
    type Error = Error;

    fn try_from(doc: TransformDoc) -> Result<Self> {
        if doc.rotation.len() != doc.dim * doc.dim {
            return Err(Error::DimensionMismatch { expected: doc.dim * doc.dim, found: doc.rotation.len() });
        }
        let rotation = DMatrix::from_row_slice(doc.dim, doc.dim, &doc.rotation);
        DomainTransform::new(rotation, DVector::from_vec(doc.scales), doc.provenance)
    }
}

impl DomainTransform {
    pub fn new(rotation: DMatrix<f64>, scales: DVector<f64>, provenance: Provenance) -> Result<Self> {
        let n = scales.len();
        if n == 0 {
            return Err(Error::Empty("transform scales"));
        }
        if rotation.shape() != (n, n) {
            return Err(Error::DimensionMismatch { expected: n, found: rotation.nrows() });
        }
        let dev = orthogonality_error(&rotation);
        if !(dev <= 1e-10) {
            return Err(Error::NotOrthogonal(dev));
        }
        if scales.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidArgument("transform scales must be positive and finite".into()));
        }
        Ok(DomainTransform { rotation, scales, provenance })
    }

    pub fn identity(dim: usize) -> Self {
        DomainTransform {
            rotation: DMatrix::identity(dim, dim),
            scales: DVector::from_element(dim, 1.0),
            provenance: Provenance::Identity,
        }
    }

    /// Pure per-axis scaling.
    pub fn diagonal(scales: &[f64], provenance: Provenance) -> Result<Self> {
        let n = scales.len();
        DomainTransform::new(DMatrix::identity(n, n), DVector::from_column_slice(scales), provenance)
    }

    /// Rotation onto the eigenvectors of `h` and scaling by the square roots
    /// of its eigenvalues, floored at `1e-8 · λ_max` (or 1 when no eigenvalue
    /// is positive).
    pub fn from_curvature(h: &SymMatrix, provenance: Provenance) -> Result<Self> {
        let eig = sym_eig(h)?;
        let max = eig.eigenvalues.max();
        let floor = if max > 0.0 { 1e-8 * max } else { 1.0 };
        let scales = eig.eigenvalues.map(|l| l.max(floor).sqrt());
        DomainTransform::new(eig.eigenvectors, scales, provenance)
    }

    pub fn dim(&self) -> usize {
        self.scales.len()
    }

    pub fn rotation(&self) -> &DMatrix<f64> {
        &self.rotation
    }

    pub fn scales(&self) -> &DVector<f64> {
        &self.scales
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// `diag(s) Vᵀ`.
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.scales) * self.rotation.transpose()
    }

    /// `x̂ = diag(s) Vᵀ x`.
    pub fn forward(&self, x: &DVector<f64>) -> DVector<f64> {
        self.rotation.tr_mul(x).component_mul(&self.scales)
    }

    /// `x = V diag(1/s) x̂`.
    pub fn inverse(&self, x_hat: &DVector<f64>) -> DVector<f64> {
        &self.rotation * x_hat.component_div(&self.scales)
    }

    /// Gradient with respect to `x̂` given the gradient with respect to `x`.
    ///
    /// In row form this is `∇f · S⁻¹Rᵀ` for the frame `x̂ = R S x`; here
    /// `R S = (diag(s) Vᵀ)`, so the column form is `diag(1/s) Vᵀ ∇f`.
    pub fn transform_gradient(&self, g: &DVector<f64>) -> DVector<f64> {
        self.rotation.tr_mul(g).component_div(&self.scales)
    }

    /// Hessian with respect to `x̂` of a function whose Hessian with respect
    /// to `x` is `h`.
    pub fn pull_back_hessian(&self, h: &SymMatrix) -> SymMatrix {
        let t_inv_t = DMatrix::from_diagonal(&self.scales.map(|s| 1.0 / s)) * self.rotation.transpose();
        h.congruence(&t_inv_t)
    }

    /// Applies an extra per-axis scaling after this transform.
    pub fn then_scale(&self, extra: &[f64], provenance: Provenance) -> Result<Self> {
        if extra.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: extra.len() });
        }
        let scales = self.scales.component_mul(&DVector::from_column_slice(extra));
        DomainTransform::new(self.rotation.clone(), scales, provenance)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transform serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))
    }
}

/// Maps the bounding box of `points` onto the unit cube (up to translation).
pub fn minmax_transform(points: &[DVector<f64>]) -> Result<DomainTransform> {
    let widths = axis_widths(points)?;
    let scales: Vec<f64> = widths.iter().map(|w| 1.0 / w).collect();
    DomainTransform::diagonal(&scales, Provenance::Minmax)
}

// Bounding box widths; a flat axis counts as width 1.
fn axis_widths(points: &[DVector<f64>]) -> Result<Vec<f64>> {
    let first = points.first().ok_or(Error::Empty("points"))?;
    let n = first.len();
    Ok((0..n)
        .map(|d| {
            let (lo, hi) = points
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[d]), hi.max(p[d])));
            let w = hi - lo;
            if w > 0.0 { w } else { 1.0 }
        })
        .collect())
}

/// How a local Hessian was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMethod {
    Sr1,
    QuadraticFit,
    Exact,
}

/// Quality flag attached to a local estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateStatus {
    Ok,
    /// Every SR1 update was rejected by the denominator guard; the estimate is
    /// the identity starting matrix.
    Degenerate,
    /// The quadratic fit was singular and was solved with a ridge term.
    Regularized,
}

/// A Hessian estimate around one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalHessianEstimate {
    pub center: DVector<f64>,
    pub hessian: SymMatrix,
    pub method: EstimateMethod,
    /// Indices of the samples used, the center first.
    pub support: Vec<usize>,
    pub status: EstimateStatus,
}

impl LocalHessianEstimate {
    pub fn exact(center: DVector<f64>, hessian: SymMatrix) -> Self {
        LocalHessianEstimate { center, hessian, method: EstimateMethod::Exact, support: vec![], status: EstimateStatus::Ok }
    }
}

/// Relative size of the SR1 denominator below which an update is skipped.
pub const SR1_GUARD: f64 = 1e-8;

/// Number of samples an interpolating quadratic with cross terms needs in
/// `dim` dimensions: `1 + 2N + N(N−1)/2`.
pub fn quadratic_cluster_size(dim: usize) -> usize {
    1 + 2 * dim + dim * (dim.saturating_sub(1)) / 2
}

/// Indices of the `k` samples nearest to `center` (excluding it), ordered
/// by increasing distance and then by index. Distances are measured after
/// min-max scaling the sample box.
pub fn nearest_neighbors(points: &[DVector<f64>], center: usize, k: usize) -> Vec<usize> {
    let widths = axis_widths(points).unwrap_or_default();
    let c = &points[center];
    let mut order: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != center)
        .map(|(i, p)| {
            let d2 = p.iter().zip(c.iter()).zip(&widths).map(|((a, b), w)| ((a - b) / w).powi(2)).sum::<f64>();
            (d2, i)
        })
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    order.into_iter().take(k).map(|(_, i)| i).collect()
}

/// Local Hessian at sample `center` from `N` SR1 updates.
///
/// Starting from the identity, the `N` nearest neighbours are visited from
/// the furthest to the closest. Each contributes the step `Δx = x_c − x_k`
/// and gradient change `y = ∇f(x_c) − ∇f(x_k)`. An update is skipped when
/// `|(y − HΔx)ᵀΔx| < 1e-8 ‖y − HΔx‖ ‖Δx‖`.
pub fn sr1_hessian(center: usize, data: &Dataset) -> Result<LocalHessianEstimate> {
    let grads = data.gradients().ok_or(Error::MissingGradients)?;
    let n = data.dim();
    if data.len() < n + 1 {
        return Err(Error::InsufficientData { needed: n + 1, available: data.len() });
    }
    let points = data.points();
    let mut neighbors = nearest_neighbors(points, center, n);
    neighbors.reverse();

    let xc = &points[center];
    let gc = &grads[center];
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut applied = 0;
    for &k in &neighbors {
        let dx = xc - &points[k];
        let y = gc - &grads[k];
        let r = &y - &h * &dx;
        let denom = r.dot(&dx);
        let rn = r.norm();
        if rn == 0.0 {
            // secant condition already holds
            applied += 1;
            continue;
        }
        if denom.abs() < SR1_GUARD * rn * dx.norm() {
            continue;
        }
        h += (&r * r.transpose()) / denom;
        applied += 1;
    }

    let mut support = vec![center];
    support.extend(neighbors.iter().rev());
    let status = if applied == 0 && n > 0 { EstimateStatus::Degenerate } else { EstimateStatus::Ok };
    let hessian = if status == EstimateStatus::Degenerate { SymMatrix::identity(n) } else { SymMatrix::symmetrize(&h) };
    if !hessian.is_finite() {
        return Err(Error::NonFinite("SR1 estimate"));
    }
    Ok(LocalHessianEstimate { center: xc.clone(), hessian, method: EstimateMethod::Sr1, support, status })
}

/// Local Hessian at sample `center` from an interpolating quadratic.
///
/// The fit `Σ_{i≤j} c_ij x_i x_j + Σ c_k x_k + c₀` uses the center and its
/// nearest neighbours, [`quadratic_cluster_size`] samples in total, and gives
/// `H_ii = 2 c_ii`, `H_ij = c_ij`.
pub fn quadfit_hessian(center: usize, data: &Dataset) -> Result<LocalHessianEstimate> {
    let n = data.dim();
    let q = quadratic_cluster_size(n);
    if data.len() < q {
        return Err(Error::InsufficientData { needed: q, available: data.len() });
    }
    let points = data.points();
    let values = data.values();
    let mut support = vec![center];
    support.extend(nearest_neighbors(points, center, q - 1));

    // Centered and radius-normalized coordinates keep the system well scaled.
    let xc = &points[center];
    let radius = support.iter().map(|&i| (&points[i] - xc).amax()).fold(0.0, f64::max);
    let radius = if radius > 0.0 { radius } else { 1.0 };

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let design = DMatrix::from_fn(q, q, |row, col| {
        let u = (&points[support[row]] - xc) / radius;
        match col {
            0 => 1.0,
            c if c <= n => u[c - 1],
            c => {
                let (i, j) = pairs[c - n - 1];
                u[i] * u[j]
            }
        }
    });
    let rhs = DVector::from_iterator(q, support.iter().map(|&i| values[i]));

    let (coef, status) = match solve_linear(&design, &rhs) {
        Ok(c) => (c, EstimateStatus::Ok),
        Err(Error::IllConditioned { .. }) => {
            let ata = design.transpose() * &design;
            let ridge = 1e-10 * ata.trace().max(f64::MIN_POSITIVE) / q as f64;
            let reg = &ata + DMatrix::identity(q, q) * ridge;
            let atb = design.transpose() * &rhs;
            let c = reg.lu().solve(&atb).ok_or(Error::IllConditioned { rcond: 0.0 })?;
            (c, EstimateStatus::Regularized)
        }
        Err(e) => return Err(e),
    };

    let mut h = DMatrix::zeros(n, n);
    for (k, &(i, j)) in pairs.iter().enumerate() {
        let c = coef[n + 1 + k] / (radius * radius);
        if i == j {
            h[(i, i)] = 2.0 * c;
        } else {
            h[(i, j)] = c;
            h[(j, i)] = c;
        }
    }
    let hessian = SymMatrix::new(h)?;
    Ok(LocalHessianEstimate { center: xc.clone(), hessian, method: EstimateMethod::QuadraticFit, support, status })
}

/// `V |Σ| Vᵀ`.
pub fn rectify(h: &SymMatrix) -> Result<SymMatrix> {
    Ok(sym_eig(h)?.map_eigenvalues(f64::abs))
}

/// Mean of the rectified local Hessians, summed in the given order.
pub fn average_hessian(estimates: &[LocalHessianEstimate]) -> Result<SymMatrix> {
    let first = estimates.first().ok_or(Error::Empty("local Hessian estimates"))?;
    let n = first.hessian.dim();
    let mut sum = SymMatrix::zeros(n);
    for e in estimates {
        if e.hessian.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: e.hessian.dim() });
        }
        sum = &sum + &rectify(&e.hessian)?;
    }
    Ok(&sum * (1.0 / estimates.len() as f64))
}

/// A transform together with the intermediate quantities that produced it.
#[derive(Debug, Clone)]
pub struct TransformEstimate {
    pub transform: DomainTransform,
    pub local: Vec<LocalHessianEstimate>,
    pub average: SymMatrix,
    /// True when no usable curvature was found and the identity was returned.
    pub degenerate: bool,
}

/// Builds the transform from already available local Hessians.
pub fn transform_from_estimates(
    local: Vec<LocalHessianEstimate>,
    provenance: Provenance,
) -> Result<TransformEstimate> {
    let average = average_hessian(&local)?;
    let n = average.dim();
    let all_degenerate = local.iter().all(|e| e.status == EstimateStatus::Degenerate);
    let no_curvature = average.as_matrix().amax() == 0.0;
    if all_degenerate || no_curvature {
        let transform = DomainTransform { provenance, ..DomainTransform::identity(n) };
        return Ok(TransformEstimate { transform, local, average, degenerate: true });
    }
    let transform = DomainTransform::from_curvature(&average, provenance)?;
    Ok(TransformEstimate { transform, local, average, degenerate: false })
}

/// Full estimate: one local Hessian per sample (SR1 when gradients are
/// present, quadratic fit otherwise), rectified, averaged and decomposed.
pub fn estimate_transform(data: &Dataset) -> Result<TransformEstimate> {
    let (provenance, local) = if data.has_gradients() {
        let local = (0..data.len()).map(|i| sr1_hessian(i, data)).collect::<Result<Vec<_>>>()?;
        (Provenance::GradientSr1, local)
    } else {
        let local = (0..data.len()).map(|i| quadfit_hessian(i, data)).collect::<Result<Vec<_>>>()?;
        (Provenance::FunctionQuadratic, local)
    };
    transform_from_estimates(local, provenance)
}

pub fn build_transform(data: &Dataset) -> Result<DomainTransform> {
    Ok(estimate_transform(data)?.transform)
}

/// Mean of `|sin(f t)|` for `t` uniform in `[0, 1]`.
pub fn mean_abs_sine(f: f64) -> f64 {
    let f = f.abs();
    if f == 0.0 {
        return 0.0;
    }
    // ∫₀^f |sin u| du = 2k + 1 − cos(f − kπ) with k full half-periods
    let k = (f / PI).floor();
    (2.0 * k + 1.0 - (f - k * PI).cos()) / f
}

/// The reference transform for a sinusoid presented in the frame
/// `x̂ = R S x`: undo the frame, then scale each decoupled axis by the square
/// root of its mean absolute curvature over `[0, 1]`.
pub fn ideal_transform(spec: &SinusoidSpec, rotation: &DMatrix<f64>, scales: &[f64]) -> Result<DomainTransform> {
    let n = spec.dim();
    if scales.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: scales.len() });
    }
    let nf = n as f64;
    let s = DVector::from_iterator(
        n,
        spec.amplitudes.iter().zip(&spec.frequencies).zip(scales).map(|((&a, &f), &sk)| {
            let curvature = a * f * f / nf * mean_abs_sine(f);
            curvature.sqrt() / sk
        }),
    );
    DomainTransform::new(rotation.clone(), s, Provenance::Ideal)
}
