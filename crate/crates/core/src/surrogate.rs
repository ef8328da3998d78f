//! Surrogate models built inside a [`DomainTransform`].
//!
//! Every fit takes a dataset in its sampled frame together with a transform;
//! the data are mapped forward (gradients by the chain rule) and the model is
//! trained on the transformed coordinates. [`Surrogate::predict`] accepts
//! points in the sampled frame and applies the same map.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{solve_least_squares, LuFactor};
use crate::transform::{DomainTransform, Provenance};

/// Gaussian basis `exp(−ε r²)` for squared distance `r2`.
pub fn gaussian(epsilon: f64, r2: f64) -> f64 {
    (-epsilon * r2).exp()
}

// ‖a − b‖² without allocating
fn dist2(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Gradient of `exp(−ε ‖x − c‖²)` with respect to `x`.
pub fn gaussian_gradient(epsilon: f64, x: &DVector<f64>, c: &DVector<f64>) -> DVector<f64> {
    let d = x - c;
    let phi = gaussian(epsilon, d.norm_squared());
    d * (-2.0 * epsilon * phi)
}

/// The model families available to the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Rbf,
    GeRbf,
    Polynomial,
    GePolynomial,
    Kriging,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] =
        [ModelKind::Rbf, ModelKind::GeRbf, ModelKind::Polynomial, ModelKind::GePolynomial, ModelKind::Kriging];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Rbf => "rbf",
            ModelKind::GeRbf => "ge-rbf",
            ModelKind::Polynomial => "polynomial",
            ModelKind::GePolynomial => "ge-polynomial",
            ModelKind::Kriging => "kriging",
        }
    }

    pub fn needs_gradients(self) -> bool {
        matches!(self, ModelKind::GeRbf | ModelKind::GePolynomial)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown model kind `{s}`")))
    }
}

/// Fitted hyper-parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum SurrogateKind {
    Polynomial { order: usize },
    Rbf { epsilon: f64 },
    Kriging { mu: f64, sigma2: f64, epsilon: Vec<f64> },
}

/// Numerical fallbacks taken during a fit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitFlags {
    /// Least-squares basis matrix was rank deficient; minimum-norm weights.
    pub rank_deficient: bool,
    /// RBF interpolation matrix was singular; a ridge term was added.
    pub ridge: bool,
    /// Kriging correlation matrix was singular; a nugget was added.
    pub nugget: bool,
    /// No shape parameter candidate was usable and a default was taken.
    pub epsilon_fallback: bool,
}

impl FitFlags {
    pub fn any(&self) -> bool {
        self.rank_deficient || self.ridge || self.nugget || self.epsilon_fallback
    }
}

/// A trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Surrogate {
    kind: SurrogateKind,
    gradient_enhanced: bool,
    /// Basis centers in the transformed frame; empty for polynomials.
    centers: Vec<DVector<f64>>,
    weights: DVector<f64>,
    transform: DomainTransform,
    flags: FitFlags,
}

impl Surrogate {
    pub fn kind(&self) -> &SurrogateKind {
        &self.kind
    }

    pub fn gradient_enhanced(&self) -> bool {
        self.gradient_enhanced
    }

    pub fn centers(&self) -> &[DVector<f64>] {
        &self.centers
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    pub fn transform(&self) -> &DomainTransform {
        &self.transform
    }

    pub fn flags(&self) -> FitFlags {
        self.flags
    }

    pub fn dim(&self) -> usize {
        self.transform.dim()
    }

    /// Number of basis functions `K`.
    pub fn basis_count(&self) -> usize {
        self.weights.len()
    }

    /// Model value at `x`, given in the sampled frame.
    pub fn predict(&self, x: &DVector<f64>) -> f64 {
        assert_eq!(x.len(), self.dim(), "prediction point has wrong dimension");
        self.evaluate_transformed(&self.transform.forward(x))
    }

    /// Model value at a point already in the transformed frame.
    pub fn evaluate_transformed(&self, xh: &DVector<f64>) -> f64 {
        match &self.kind {
            SurrogateKind::Polynomial { order } => polynomial_row(xh, *order).dot(&self.weights),
            SurrogateKind::Rbf { epsilon } => self
                .centers
                .iter()
                .zip(self.weights.iter())
                .map(|(c, w)| w * gaussian(*epsilon, dist2(xh, c)))
                .sum(),
            SurrogateKind::Kriging { mu, epsilon, .. } => {
                mu + self.centers.iter().zip(self.weights.iter()).map(|(c, w)| w * correlation(epsilon, xh, c)).sum::<f64>()
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("surrogate serializes")
    }
}

fn prepare(data: &Dataset, transform: &DomainTransform, need_gradients: bool) -> Result<Dataset> {
    if need_gradients && !data.has_gradients() {
        return Err(Error::MissingGradients);
    }
    data.transformed(transform)
}

// Column layout follows the usual descending order: x_n^k … x_1^1, then 1.
fn polynomial_row(x: &DVector<f64>, order: usize) -> DVector<f64> {
    let n = x.len();
    let mut row = Vec::with_capacity(order * n + 1);
    for i in (0..n).rev() {
        for j in (1..=order).rev() {
            row.push(x[i].powi(j as i32));
        }
    }
    row.push(1.0);
    DVector::from_vec(row)
}

// ∂/∂x_d of every polynomial basis function.
fn polynomial_derivative_row(x: &DVector<f64>, order: usize, d: usize) -> DVector<f64> {
    let n = x.len();
    let mut row = Vec::with_capacity(order * n + 1);
    for i in (0..n).rev() {
        for j in (1..=order).rev() {
            row.push(if i == d { j as f64 * x[i].powi(j as i32 - 1) } else { 0.0 });
        }
    }
    row.push(0.0);
    DVector::from_vec(row)
}

/// Polynomial of order `order` without coupling terms, `K = order·N + 1`.
///
/// The gradient-enhanced variant appends one row per gradient component to
/// the value rows and solves the stacked system by least squares.
pub fn fit_polynomial(
    data: &Dataset,
    transform: &DomainTransform,
    order: usize,
    gradient_enhanced: bool,
) -> Result<Surrogate> {
    if order == 0 {
        return Err(Error::InvalidArgument("polynomial order must be at least 1".into()));
    }
    let d = prepare(data, transform, gradient_enhanced)?;
    let n = d.dim();
    let k = order * n + 1;
    let rows_per_point = if gradient_enhanced { 1 + n } else { 1 };
    let rows = d.len() * rows_per_point;
    if rows < k {
        return Err(Error::InsufficientData { needed: k.div_ceil(rows_per_point), available: d.len() });
    }

    let mut m = DMatrix::zeros(rows, k);
    let mut rhs = DVector::zeros(rows);
    for (i, x) in d.points().iter().enumerate() {
        m.row_mut(i).copy_from(&polynomial_row(x, order).transpose());
        rhs[i] = d.values()[i];
    }
    if let Some(grads) = d.gradients().filter(|_| gradient_enhanced) {
        let base = d.len();
        for (i, (x, g)) in d.points().iter().zip(grads).enumerate() {
            for dim in 0..n {
                let r = base + i * n + dim;
                m.row_mut(r).copy_from(&polynomial_derivative_row(x, order, dim).transpose());
                rhs[r] = g[dim];
            }
        }
    }
    let ls = solve_least_squares(&m, &rhs)?;
    Ok(Surrogate {
        kind: SurrogateKind::Polynomial { order },
        gradient_enhanced,
        centers: Vec::new(),
        weights: ls.solution,
        transform: transform.clone(),
        flags: FitFlags { rank_deficient: ls.rank_deficient, ..FitFlags::default() },
    })
}

/// Shape parameter choice for RBF fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Fixed(f64),
    /// Rippa leave-one-out selection over the candidates.
    Auto(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbfConfig {
    pub shape: Shape,
}

impl Default for RbfConfig {
    fn default() -> Self {
        RbfConfig { shape: Shape::Auto(default_shape_grid()) }
    }
}

impl RbfConfig {
    pub fn fixed(epsilon: f64) -> Self {
        RbfConfig { shape: Shape::Fixed(epsilon) }
    }
}

/// 41 log-uniform candidates in `[1e-2, 1e2]`.
pub fn default_shape_grid() -> Vec<f64> {
    (0..41).map(|i| 10f64.powf(-2.0 + 4.0 * i as f64 / 40.0)).collect()
}

/// Interpolation matrix `M_ij = φ(‖x_i − x_j‖)`.
pub fn rbf_matrix(points: &[DVector<f64>], epsilon: f64) -> DMatrix<f64> {
    let p = points.len();
    let mut m = DMatrix::zeros(p, p);
    for i in 0..p {
        m[(i, i)] = 1.0;
        for j in 0..i {
            let v = gaussian(epsilon, dist2(&points[i], &points[j]));
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Gaussian RBF with one center per sample (`K = p`).
///
/// The plain fit solves the square interpolation system. The gradient
/// enhanced fit keeps the same centers and solves the `(p + pN) × p`
/// stacked value/gradient system by least squares, so both variants have
/// equal flexibility. With [`Shape::Auto`] both use the shape parameter that
/// Rippa's leave-one-out estimate selects on the function values.
pub fn fit_rbf(
    data: &Dataset,
    transform: &DomainTransform,
    config: &RbfConfig,
    gradient_enhanced: bool,
) -> Result<Surrogate> {
    let d = prepare(data, transform, gradient_enhanced)?;
    let mut flags = FitFlags::default();
    let epsilon = match &config.shape {
        Shape::Fixed(e) => {
            if !(*e > 0.0 && e.is_finite()) {
                return Err(Error::InvalidArgument(format!("shape parameter must be positive, got {e}")));
            }
            *e
        }
        Shape::Auto(grid) => {
            let r = rippa_loocv(d.points(), d.values(), grid)?;
            flags.epsilon_fallback = r.fallback;
            r.epsilon
        }
    };
    let points = d.points();
    let p = points.len();
    let m = rbf_matrix(points, epsilon);
    let f = DVector::from_column_slice(d.values());

    let weights = if !gradient_enhanced {
        match LuFactor::new(&m).and_then(|lu| lu.solve(&f)) {
            Ok(w) => w,
            Err(Error::IllConditioned { .. }) => {
                flags.ridge = true;
                let lambda = 1e-10 * m.trace() / p as f64;
                let reg = &m + DMatrix::identity(p, p) * lambda;
                LuFactor::new_unchecked(&reg)?.solve(&f)?
            }
            Err(e) => return Err(e),
        }
    } else {
        let n = d.dim();
        let grads = d.gradients().ok_or(Error::MissingGradients)?;
        let mut a = DMatrix::zeros(p + p * n, p);
        let mut rhs = DVector::zeros(p + p * n);
        a.rows_mut(0, p).copy_from(&m);
        rhs.rows_mut(0, p).copy_from(&f);
        for (i, (x, g)) in points.iter().zip(grads).enumerate() {
            for (j, c) in points.iter().enumerate() {
                let dphi = gaussian_gradient(epsilon, x, c);
                for dim in 0..n {
                    a[(p + i * n + dim, j)] = dphi[dim];
                }
            }
            rhs.rows_mut(p + i * n, n).copy_from(g);
        }
        let ls = solve_least_squares(&a, &rhs)?;
        flags.rank_deficient = ls.rank_deficient;
        ls.solution
    };

    Ok(Surrogate {
        kind: SurrogateKind::Rbf { epsilon },
        gradient_enhanced,
        centers: points.to_vec(),
        weights,
        transform: transform.clone(),
        flags,
    })
}

/// One candidate of a leave-one-out sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RippaCandidate {
    pub epsilon: f64,
    /// `E = (1/K) Σ W_i / (M⁻¹)_ii`, the mean signed leave-one-out residual;
    /// `None` when the interpolation matrix was singular.
    pub error: Option<f64>,
    /// Mean of `|W_i / (M⁻¹)_ii|`, the quantity minimized.
    pub abs_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RippaResult {
    pub epsilon: f64,
    pub curve: Vec<RippaCandidate>,
    /// Set when no candidate was usable; `epsilon` is then the largest one.
    pub fallback: bool,
}

/// Leave-one-out residuals `f_i − s₋ᵢ(x_i)` from a single full fit.
///
/// Removing sample `i` from an interpolating fit changes its prediction at
/// `x_i` by exactly `W_i / (M⁻¹)_ii`.
pub fn loo_residuals(points: &[DVector<f64>], values: &[f64], epsilon: f64) -> Result<DVector<f64>> {
    if points.len() != values.len() {
        return Err(Error::DimensionMismatch { expected: points.len(), found: values.len() });
    }
    if points.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, available: points.len() });
    }
    let lu = LuFactor::new(&rbf_matrix(points, epsilon))?;
    let inv = lu.inverse()?;
    let w = &inv * DVector::from_column_slice(values);
    let e = DVector::from_fn(w.len(), |i, _| w[i] / inv[(i, i)]);
    if e.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("leave-one-out residual"));
    }
    Ok(e)
}

/// Rippa's closed-form leave-one-out sweep over the shape parameter.
///
/// The selected value minimizes the mean absolute residual; ties go to the
/// smallest `ε`. Candidates whose interpolation matrix is singular are
/// skipped.
pub fn rippa_loocv(points: &[DVector<f64>], values: &[f64], grid: &[f64]) -> Result<RippaResult> {
    if grid.is_empty() {
        return Err(Error::Empty("shape parameter grid"));
    }
    if let Some(bad) = grid.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidArgument(format!("shape parameter must be positive, got {bad}")));
    }
    if points.len() == 1 {
        // nothing to leave out
        let epsilon = grid.iter().copied().fold(f64::INFINITY, f64::min);
        let curve = grid.iter().map(|&epsilon| RippaCandidate { epsilon, error: None, abs_error: None }).collect();
        return Ok(RippaResult { epsilon, curve, fallback: false });
    }

    let mut curve = Vec::with_capacity(grid.len());
    for &epsilon in grid {
        let candidate = match loo_residuals(points, values, epsilon) {
            Ok(e) => {
                let k = e.len() as f64;
                RippaCandidate { epsilon, error: Some(e.sum() / k), abs_error: Some(e.abs().sum() / k) }
            }
            Err(Error::IllConditioned { .. } | Error::NonFinite(_)) => {
                RippaCandidate { epsilon, error: None, abs_error: None }
            }
            Err(e) => return Err(e),
        };
        curve.push(candidate);
    }

    let best = curve
        .iter()
        .filter_map(|c| c.abs_error.map(|a| (a, c.epsilon)))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    Ok(match best {
        Some((_, epsilon)) => RippaResult { epsilon, curve, fallback: false },
        None => {
            let epsilon = grid.iter().copied().fold(0.0, f64::max);
            RippaResult { epsilon, curve, fallback: true }
        }
    })
}

/// `exp(−Σ ε_k (x_k − c_k)²)`.
pub fn correlation(epsilon: &[f64], x: &DVector<f64>, c: &DVector<f64>) -> f64 {
    let s: f64 = epsilon.iter().zip(x.iter().zip(c.iter())).map(|(e, (a, b))| e * (a - b) * (a - b)).sum();
    (-s).exp()
}

/// Diagonal added to a singular Kriging correlation matrix.
pub const KRIGING_NUGGET: f64 = 1e-10;

fn correlation_matrix(points: &[DVector<f64>], epsilon: &[f64]) -> DMatrix<f64> {
    let p = points.len();
    let mut m = DMatrix::identity(p, p);
    for i in 0..p {
        for j in 0..i {
            let v = correlation(epsilon, &points[i], &points[j]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Everything the Kriging predictor and likelihood need at one `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrigingState {
    pub mu: f64,
    pub sigma2: f64,
    pub log_likelihood: f64,
    /// `M⁻¹ (f − 1μ̂)`.
    pub weights: DVector<f64>,
    pub nugget: bool,
}

/// Generalized least-squares mean and variance, and the concentrated
/// log-likelihood `−(p/2) ln σ̂² − ½ ln |M|`.
pub fn kriging_state(points: &[DVector<f64>], values: &[f64], epsilon: &[f64]) -> Result<KrigingState> {
    let p = points.len();
    if p < 2 {
        return Err(Error::InsufficientData { needed: 2, available: p });
    }
    if values.len() != p {
        return Err(Error::DimensionMismatch { expected: p, found: values.len() });
    }
    let mut m = correlation_matrix(points, epsilon);
    let (lu, nugget) = match LuFactor::new(&m) {
        Ok(lu) => (lu, false),
        Err(Error::IllConditioned { .. }) => {
            for i in 0..p {
                m[(i, i)] += KRIGING_NUGGET;
            }
            (LuFactor::new_unchecked(&m)?, true)
        }
        Err(e) => return Err(e),
    };
    let f = DVector::from_column_slice(values);
    let ones = DVector::from_element(p, 1.0);
    let mf = lu.solve(&f)?;
    let m1 = lu.solve(&ones)?;
    let mu = ones.dot(&mf) / ones.dot(&m1);
    let resid = &f - &ones * mu;
    let weights = &mf - &m1 * mu;
    let sigma2 = (resid.dot(&weights) / p as f64).max(0.0);
    let log_likelihood = -0.5 * p as f64 * sigma2.ln() - 0.5 * lu.log_abs_determinant();
    Ok(KrigingState { mu, sigma2, log_likelihood, weights, nugget })
}

/// Kriging with correlation `exp(−Σ ε_k d_k²)` at the given `ε`.
pub fn fit_kriging(data: &Dataset, transform: &DomainTransform, epsilon: &[f64]) -> Result<Surrogate> {
    let d = prepare(data, transform, false)?;
    if epsilon.len() != d.dim() {
        return Err(Error::DimensionMismatch { expected: d.dim(), found: epsilon.len() });
    }
    if epsilon.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidArgument("Kriging hyper-parameters must be positive".into()));
    }
    let state = kriging_state(d.points(), d.values(), epsilon)?;
    Ok(Surrogate {
        kind: SurrogateKind::Kriging { mu: state.mu, sigma2: state.sigma2, epsilon: epsilon.to_vec() },
        gradient_enhanced: false,
        centers: d.points().to_vec(),
        weights: state.weights,
        transform: transform.clone(),
        flags: FitFlags { nugget: state.nugget, ..FitFlags::default() },
    })
}

/// Settings for the likelihood search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrigingTuning {
    pub starts: usize,
    pub max_iterations: usize,
    /// Search box for `log₁₀ ε`; the objective is evaluated at the clamped
    /// point.
    pub log10_bounds: (f64, f64),
    /// Starts are drawn log-uniformly in this range of `log₁₀ ε`.
    pub log10_start_range: (f64, f64),
}

impl Default for KrigingTuning {
    fn default() -> Self {
        KrigingTuning { starts: 5, max_iterations: 100, log10_bounds: (-3.0, 3.0), log10_start_range: (-2.0, 2.0) }
    }
}

/// Outcome of [`tune_kriging`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunedKriging {
    pub epsilon: Vec<f64>,
    pub log_likelihood: f64,
    /// `(ε, log-likelihood)` at each start.
    pub starts: Vec<(Vec<f64>, f64)>,
    /// Set when no start produced a finite likelihood; `ε = 1`.
    pub fallback: bool,
}

/// Maximizes the Kriging log-likelihood over `log₁₀ ε` with restarted
/// Nelder–Mead searches.
pub fn tune_kriging<R: Rng + ?Sized>(
    points: &[DVector<f64>],
    values: &[f64],
    settings: &KrigingTuning,
    rng: &mut R,
) -> Result<TunedKriging> {
    let first = points.first().ok_or(Error::Empty("points"))?;
    let n = first.len();
    let (lo, hi) = settings.log10_bounds;
    let clamp = |z: &DVector<f64>| z.map(|v| v.clamp(lo, hi));
    let to_eps = |z: &DVector<f64>| clamp(z).iter().map(|v| 10f64.powf(*v)).collect::<Vec<_>>();
    let objective = |z: &DVector<f64>| -> f64 {
        match kriging_state(points, values, &to_eps(z)) {
            Ok(s) if s.log_likelihood.is_finite() => -s.log_likelihood,
            _ => f64::INFINITY,
        }
    };

    let (a, b) = settings.log10_start_range;
    let mut best: Option<(DVector<f64>, f64)> = None;
    let mut starts = Vec::with_capacity(settings.starts);
    for _ in 0..settings.starts {
        let z0 = DVector::from_fn(n, |_, _| rng.random_range(a..=b));
        let f0 = objective(&z0);
        starts.push((to_eps(&z0), -f0));
        let (z, fz) = nelder_mead(&objective, z0, 0.5, settings.max_iterations);
        if fz.is_finite() && best.as_ref().is_none_or(|(_, fb)| fz < *fb) {
            best = Some((z, fz));
        }
    }
    Ok(match best {
        Some((z, fz)) => TunedKriging { epsilon: to_eps(&z), log_likelihood: -fz, starts, fallback: false },
        None => TunedKriging { epsilon: vec![1.0; n], log_likelihood: f64::NEG_INFINITY, starts, fallback: true },
    })
}

/// Minimizes `f` from `x0` with the standard simplex moves (reflection 1,
/// expansion 2, contraction ½, shrink ½). Returns the best vertex.
pub fn nelder_mead(
    f: &dyn Fn(&DVector<f64>) -> f64,
    x0: DVector<f64>,
    step: f64,
    max_iterations: usize,
) -> (DVector<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(DVector<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = f(&x0);
    simplex.push((x0.clone(), f0));
    for i in 0..n {
        let mut x = x0.clone();
        x[i] += step;
        let fx = f(&x);
        simplex.push((x, fx));
    }

    for _ in 0..max_iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (fbest, fworst) = (simplex[0].1, simplex[n].1);
        let size = simplex.iter().skip(1).map(|(x, _)| (x - &simplex[0].0).amax()).fold(0.0, f64::max);
        if size < 1e-8 || (fworst - fbest).abs() <= 1e-12 * fbest.abs().max(1.0) {
            break;
        }

        let centroid = simplex[..n].iter().fold(DVector::zeros(n), |acc, (x, _)| acc + x) / n as f64;
        let worst = simplex[n].0.clone();
        let reflected = &centroid + (&centroid - &worst);
        let fr = f(&reflected);

        if fr < simplex[0].1 {
            let expanded = &centroid + (&centroid - &worst) * 2.0;
            let fe = f(&expanded);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let (contracted, fc) = if fr < simplex[n].1 {
                let c = &centroid + (&reflected - &centroid) * 0.5;
                let fc = f(&c);
                (c, fc)
            } else {
                let c = &centroid + (&worst - &centroid) * 0.5;
                let fc = f(&c);
                (c, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    let x = &best + (&v.0 - &best) * 0.5;
                    let fx = f(&x);
                    *v = (x, fx);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

/// Per-axis scaling `s_k = √ε_k` induced by Kriging hyper-parameters.
pub fn kriging_scale_transform(epsilon: &[f64]) -> Result<DomainTransform> {
    let scales: Vec<f64> = epsilon.iter().map(|e| e.sqrt()).collect();
    DomainTransform::diagonal(&scales, Provenance::KrigingScale)
}

/// Options for [`fit_model`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub polynomial_order: usize,
    pub rbf: RbfConfig,
    pub kriging: KrigingTuning,
    /// Seed for the Kriging start points.
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { polynomial_order: 2, rbf: RbfConfig::default(), kriging: KrigingTuning::default(), seed: 0 }
    }
}

/// Fits any [`ModelKind`] with default hyper-parameter selection.
pub fn fit_model(kind: ModelKind, data: &Dataset, transform: &DomainTransform, options: &FitOptions) -> Result<Surrogate> {
    match kind {
        ModelKind::Rbf => fit_rbf(data, transform, &options.rbf, false),
        ModelKind::GeRbf => fit_rbf(data, transform, &options.rbf, true),
        ModelKind::Polynomial => fit_polynomial(data, transform, options.polynomial_order, false),
        ModelKind::GePolynomial => fit_polynomial(data, transform, options.polynomial_order, true),
        ModelKind::Kriging => {
            let d = data.transformed(transform)?;
            let mut rng = crate::sampling::seeded_rng(options.seed, 0);
            let tuned = tune_kriging(d.points(), d.values(), &options.kriging, &mut rng)?;
            let mut s = fit_kriging(data, transform, &tuned.epsilon)?;
            s.flags.epsilon_fallback = tuned.fallback;
            Ok(s)
        }
    }
}
