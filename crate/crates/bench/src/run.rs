//! Running a sweep: designs, domain transforms, fits and scoring.

use std::collections::BTreeMap;

use isoframe::dataset::Dataset;
use isoframe::numerics::random_rotation;
use isoframe::sampling::{latin_hypercube, seeded_rng, uniform_cloud, Bounds};
use isoframe::surrogate::{fit_model, kriging_scale_transform, tune_kriging, FitOptions, ModelKind, Surrogate};
use isoframe::testbed::{example_2d, make_sinusoid, rotation_2d, wrap_frame, Framed, Sinusoid, SinusoidSpec, TestFunction};
use isoframe::transform::{build_transform, ideal_transform, minmax_transform, DomainTransform};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::spec::{Domain, ExperimentSpec, FunctionId, Region, TestCloud};
use crate::BenchError;

/// The target function placed in its sampling frame `x̂ = R S x`.
pub struct Problem {
    pub function: Framed<Sinusoid>,
    pub sinusoid: SinusoidSpec,
    pub rotation: DMatrix<f64>,
    pub scales: Vec<f64>,
    /// Bounding box of the image of the unit cube.
    pub region: Bounds,
    /// Box the raw draws are made in: `region`, or the unit cube when the
    /// draws are mapped into the image.
    draw_box: Bounds,
    mapped: bool,
}

impl Problem {
    pub fn from_spec(spec: &ExperimentSpec) -> Result<Problem, BenchError> {
        spec.validate()?;
        let n = spec.dim;
        let base = match spec.function {
            FunctionId::Example2d => example_2d(),
            FunctionId::Sinusoid => Sinusoid::new(make_sinusoid(n)),
        };
        let rotation = match (spec.rotated, spec.rotation_degrees) {
            (false, _) => DMatrix::identity(n, n),
            (true, Some(deg)) => rotation_2d(deg),
            (true, None) => random_rotation(n, &mut seeded_rng(spec.frame_seed, 0)),
        };
        let scales = spec.frame_scales.clone().unwrap_or_else(|| vec![1.0; n]);
        let sinusoid = base.spec().clone();
        let function = wrap_frame(base, &rotation, &scales)?;
        let region = function.bounds();
        let (draw_box, mapped) = match spec.region {
            Region::BoundingBox => (region.clone(), false),
            Region::Image => (Bounds::new(vec![(0.0, 1.0); n])?, true),
        };
        Ok(Problem { function, sinusoid, rotation, scales, region, draw_box, mapped })
    }

    /// Box that designs, clouds and segments are drawn in before [`Problem::place`].
    pub fn draw_box(&self) -> &Bounds {
        &self.draw_box
    }

    /// Maps raw draws into the sampling frame.
    pub fn place(&self, points: Vec<DVector<f64>>) -> Vec<DVector<f64>> {
        if self.mapped {
            points.iter().map(|x| self.function.from_inner(x)).collect()
        } else {
            points
        }
    }
}

// Stream layout: designs use (repeat, p); test clouds and lines use the top
// of the range, which no sample count reaches.
const CLOUD_TAG: u64 = 0xFFFF_FFFF;
const SHARED_CLOUD_STREAM: u64 = u64::MAX;
const LINES_STREAM: u64 = u64::MAX - 1;

fn stream(repeat: usize, tag: u64) -> u64 {
    ((repeat as u64) << 32) | tag
}

/// The Latin hypercube construction set of one `(p, repeat)` cell, with
/// values and gradients.
pub fn construction_set(spec: &ExperimentSpec, problem: &Problem, p: usize, repeat: usize) -> Result<Dataset, BenchError> {
    let mut rng = seeded_rng(spec.seed, stream(repeat, p as u64));
    let design = latin_hypercube(p, problem.draw_box(), &mut rng)?;
    Ok(Dataset::sample(&problem.function, problem.place(design.points), true)?)
}

/// Test points for `repeat`.
pub fn test_cloud(spec: &ExperimentSpec, problem: &Problem, repeat: usize) -> Result<Vec<DVector<f64>>, BenchError> {
    let s = match spec.test_cloud {
        TestCloud::PerRepeat => stream(repeat, CLOUD_TAG),
        TestCloud::Shared => SHARED_CLOUD_STREAM,
    };
    let raw = uniform_cloud(spec.test_points, problem.draw_box(), &mut seeded_rng(spec.seed, s))?.points;
    Ok(problem.place(raw))
}

fn kriging_seed(spec: &ExperimentSpec, p: usize, repeat: usize) -> u64 {
    spec.seed ^ stream(repeat, p as u64).rotate_left(17)
}

/// The transform a domain uses for one construction set. Apart from the
/// ideal domain, which knows the frame, it depends on `data` only.
pub fn domain_transform(
    domain: Domain,
    data: &Dataset,
    problem: &Problem,
    kriging_seed: u64,
) -> Result<DomainTransform, BenchError> {
    let n = data.dim();
    Ok(match domain {
        Domain::Identity => DomainTransform::identity(n),
        Domain::Minmax => minmax_transform(data.points())?,
        Domain::GradientTransform => build_transform(data)?,
        Domain::FunctionTransform => build_transform(&data.without_gradients())?,
        Domain::KrigingScale => {
            let base = minmax_transform(data.points())?;
            let scaled = data.transformed(&base)?;
            let tuned = tune_kriging(
                scaled.points(),
                scaled.values(),
                &Default::default(),
                &mut seeded_rng(kriging_seed, 0),
            )?;
            let k = kriging_scale_transform(&tuned.epsilon)?;
            base.then_scale(k.scales().as_slice(), k.provenance())?
        }
        Domain::Ideal => {
            // the frame maps unit-cube coordinates x to x̂ = R S x
            ideal_transform(&problem.sinusoid, &problem.rotation, &problem.scales)?
        }
    })
}

/// One scored surrogate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RmseRecord {
    pub domain: Domain,
    pub kind: ModelKind,
    pub p: usize,
    pub repeat: usize,
    /// `None` when the fit failed.
    pub rmse: Option<f64>,
    pub failure: Option<String>,
    /// Signed pointwise errors on the test cloud, kept for shared clouds.
    #[serde(skip)]
    pub errors: Option<Vec<f64>>,
}

/// `sqrt(mean((prediction − truth)²))`.
pub fn rmse(predictions: &[f64], truth: &[f64]) -> f64 {
    assert_eq!(predictions.len(), truth.len());
    let sum: f64 = predictions.iter().zip(truth).map(|(a, b)| (a - b) * (a - b)).sum();
    (sum / truth.len() as f64).sqrt()
}

/// Everything produced by [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    /// Ordered by domain, kind, p, repeat in spec order.
    pub records: Vec<RmseRecord>,
    /// Transform used per `(domain, p, repeat)`.
    pub transforms: BTreeMap<(Domain, usize, usize), DomainTransform>,
}

impl ExperimentResult {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.failure.is_some()).count()
    }
}

fn failure_tag(e: impl std::fmt::Display) -> String {
    e.to_string().replace([',', '\n', '"'], ";")
}

/// Runs every `(domain, kind, p, repeat)` cell. Cells run in parallel and
/// the output is put in canonical order afterwards, so results do not
/// depend on scheduling.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult, BenchError> {
    let problem = Problem::from_spec(spec)?;
    let shared = match spec.test_cloud {
        TestCloud::Shared => {
            let pts = test_cloud(spec, &problem, 0)?;
            let truth: Vec<f64> = pts.iter().map(|x| problem.function.value(x)).collect();
            Some((pts, truth))
        }
        TestCloud::PerRepeat => None,
    };

    let jobs: Vec<(usize, usize)> =
        (0..spec.repeats).flat_map(|r| spec.sample_counts.iter().map(move |&p| (r, p))).collect();
    let per_repeat: Vec<Option<(Vec<DVector<f64>>, Vec<f64>)>> = if shared.is_some() {
        vec![None; spec.repeats]
    } else {
        (0..spec.repeats)
            .into_par_iter()
            .map(|r| {
                let pts = test_cloud(spec, &problem, r)?;
                let truth = pts.iter().map(|x| problem.function.value(x)).collect();
                Ok(Some((pts, truth)))
            })
            .collect::<Result<_, BenchError>>()?
    };

    let outputs: Vec<(Vec<RmseRecord>, Vec<((Domain, usize, usize), DomainTransform)>)> = jobs
        .par_iter()
        .map(|&(repeat, p)| {
            let (cloud, truth) = shared.as_ref().or(per_repeat[repeat].as_ref()).expect("test cloud prepared");
            run_cell(spec, &problem, p, repeat, cloud, truth)
        })
        .collect::<Result<_, BenchError>>()?;

    let mut records = Vec::new();
    let mut transforms = BTreeMap::new();
    for (recs, ts) in outputs {
        records.extend(recs);
        transforms.extend(ts);
    }
    let domain_rank = |d: Domain| spec.domains.iter().position(|&x| x == d).unwrap_or(usize::MAX);
    let kind_rank = |k: ModelKind| spec.kinds.iter().position(|&x| x == k).unwrap_or(usize::MAX);
    records.sort_by_key(|r| (domain_rank(r.domain), kind_rank(r.kind), r.p, r.repeat));
    Ok(ExperimentResult { records, transforms })
}

type CellOutput = (Vec<RmseRecord>, Vec<((Domain, usize, usize), DomainTransform)>);

fn run_cell(
    spec: &ExperimentSpec,
    problem: &Problem,
    p: usize,
    repeat: usize,
    cloud: &[DVector<f64>],
    truth: &[f64],
) -> Result<CellOutput, BenchError> {
    let data = construction_set(spec, problem, p, repeat)?;
    let keep_errors = spec.test_cloud == TestCloud::Shared;
    let mut records = Vec::new();
    let mut transforms = Vec::new();
    for &domain in &spec.domains {
        let transform = domain_transform(domain, &data, problem, kriging_seed(spec, p, repeat));
        for &kind in &spec.kinds {
            let fail = |tag: String| RmseRecord { domain, kind, p, repeat, rmse: None, failure: Some(tag), errors: None };
            let t = match &transform {
                Ok(t) => t,
                Err(e) => {
                    records.push(fail(format!("transform: {}", failure_tag(e))));
                    continue;
                }
            };
            let options = FitOptions { seed: kriging_seed(spec, p, repeat), ..FitOptions::default() };
            match fit_model(kind, &data, t, &options) {
                Ok(s) => {
                    let predictions: Vec<f64> = cloud.iter().map(|x| s.predict(x)).collect();
                    let value = rmse(&predictions, truth);
                    if value.is_finite() {
                        let errors =
                            keep_errors.then(|| predictions.iter().zip(truth).map(|(a, b)| a - b).collect());
                        records.push(RmseRecord { domain, kind, p, repeat, rmse: Some(value), failure: None, errors });
                    } else {
                        records.push(fail("non-finite rmse".into()));
                    }
                }
                Err(e) => records.push(fail(format!("fit: {}", failure_tag(e)))),
            }
        }
        if let Ok(t) = transform {
            transforms.push(((domain, p, repeat), t));
        }
    }
    Ok((records, transforms))
}

/// Mean over test points of the across-repeat (population) variance of the
/// pointwise error. All records must carry errors on the same cloud.
pub fn shape_variance(records: &[&RmseRecord]) -> Result<f64, BenchError> {
    let errors: Vec<&Vec<f64>> = records
        .iter()
        .map(|r| r.errors.as_ref().ok_or_else(|| BenchError::Spec("record carries no pointwise errors".into())))
        .collect::<Result<_, _>>()?;
    if errors.len() < 2 {
        return Err(BenchError::Spec("shape variance needs at least two repeats".into()));
    }
    let m = errors[0].len();
    if errors.iter().any(|e| e.len() != m) {
        return Err(BenchError::Spec("pointwise errors come from different test clouds".into()));
    }
    let k = errors.len() as f64;
    let total: f64 = (0..m)
        .map(|j| {
            let mean = errors.iter().map(|e| e[j]).sum::<f64>() / k;
            errors.iter().map(|e| (e[j] - mean).powi(2)).sum::<f64>() / k
        })
        .sum();
    Ok(total / m as f64)
}

/// One sampled point along a line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinePoint {
    pub t: f64,
    pub truth: f64,
    pub prediction: f64,
}

/// Random segments through `region`, each as `(start, end)`; coincident
/// endpoints are redrawn.
pub fn random_segments<R: Rng + ?Sized>(region: &Bounds, lines: usize, rng: &mut R) -> Vec<(DVector<f64>, DVector<f64>)> {
    let draw = |rng: &mut R| {
        DVector::from_iterator(region.dim(), region.intervals().iter().map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>()))
    };
    (0..lines)
        .map(|_| loop {
            let a = draw(rng);
            let b = draw(rng);
            if a != b {
                break (a, b);
            }
        })
        .collect()
}

/// Surrogate and truth at `n` equally spaced parameters `t ∈ [0, 1]` along
/// each segment.
pub fn line_slice<F: TestFunction + ?Sized>(
    surrogate: &Surrogate,
    truth: &F,
    segments: &[(DVector<f64>, DVector<f64>)],
    n: usize,
) -> Vec<Vec<LinePoint>> {
    segments
        .iter()
        .map(|(a, b)| {
            (0..n)
                .map(|i| {
                    let t = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
                    let x = a + (b - a) * t;
                    LinePoint { t, truth: truth.value(&x), prediction: surrogate.predict(&x) }
                })
                .collect()
        })
        .collect()
}

/// A line slice for one fitted cell.
#[derive(Debug, Clone)]
pub struct LineSet {
    pub domain: Domain,
    pub kind: ModelKind,
    pub p: usize,
    pub lines: Vec<Vec<LinePoint>>,
}

/// Fits repeat 0 of every cell and samples the same random lines through
/// each surrogate.
pub fn run_lines(spec: &ExperimentSpec, lines: usize, points_per_line: usize) -> Result<Vec<LineSet>, BenchError> {
    let problem = Problem::from_spec(spec)?;
    let segments: Vec<_> = random_segments(problem.draw_box(), lines, &mut seeded_rng(spec.seed, LINES_STREAM))
        .into_iter()
        .map(|(a, b)| {
            let mut ends = problem.place(vec![a, b]);
            let b = ends.pop().expect("two ends");
            (ends.pop().expect("two ends"), b)
        })
        .collect();
    let cells: Vec<(Domain, ModelKind, usize)> = spec
        .domains
        .iter()
        .flat_map(|&d| spec.kinds.iter().flat_map(move |&k| spec.sample_counts.iter().map(move |&p| (d, k, p))))
        .collect();
    cells
        .par_iter()
        .map(|&(domain, kind, p)| {
            let data = construction_set(spec, &problem, p, 0)?;
            let t = domain_transform(domain, &data, &problem, kriging_seed(spec, p, 0))?;
            let options = FitOptions { seed: kriging_seed(spec, p, 0), ..FitOptions::default() };
            let s = fit_model(kind, &data, &t, &options)?;
            Ok(LineSet { domain, kind, p, lines: line_slice(&s, &problem.function, &segments, points_per_line) })
        })
        .collect()
}
