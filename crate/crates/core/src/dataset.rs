//! Sampled function values and (optionally) gradients.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::testbed::TestFunction;
use crate::transform::{DomainTransform, Provenance};

/// The reference frame a dataset's coordinates live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// The frame the function was sampled in.
    Sampled,
    /// Mapped through a [`DomainTransform`] of the given provenance.
    Transformed(Provenance),
}

/// Sample locations with their function values and, for gradient-enhanced
/// work, one gradient per point.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<DVector<f64>>,
    values: Vec<f64>,
    gradients: Option<Vec<DVector<f64>>>,
    frame: Frame,
}

impl Dataset {
    pub fn new(
        points: Vec<DVector<f64>>,
        values: Vec<f64>,
        gradients: Option<Vec<DVector<f64>>>,
    ) -> Result<Self> {
        let first = points.first().ok_or(Error::Empty("dataset"))?;
        let dim = first.len();
        if dim == 0 {
            return Err(Error::InvalidArgument("points must have at least one coordinate".into()));
        }
        if values.len() != points.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), found: values.len() });
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.len() });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("sample location"));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sample value"));
        }
        if let Some(gs) = &gradients {
            if gs.len() != points.len() {
                return Err(Error::DimensionMismatch { expected: points.len(), found: gs.len() });
            }
            for g in gs {
                if g.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: g.len() });
                }
                if g.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("sample gradient"));
                }
            }
        }
        Ok(Dataset { points, values, gradients, frame: Frame::Sampled })
    }

    /// Evaluates `f` (and its gradient when asked) at every point.
    pub fn sample<F: TestFunction + ?Sized>(f: &F, points: Vec<DVector<f64>>, with_gradients: bool) -> Result<Self> {
        let values = points.iter().map(|x| f.value(x)).collect();
        let gradients = with_gradients.then(|| points.iter().map(|x| f.gradient(x)).collect());
        Dataset::new(points, values, gradients)
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn gradients(&self) -> Option<&[DVector<f64>]> {
        self.gradients.as_deref()
    }

    pub fn has_gradients(&self) -> bool {
        self.gradients.is_some()
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn without_gradients(&self) -> Dataset {
        Dataset { gradients: None, ..self.clone() }
    }

    /// The same samples expressed in the frame of `t`: points are mapped
    /// forward and gradients by the chain rule.
    pub fn transformed(&self, t: &DomainTransform) -> Result<Dataset> {
        if t.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: t.dim() });
        }
        Ok(Dataset {
            points: self.points.iter().map(|x| t.forward(x)).collect(),
            values: self.values.clone(),
            gradients: self
                .gradients
                .as_ref()
                .map(|gs| gs.iter().map(|g| t.transform_gradient(g)).collect()),
            frame: Frame::Transformed(t.provenance()),
        })
    }

    /// The samples at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            points: indices.iter().map(|&i| self.points[i].clone()).collect(),
            values: indices.iter().map(|&i| self.values[i]).collect(),
            gradients: self.gradients.as_ref().map(|gs| indices.iter().map(|&i| gs[i].clone()).collect()),
            frame: self.frame,
        }
    }
}
