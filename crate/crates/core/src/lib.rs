//! Surrogate models with a curvature-based domain transformation.
//!
//! Symmetric basis functions such as the Gaussian assume the target bends
//! about equally in every direction. This crate estimates local Hessians
//! from the samples, averages their rectified forms, and derives a rotation
//! and scaling under which that assumption holds better. Polynomial,
//! Gaussian RBF (plain and gradient-enhanced) and Kriging surrogates are then
//! trained in the transformed frame.
//!
//! ```
//! use isoframe::prelude::*;
//!
//! let f = example_2d();
//! let mut rng = seeded_rng(7, 0);
//! let design = latin_hypercube(12, &f.bounds(), &mut rng)?;
//! let data = Dataset::sample(&f, design.points, true)?;
//!
//! let transform = build_transform(&data)?;
//! let model = fit_rbf(&data, &transform, &RbfConfig::default(), true)?;
//! let x = nalgebra::DVector::from_vec(vec![0.4, 0.6]);
//! assert!(model.predict(&x).is_finite());
//! # Ok::<(), isoframe::Error>(())
//! ```

pub mod dataset;
pub mod error;
pub mod numerics;
pub mod sampling;
pub mod surrogate;
pub mod testbed;
pub mod transform;

pub use error::{Error, Result};

/// The commonly used items in one import.
pub mod prelude {
    pub use crate::dataset::{Dataset, Frame};
    pub use crate::error::{Error, Result};
    pub use crate::numerics::{random_rotation, sym_eig, SymMatrix};
    pub use crate::sampling::{latin_hypercube, seeded_rng, uniform_cloud, Bounds, SampleSet};
    pub use crate::surrogate::{
        fit_kriging, fit_model, fit_polynomial, fit_rbf, kriging_scale_transform, rippa_loocv, tune_kriging,
        FitOptions, ModelKind, RbfConfig, Surrogate,
    };
    pub use crate::testbed::{example_2d, make_sinusoid, quadratic_form, wrap_frame, Sinusoid, TestFunction};
    pub use crate::transform::{
        build_transform, estimate_transform, ideal_transform, minmax_transform, rectify, DomainTransform,
        Provenance,
    };
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/frames.md")]
    pub mod frames {}
    #[doc = include_str!("../../../book/src/curvature.md")]
    pub mod curvature {}
    #[doc = include_str!("../../../book/src/transform.md")]
    pub mod transform {}
    #[doc = include_str!("../../../book/src/surrogates.md")]
    pub mod surrogates {}
}
