//! Declarative experiment descriptions.

use std::fmt;

use isoframe::surrogate::ModelKind;
use serde::{Deserialize, Serialize};

use crate::BenchError;

/// Analytic target of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionId {
    /// `sin(2πx₁) + sin(2πx₂)` on the unit square.
    #[serde(rename = "example-2d")]
    Example2d,
    /// The N-dimensional decomposable sinusoid family.
    Sinusoid,
}

/// The frame a surrogate is constructed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    GradientTransform,
    FunctionTransform,
    KrigingScale,
    Minmax,
    Ideal,
    /// The raw sampled coordinates, no preprocessing.
    Identity,
}

impl Domain {
    pub fn as_str(self) -> &'static str {
        match self {
            Domain::GradientTransform => "gradient-transform",
            Domain::FunctionTransform => "function-transform",
            Domain::KrigingScale => "kriging-scale",
            Domain::Minmax => "minmax",
            Domain::Ideal => "ideal",
            Domain::Identity => "identity",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which test points the repeats are scored on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestCloud {
    /// A fresh cloud per repeat, shared by every domain and kind within it.
    #[default]
    PerRepeat,
    /// One cloud for the whole run; pointwise errors are kept so the
    /// across-repeat shape variance can be computed.
    Shared,
}

/// Where designs, test clouds and line segments are drawn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    /// Axis-aligned bounding box of the image of the unit cube.
    #[default]
    BoundingBox,
    /// The image of the unit cube itself: points are drawn in `[0, 1]^N`
    /// and mapped by `R S`.
    Image,
}

fn default_repeats() -> usize {
    50
}

fn default_test_points() -> usize {
    100_000
}

fn default_dim() -> usize {
    2
}

/// One benchmark sweep. Unknown keys are rejected when parsing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub function: FunctionId,
    #[serde(default = "default_dim")]
    pub dim: usize,
    /// Per-axis stretch `S` applied before the rotation.
    #[serde(default)]
    pub frame_scales: Option<Vec<f64>>,
    /// Rotate the sampled frame.
    #[serde(default)]
    pub rotated: bool,
    /// Fixed rotation angle for two-dimensional frames; a random rotation
    /// drawn from `frame_seed` is used otherwise.
    #[serde(default)]
    pub rotation_degrees: Option<f64>,
    #[serde(default)]
    pub frame_seed: u64,
    pub domains: Vec<Domain>,
    pub kinds: Vec<ModelKind>,
    pub sample_counts: Vec<usize>,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default = "default_test_points")]
    pub test_points: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub test_cloud: TestCloud,
    #[serde(default)]
    pub region: Region,
}

impl ExperimentSpec {
    pub fn from_json(s: &str) -> Result<Self, BenchError> {
        let spec: ExperimentSpec = serde_json::from_str(s).map_err(|e| BenchError::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: &str| Err(BenchError::Spec(m.to_string()));
        if self.dim == 0 {
            return bad("dim must be at least 1");
        }
        if self.function == FunctionId::Example2d && self.dim != 2 {
            return bad("example-2d is two-dimensional");
        }
        if self.domains.is_empty() {
            return bad("domains must not be empty");
        }
        if self.kinds.is_empty() {
            return bad("kinds must not be empty");
        }
        if self.sample_counts.is_empty() || self.sample_counts[0] == 0 {
            return bad("sample_counts must be non-empty and positive");
        }
        if self.sample_counts.windows(2).any(|w| w[0] >= w[1]) {
            return bad("sample_counts must be strictly ascending");
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1");
        }
        if self.test_points == 0 {
            return bad("test_points must be at least 1");
        }
        if let Some(s) = &self.frame_scales {
            if s.len() != self.dim || s.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return bad("frame_scales needs one positive entry per dimension");
            }
        }
        if self.rotation_degrees.is_some() && (!self.rotated || self.dim != 2) {
            return bad("rotation_degrees applies to rotated two-dimensional frames only");
        }
        Ok(())
    }

    /// Fewer repeats and test points, for smoke runs.
    pub fn quick(mut self) -> Self {
        self.repeats = self.repeats.min(10);
        self.test_points = self.test_points.min(10_000);
        self
    }
}

/// Built-in sweeps approximating the sample ranges of the published figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    TwoD,
    FourD,
    EightD,
    SixteenD,
}

impl Preset {
    pub fn parse(s: &str) -> Option<Preset> {
        match s {
            "2d" => Some(Preset::TwoD),
            "4d" => Some(Preset::FourD),
            "8d" => Some(Preset::EightD),
            "16d" => Some(Preset::SixteenD),
            _ => None,
        }
    }

    pub fn spec(self) -> ExperimentSpec {
        let all = vec![
            Domain::GradientTransform,
            Domain::FunctionTransform,
            Domain::KrigingScale,
            Domain::Minmax,
            Domain::Ideal,
        ];
        let kinds = vec![ModelKind::Rbf, ModelKind::GeRbf];
        match self {
            Preset::TwoD => ExperimentSpec {
                function: FunctionId::Example2d,
                dim: 2,
                frame_scales: Some(vec![2.0, 1.0]),
                rotated: true,
                rotation_degrees: Some(30.0),
                frame_seed: 0,
                domains: [vec![Domain::Identity], all].concat(),
                kinds,
                sample_counts: (7..=26).collect(),
                repeats: 50,
                test_points: 100_000,
                seed: 0,
                test_cloud: TestCloud::PerRepeat,
                region: Region::BoundingBox,
            },
            Preset::FourD => sinusoid(4, vec![20, 30, 40, 50], all, kinds),
            Preset::EightD => sinusoid(8, vec![130, 160, 190], all, kinds),
            Preset::SixteenD => sinusoid(16, vec![400, 800, 1200, 2000], all, kinds),
        }
    }
}

fn sinusoid(dim: usize, sample_counts: Vec<usize>, domains: Vec<Domain>, kinds: Vec<ModelKind>) -> ExperimentSpec {
    ExperimentSpec {
        function: FunctionId::Sinusoid,
        dim,
        frame_scales: None,
        rotated: true,
        rotation_degrees: None,
        frame_seed: 0,
        domains,
        kinds,
        sample_counts,
        repeats: 50,
        test_points: 100_000,
        seed: 0,
        test_cloud: TestCloud::PerRepeat,
        region: Region::BoundingBox,
    }
}
